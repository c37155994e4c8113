"""Representation data model, Kronecker ampliation, iterated maps, and file I/O.

A representation is stored as the single matrix of the map E (x) H -> H,
of shape m x (d*m) with d = dim E and m = dim H.  Tensor indices follow a
fixed left-to-right Kronecker ordering: index(xi (x) h) = index(xi) * m +
index(h), so I_{E^(x)k} (x) A is realized exactly as kron(I_{d^k}, A).

The coefficient algebra is the scalars; optional labeled generator images
exist only so the covariance identity is an executable check.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, ParseError, ShapeError
from .linalg import as_matrix

__all__ = [
    "DEFAULT_SIZE_BUDGET",
    "size_budget",
    "budget_horizon",
    "Representation",
    "tensor_lift",
    "iterate_map",
    "iterate_lower",
    "check_covariance",
    "save_representation",
    "load_representation",
    "canonical_json",
]

DEFAULT_SIZE_BUDGET = 20_000


def size_budget() -> int:
    """Column budget for ampliations; WOLDKIT_BUDGET overrides the default."""
    raw = os.environ.get("WOLDKIT_BUDGET")
    if raw is None:
        return DEFAULT_SIZE_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"WOLDKIT_BUDGET must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValueError("WOLDKIT_BUDGET must be positive")
    return value


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Representation:
    """Pair (dim E, dim H) plus the m x (d*m) matrix of the covariant map.

    sigma and phi optionally carry labeled generator images (m x m and
    d x d respectively) used by check_covariance.
    """

    dim_e: int
    dim_h: int
    matrix: np.ndarray
    sigma: dict[str, np.ndarray] = field(default_factory=dict)
    phi: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dim_e < 1 or self.dim_h < 1:
            raise ShapeError("dim_E and dim_H must both be at least 1")
        m = as_matrix(self.matrix, name="representation matrix")
        if m.shape != (self.dim_h, self.dim_e * self.dim_h):
            raise ShapeError(
                f"matrix shape {m.shape} != ({self.dim_h}, {self.dim_e * self.dim_h})"
            )
        object.__setattr__(self, "matrix", _frozen(m))
        for attr, size in (("sigma", self.dim_h), ("phi", self.dim_e)):
            images = {}
            for label, mat in getattr(self, attr).items():
                g = as_matrix(mat, name=f"{attr}[{label}]")
                if g.shape != (size, size):
                    raise ShapeError(f"{attr}[{label}] must be {size}x{size}, got {g.shape}")
                images[str(label)] = _frozen(g)
            object.__setattr__(self, attr, images)
        if set(self.sigma) != set(self.phi):
            raise ShapeError("sigma and phi must carry the same generator labels")

    @property
    def ambient_domain(self) -> int:
        """Dimension of E (x) H."""
        return self.dim_e * self.dim_h


def tensor_lift(k: int, a, d: int) -> np.ndarray:
    """kron(I_{d^k}, A): the ampliation of A by k tensor factors of E.

    k = 0 returns A unchanged.  Raises BudgetExceeded when the lifted
    size d^k * max(rows, cols) passes the configured budget.
    """
    if k < 0:
        raise ValueError("tensor exponent k must be nonnegative")
    if d < 1:
        raise ValueError("d must be at least 1")
    a = as_matrix(a)
    if k == 0 or d == 1:
        return a
    budget = size_budget()
    if d**k * max(a.shape) > budget:
        raise BudgetExceeded(
            f"tensor_lift size d^k*max(shape) = {d**k * max(a.shape)} exceeds budget {budget}"
        )
    return np.kron(np.eye(d**k, dtype=np.complex128), a)


def budget_horizon(rep: Representation, cap: int = 64) -> int:
    """Largest n with d^n * m within the size budget (capped)."""
    budget = size_budget()
    if rep.dim_e == 1:
        return cap
    n = 0
    size = rep.dim_h
    while n < cap and size * rep.dim_e <= budget:
        size *= rep.dim_e
        n += 1
    return n


def iterate_map(rep: Representation, n: int, *, verify_factorizations: bool = False) -> np.ndarray:
    """n-fold iterated map E^(x)n (x) H -> H, of shape m x (d^n * m).

    Built by the recursion V_n = V (I_E (x) V_{n-1}).  With
    verify_factorizations=True the alternative factorization
    V_{n-1} (I_{E^(x)n-1} (x) V) is computed and compared.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    d, m = rep.dim_e, rep.dim_h
    budget = size_budget()
    if d**n * m > budget:
        raise BudgetExceeded(f"iterate_map needs {d**n * m} columns, budget is {budget}")
    if n == 0:
        return np.eye(m, dtype=np.complex128)
    v = rep.matrix
    vn = v
    for _ in range(n - 1):
        vn = v @ np.kron(np.eye(d, dtype=np.complex128), vn)
    if verify_factorizations and n >= 2:
        alt = v
        for k in range(1, n):
            alt = alt @ np.kron(np.eye(d**k, dtype=np.complex128), v)
        tol = 1e-10 * max(1.0, float(np.linalg.norm(v, 2)) ** n)
        err = float(np.linalg.norm(vn - alt, 2))
        if err > tol:
            raise ArithmeticError(f"iterate factorization mismatch: {err:.3e} > {tol:.3e}")
    return vn


def iterate_lower(s, d: int, n: int) -> np.ndarray:
    """n-fold lowering iterate of a map S: H -> E (x) H.

    S^(n) = (I_{E^(x)n-1} (x) S) ... (I_E (x) S) S, of shape (d^n * m) x m.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    s = as_matrix(s)
    m = s.shape[1]
    budget = size_budget()
    if d**n * m > budget:
        raise BudgetExceeded(f"iterate_lower needs {d**n * m} rows, budget is {budget}")
    out = s
    for k in range(1, n):
        out = np.kron(np.eye(d**k, dtype=np.complex128), s) @ out
    return out


def check_covariance(rep: Representation, tol: float = 1e-9) -> tuple[bool, dict[str, float]]:
    """Verify V (phi(a) (x) I_H) = sigma(a) V for every listed generator.

    Returns (holds, residuals-by-label); vacuously true for empty lists.
    """
    v = rep.matrix
    scale = max(1.0, float(np.linalg.norm(v, 2)))
    residuals: dict[str, float] = {}
    ok = True
    eye_h = np.eye(rep.dim_h, dtype=np.complex128)
    for label in sorted(rep.sigma):
        lifted = np.kron(rep.phi[label], eye_h)
        res = float(np.linalg.norm(v @ lifted - rep.sigma[label] @ v, 2))
        residuals[label] = res
        ok = ok and res <= tol * scale
    return ok, residuals


# ---------------------------------------------------------------------------
# Serialization.  Numbers are IEEE-754 doubles; NaN/Inf tokens are rejected.
# ---------------------------------------------------------------------------


def _encode_complex_list(a: np.ndarray) -> list[list[float]]:
    flat = np.asarray(a, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _decode_complex_list(entries, rows: int, cols: int, *, name: str) -> np.ndarray:
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise ShapeError(f"{name} must hold {rows * cols} [re, im] pairs, got {len(entries) if isinstance(entries, list) else type(entries).__name__}")
    out = np.empty(rows * cols, dtype=np.complex128)
    for i, pair in enumerate(entries):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        ):
            raise ParseError(f"{name}[{i}] is not an [re, im] number pair")
        re, im = float(pair[0]), float(pair[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ParseError(f"{name}[{i}] has a non-finite entry")
        out[i] = complex(re, im)
    return out.reshape(rows, cols)


def canonical_json(obj) -> str:
    """Deterministic JSON encoding used for every file this package writes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def _reject_constant(token: str):
    raise ParseError(f"non-finite JSON token {token!r} is not accepted")


def parse_json_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top-level value must be a JSON object")
    return data


def representation_to_dict(rep: Representation) -> dict:
    doc = {
        "dim_E": rep.dim_e,
        "dim_H": rep.dim_h,
        "V": _encode_complex_list(rep.matrix),
    }
    if rep.sigma:
        doc["sigma"] = {k: _encode_complex_list(v) for k, v in rep.sigma.items()}
        doc["phi"] = {k: _encode_complex_list(v) for k, v in rep.phi.items()}
    return doc


def representation_from_dict(data: dict, *, source: str = "<memory>") -> Representation:
    for key in ("dim_E", "dim_H", "V"):
        if key not in data:
            raise ParseError(f"{source}: missing field {key!r}")
    dim_e, dim_h = data["dim_E"], data["dim_H"]
    if not isinstance(dim_e, int) or not isinstance(dim_h, int) or dim_e < 1 or dim_h < 1:
        raise ShapeError(f"{source}: dim_E and dim_H must be positive integers")
    v = _decode_complex_list(data["V"], dim_h, dim_e * dim_h, name="V")
    gens: dict[str, dict[str, np.ndarray]] = {"sigma": {}, "phi": {}}
    for attr, size in (("sigma", dim_h), ("phi", dim_e)):
        block = data.get(attr)
        if block is None:
            continue
        if not isinstance(block, dict):
            raise ParseError(f"{source}: field {attr!r} must be an object")
        for label, entries in block.items():
            gens[attr][label] = _decode_complex_list(entries, size, size, name=f"{attr}[{label}]")
    return Representation(dim_e, dim_h, v, sigma=gens["sigma"], phi=gens["phi"])


def save_representation(rep: Representation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(representation_to_dict(rep)))


def load_representation(path) -> Representation:
    return representation_from_dict(parse_json_file(path), source=str(path))
