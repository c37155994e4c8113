"""Dense complex linear algebra and tolerance-aware subspace arithmetic.

Every higher-level module works through the primitives here: a relative
rank cutoff shared by all rank-revealing decompositions, a Moore-Penrose
inverse, the reduced minimum modulus, Hermitian PSD square roots, and a
small lattice of orthonormal-basis subspaces (range, kernel, complement,
intersection, sum, containment, projection).

All values are immutable after construction and all operations are pure
functions, so everything in this module is safe to call concurrently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotPSD

__all__ = [
    "TolerancePolicy",
    "RankWarning",
    "DEFAULT_POLICY",
    "as_matrix",
    "pinv",
    "reduced_min_modulus",
    "psd_sqrt",
    "spectral_norm",
    "hermitian_part",
    "min_eigenvalue",
    "is_psd",
    "Subspace",
    "range_space",
    "null_space",
    "complement",
    "intersect",
    "add",
    "contains",
    "project",
    "subspaces_equal",
]


class RankWarning(UserWarning):
    """Singular values sit within a factor of ten of the rank cutoff.

    Rank decisions near the cutoff are fragile; the warning surfaces
    borderline cases without changing behavior.
    """


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical tolerances used by every rank/PSD/subspace decision.

    tau_rank is relative: a singular value survives iff it exceeds
    tau_rank * sigma_max * max(rows, cols).
    """

    tau_rank: float = 1e-10
    tau_orth: float = 1e-10
    tau_psd: float = 1e-9
    tau_sub: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("tau_rank", "tau_orth", "tau_psd", "tau_sub"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def as_dict(self) -> dict:
        return {
            "tau_rank": self.tau_rank,
            "tau_orth": self.tau_orth,
            "tau_psd": self.tau_psd,
            "tau_sub": self.tau_sub,
        }


DEFAULT_POLICY = TolerancePolicy()


def as_matrix(a, *, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-d complex128 array and require finite entries."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.size and not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


def _rank_cutoff(
    s: np.ndarray, shape: tuple[int, int], pol: TolerancePolicy, scale: float | None = None
) -> float:
    if s.size == 0:
        return 0.0
    return pol.tau_rank * max(float(s[0]), scale or 0.0) * max(shape)


def _rank(
    s: np.ndarray,
    shape: tuple[int, int],
    pol: TolerancePolicy,
    *,
    warn: bool = True,
    scale: float | None = None,
) -> int:
    cut = _rank_cutoff(s, shape, pol, scale)
    rank = int(np.count_nonzero(s > cut))
    if warn and cut > 0:
        borderline = np.count_nonzero((s > cut / 10.0) & (s <= cut * 10.0))
        if borderline:
            warnings.warn(
                f"{borderline} singular value(s) within a factor of 10 of the rank cutoff "
                f"{cut:.3e}; rank decision is borderline",
                RankWarning,
                stacklevel=3,
            )
    return rank


def pinv(a, pol: TolerancePolicy = DEFAULT_POLICY, scale: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse with the policy's relative rank cutoff.

    The zero matrix maps to the zero matrix of transposed shape.  The
    result satisfies the four defining identities to ~1e-9 * norm(a).
    `scale` anchors the rank cutoff as in range_space.
    """
    a = as_matrix(a)
    if a.size == 0 or not a.any():
        return np.zeros((a.shape[1], a.shape[0]), dtype=np.complex128)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    r = _rank(s, a.shape, pol, scale=scale)
    if r == 0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=np.complex128)
    return (vh[:r].conj().T * (1.0 / s[:r])) @ u[:, :r].conj().T


def reduced_min_modulus(a, pol: TolerancePolicy = DEFAULT_POLICY) -> float:
    """Smallest singular value above the rank cutoff; inf for the zero map.

    Equals 1 / norm(pinv(a)) whenever a is nonzero.
    """
    a = as_matrix(a)
    if a.size == 0 or not a.any():
        return math.inf
    s = np.linalg.svd(a, compute_uv=False)
    r = _rank(s, a.shape, pol, warn=False)
    if r == 0:
        return math.inf
    return float(s[r - 1])


def spectral_norm(a) -> float:
    """Matrix 2-norm that treats empty matrices as zero."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_part(a) -> np.ndarray:
    """(A + A*)/2 -- removes round-off asymmetry before eigendecomposition."""
    a = as_matrix(a)
    return (a + a.conj().T) / 2.0


def min_eigenvalue(a) -> float:
    """Least eigenvalue of the Hermitian part of a."""
    h = hermitian_part(a)
    if h.shape[0] == 0:
        return 0.0
    return float(np.linalg.eigvalsh(h)[0])


def is_psd(a, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """True iff min eigenvalue >= -tau_psd * max(1, norm(a))."""
    a = as_matrix(a)
    scale = max(1.0, float(np.linalg.norm(a, 2)) if a.size else 0.0)
    return min_eigenvalue(a) >= -pol.tau_psd * scale


def psd_sqrt(a, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues within -tau_psd of zero are clamped.

    Raises NotPSD when a genuinely negative eigenvalue is present.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch("psd_sqrt requires a square matrix")
    if a.shape[0] == 0:
        return a.copy()
    scale = max(1.0, float(np.linalg.norm(a, 2)))
    if np.linalg.norm(a - a.conj().T, 2) > pol.tau_orth * scale * 10.0:
        raise NotPSD("matrix is not Hermitian to tolerance")
    h = hermitian_part(a)
    w, u = np.linalg.eigh(h)
    if w[0] < -pol.tau_psd * scale:
        raise NotPSD(f"min eigenvalue {w[0]:.3e} below -tau_psd*scale")
    w = np.clip(w, 0.0, None)
    return (u * np.sqrt(w)) @ u.conj().T


@dataclass(frozen=True)
class Subspace:
    """Closed subspace of C^ambient_dim given by an orthonormal column basis.

    The empty subspace is a basis with zero columns; every lattice
    operation accepts it.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self) -> None:
        b = as_matrix(self.basis, name="basis")
        if b.shape[0] != self.ambient_dim:
            raise DimensionMismatch(
                f"basis rows {b.shape[0]} != ambient dimension {self.ambient_dim}"
            )
        if b.shape[1] > self.ambient_dim:
            raise DimensionMismatch("more basis columns than ambient dimension")
        if b.shape[1]:
            gram = b.conj().T @ b
            if np.linalg.norm(gram - np.eye(b.shape[1]), 2) > 1e-7:
                raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", _frozen(b))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @staticmethod
    def zero(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, np.zeros((ambient_dim, 0), dtype=np.complex128))

    @staticmethod
    def full(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, np.eye(ambient_dim, dtype=np.complex128))

    @staticmethod
    def spanned_by(vectors, pol: TolerancePolicy = DEFAULT_POLICY) -> "Subspace":
        """Orthonormalize arbitrary spanning columns into a Subspace."""
        m = as_matrix(vectors, name="spanning vectors")
        return range_space(m, pol) if m.shape[1] else Subspace.zero(m.shape[0])


def range_space(
    a, pol: TolerancePolicy = DEFAULT_POLICY, scale: float | None = None
) -> Subspace:
    """Column space of a, via SVD with the relative rank cutoff.

    `scale` anchors the cutoff for matrices built as products: roundoff
    in a product lives at eps * (product of factor norms), so passing
    that product keeps a mathematically-zero result from being read as
    full-rank noise.
    """
    a = as_matrix(a)
    if a.shape[1] == 0 or not a.any():
        return Subspace.zero(a.shape[0])
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = _rank(s, a.shape, pol, scale=scale)
    return Subspace(a.shape[0], u[:, :r])


def null_space(
    a, pol: TolerancePolicy = DEFAULT_POLICY, scale: float | None = None
) -> Subspace:
    """Kernel of a, via the trailing right singular vectors.

    `scale` plays the same role as in range_space.
    """
    a = as_matrix(a)
    n = a.shape[1]
    if n == 0:
        return Subspace.zero(0)
    if not a.any():
        return Subspace.full(n)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    r = _rank(s, a.shape, pol, scale=scale)
    return Subspace(n, vh[r:].conj().T)


def complement(s: Subspace, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    """Orthogonal complement within the ambient space."""
    if s.dim == 0:
        return Subspace.full(s.ambient_dim)
    if s.dim == s.ambient_dim:
        return Subspace.zero(s.ambient_dim)
    # Vectors orthogonal to the basis = kernel of basis*.
    return null_space(s.basis.conj().T, pol)


def project(s: Subspace) -> np.ndarray:
    """Orthogonal projector basis @ basis*."""
    return s.basis @ s.basis.conj().T


def _check_ambient(s1: Subspace, s2: Subspace) -> None:
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionMismatch(
            f"ambient dimensions differ: {s1.ambient_dim} vs {s2.ambient_dim}"
        )


def intersect(s1: Subspace, s2: Subspace, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    """Intersection, via the kernel of the stacked complementary projectors."""
    _check_ambient(s1, s2)
    n = s1.ambient_dim
    if s1.dim == 0 or s2.dim == 0:
        return Subspace.zero(n)
    eye = np.eye(n, dtype=np.complex128)
    stacked = np.vstack([eye - project(s1), eye - project(s2)])
    return null_space(stacked, pol)


def add(s1: Subspace, s2: Subspace, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    """Closed span of the union, by re-orthonormalizing concatenated bases."""
    _check_ambient(s1, s2)
    joined = np.hstack([s1.basis, s2.basis])
    if joined.shape[1] == 0:
        return Subspace.zero(s1.ambient_dim)
    return range_space(joined, pol)


def contains(s1: Subspace, s2: Subspace, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """True iff s1 is contained in s2, columnwise at tau_sub.

    Checks norm((I - P_{s2}) b) <= tau_sub for every basis column b of s1.
    """
    _check_ambient(s1, s2)
    if s1.dim == 0:
        return True
    residual = s1.basis - s2.basis @ (s2.basis.conj().T @ s1.basis)
    return bool(np.all(np.linalg.norm(residual, axis=0) <= pol.tau_sub))


def subspaces_equal(s1: Subspace, s2: Subspace, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """Mutual containment at tau_sub."""
    return contains(s1, s2, pol) and contains(s2, s1, pol)
