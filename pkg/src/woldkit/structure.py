"""Generalized range, algebraic core, regularity, and generalized inverses.

The decreasing range chain R(V_1) >= R(V_2) >= ... stabilizes in finite
dimensions; its limit is the generalized range.  Regularity asks that the
kernel of the map sits inside E (x) (that limit).  Because the strict
condition is destroyed by hard truncation of an otherwise regular
operator (the truncation boundary injects kernel vectors the untruncated
operator does not have), every consumer that needs regularity can also
evaluate it "at a horizon": kernel contained in E (x) R(V_m) for all m up
to the horizon.  Reports carry both verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, IdentityViolated, NotRegular
from .linalg import (
    DEFAULT_POLICY,
    Subspace,
    TolerancePolicy,
    complement,
    contains,
    intersect,
    null_space,
    pinv,
    range_space,
    reduced_min_modulus,
    spectral_norm,
    subspaces_equal,
)
from .model import Representation, budget_horizon, iterate_lower, iterate_map, size_budget

__all__ = [
    "range_chain",
    "generalized_range",
    "stabilization_index",
    "algebraic_core",
    "default_horizon",
    "RegularityReport",
    "is_regular",
    "require_regular",
    "lift_subspace",
    "GenInverse",
    "make_generalized_inverse",
    "iterate_inverse",
    "BiRegularityReport",
    "is_biregular",
    "iterated_pinv",
    "is_n_dagger",
    "is_hyper_dagger",
    "fixed_point_range_check",
    "inverse_invariance_check",
    "hat_map_check",
    "kernel_intersection_identity",
]


def lift_subspace(k: int, s: Subspace, d: int) -> Subspace:
    """E^(x)k (x) S as a subspace of E^(x)k (x) ambient."""
    if k == 0 or d == 1:
        return s
    basis = np.kron(np.eye(d**k, dtype=np.complex128), s.basis)
    return Subspace(d**k * s.ambient_dim, basis)


def _stabilized_chain(
    spaces_iter, pol: TolerancePolicy, max_steps: int
) -> tuple[list[Subspace], int]:
    """Consume a chain until two consecutive mutual containments confirm.

    Returns (all computed subspaces, 1-based index of the stabilized one).
    """
    chain: list[Subspace] = []
    stable_from: int | None = None
    for step, space in enumerate(spaces_iter, start=1):
        chain.append(space)
        if len(chain) >= 2 and subspaces_equal(chain[-2], chain[-1], pol):
            if stable_from is None:
                stable_from = len(chain) - 1
            elif len(chain) - stable_from >= 2:
                # tie at stable_from confirmed by one extra step
                return chain, stable_from
        else:
            stable_from = None
        if step >= max_steps:
            break
    raise IdentityViolated("subspace chain failed to stabilize; numerical pathology")


def range_chain(
    rep: Representation, pol: TolerancePolicy = DEFAULT_POLICY
) -> tuple[list[Subspace], int]:
    """Ranges R(V_n) for n = 1, 2, ... until stabilization, via subspace iteration.

    Uses R(V_{n+1}) = V(E (x) R(V_n)), which never grows past d*m columns,
    so no size budget applies.  R(V_n) is constant from the returned index on.
    """
    d, v = rep.dim_e, rep.matrix
    nv = spectral_norm(v)

    def spaces():
        current = range_space(v, pol)
        while True:
            yield current
            current = range_space(v @ lift_subspace(1, current, d).basis, pol, scale=nv)

    # A strictly decreasing chain in C^m ties within dim_h steps.
    return _stabilized_chain(spaces(), pol, max_steps=rep.dim_h + 8)


def stabilization_index(rep: Representation, pol: TolerancePolicy = DEFAULT_POLICY) -> int:
    return range_chain(rep, pol)[1]


def generalized_range(rep: Representation, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    """Intersection of all iterated ranges, computed from explicit iterates.

    Forms V_n matrices for n = 1, 2, ... and stops once two consecutive
    ranges are mutually contained (plus one confirming step); raises
    BudgetExceeded if the chain does not stabilize within the size budget.
    """
    budget = size_budget()
    nv = spectral_norm(rep.matrix)

    def spaces():
        n = 1
        while rep.dim_e**n * rep.dim_h <= budget:
            yield range_space(iterate_map(rep, n), pol, scale=nv**n)
            n += 1
        raise BudgetExceeded(
            f"range chain not stabilized before budget {budget} (reached n={n})"
        )

    chain, stable = _stabilized_chain(spaces(), pol, max_steps=rep.dim_h + 8)
    return chain[stable - 1]


def algebraic_core(rep: Representation, pol: TolerancePolicy = DEFAULT_POLICY) -> Subspace:
    """Greatest subspace K with V(E (x) K) = K, by greatest-fixed-point iteration.

    Iterates K_0 = H, K_{j+1} = V(E (x) K_j) to mutual containment,
    post-verifies the fixed-point identity, and asserts agreement with
    generalized_range (they coincide in finite dimensions).
    """
    d, v = rep.dim_e, rep.matrix
    nv = spectral_norm(v)

    def spaces():
        current = Subspace.full(rep.dim_h)
        while True:
            yield current
            current = range_space(v @ lift_subspace(1, current, d).basis, pol, scale=nv)

    chain, stable = _stabilized_chain(spaces(), pol, max_steps=rep.dim_h + 8)
    core = chain[stable - 1]
    image = range_space(v @ lift_subspace(1, core, d).basis, pol, scale=nv)
    if not subspaces_equal(image, core, pol):
        raise IdentityViolated("fixed-point identity V(E (x) K) = K failed at tolerance")
    if not subspaces_equal(core, generalized_range(rep, pol), pol):
        raise IdentityViolated("algebraic core disagrees with the generalized range")
    return core


def default_horizon(rep: Representation, pol: TolerancePolicy = DEFAULT_POLICY) -> int:
    """max(8, stabilization index + 4), the 'for all n' check horizon."""
    return max(8, stabilization_index(rep, pol) + 4)


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of the kernel-inclusion analysis.

    strict:     kernel(V) inside E (x) R_infinity (the stabilized limit).
    per_m:      kernel(V) inside E (x) R(V_m), for each m up to the horizon.
    anomaly:    strict and per-m verdicts disagree although the horizon
                reaches stabilization -- a tolerance problem, not math.
    """

    gamma: float
    range_closed: bool
    kernel_dim: int
    strict: bool
    per_m: dict[int, bool]
    stabilization: int
    horizon: int
    anomaly: bool

    @property
    def holds_at_horizon(self) -> bool:
        return all(self.per_m.values())

    @property
    def is_regular(self) -> bool:
        return self.strict


def is_regular(
    rep: Representation,
    pol: TolerancePolicy = DEFAULT_POLICY,
    horizon: int | None = None,
) -> RegularityReport:
    """Kernel-inclusion regularity check with per-horizon witnesses."""
    chain, stable = range_chain(rep, pol)
    if horizon is None:
        horizon = max(8, stable + 4)
    rinf = chain[stable - 1]
    kernel = null_space(rep.matrix, pol)
    strict = contains(kernel, lift_subspace(1, rinf, rep.dim_e), pol)
    per_m: dict[int, bool] = {}
    for m in range(1, horizon + 1):
        rm = chain[m - 1] if m <= len(chain) else rinf
        per_m[m] = contains(kernel, lift_subspace(1, rm, rep.dim_e), pol)
    all_m = all(per_m.values())
    anomaly = (strict != all_m) and horizon >= stable
    return RegularityReport(
        gamma=reduced_min_modulus(rep.matrix, pol),
        range_closed=True,
        kernel_dim=kernel.dim,
        strict=strict,
        per_m=per_m,
        stabilization=stable,
        horizon=horizon,
        anomaly=anomaly,
    )


def require_regular(
    rep: Representation,
    pol: TolerancePolicy = DEFAULT_POLICY,
    horizon: int | None = None,
) -> RegularityReport:
    """Raise NotRegular unless the kernel inclusion holds up to the horizon."""
    report = is_regular(rep, pol, horizon)
    if not report.holds_at_horizon:
        raise NotRegular(
            f"kernel not contained in E (x) R(V_m) for all m <= {report.horizon}"
        )
    return report


# ---------------------------------------------------------------------------
# Generalized inverses S with V S V = V and S V S = S.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenInverse:
    """A validated generalized inverse of a representation map."""

    rep: Representation
    matrix: np.ndarray


def make_generalized_inverse(
    rep: Representation,
    y,
    pol: TolerancePolicy = DEFAULT_POLICY,
    tol: float = 1e-9,
) -> GenInverse:
    """Build S = V+ + (I - V+V) Y V V+ and verify both defining identities.

    The parametric family provably satisfies them; IdentityViolated
    signals numerical breakdown, not a modeling error.  Y = 0 gives the
    Moore-Penrose inverse itself.
    """
    v = rep.matrix
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != (rep.ambient_domain, rep.dim_h):
        raise IdentityViolated(
            f"parameter Y must be {(rep.ambient_domain, rep.dim_h)}, got {y.shape}"
        )
    vd = pinv(v, pol)
    s = vd + (np.eye(rep.ambient_domain, dtype=np.complex128) - vd @ v) @ y @ (v @ vd)
    res1 = float(np.linalg.norm(v @ s @ v - v, 2))
    res2 = float(np.linalg.norm(s @ v @ s - s, 2))
    if res1 > tol * max(1.0, float(np.linalg.norm(v, 2))):
        raise IdentityViolated(f"V S V = V failed: residual {res1:.3e}")
    if res2 > tol * max(1.0, float(np.linalg.norm(s, 2))):
        raise IdentityViolated(f"S V S = S failed: residual {res2:.3e}")
    return GenInverse(rep=rep, matrix=s)


def iterate_inverse(gi: GenInverse, n: int, *, verify_composition: bool = False) -> np.ndarray:
    """S^(n): the n-fold lowering iterate of shape (d^n * m) x m."""
    out = iterate_lower(gi.matrix, gi.rep.dim_e, n)
    if verify_composition and n >= 2:
        d = gi.rep.dim_e
        for split in range(1, n):
            lhs = (
                np.kron(np.eye(d**split, dtype=np.complex128), iterate_lower(gi.matrix, d, n - split))
                @ iterate_lower(gi.matrix, d, split)
            )
            err = float(np.linalg.norm(lhs - out, 2))
            if err > 1e-9 * max(1.0, float(np.linalg.norm(out, 2))):
                raise ArithmeticError(f"composition identity failed at split {split}: {err:.3e}")
    return out


@dataclass(frozen=True)
class BiRegularityReport:
    horizon: int
    per_m: dict[int, bool]
    residuals: dict[int, float] = field(repr=False, default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(self.per_m.values())


def is_biregular(
    rep: Representation,
    gi: GenInverse,
    horizon: int = 3,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> BiRegularityReport:
    """Check N(I_{E^(x)m} (x) S) inside R(S^(m)) for m up to the horizon.

    Defined for regular representations (NotRegular otherwise, judged at
    the same horizon).  The verdict is recorded per generalized inverse;
    it is not aggregated across different S.
    """
    require_regular(rep, pol, horizon)
    d = rep.dim_e
    ker_s = null_space(gi.matrix, pol)
    ns = spectral_norm(gi.matrix)
    per_m: dict[int, bool] = {}
    residuals: dict[int, float] = {}
    for m in range(1, horizon + 1):
        ker_lifted = lift_subspace(m, ker_s, d)
        rng = range_space(iterate_inverse(gi, m), pol, scale=ns**m)
        if ker_lifted.dim == 0:
            per_m[m], residuals[m] = True, 0.0
            continue
        resid = ker_lifted.basis - rng.basis @ (rng.basis.conj().T @ ker_lifted.basis)
        worst = float(np.max(np.linalg.norm(resid, axis=0)))
        per_m[m] = worst <= pol.tau_sub
        residuals[m] = worst
    return BiRegularityReport(horizon=horizon, per_m=per_m, residuals=residuals)


def iterated_pinv(rep: Representation, n: int, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """The n-fold lowering iterate built from the Moore-Penrose inverse."""
    return iterate_lower(pinv(rep.matrix, pol), rep.dim_e, n)


def is_n_dagger(rep: Representation, n: int, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """True iff the iterated pseudoinverse equals the pseudoinverse of the iterate."""
    if n == 1:
        return True
    lowered = iterated_pinv(rep, n, pol)
    direct = pinv(iterate_map(rep, n), pol, scale=spectral_norm(rep.matrix) ** n)
    gap = float(np.linalg.norm(lowered - direct, 2))
    return gap <= 1e-8 * max(1.0, float(np.linalg.norm(direct, 2)))


def is_hyper_dagger(
    rep: Representation, horizon: int, pol: TolerancePolicy = DEFAULT_POLICY
) -> bool:
    """n-dagger for every n up to the horizon (clamped to the size budget)."""
    top = min(horizon, budget_horizon(rep))
    return all(is_n_dagger(rep, n, pol) for n in range(2, top + 1))


def fixed_point_range_check(
    rep: Representation,
    gi: GenInverse,
    horizon: int = 4,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> bool:
    """Verify the fixed-point description of the generalized range.

    Both directions: every basis vector h of R_infinity satisfies
    V_n S^(n) h = h for n up to the gate horizon, and the intersection of
    the fixed-point kernels (taken deep enough for the range chain to
    stabilize) equals R_infinity as a subspace.
    """
    require_regular(rep, pol, horizon)
    chain, stable = range_chain(rep, pol)
    rinf = chain[stable - 1]
    m_dim = rep.dim_h
    eye = np.eye(m_dim, dtype=np.complex128)
    stacked = []
    noise_scale = 1.0
    depth = min(budget_horizon(rep), max(horizon, stable + 1, 1))
    for n in range(1, depth + 1):
        vn = iterate_map(rep, n)
        sn = iterate_inverse(gi, n)
        vn_sn = vn @ sn
        noise_scale = max(noise_scale, spectral_norm(vn) * spectral_norm(sn))
        if n <= horizon and rinf.dim:
            gap = vn_sn @ rinf.basis - rinf.basis
            if float(np.max(np.linalg.norm(gap, axis=0))) > pol.tau_sub:
                return False
        stacked.append(eye - vn_sn)
    fixed = null_space(np.vstack(stacked), pol, scale=noise_scale)
    return subspaces_equal(fixed, rinf, pol)


def inverse_invariance_check(
    rep: Representation, gi: GenInverse, pol: TolerancePolicy = DEFAULT_POLICY
) -> bool:
    """S maps the generalized range into E (x) (generalized range)."""
    chain, stable = range_chain(rep, pol)
    rinf = chain[stable - 1]
    if rinf.dim == 0:
        return True
    image = range_space(gi.matrix @ rinf.basis, pol)
    return contains(image, lift_subspace(1, rinf, rep.dim_e), pol)


def hat_map_check(
    rep: Representation, n_max: int = 3, pol: TolerancePolicy = DEFAULT_POLICY
) -> dict[int, bool]:
    """Invertibility of the compressions P_{R(V_n) meet R(V_{n+1})-perp} V_n
    restricted to E^(x)n (x) R(V)-perp, for n up to n_max.

    These maps are invertible exactly for regular representations; the
    per-n dict records where invertibility (including the dimension
    match) holds.
    """
    d = rep.dim_e
    nv = spectral_norm(rep.matrix)
    w = null_space(rep.matrix.conj().T, pol)  # R(V)^perp
    results: dict[int, bool] = {}
    for n in range(1, n_max + 1):
        vn = iterate_map(rep, n)
        rn = range_space(vn, pol, scale=nv**n)
        rn1 = range_space(iterate_map(rep, n + 1), pol, scale=nv ** (n + 1))
        target = intersect(rn, complement(rn1, pol), pol)
        domain = lift_subspace(n, w, d)
        if target.dim != domain.dim:
            results[n] = False
            continue
        if target.dim == 0:
            results[n] = True
            continue
        compressed = target.basis.conj().T @ vn @ domain.basis
        smin = float(np.linalg.svd(compressed, compute_uv=False)[-1])
        results[n] = smin > pol.tau_sub
    return results


def kernel_intersection_identity(
    rep: Representation, m: int, n: int, pol: TolerancePolicy = DEFAULT_POLICY
) -> bool:
    """Subspace identity relating lifted kernels and ranges:

    (I_{E^(x)n} (x) V_m) N(V_{m+n}) = N(V_n) meet (I_{E^(x)n} (x) V_m)(E^(x)(m+n) (x) H)

    Holds for every representation; failures indicate tolerance bugs.
    """
    d = rep.dim_e
    nv = spectral_norm(rep.matrix)
    vm = iterate_map(rep, m)
    lifted_vm = np.kron(np.eye(d**n, dtype=np.complex128), vm)
    ker_mn = null_space(iterate_map(rep, m + n), pol, scale=nv ** (m + n))
    lhs = range_space(lifted_vm @ ker_mn.basis, pol, scale=nv**m) if ker_mn.dim else Subspace.zero(
        d**n * rep.dim_h
    )
    ker_n = null_space(iterate_map(rep, n), pol, scale=nv**n)
    rhs = intersect(ker_n, range_space(lifted_vm, pol, scale=nv**m), pol)
    return subspaces_equal(lhs, rhs, pol)
