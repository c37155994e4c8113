import math

import numpy as np
import pytest

from woldkit.errors import ConditionIViolated, NotInvertible, ParseError, ShapeError
from woldkit.generate import bilateral_spec, rand_unitary, unilateral_spec
from woldkit.linalg import null_space, range_space, subspaces_equal
from woldkit.shifts import (
    BilateralSpec,
    UnilateralSpec,
    build_bilateral_shift,
    build_unilateral_shift,
    check_bilateral_weight_condition,
    check_unilateral_weight_condition,
    load_shift_spec,
    save_shift_spec,
    shift_pipeline,
    z_product,
)
from woldkit.structure import generalized_range


def scalar_weights(c, L):
    return tuple(np.array([[c]], dtype=complex) for _ in range(L))


class TestUnilateralBuild:
    def test_classical_truncated_shift(self):
        spec = UnilateralSpec(d=1, L=3, p=1, Z=scalar_weights(1.0, 3))
        rep, info = build_unilateral_shift(spec)
        expected = np.eye(4, k=-1, dtype=complex)
        assert np.allclose(rep.matrix, expected)
        assert info["level_offsets"] == [0, 1, 2, 3]

    def test_invertible_weights_kernel_is_top_level(self, rng):
        spec = unilateral_spec(rng, d=2, L=2, p=1)
        rep, info = build_unilateral_shift(spec)
        total = rep.dim_h
        top_offset, top_dim = info["level_offsets"][-1], info["level_dims"][-1]
        # Kernel = E (x) top level: columns a*total + (top block)
        kernel = null_space(rep.matrix)
        assert kernel.dim == 2 * top_dim
        expected_cols = [
            a * total + top_offset + t for a in range(2) for t in range(top_dim)
        ]
        basis = np.zeros((2 * total, len(expected_cols)), dtype=complex)
        for j, c in enumerate(expected_cols):
            basis[c, j] = 1.0
        from woldkit.linalg import Subspace

        assert subspaces_equal(kernel, Subspace(2 * total, basis))

    def test_level_zero_weights_read_off(self):
        z1 = np.diag([1.0, 2.0]).astype(complex)
        spec = UnilateralSpec(d=2, L=1, p=1, Z=(z1,))
        rep, info = build_unilateral_shift(spec)
        # H = level0 (dim 1) + level1 (dim 2); E (x) level0 columns are 0 and 3.
        assert rep.matrix[1, 0] == pytest.approx(1.0)
        assert rep.matrix[2, 3] == pytest.approx(2.0)

    def test_block_bijectivity_below_truncation(self, rng):
        # With invertible weights the map is injective on lifts of levels
        # below the top and its range is exactly levels 1..L.
        spec = unilateral_spec(rng, d=2, L=2, p=1)
        rep, info = build_unilateral_shift(spec)
        total = rep.dim_h
        top_offset = info["level_offsets"][-1]
        below_cols = [
            a * total + j for a in range(2) for j in range(top_offset)
        ]
        sub = rep.matrix[:, below_cols]
        assert np.linalg.svd(sub, compute_uv=False)[-1] > 1e-8
        rng_space = range_space(rep.matrix)
        expected = np.zeros((total, total - 1), dtype=complex)
        for j in range(1, total):
            expected[j, j - 1] = 1.0
        from woldkit.linalg import Subspace

        assert subspaces_equal(rng_space, Subspace(total, expected))


class TestZProduct:
    def test_identity_weights(self):
        spec = UnilateralSpec(d=2, L=2, p=1, Z=(np.eye(2), np.eye(4)))
        assert np.allclose(z_product(spec, 2), np.eye(4))

    def test_scalar_weights_multiply(self):
        spec = UnilateralSpec(d=1, L=3, p=1, Z=scalar_weights(2.0, 3))
        assert z_product(spec, 3)[0, 0] == pytest.approx(8.0)

    def test_two_level_expansion(self, rng):
        z1, z2 = rand_unitary(rng, 2), rand_unitary(rng, 4)
        spec = UnilateralSpec(d=2, L=2, p=1, Z=(z1, z2))
        assert np.allclose(z_product(spec, 2), z2 @ np.kron(np.eye(2), z1))


class TestUnilateralCondition:
    def test_identity_weights_hold_for_any_weight(self):
        spec = UnilateralSpec(d=2, L=3, p=1, Z=(np.eye(2), np.eye(4), np.eye(8)))
        report = check_unilateral_weight_condition(spec, [0.0, 0.0, 0.0], 2, 1)
        assert report.holds
        assert all(v == pytest.approx(0.0, abs=1e-9) for v in report.minimal_per_k.values())

    @pytest.mark.parametrize("c", [1.1, 2.0])
    def test_constant_scalar_weights_closed_form(self, c):
        spec = UnilateralSpec(d=1, L=6, p=1, Z=scalar_weights(c, 6))
        report = check_unilateral_weight_condition(spec, None, 4, 2)
        for k in range(1, 5):
            want = (c ** (2 * k) - 1.0) / (c**2 - 1.0)
            assert report.minimal_per_k[k] == pytest.approx(want, abs=1e-9)

    def test_unit_scalar_weights_equality_case(self):
        spec = UnilateralSpec(d=1, L=4, p=1, Z=scalar_weights(1.0, 4))
        report = check_unilateral_weight_condition(spec, [1.0, 1.0, 1.0], 3, 1)
        assert report.holds

    def test_singular_weight_rejected(self):
        spec = UnilateralSpec(d=1, L=2, p=1, Z=(np.array([[1.0]]), np.array([[0.0]])))
        with pytest.raises(NotInvertible) as err:
            check_unilateral_weight_condition(spec, None, 1, 1)
        assert "Z_2" in str(err.value)

    def test_coverage_skips_beyond_truncation(self):
        spec = UnilateralSpec(d=1, L=2, p=1, Z=scalar_weights(1.5, 2))
        report = check_unilateral_weight_condition(spec, None, 3, 2)
        assert report.skipped_pairs  # pairs with k + n > L are reported


class TestBilateralBuild:
    def test_small_window_action(self):
        # n=1, M=2, unit weights except the zero at the origin
        w = np.ones((1, 5), dtype=complex)
        w[0, 2] = 0.0
        spec = BilateralSpec(n=1, M=2, w=w)
        rep, info = build_bilateral_shift(spec)
        v = rep.matrix
        # e_m -> e_{m+1} for m in {-2, -1, 1}; m=0 killed; m=2 out of window
        assert v[1, 0] == 1.0 and v[2, 1] == 1.0 and v[4, 3] == 1.0
        assert not v[:, 2].any() and not v[:, 4].any()
        assert info["index_map"]["1,2"] is None

    def test_kernel_contains_origin_columns(self, rng):
        spec = bilateral_spec(rng, n=2, M=3)
        rep, _ = build_bilateral_shift(spec)
        dim_h = rep.dim_h
        for i in (1, 2):
            col = (i - 1) * dim_h + 3  # m = 0
            assert not rep.matrix[:, col].any()

    def test_component_ranges_orthogonal(self, rng):
        spec = bilateral_spec(rng, n=2, M=1)
        rep, _ = build_bilateral_shift(spec)
        dim_h = rep.dim_h
        r1 = range_space(rep.matrix[:, :dim_h])
        r2 = range_space(rep.matrix[:, dim_h:])
        assert np.linalg.norm(r1.basis.conj().T @ r2.basis, 2) <= 1e-10

    def test_stable_range_matches_reachability_oracle(self, rng):
        # Oracle: graph reachability on window indices, independent of SVD.
        spec = bilateral_spec(rng, n=2, M=3)
        rep, _ = build_bilateral_shift(spec)
        n, M = spec.n, spec.M
        reachable = set(range(-M, M + 1))
        while True:
            step = {
                i + n * m
                for m in reachable
                for i in range(1, n + 1)
                if abs(i + n * m) <= M and abs(spec.weight(i, m)) > 0
            }
            if step == reachable:
                break
            reachable = step
        rinf = generalized_range(rep)
        expected = sorted(t + M for t in reachable)
        basis = np.zeros((rep.dim_h, len(expected)), dtype=complex)
        for j, r in enumerate(expected):
            basis[r, j] = 1.0
        from woldkit.linalg import Subspace

        assert subspaces_equal(rinf, Subspace(rep.dim_h, basis))


class TestBilateralCondition:
    def test_unit_weights_hold(self):
        w = np.ones((1, 7), dtype=complex)
        w[0, 3] = 0.0
        spec = BilateralSpec(n=1, M=3, w=w)
        report = check_bilateral_weight_condition(spec, [0.0, 0.0, 0.0], 3)
        assert report.holds
        assert all(e["minimal_d"] == pytest.approx(0.0) for e in report.per_k.values())

    def test_sqrt_two_weights_minimal_sequence(self):
        w = np.ones((1, 7), dtype=complex)
        w[0, 3] = 0.0
        w[0, 4:] = math.sqrt(2.0)
        spec = BilateralSpec(n=1, M=3, w=w)
        report = check_bilateral_weight_condition(spec, None, 2)
        for k in (1, 2):
            assert report.per_k[k]["minimal_d"] == pytest.approx(2.0 ** (k + 1) - 1.0)

    def test_condition_i_violations(self):
        w = np.ones((1, 7), dtype=complex)
        w[0, 3] = 0.5  # origin weight must vanish
        with pytest.raises(ConditionIViolated):
            check_bilateral_weight_condition(BilateralSpec(n=1, M=3, w=w), None, 1)
        w2 = np.ones((1, 7), dtype=complex)
        w2[0, 3] = 0.0
        w2[0, 1] = 2.0  # negative side must be exactly one
        with pytest.raises(ConditionIViolated):
            check_bilateral_weight_condition(BilateralSpec(n=1, M=3, w=w2), None, 1)

    def test_out_of_window_tuples_counted(self, rng):
        spec = bilateral_spec(rng, n=2, M=3)
        report = check_bilateral_weight_condition(spec, None, 3)
        assert report.per_k[3]["skipped"] > 0

    def test_modulus_at_least_one_under_condition_i(self, rng):
        from woldkit.growth import gamma_at_least_one

        for n in (1, 2):
            spec = bilateral_spec(rng, n=n, M=3, w_hi=1.7)
            rep, _ = build_bilateral_shift(spec)
            assert gamma_at_least_one(rep)

    def test_monotone_in_weight(self, rng):
        spec = bilateral_spec(rng, n=1, M=3, w_hi=1.8)
        base = check_bilateral_weight_condition(spec, None, 3)
        feasible = [base.per_k[k]["minimal_d"] for k in (1, 2, 3)]
        report = check_bilateral_weight_condition(spec, feasible, 3)
        assert report.holds
        bumped = [d + 1.0 for d in feasible]
        assert check_bilateral_weight_condition(spec, bumped, 3).holds


class TestShiftPipeline:
    def test_classical_shift_generates(self):
        spec = UnilateralSpec(d=1, L=3, p=1, Z=scalar_weights(1.0, 3))
        report = shift_pipeline(spec)
        assert report.regular_boundary
        assert report.wold.generated.dim == 4
        assert report.wold.generalized_range.dim == 0
        assert report.assertions_hold

    def test_bilateral_window_complete(self, rng):
        spec = bilateral_spec(rng, n=1, M=3)
        report = shift_pipeline(spec)
        assert report.regular_boundary and not report.regular_strict
        assert report.assertions_hold
        assert any("[boundary]" in key for key in report.assertions)
        # Wandering space read from the explicit range complement
        rep, _ = build_bilateral_shift(spec)
        from woldkit.linalg import complement
        assert subspaces_equal(
            report.wold.wandering, complement(range_space(rep.matrix))
        )

    def test_fock_isometric_shift_wandering_is_level_zero(self):
        spec = UnilateralSpec(d=2, L=2, p=1, Z=(np.eye(2), np.eye(4)))
        report = shift_pipeline(spec)
        w = report.wold.wandering
        assert w.dim == 1
        assert abs(w.basis[0, 0]) == pytest.approx(1.0)
        assert report.assertions_hold


class TestSpecFiles:
    def test_unilateral_round_trip(self, rng, tmp_path):
        spec = unilateral_spec(rng, d=2, L=2, p=1)
        path = tmp_path / "uni.json"
        save_shift_spec(spec, path)
        loaded = load_shift_spec(path)
        assert isinstance(loaded, UnilateralSpec)
        assert loaded.d == spec.d and loaded.L == spec.L and loaded.p == spec.p
        for a, b in zip(loaded.Z, spec.Z):
            assert np.array_equal(a, b)

    def test_bilateral_round_trip(self, rng, tmp_path):
        spec = bilateral_spec(rng, n=2, M=3)
        path = tmp_path / "bil.json"
        save_shift_spec(spec, path)
        loaded = load_shift_spec(path)
        assert isinstance(loaded, BilateralSpec)
        assert np.array_equal(loaded.w, spec.w)

    def test_missing_weights_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"kind": "bilateral", "n": 1, "M": 3}')
        with pytest.raises(ParseError):
            load_shift_spec(path)

    def test_wrong_weight_count_rejected(self, tmp_path):
        path = tmp_path / "bad2.json"
        path.write_text('{"kind": "unilateral", "d": 1, "L": 2, "p": 1, "Z": [[[1.0, 0.0]]]}')
        with pytest.raises(ShapeError):
            load_shift_spec(path)

    def test_unknown_kind_rejected(self, tmp_path):
        path = tmp_path / "bad3.json"
        path.write_text('{"kind": "sideways"}')
        with pytest.raises(ParseError):
            load_shift_spec(path)
