import numpy as np
import pytest

from woldkit.errors import NotRegular
from woldkit.generate import (
    coisometry_rep,
    concave_rep,
    generic_rep,
    left_invertible_rep,
    rand_complex,
    truncated_shift_rep,
)
from woldkit.linalg import null_space, pinv, subspaces_equal
from woldkit.model import Representation, iterate_map
from woldkit.structure import (
    algebraic_core,
    fixed_point_range_check,
    generalized_range,
    hat_map_check,
    inverse_invariance_check,
    is_biregular,
    is_hyper_dagger,
    is_n_dagger,
    is_regular,
    iterate_inverse,
    iterated_pinv,
    kernel_intersection_identity,
    make_generalized_inverse,
)


class TestGeneralizedRange:
    def test_nilpotent_shift_collapses(self):
        assert generalized_range(truncated_shift_rep(4)).dim == 0

    def test_invertible_map_keeps_everything(self, rng):
        rep = left_invertible_rep(rng, 4)
        rinf = generalized_range(rep)
        assert rinf.dim == 4

    def test_decreasing_chain(self, rng):
        from woldkit.structure import range_chain
        from woldkit.linalg import contains

        rep = generic_rep(rng, 2, 3)
        chain, stable = range_chain(rep)
        for earlier, later in zip(chain, chain[1:]):
            assert contains(later, earlier)
        assert subspaces_equal(chain[stable - 1], generalized_range(rep))


class TestAlgebraicCore:
    def test_nilpotent_shift(self):
        assert algebraic_core(truncated_shift_rep(4)).dim == 0

    def test_unitary(self, rng):
        rep = concave_rep(rng, 3)
        assert algebraic_core(rep).dim == 3

    def test_matches_generalized_range(self, rng):
        for _ in range(5):
            rep = generic_rep(rng, 2, 3)
            assert subspaces_equal(algebraic_core(rep), generalized_range(rep))


class TestRegularity:
    def test_injective_map_is_regular(self, rng):
        report = is_regular(left_invertible_rep(rng, 3))
        assert report.strict and report.holds_at_horizon
        assert report.kernel_dim == 0

    def test_backward_jordan_cell_not_regular(self):
        rep = Representation(1, 2, np.array([[0.0, 1.0], [0.0, 0.0]]))
        report = is_regular(rep)
        kernel = null_space(rep.matrix)
        assert kernel.dim == 1 and abs(kernel.basis[0, 0]) == pytest.approx(1.0)
        assert not report.strict
        assert not report.anomaly

    def test_truncated_shift_regular_only_below_truncation(self):
        rep = truncated_shift_rep(4)
        assert not is_regular(rep).strict
        assert is_regular(rep, horizon=3).holds_at_horizon
        assert not is_regular(rep, horizon=4).holds_at_horizon

    def test_condition_verdicts_consistent(self, rng):
        for _ in range(10):
            rep = generic_rep(rng, int(rng.integers(1, 4)), int(rng.integers(1, 5)))
            assert not is_regular(rep).anomaly


class TestKernelIntersectionIdentity:
    @pytest.mark.parametrize("m,n", [(1, 1), (1, 2), (2, 1)])
    def test_on_random_reps(self, rng, m, n):
        for _ in range(5):
            rep = generic_rep(rng, 2, 2)
            assert kernel_intersection_identity(rep, m, n)

    def test_on_rank_deficient(self, rng):
        from woldkit.generate import rank_deficient_rep

        rep = rank_deficient_rep(rng, 2, 3, 2)
        for m, n in ((1, 1), (1, 2), (2, 1)):
            assert kernel_intersection_identity(rep, m, n)


class TestGeneralizedInverse:
    def test_zero_parameter_gives_pinv(self, rng):
        rep = generic_rep(rng, 2, 2)
        gi = make_generalized_inverse(rep, np.zeros((4, 2)))
        assert np.allclose(gi.matrix, pinv(rep.matrix))

    def test_unitary_ignores_parameter(self, rng):
        rep = concave_rep(rng, 3)
        y = rand_complex(rng, 3, 3)
        gi = make_generalized_inverse(rep, y)
        assert np.allclose(gi.matrix, rep.matrix.conj().T, atol=1e-10)

    def test_both_identities_for_random_parameters(self, rng):
        rep = generic_rep(rng, 2, 3)
        v = rep.matrix
        for _ in range(5):
            gi = make_generalized_inverse(rep, rand_complex(rng, 6, 3))
            assert np.linalg.norm(v @ gi.matrix @ v - v, 2) <= 1e-9 * np.linalg.norm(v, 2)

    def test_iterate_base_case(self, rng):
        rep = generic_rep(rng, 2, 2)
        gi = make_generalized_inverse(rep, rand_complex(rng, 4, 2))
        assert np.allclose(iterate_inverse(gi, 1), gi.matrix)

    def test_scalar_iterates(self):
        rep = Representation(1, 1, np.array([[2.0]]))
        gi = make_generalized_inverse(rep, np.zeros((1, 1)))
        for n in (1, 2, 3):
            assert iterate_inverse(gi, n)[0, 0] == pytest.approx(2.0**-n)

    def test_composition_identity(self, rng):
        rep = generic_rep(rng, 2, 2)
        gi = make_generalized_inverse(rep, rand_complex(rng, 4, 2))
        iterate_inverse(gi, 3, verify_composition=True)


class TestBiRegularity:
    def test_coisometry_biregular(self, rng):
        rep = coisometry_rep(rng, 2, 2)
        gi = make_generalized_inverse(rep, np.zeros((4, 2)))
        assert is_biregular(rep, gi, 3).holds

    def test_surjective_with_random_inverse(self, rng):
        rep = generic_rep(rng, 2, 2)
        gi = make_generalized_inverse(rep, rand_complex(rng, 4, 2))
        assert is_biregular(rep, gi, 3).holds

    def test_not_regular_raises(self):
        rep = Representation(1, 2, np.array([[0.0, 1.0], [0.0, 0.0]]))
        gi = make_generalized_inverse(rep, np.zeros((2, 2)))
        with pytest.raises(NotRegular):
            is_biregular(rep, gi, 3)


class TestDagger:
    def test_first_level_always(self, rng):
        assert is_n_dagger(generic_rep(rng, 2, 2), 1)

    def test_coisometry_hyper_dagger(self, rng):
        rep = coisometry_rep(rng, 2, 2)
        assert is_hyper_dagger(rep, 3)

    def test_invertible_scalar_case_hyper_dagger(self, rng):
        rep = left_invertible_rep(rng, 3)
        assert is_hyper_dagger(rep, 3)

    def test_known_failure_instance(self):
        # Rank-one idempotent-like map: the lowered pseudoinverse squares
        # to a quarter of the direct pseudoinverse of the iterate.
        rep = Representation(1, 2, np.array([[1.0, 1.0], [0.0, 0.0]]))
        assert not is_n_dagger(rep, 2)

    def test_randomized_search_finds_failure(self, rng):
        found = False
        for _ in range(20):
            rep = generic_rep(rng, 2, 2)
            if not is_n_dagger(rep, 2):
                found = True
                break
        assert found


class TestFixedPointAndInvariance:
    def test_nilpotent_shift(self):
        rep = truncated_shift_rep(4)
        gi = make_generalized_inverse(rep, np.zeros((4, 4)))
        assert fixed_point_range_check(rep, gi, horizon=3)

    def test_unitary_everything_fixed(self, rng):
        rep = concave_rep(rng, 3)
        gi = make_generalized_inverse(rep, rand_complex(rng, 3, 3))
        assert fixed_point_range_check(rep, gi, horizon=4)

    def test_random_regular(self, rng):
        rep = generic_rep(rng, 2, 2)
        gi = make_generalized_inverse(rep, rand_complex(rng, 4, 2))
        assert fixed_point_range_check(rep, gi, horizon=4)

    def test_inverse_invariance(self, rng):
        for _ in range(5):
            rep = generic_rep(rng, 2, 2)
            gi = make_generalized_inverse(rep, rand_complex(rng, 4, 2))
            assert inverse_invariance_check(rep, gi)

    def test_inverse_invariance_vacuous_for_trivial_range(self):
        rep = truncated_shift_rep(3)
        gi = make_generalized_inverse(rep, np.zeros((3, 3)))
        assert inverse_invariance_check(rep, gi)


class TestHatMap:
    def test_regular_instances_pass(self, rng):
        rep = generic_rep(rng, 2, 2)
        assert all(hat_map_check(rep, 3).values())

    def test_truncation_detected(self):
        rep = truncated_shift_rep(3)
        results = hat_map_check(rep, 4)
        assert not all(results.values())

    def test_dimension_identity_for_regular(self, rng):
        from woldkit.linalg import complement, intersect, range_space

        rep = generic_rep(rng, 2, 2)
        w = null_space(rep.matrix.conj().T)
        for n in (1, 2):
            rn = range_space(iterate_map(rep, n))
            rn1 = range_space(iterate_map(rep, n + 1))
            target = intersect(rn, complement(rn1))
            assert target.dim == (2**n) * w.dim


class TestIteratedPinv:
    def test_matches_manual_lowering(self, rng):
        rep = generic_rep(rng, 2, 2)
        vd = pinv(rep.matrix)
        manual = np.kron(np.eye(2), vd) @ vd
        assert np.allclose(iterated_pinv(rep, 2), manual)
