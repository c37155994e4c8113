import json

import numpy as np
import pytest

from woldkit.errors import BudgetExceeded, ParseError, ShapeError
from woldkit.generate import generic_rep, truncated_shift_rep
from woldkit.model import (
    Representation,
    check_covariance,
    iterate_map,
    load_representation,
    representation_to_dict,
    save_representation,
    tensor_lift,
)


def rand_c(rng, r, c):
    return (rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))) / np.sqrt(2)


class TestRepresentation:
    def test_shape_enforced(self):
        with pytest.raises(ShapeError):
            Representation(2, 2, np.zeros((2, 3)))

    def test_matrix_is_frozen(self):
        rep = truncated_shift_rep(3)
        with pytest.raises(ValueError):
            rep.matrix[0, 0] = 1.0

    def test_generator_labels_must_match(self):
        with pytest.raises(ShapeError):
            Representation(1, 1, np.eye(1), sigma={"a": np.eye(1)}, phi={})


class TestTensorLift:
    def test_k_zero_is_identity_on_input(self, rng):
        a = rand_c(rng, 2, 3)
        assert tensor_lift(0, a, 2) is not None
        assert np.array_equal(tensor_lift(0, a, 2), a)

    def test_one_by_one(self):
        out = tensor_lift(1, np.array([[3.0]]), 2)
        assert np.allclose(out, np.diag([3.0, 3.0]))

    def test_block_diagonal_copies(self, rng):
        a = rand_c(rng, 2, 3)
        out = tensor_lift(2, a, 2)
        assert out.shape == (8, 12)
        assert np.allclose(out, np.kron(np.eye(4), a))

    def test_composition(self, rng):
        a = rand_c(rng, 2, 2)
        assert np.allclose(tensor_lift(1, tensor_lift(2, a, 2), 2), tensor_lift(3, a, 2))

    def test_singular_values_with_multiplicity(self, rng):
        a = rand_c(rng, 2, 3)
        s = np.linalg.svd(a, compute_uv=False)
        lifted = np.linalg.svd(tensor_lift(2, a, 2), compute_uv=False)
        assert np.allclose(np.sort(lifted), np.sort(np.tile(s, 4)))

    def test_budget(self, monkeypatch, rng):
        monkeypatch.setenv("WOLDKIT_BUDGET", "10")
        with pytest.raises(BudgetExceeded):
            tensor_lift(3, rand_c(rng, 2, 2), 3)


class TestIterateMap:
    def test_first_iterate_is_the_map(self, rng):
        rep = generic_rep(rng, 2, 2)
        assert np.allclose(iterate_map(rep, 1), rep.matrix)

    def test_one_dimensional_collapses_to_powers(self):
        rep = truncated_shift_rep(4)
        s = rep.matrix
        assert np.allclose(iterate_map(rep, 3), np.linalg.matrix_power(s, 3))

    def test_both_factorization_orders_agree(self, rng):
        rep = generic_rep(rng, 2, 2)
        out = iterate_map(rep, 3, verify_factorizations=True)
        assert out.shape == (2, 16)

    def test_semigroup_identity(self, rng):
        rep = generic_rep(rng, 2, 2)
        lhs = iterate_map(rep, 3)
        rhs = iterate_map(rep, 1) @ tensor_lift(1, iterate_map(rep, 2), 2)
        assert np.allclose(lhs, rhs)

    def test_budget(self, monkeypatch, rng):
        rep = generic_rep(rng, 2, 2)
        monkeypatch.setenv("WOLDKIT_BUDGET", "8")
        with pytest.raises(BudgetExceeded):
            iterate_map(rep, 3)


class TestCovariance:
    def test_empty_generator_lists(self, rng):
        ok, residuals = check_covariance(generic_rep(rng, 2, 2))
        assert ok and residuals == {}

    def test_identity_generators_always_pass(self, rng):
        rep = Representation(
            2, 2, rand_c(rng, 2, 4), sigma={"a": np.eye(2)}, phi={"a": np.eye(2)}
        )
        ok, residuals = check_covariance(rep)
        assert ok and residuals["a"] <= 1e-12

    def test_scalar_mismatch(self):
        rep = Representation(
            1, 1, np.array([[1.0]]), sigma={"a": np.array([[1.0]])}, phi={"a": np.array([[2.0]])}
        )
        ok, residuals = check_covariance(rep)
        assert not ok
        assert residuals["a"] == pytest.approx(1.0)


class TestSerialization:
    def test_round_trip_exact(self, rng, tmp_path):
        rep = Representation(
            2,
            3,
            rand_c(rng, 3, 6),
            sigma={"g": rand_c(rng, 3, 3)},
            phi={"g": rand_c(rng, 2, 2)},
        )
        path = tmp_path / "rep.json"
        save_representation(rep, path)
        loaded = load_representation(path)
        assert loaded.dim_e == rep.dim_e and loaded.dim_h == rep.dim_h
        assert np.array_equal(loaded.matrix, rep.matrix)
        assert np.array_equal(loaded.sigma["g"], rep.sigma["g"])
        assert np.array_equal(loaded.phi["g"], rep.phi["g"])

    def test_wrong_entry_count_is_shape_error(self, rng, tmp_path):
        doc = representation_to_dict(generic_rep(rng, 2, 2))
        doc["V"] = doc["V"][:-1]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ShapeError):
            load_representation(path)

    def test_nan_token_rejected(self, tmp_path):
        path = tmp_path / "nan.json"
        path.write_text('{"dim_E": 1, "dim_H": 1, "V": [[NaN, 0.0]]}')
        with pytest.raises(ParseError):
            load_representation(path)

    def test_overflowing_float_rejected(self, tmp_path):
        path = tmp_path / "inf.json"
        path.write_text('{"dim_E": 1, "dim_H": 1, "V": [[1e999, 0.0]]}')
        with pytest.raises(ParseError):
            load_representation(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "missing.json"
        path.write_text('{"dim_E": 1, "dim_H": 1}')
        with pytest.raises(ParseError):
            load_representation(path)

    def test_malformed_json_reports_location(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"dim_E": 1,\n  "dim_H": ')
        with pytest.raises(ParseError) as err:
            load_representation(path)
        assert "line" in str(err.value)
