import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pencilscope.errors import LevelTooLarge, ParseError, PowerOverflow, SingularMatrix
from pencilscope.linalg import (
    adjoint,
    as_cmatrix,
    extreme_singular_values,
    format_matrix,
    inverse,
    lu_factor,
    lu_solve,
    parse_matrix,
    read_matrix,
    scaled_square_power,
    write_matrix,
)

from oracles import matrix_power_norm, singular_values_via_gram


def cn(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# --- lu_solve / inverse ---------------------------------------------------

def test_identity_solve():
    np.testing.assert_array_equal(lu_solve(np.eye(2), [1, 2]), [1, 2])


def test_diagonal_solve():
    np.testing.assert_allclose(lu_solve(np.diag([2, 4]), [2, 4]), [1, 1])


def test_rank_deficient_solve_raises():
    with pytest.raises(SingularMatrix):
        lu_solve([[1, 1], [1, 1]], [1, 0])


def test_rhs_row_mismatch():
    with pytest.raises(ValueError):
        lu_solve(np.eye(2), np.ones(3))


def test_inverse_examples():
    np.testing.assert_allclose(inverse(np.diag([2, 1j])), np.diag([0.5, -1j]))
    np.testing.assert_allclose(inverse([[1, 1], [0, 1]]), [[1, -1], [0, 1]])
    with pytest.raises(SingularMatrix):
        inverse(np.zeros((3, 3)))


def test_pivot_floor_is_relative():
    M = np.diag([1.0, 1e-15])
    assert lu_factor(M).singular
    assert not lu_factor(M * 1e-20 + np.diag([0, 1e-21])).singular


def test_lu_reconstructs_input():
    rng = np.random.default_rng(3)
    for _ in range(20):
        M = cn(rng, (6, 6))
        f = lu_factor(M)
        assert not f.singular
        err = np.linalg.norm(M[f.permutation] - f.lower @ f.upper) / np.linalg.norm(M)
        assert err <= 1e-12


def test_inverse_residual():
    rng = np.random.default_rng(4)
    for d in range(1, 9):
        M = cn(rng, (d, d))
        assert np.linalg.norm(M @ inverse(M) - np.eye(d)) <= 1e-10 * d


def test_lu_roundtrip_recovers_vector():
    rng = np.random.default_rng(5)
    done = 0
    while done < 50:
        M = cn(rng, (6, 6))
        if np.linalg.cond(M) > 1e6:
            continue
        v = cn(rng, 6)
        x = lu_solve(M, M @ v)
        assert np.linalg.norm(x - v) <= 1e-9 * np.linalg.norm(v)
        done += 1


def test_solve_residual_bound():
    rng = np.random.default_rng(6)
    M = cn(rng, (8, 8)) + 4 * np.eye(8)
    rhs = cn(rng, (8, 3))
    X = lu_solve(M, rhs)
    assert np.linalg.norm(M @ X - rhs) <= 1e-10 * np.linalg.norm(rhs)


# --- singular values ------------------------------------------------------

def test_singular_value_examples():
    assert extreme_singular_values(np.diag([3, 1])) == pytest.approx((3, 1))
    assert extreme_singular_values([[0, 1], [0, 0]]) == pytest.approx((1, 0))
    golden = (1 + math.sqrt(5)) / 2
    smax, smin = extreme_singular_values([[1, 1], [0, 1]])
    # roots of t^2 - 3t + 1, the characteristic polynomial of M^H M
    assert smax == pytest.approx(golden, rel=1e-12)
    assert smin == pytest.approx(golden - 1, rel=1e-12)


def test_rectangular_sigma_max_only():
    smax, smin = extreme_singular_values(np.array([[3.0, 4.0]]))
    assert smax == pytest.approx(5.0)
    assert math.isnan(smin)


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_singular_values_match_gram_oracle(dim):
    rng = np.random.default_rng(dim)
    for _ in range(25):
        M = cn(rng, (dim, dim))
        ref = singular_values_via_gram(M)
        smax, smin = extreme_singular_values(M)
        assert smax == pytest.approx(ref[0], rel=1e-8)
        assert smin == pytest.approx(ref[-1], rel=1e-8)


def test_sigma_min_times_inverse_norm_is_one():
    rng = np.random.default_rng(7)
    for seed in range(100):
        d = 1 + seed % 8
        M = cn(rng, (d, d))
        smin = extreme_singular_values(M)[1]
        smax_inv = extreme_singular_values(inverse(M))[0]
        assert smin * smax_inv == pytest.approx(1.0, rel=1e-8)


# --- scaled_square_power ---------------------------------------------------

def test_ssp_identity():
    for n in range(6):
        assert scaled_square_power(np.eye(3), n) == pytest.approx(0.0, abs=1e-14)


def test_ssp_diagonal():
    assert scaled_square_power(np.diag([2, 0.5]), 3) == pytest.approx(8 * math.log(2), rel=1e-14)


def test_ssp_jordan_block_against_explicit_power():
    X = np.array([[1, 10], [0, 1]])
    expected = math.log(matrix_power_norm(X, 4))
    assert scaled_square_power(X, 2) == pytest.approx(expected, rel=1e-13)
    # the explicit power is [[1, 40], [0, 1]]
    assert math.exp(expected) == pytest.approx(singular_values_via_gram([[1, 40], [0, 1]])[0], rel=1e-12)


def test_ssp_no_overflow_at_large_level():
    val = scaled_square_power(np.diag([10.0, 1.0]), 20)
    assert val == pytest.approx(2 ** 20 * math.log(10.0), rel=1e-12)


def test_ssp_stack_matches_single():
    rng = np.random.default_rng(8)
    X = cn(rng, (5, 4, 4))
    stack = scaled_square_power(X, 3)
    for k in range(5):
        assert stack[k] == scaled_square_power(X[k], 3)


def test_ssp_level_cap():
    with pytest.raises(LevelTooLarge):
        scaled_square_power(np.eye(2), 21)
    with pytest.raises(ValueError):
        scaled_square_power(np.eye(2), -1)


def test_ssp_nilpotent_is_floored_not_nan():
    val = scaled_square_power(np.array([[0, 1], [0, 0]]), 1)
    assert math.isfinite(val) and val < -600


def test_ssp_reports_overflow():
    # entries near the float limit overflow in the first Frobenius norm
    with pytest.raises(PowerOverflow):
        with np.errstate(over="ignore"):
            scaled_square_power(np.full((2, 2), 1e308), 1)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(0, 6), dim=st.integers(1, 6))
def test_ssp_submultiplicative(seed, n, dim):
    X = cn(np.random.default_rng(seed), (dim, dim))
    assert scaled_square_power(X, n + 1) <= 2 * scaled_square_power(X, n) + 1e-10


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(0, 4))
def test_ssp_matches_repeated_multiplication(seed, n):
    X = cn(np.random.default_rng(seed), (4, 4)) / 2
    assert scaled_square_power(X, n) == pytest.approx(math.log(matrix_power_norm(X, 2 ** n)), rel=1e-9, abs=1e-9)


# --- CMatrix and text format -----------------------------------------------

def test_adjoint_involution():
    rng = np.random.default_rng(9)
    M = cn(rng, (3, 5))
    np.testing.assert_array_equal(adjoint(adjoint(M)), M)


def test_as_cmatrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_cmatrix([[1, np.nan]])


def test_matrix_text_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(10)
    M = cn(rng, (3, 4)) * 10.0 ** rng.integers(-200, 200, (3, 4))
    M[0, 0] = complex(-0.0, 0.0)
    path = tmp_path / "m.txt"
    write_matrix(path, M)
    back = read_matrix(path)
    assert back.tobytes() == M.tobytes()
    assert format_matrix(back) == path.read_text()


def test_matrix_text_layout():
    assert format_matrix(np.array([[1 + 2j]])) == "1 1\n1 2\n"


@pytest.mark.parametrize("text,line", [
    ("2 2\n1 0 0 0\n0 0 1 0\n", None),
    ("2 2\n1 0 0\n0 0 1 0\n", 2),
    ("2 x\n", 1),
    ("1 1\nfoo 0\n", 2),
    ("1 1\n1 0\n9 9\n", 3),
    ("2 1\n1 0\n", 3),
])
def test_parse_errors_carry_line(text, line):
    if line is None:
        assert parse_matrix(text).shape == (2, 2)
        return
    with pytest.raises(ParseError) as info:
        parse_matrix(text)
    assert info.value.line == line
