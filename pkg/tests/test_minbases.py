import random

import pytest

from conftest import L
from ratlin.exactalg import Poly
from ratlin.fixtures import diag_example, l_eps_eta, random_rational
from ratlin.minbases import (
    column_reduce,
    is_minimal_basis,
    minimal_basis,
    oracle_minimal_indices,
    sorted_col_degrees,
)
from ratlin.polymat import PolyMatrix, RatMatrix

G = PolyMatrix.from_rows([[L, L * L]])


def test_row_example_right_basis():
    b = minimal_basis(G, "right")
    assert b.indices == [1]
    col = [b.basis.entries[0][0], b.basis.entries[1][0]]
    # (-lambda, 1) up to a nonzero constant
    c = col[1].coeff(0)
    assert col[1] == Poly.const(c) and col[0] == Poly([0, -c])


def test_trivial_cases():
    assert minimal_basis(RatMatrix(2, 2), "right").basis == PolyMatrix.identity(2)
    assert minimal_basis(RatMatrix.identity(3), "right").basis.cols == 0


def test_diag_example_both_sides():
    g = diag_example()
    for side in ("right", "left"):
        b = minimal_basis(g, side)
        assert b.indices == [0]
        assert b.basis.entries[0][0].is_zero() and not b.basis.entries[1][0].is_zero()


def test_l_eps_eta_indices():
    lp = l_eps_eta(1, 1).poly()
    assert minimal_basis(lp, "right").indices == [1]
    assert minimal_basis(lp, "left").indices == [1]
    assert oracle_minimal_indices(lp, "right", 4) == [1]


def test_column_reduce():
    # unimodular, so it reduces to constant columns
    red, w = column_reduce(PolyMatrix.from_rows([[L, L + 1], [1, 1]]))
    assert sorted_col_degrees(red) == [0, 0]
    q = PolyMatrix.from_rows([[L, L * L], [1, L + 1]])
    red, w = column_reduce(q)
    assert sorted_col_degrees(red) == [0, 1]
    assert q * w == red


def test_is_minimal_basis():
    assert is_minimal_basis(PolyMatrix.from_rows([[-L], [1]]), G, "right")
    cert = is_minimal_basis(PolyMatrix.from_rows([[-L * L], [L]]), G, "right")
    assert not cert and cert.failed
    assert is_minimal_basis(PolyMatrix.identity(2), RatMatrix(2, 2), "right")


def test_oracle_examples():
    assert oracle_minimal_indices(G, "right", 3) == [1]
    assert oracle_minimal_indices(RatMatrix(2, 2), "right", 0) == [0, 0]


def test_left_right_duality():
    rng = random.Random(5)
    for _ in range(10):
        g = random_rational(rng, 3, 3)
        assert minimal_basis(g, "left").indices == minimal_basis(g.T(), "right").indices


def test_oracle_agreement_random():
    rng = random.Random(21)
    for _ in range(20):
        g = random_rational(rng, 3, 3)
        for side in ("right", "left"):
            assert minimal_basis(g, side).indices == oracle_minimal_indices(g, side, 8)


def test_bad_side():
    with pytest.raises(ValueError):
        minimal_basis(G, "up")
