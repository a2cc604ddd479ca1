import pytest
from flint import fmpq_mat

from conftest import L
from ratlin.exactalg import Poly, RatFn
from ratlin.fixtures import diag_example, first_psm, second_psm
from ratlin.minbases import MinimalBasis, minimal_basis
from ratlin.polymat import PolyMatrix, RatMatrix
from ratlin.sysmat import (
    PolySystemMatrix,
    PreconditionError,
    StateSpaceRealization,
    c_a_inv,
    coprime_check,
    irreducibility_orders,
    is_minimal,
    lift_minimal_basis,
    minimal_realization,
    properness_conditions,
    realization_is_minimal,
    strong_irreducibility,
    transfer_function,
    transfer_minimal_basis,
)

INV = RatFn(Poly.const(1), L)


def test_transfer_examples():
    assert transfer_function(first_psm()) == RatMatrix.from_rows([[-INV]])
    assert transfer_function(second_psm()) == RatMatrix.from_rows([[RatFn(Poly([1, 0, 1, -1]), L)]])
    d = PolyMatrix.from_rows([[L, 1]])
    assert transfer_function(PolySystemMatrix.empty_state(d)) == d.to_rat()


def test_coprimeness():
    p = first_psm()
    assert coprime_check(p.a, p.c, "right")
    q = second_psm()
    assert coprime_check(q.a, q.b, "left")
    lam = PolyMatrix.from_rows([[L]])
    assert not coprime_check(lam, lam, "right")


def test_is_minimal():
    assert is_minimal(first_psm())
    a = PolyMatrix.from_rows([[L * L]])
    b = PolyMatrix.from_rows([[L]])
    assert not is_minimal(PolySystemMatrix(a, b, b, PolyMatrix(1, 1)))
    assert is_minimal(PolySystemMatrix.empty_state(PolyMatrix.from_rows([[L]])))


def test_properness():
    assert properness_conditions(first_psm()) == (True, True)
    assert c_a_inv(first_psm()) == RatMatrix.from_rows([[-INV, 1 + INV]])
    assert properness_conditions(second_psm()) == (False, False)
    assert c_a_inv(second_psm()) == RatMatrix.from_rows([[INV, -L, L]])
    assert properness_conditions(PolySystemMatrix.empty_state(PolyMatrix.from_rows([[L]]))) == (True, True)


def test_strong_irreducibility():
    assert irreducibility_orders(first_psm()) == ([-2, 0, 1], [-2, 0, 1])
    assert not strong_irreducibility(first_psm())
    assert irreducibility_orders(second_psm()) == ([-1, -1, -1, 0], [-1, -1, -1, 0])
    assert strong_irreducibility(second_psm())
    assert strong_irreducibility(PolySystemMatrix.empty_state(PolyMatrix.identity(1)))


def test_transfer_basis_row_example():
    # G = [lambda + 1/lambda, lambda^2]
    a = PolyMatrix.from_rows([[L]])
    b = PolyMatrix.from_rows([[1, 0]])
    c = PolyMatrix.from_rows([[1]])
    d = PolyMatrix.from_rows([[L, L * L]])
    p = PolySystemMatrix(a, b, c, d)
    bp = minimal_basis(p.assembled(), "right")
    bg = transfer_minimal_basis(p, bp)
    g = transfer_function(p)
    assert bg.indices == minimal_basis(g, "right").indices
    assert (g * bg.basis.to_rat()).is_zero()
    back = lift_minimal_basis(p, bg)
    assert back.indices == bp.indices


def test_regular_case_gives_empty_basis():
    p = first_psm()
    bp = minimal_basis(p.assembled(), "right")
    assert bp.basis.cols == 0
    assert transfer_minimal_basis(p, bp).basis.cols == 0


def test_lift_zero_matrix():
    p = PolySystemMatrix.empty_state(PolyMatrix(1, 1))
    out = lift_minimal_basis(p, MinimalBasis("right", PolyMatrix.identity(1), [0]))
    assert out.basis == PolyMatrix.identity(1)


def test_minimal_realization():
    r = minimal_realization(RatMatrix.from_rows([[INV]]))
    assert r.n == 1 and r.a_mat == fmpq_mat([[0]])
    assert r.transfer(1, 1) == RatMatrix.from_rows([[INV]])
    r = minimal_realization(RatMatrix.from_rows([[INV, 0], [0, 0]]))
    assert r.n == 1
    _, sp = diag_example().decompose()
    r = minimal_realization(sp)
    assert r.n == 1 and realization_is_minimal(r) and r.transfer(2, 2) == sp


def test_realization_with_e():
    e = fmpq_mat([[2]])
    r = StateSpaceRealization(fmpq_mat([[2]]), fmpq_mat([[2]]), fmpq_mat([[1]]), e)
    # C (lambda E - A)^{-1} B = 2 / (2 lambda - 2)
    assert r.transfer(1, 1) == RatMatrix.from_rows([[RatFn(Poly.const(1), L - 1)]])


def test_singular_a_rejected():
    with pytest.raises(ValueError):
        transfer_function(PolySystemMatrix(PolyMatrix(1, 1), PolyMatrix(1, 1), PolyMatrix(1, 1), PolyMatrix(1, 1)))
