import random

import pytest

from conftest import L
from ratlin.exactalg import Poly, RatFn
from ratlin.fixtures import diag_example, l_eps_eta, random_rational
from ratlin.linearize import Pencil, block_kronecker, sbmb_transformers, transfer_of_sbmb
from ratlin.minbases import minimal_basis
from ratlin.polymat import PolyMatrix, RatMatrix, pencil_infinity_structure
from ratlin.sysmat import PreconditionError
from ratlin.verify import (
    check_strong_linearization,
    detect_branch,
    index_sum,
    invariant_orders_of_linearization,
    mu_relation,
    polynomial_basis_map,
    predicted_pencil_orders,
    structural_report,
)


def test_structural_report_diag():
    rep = structural_report(diag_example()).to_json()
    assert rep["rank"] == 1 and rep["q"] == [-1]
    assert rep["right_indices"] == [0] and rep["left_indices"] == [0]
    assert rep["nu"] == 1 and rep["mu"] == 0 and rep["d"] == 1
    assert index_sum(diag_example()) == 0


def test_index_sum_random():
    rng = random.Random(2)
    for _ in range(15):
        g = random_rational(rng, 3, 3)
        rep = structural_report(g)
        assert index_sum(g) == rep.mu


@pytest.mark.parametrize("eps,eta", [(1, 1), (2, 1), (1, 3)])
def test_l_eps_eta(eps, eta):
    g = diag_example()
    pen = l_eps_eta(eps, eta)
    assert check_strong_linearization(pen, g)
    assert minimal_basis(pen.poly(), "right").indices == [eps]
    assert minimal_basis(pen.poly(), "left").indices == [eta]
    res = mu_relation(g, pen)
    assert res["ok"] and res["mu_l"] == eps + eta and res["predicted"] == 0


def test_mutation_is_caught():
    pen = l_eps_eta(1, 1)
    l1 = pen.l1
    l1[1, 1] = -l1[1, 1]
    cert = check_strong_linearization(Pencil(l1, pen.l0, 1), diag_example())
    assert not cert and cert.failed == "finite_zeros"


def test_wrong_order_is_caught():
    pen = l_eps_eta(1, 1)
    g = RatMatrix.from_rows([[L * L + 1, 0], [0, 0]])
    cert = check_strong_linearization(pen, g)
    assert not cert and cert.failed == "order_equals_least_order"


def test_branches():
    g = RatMatrix.from_rows([[RatFn(L ** 3 + 1, L)]])
    lin = block_kronecker(g, 1, 0)
    assert detect_branch(lin.pencil) == "B1nonzero"
    # constant G, n = 0, D_1 = 0
    const = Pencil.from_poly(PolyMatrix.from_rows([[1, 2], [2, 4]]), 0)
    assert detect_branch(const) == "constant"
    gc = RatMatrix.from_rows([[1, 2], [2, 4]])
    assert check_strong_linearization(const, gc)
    assert mu_relation(gc, const)["ok"]
    # n > 0 and B_1 block vanishes: L = [[lambda, 1], [-1, 0]] for G = 1/lambda
    z = Pencil.from_poly(PolyMatrix.from_rows([[L, 1], [-1, 0]]), 1)
    assert detect_branch(z) == "B1zero_npos"
    g1 = RatMatrix.from_rows([[RatFn(Poly.const(1), L)]])
    assert check_strong_linearization(z, g1)
    for pen, gg, br in ((lin.pencil, g, "B1nonzero"), (const, gc, "constant"), (z, g1, "B1zero_npos")):
        s = pen.shape[0] - pen.n - gg.rows
        pred = invariant_orders_of_linearization(gg, pen.n, s, br)
        assert pred == list(pencil_infinity_structure(pen.l1, pen.l0).q)


def test_predicted_orders_errors():
    with pytest.raises(ValueError):
        predicted_pencil_orders([0], 0, 0, "nope")


def test_singular_a1():
    pen = Pencil.from_poly(PolyMatrix.from_rows([[1, 1], [-1, L]]), 1)
    with pytest.raises(PreconditionError):
        detect_branch(pen)


def test_polynomial_basis_map():
    g = RatMatrix.from_rows([[L ** 2, L ** 3]])
    lin = block_kronecker(g, 1, 1)
    u, v = sbmb_transformers(lin)
    gh = transfer_of_sbmb(lin)
    h = minimal_basis(g, "right").basis
    fwd = polynomial_basis_map(u, v, g, gh, h, "forward")
    assert (gh * fwd.to_rat()).is_zero()
    back = polynomial_basis_map(u, v, g, gh, fwd, "converse")
    assert (g * back.to_rat()).is_zero() and back.cols == 1
    with pytest.raises(PreconditionError):
        polynomial_basis_map(u, v, g, gh, PolyMatrix.from_rows([[1], [0]]), "forward")
