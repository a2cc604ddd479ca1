import random

import pytest
from flint import fmpq, fmpq_mat

from conftest import L
from ratlin.exactalg import Poly, RatFn
from ratlin.fixtures import l_eps_eta, random_singular
from ratlin.linearize import (
    OrthogonalRecurrence,
    as_condition,
    block_kronecker,
    block_kronecker_pair,
    block_transpose,
    build_sbmb,
    default_body,
    extended_m1_build,
    kronecker_splits,
    lift_basis_to_sbmb,
    m1_build,
    m1_recover,
    m2_build,
    m2_recover,
    recover_basis_from_sbmb,
    recover_eigenvectors,
    transfer_of_sbmb,
    uv_certificate,
)
from ratlin.minbases import is_minimal_basis, minimal_basis
from ratlin.polymat import PolyMatrix, RatMatrix
from ratlin.sysmat import PreconditionError

ROW = RatMatrix.from_rows([[L, L * L]])


def test_kronecker_pair_small():
    p = block_kronecker_pair(1, 1)
    assert p.k == PolyMatrix.from_rows([[-1, L]])
    assert p.n_dual == PolyMatrix.from_rows([[L, 1]])
    p = block_kronecker_pair(0, 2)
    assert p.k.rows == 0 and p.n_dual == PolyMatrix.identity(2)
    p = block_kronecker_pair(2, 1)
    assert p.n_dual == PolyMatrix.from_rows([[L * L, L, 1]])
    assert all(p.certify().values())


def test_default_body_and_as_condition():
    d = PolyMatrix.from_rows([[Poly([3, 2, 1])]])
    body = default_body(d, 1, 0)
    assert body == PolyMatrix.from_rows([[L + 2, 3]])
    assert as_condition(body, d, 1, 0)["ok"]
    cube = PolyMatrix.from_rows([[L ** 3]])
    body = default_body(cube, 1, 1)
    res = as_condition(body, cube, 1, 1)
    assert res["ok"] and res["corner"]
    assert body == PolyMatrix.from_rows([[L, 0], [0, 0]])
    lin = PolyMatrix.from_rows([[L + 1]])
    assert default_body(lin, 0, 0) == lin
    with pytest.raises(PreconditionError):
        default_body(d, 1, 1)


def test_row_example_pencil():
    lin = block_kronecker(ROW, 1, 0)
    assert lin.pencil.shape == (3, 4)
    b = minimal_basis(lin.pencil.poly(), "right")
    assert b.indices == [2]
    rec = recover_basis_from_sbmb(lin, b)
    col = rec.basis
    c = col.entries[1][0].coeff(0)
    assert col.entries[0][0] == Poly([0, -c])
    back = lift_basis_to_sbmb(lin, rec)
    assert back.indices == [2]


def test_diag_example_pipeline():
    g = RatMatrix.from_rows([[RatFn(L ** 3 + 1, L), 0], [0, 0]])
    lin = block_kronecker(g, 1, 0)
    assert lin.n == 1 and lin.pencil.shape == (5, 5)
    assert uv_certificate(lin)
    for side in ("right", "left"):
        b = minimal_basis(lin.pencil.poly(), side)
        assert recover_basis_from_sbmb(lin, b).indices == [0]
        assert b.indices == [lin.shift(side)]


def test_low_degree_rejected():
    with pytest.raises(PreconditionError):
        block_kronecker(RatMatrix.from_rows([[L + 1]]), 0, 0)


def test_transfer_of_l_eps_eta():
    # L_{1,1} read as an SBMB: G_hat = diag(lambda + 1/lambda, K_1, K_1^T)
    pen = l_eps_eta(1, 1)
    assert pen.shape == (5, 5)
    g = RatMatrix.from_rows([[RatFn(L ** 4 + 1, L)]])
    lin = block_kronecker(g, 1, 1)
    gh = transfer_of_sbmb(lin)
    assert gh.shape == (3, 3)
    assert gh.entries[2][0] == RatFn.const(-1) and gh.entries[2][1] == RatFn.from_poly(L)
    assert uv_certificate(lin)


def test_random_round_trips():
    rng = random.Random(3)
    for _ in range(8):
        g = random_singular(rng)
        for eps, eta in kronecker_splits(g):
            lin = block_kronecker(g, eps, eta)
            for side in ("right", "left"):
                bg = minimal_basis(g, side)
                bl = minimal_basis(lin.pencil.poly(), side)
                assert bl.indices == [i + lin.shift(side) for i in bg.indices]
                rec = recover_basis_from_sbmb(lin, bl)
                assert rec.indices == bg.indices
                assert lift_basis_to_sbmb(lin, rec).indices == bl.indices


def test_general_t_s():
    g = RatMatrix.from_rows([[RatFn(L ** 4 + 1, L), L * L]])
    t = fmpq_mat([[3]])
    s = fmpq_mat([[-2]])
    lin = block_kronecker(g, 1, 1, t_mat=t, s_mat=s)
    b = minimal_basis(lin.pencil.poly(), "right")
    assert recover_basis_from_sbmb(lin, b).indices == minimal_basis(g, "right").indices
    bg = minimal_basis(g, "left")
    assert lift_basis_to_sbmb(lin, bg).indices == [i + 1 for i in bg.indices]


def test_recurrence_basics():
    rec = OrthogonalRecurrence.constant(fmpq(1, 2), 0, fmpq(1, 2), 4)
    d = PolyMatrix.from_rows([[L * L]])
    cs = rec.expand(d)
    phis = rec.polys(2)
    total = sum((p * Poly.const(c[0, 0]) for p, c in zip(phis, cs)), Poly())
    assert total == L * L
    mono = OrthogonalRecurrence.monomial(2)
    assert mono.matrix(2) == PolyMatrix.from_rows([[-1, L]])
    d = PolyMatrix.from_rows([[Poly([5, 4, 3])]])
    assert mono.body(d) == PolyMatrix.from_rows([[Poly([4, 3]), 5]])
    with pytest.raises(ValueError):
        OrthogonalRecurrence([0], [0], [0])


def test_block_transpose_involution():
    p = PolyMatrix.from_rows([[1, L, 2, 3], [L, 0, 1, 1]])
    assert block_transpose(block_transpose(p, 1, 2), 1, 2) == p
    assert block_transpose(p, 1, 2) == PolyMatrix.from_rows([[1, L, L, 0], [2, 3, 1, 1]])


def _square():
    u = RatMatrix.from_rows([[1], [L]])
    v = RatMatrix.from_rows([[L * L + RatFn(Poly.const(1), L - 1), L]])
    return u * v


@pytest.mark.parametrize("rec", [None, OrthogonalRecurrence.constant(fmpq(1, 2), 0, fmpq(1, 2), 6)])
def test_m1_m2(rec):
    g = _square()
    k = int(g.decompose()[0].degree())
    l1 = m1_build(g, rec, v=[1] + [0] * (k - 1))
    l2 = m2_build(g, rec, w=[1] + [0] * (k - 1))
    for side in ("right", "left"):
        bg = minimal_basis(g, side)
        b1 = minimal_basis(l1.pencil.poly(), side)
        b2 = minimal_basis(l2.pencil.poly(), side)
        assert b1.indices == [i + l1.shift(side) for i in bg.indices]
        assert b2.indices == [i + l2.shift(side) for i in bg.indices]
        assert m1_recover(l1, b1).indices == bg.indices
        assert m2_recover(l2, b2).indices == bg.indices
        assert l1.lift(bg).indices == b1.indices
    assert l1.shift("right") == k - 1 and l1.shift("left") == 0
    assert l2.shift("right") == 0 and l2.shift("left") == k - 1


def test_m1_paths_agree():
    g = _square()
    lin = m1_build(g)
    b = minimal_basis(lin.pencil.poly(), "right")
    h1 = PolyMatrix.from_const(lin.recovery_matrix("right")) * b.basis
    h2 = PolyMatrix.from_const(lin.base_recovery_matrix("right")) * b.basis
    assert is_minimal_basis(h1, g, "right") and is_minimal_basis(h2, g, "right")


def test_extended_m1_with_last_unit_vector():
    g = _square()
    k = int(g.decompose()[0].degree())
    rec = OrthogonalRecurrence.monomial(k)
    a = m1_build(g, rec, v=[1] + [0] * (k - 1))
    b = extended_m1_build(g, rec.matrix(k), rec.body(g.decompose()[0]), w=[0] * (k - 1) + [1],
                          v=[1] + [0] * (k - 1))
    assert a.pencil.l1 == b.pencil.l1 and a.pencil.l0 == b.pencil.l0
    bad = PolyMatrix.from_rows([[L, L]] + [[0, 0]] * 0)
    with pytest.raises(PreconditionError):
        extended_m1_build(RatMatrix.from_rows([[L * L]]), bad, PolyMatrix.from_rows([[L, 0]]))


def test_eigenvectors():
    g = RatMatrix.from_rows([[L * L - L, 0], [0, 1]])
    lin = block_kronecker(g, 1, 0)
    res = recover_eigenvectors(lin, 1, "right")
    assert res.is_eigenvalue and res.basis.ncols() == 1
    assert res.basis[1, 0] == 0 and res.basis[0, 0] != 0
    assert not recover_eigenvectors(lin, 2, "right").is_eigenvalue
    g2 = RatMatrix.from_rows([[L * L - L, 0], [0, L * L - L]])
    assert recover_eigenvectors(block_kronecker(g2, 0, 1), 1, "left").basis.ncols() == 2
    g3 = RatMatrix.from_rows([[L * L + RatFn(Poly.const(1), L), 0], [0, 1]])
    with pytest.raises(PreconditionError):
        recover_eigenvectors(block_kronecker(g3, 1, 0), 0)
