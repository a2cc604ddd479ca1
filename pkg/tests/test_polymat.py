import random

import pytest
from flint import fmpq_mat

from conftest import L
from ratlin.exactalg import Poly, RatFn
from ratlin.fixtures import diag_example, first_psm, k_u, random_rational, second_psm
from ratlin.polymat import (
    PolyMatrix,
    RatMatrix,
    infinity_structure,
    infinity_structure_smith,
    invariant_factors,
    is_biproper,
    is_unimodular,
    least_order,
    matrix_from_json,
    pencil_infinity_structure,
    rank,
    smith_form,
    smith_mcmillan_finite,
)

INV = RatFn(Poly.const(1), L)


def _monic(polys):
    return [p.monic() for p in polys]


def test_invariant_factors_small():
    assert invariant_factors(PolyMatrix.from_rows([[L, 0], [0, L]])) == [L, L]
    assert invariant_factors(PolyMatrix.from_rows([[1, L], [0, 1]])) == [Poly.const(1)] * 2
    assert invariant_factors(k_u(2)) == [Poly.const(1)] * 2


def test_smith_transforms_reproduce_form():
    p = PolyMatrix.from_rows([[L * L, L + 1, 0], [L, 1, L - 1]])
    sf = smith_form(p)
    s = sf.u * p * sf.v
    for i in range(s.rows):
        for j in range(s.cols):
            if i != j:
                assert s.entries[i][j].is_zero()
    assert is_unimodular(sf.u) and is_unimodular(sf.v)


def test_smith_mcmillan_examples():
    smf = smith_mcmillan_finite(diag_example(), transforms=False)
    assert smf.rank == 1
    assert _monic(smf.eps) == [L * L + 1] and _monic(smf.psi) == [L]
    smf = smith_mcmillan_finite(RatMatrix.from_rows([[RatFn(Poly.const(-1), L)]]), transforms=False)
    assert _monic(smf.eps) == [Poly.const(1)] and _monic(smf.psi) == [L]
    smf = smith_mcmillan_finite(RatMatrix.identity(3), transforms=False)
    assert smf.rank == 3 and all(p == Poly.const(1) for p in smf.eps + smf.psi)


def test_smith_mcmillan_divisibility_and_coprimality():
    rng = random.Random(3)
    for _ in range(15):
        g = random_rational(rng, 3, 3)
        smf = smith_mcmillan_finite(g, transforms=False)
        for a, b in zip(smf.eps, smf.eps[1:]):
            assert b.divrem(a)[1].is_zero()
        for a, b in zip(smf.psi, smf.psi[1:]):
            assert a.divrem(b)[1].is_zero()
        for e, p in zip(smf.eps, smf.psi):
            assert e.gcd(p).degree == 0


def test_infinity_structure_examples():
    p = first_psm()
    wide = PolyMatrix.block([[p.a, p.b, PolyMatrix(2, 1)], [-p.c, p.d, PolyMatrix.from_rows([[-1]])]])
    assert infinity_structure(wide).q == [-2, 0, 1]
    p = second_psm()
    wide = PolyMatrix.block([[p.a, p.b, PolyMatrix(3, 1)], [-p.c, p.d, PolyMatrix.from_rows([[-1]])]])
    assert infinity_structure(wide).q == [-1, -1, -1, 0]
    assert infinity_structure(RatMatrix.from_rows([[L]])).q == [-1]


def test_infinity_routes_agree():
    rng = random.Random(11)
    for _ in range(15):
        g = random_rational(rng, 3, 3)
        assert infinity_structure(g).q == infinity_structure_smith(g).q


def test_pencil_infinity_matches_general_route():
    l1 = fmpq_mat([[1, 0, 0], [0, 0, 1]])
    l0 = fmpq_mat([[0, 1, 0], [1, 0, 0]])
    assert pencil_infinity_structure(l1, l0).q == infinity_structure(PolyMatrix.pencil(l1, l0)).q


def test_rank():
    assert rank(diag_example()) == 1
    assert rank(RatMatrix(2, 3)) == 0
    assert rank(RatMatrix.identity(4)) == 4


def test_unimodular_and_biproper():
    assert is_unimodular(PolyMatrix.from_rows([[1, L], [0, 1]]))
    assert not is_biproper(RatMatrix.from_rows([[INV, 0], [0, L]]))
    w = RatMatrix.from_rows([[0, 0, 1], [1, 0, -INV], [-INV, 1, INV * INV]])
    assert is_biproper(w)
    scaled = RatMatrix(2, 3, [[x * INV for x in row] for row in k_u(2).to_rat().entries])
    assert scaled * w == RatMatrix.from_rows([[1, 0, 0], [0, 1, 0]])


def test_least_order():
    assert least_order(diag_example()) == 1
    assert least_order(RatMatrix.from_rows([[INV, 0], [0, INV]])) == 2
    assert least_order(PolyMatrix.from_rows([[L, 1]]).to_rat()) == 0


def test_json_accepts_bare_coefficient_lists():
    m = matrix_from_json({"rows": 1, "cols": 2, "entries": [[["0", "1"], {"num": ["1"], "den": ["0", "1"]}]]})
    assert m == RatMatrix.from_rows([[L, INV]])
    assert matrix_from_json(m.to_json()) == m


def test_shape_mismatch_raises():
    with pytest.raises(ValueError):
        PolyMatrix(2, 2) * PolyMatrix(3, 1)
