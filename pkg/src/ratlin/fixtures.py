"""Worked examples with published values, and seeded random fixture generators."""
from __future__ import annotations

import random
from typing import List

from .exactalg import LAMBDA, Poly, RatFn
from .linearize import Pencil
from .polymat import PolyMatrix, RatMatrix, least_order, rank
from .sysmat import PolySystemMatrix

L = LAMBDA


def _p(*coeffs) -> Poly:
    return Poly(list(coeffs))


def first_psm() -> PolySystemMatrix:
    """Minimal, both properness conditions, yet not strongly irreducible; G = -1/lambda."""
    a = PolyMatrix.from_rows([[L + 1, L * L], [1, L]])
    b = PolyMatrix.from_rows([[1], [0]])
    c = PolyMatrix.from_rows([[0, 1]])
    return PolySystemMatrix(a, b, c, PolyMatrix(1, 1))


def second_psm() -> PolySystemMatrix:
    """Strongly irreducible, no properness condition; G = 1/lambda - lambda^2 + lambda."""
    a = PolyMatrix.from_rows([[L, 0, 0], [0, 1, 0], [0, 1, 1]])
    b = PolyMatrix.from_rows([[1], [L], [1]])
    c = PolyMatrix.from_rows([[1, 0, L]])
    return PolySystemMatrix(a, b, c, PolyMatrix(1, 1))


def diag_example() -> RatMatrix:
    """diag(lambda + 1/lambda, 0)."""
    return RatMatrix.from_rows([[RatFn(L * L + 1, L), 0], [0, 0]])


def k_u(u: int) -> PolyMatrix:
    """u x (u+1) bidiagonal [1 lambda] pencil."""
    k = PolyMatrix(u, u + 1)
    for i in range(u):
        k.entries[i][i] = Poly.const(1)
        k.entries[i][i + 1] = L
    return k


def l_eps_eta(eps: int, eta: int) -> Pencil:
    """[[lambda, e_1^T], [-e_1, diag(lambda, K_eps, K_eta^T)]] with state size 1."""
    size = 2 + eps + eta
    d = PolyMatrix(size, size)
    d.entries[0][0] = L
    ke, kh = k_u(eps), k_u(eta).T()
    for i in range(eps):
        for j in range(eps + 1):
            d.entries[1 + i][1 + j] = ke.entries[i][j]
    for i in range(eta + 1):
        for j in range(eta):
            d.entries[1 + eps + i][2 + eps + j] = kh.entries[i][j]
    a = PolyMatrix.from_rows([[L]])
    b = PolyMatrix(1, size)
    b.entries[0][0] = Poly.const(1)
    c = PolyMatrix(size, 1)
    c.entries[0][0] = Poly.const(1)
    return Pencil.from_poly(PolyMatrix.block([[a, b], [-c, d]]), 1)


# ---------------------------------------------------------------------------
# random fixtures


def _rand_poly(rng: random.Random, deg: int, lo: int = -3, hi: int = 3) -> Poly:
    return Poly([rng.randint(lo, hi) for _ in range(deg + 1)])


def _rand_proper(rng: random.Random, poles: List[int]) -> RatFn:
    if not poles or rng.random() < 0.5:
        return RatFn.const(0)
    a = rng.choice(poles)
    return RatFn(Poly.const(rng.choice([-2, -1, 1, 2])), _p(-a, 1))


def random_singular(rng: random.Random, max_rows: int = 3, max_cols: int = 4, max_deg: int = 3,
                    max_order: int = 3, min_poly_deg: int = 2) -> RatMatrix:
    """G = P Q with inner size below min(p, m): singular, polynomial part of degree >= 2."""
    while True:
        p, m = rng.randint(1, max_rows), rng.randint(2, max_cols)
        r = rng.randint(1, max(1, min(p, m) - 1)) if min(p, m) > 1 else 1
        if r >= min(p, m) and p == m:
            continue
        poles = rng.sample([-1, 0, 1, 2], rng.randint(0, 2))
        left = RatMatrix(p, r, [[RatFn.from_poly(_rand_poly(rng, 1)) for _ in range(r)] for _ in range(p)])
        right = RatMatrix(r, m, [[RatFn.from_poly(_rand_poly(rng, rng.randint(0, max_deg - 1)))
                                  + _rand_proper(rng, poles) for _ in range(m)] for _ in range(r)])
        g = left * right
        if g.is_zero() or any(x.num.degree > max_deg for row in g.entries for x in row):
            continue
        d, _ = g.decompose()
        if d.is_zero() or int(d.degree()) < min_poly_deg:
            continue
        if least_order(g) > max_order:
            continue
        return g


def random_rational(rng: random.Random, max_size: int = 4, max_deg: int = 3) -> RatMatrix:
    """Random p x m rational matrix, often rank deficient, numerator degrees <= max_deg."""
    p, m = rng.randint(1, max_size), rng.randint(1, max_size)
    r = rng.randint(1, min(p, m))
    poles = rng.sample([-1, 0, 1], rng.randint(0, 1))
    left = RatMatrix(p, r, [[RatFn.from_poly(_rand_poly(rng, rng.randint(0, 1))) for _ in range(r)]
                            for _ in range(p)])
    right = RatMatrix(r, m, [[RatFn.from_poly(_rand_poly(rng, rng.randint(0, 2))) + _rand_proper(rng, poles)
                              for _ in range(m)] for _ in range(r)])
    g = left * right
    if any(x.num.degree > max_deg for row in g.entries for x in row):
        return random_rational(rng, max_size, max_deg)
    return g


def random_square(rng: random.Random, size: int = 2, deg: int = 3, max_order: int = 2,
                  singular: bool = True) -> RatMatrix:
    """Square G whose polynomial part has degree exactly ``deg``."""
    while True:
        if singular:
            u = RatMatrix(size, 1, [[RatFn.from_poly(_rand_poly(rng, 1))] for _ in range(size)])
            poles = rng.sample([-1, 0, 1], 1)
            v = RatMatrix(1, size, [[RatFn.from_poly(_rand_poly(rng, deg - 1)) + _rand_proper(rng, poles)
                                     for _ in range(size)]])
            g = u * v
        else:
            poles = rng.sample([-1, 0, 1], 1)
            g = RatMatrix(size, size, [[RatFn.from_poly(_rand_poly(rng, deg)) + _rand_proper(rng, poles)
                                        for _ in range(size)] for _ in range(size)])
        d, _ = g.decompose()
        if d.is_zero() or int(d.degree()) != deg or least_order(g) > max_order:
            continue
        if singular and rank(g) == 0:
            continue
        return g
