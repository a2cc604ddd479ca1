"""Exact scalars, univariate polynomials and rational functions over Q.

Coefficients are flint ``fmpq`` values.  ``Poly`` and ``RatFn`` are thin
immutable wrappers that keep a canonical form at all times, so equality
is structural and hashing is safe.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

from flint import fmpq, fmpq_poly, fmpz

Rat = fmpq

# Degree sentinels.  float infinities order correctly against ints and never
# masquerade as real degrees in arithmetic.
NEG_INF = float("-inf")
POS_INF = float("inf")

Scalar = Union[int, Fraction, fmpq, fmpz, str]


def rat(x: Scalar) -> fmpq:
    """Coerce ``x`` to an exact rational; strings use the ``"p"``/``"p/q"`` syntax."""
    if isinstance(x, fmpq):
        return x
    if isinstance(x, (int, fmpz)):
        return fmpq(x)
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            p, q = s.split("/")
            if int(q) == 0:
                raise ValueError(f"zero denominator in {x!r}")
            return fmpq(int(p), int(q))
        return fmpq(int(s))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def rat_str(x: fmpq) -> str:
    x = rat(x)
    return str(x.p) if x.q == 1 else f"{x.p}/{x.q}"


class Poly:
    """Polynomial in lambda with rational coefficients, low degree first."""

    __slots__ = ("_p",)

    def __init__(self, coeffs: Union[Iterable[Scalar], fmpq_poly, None] = None):
        if coeffs is None:
            self._p = fmpq_poly()
        elif isinstance(coeffs, fmpq_poly):
            self._p = coeffs
        else:
            self._p = fmpq_poly([rat(c) for c in coeffs])

    @staticmethod
    def const(c: Scalar) -> "Poly":
        return Poly(fmpq_poly([rat(c)]))

    @staticmethod
    def monomial(k: int, c: Scalar = 1) -> "Poly":
        return Poly(fmpq_poly([0] * k + [rat(c)]))

    @property
    def coeffs(self) -> tuple:
        return tuple(self._p.coeffs())

    @property
    def degree(self):
        d = self._p.degree()
        return NEG_INF if d < 0 else d

    def is_zero(self) -> bool:
        return self._p.degree() < 0

    def is_const(self) -> bool:
        return self._p.degree() <= 0

    def coeff(self, i: int) -> fmpq:
        return self._p[i] if i >= 0 else fmpq(0)

    def lc(self) -> fmpq:
        d = self._p.degree()
        return self._p[d] if d >= 0 else fmpq(0)

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return Poly(self._p / self.lc())

    def valuation(self):
        """Order of vanishing at lambda = 0 (POS_INF for zero)."""
        if self.is_zero():
            return POS_INF
        i = 0
        while self._p[i] == 0:
            i += 1
        return i

    def reverse(self, n: int) -> "Poly":
        """lambda^n * p(1/lambda) for n >= degree."""
        cs = list(self._p.coeffs())
        cs += [fmpq(0)] * (n + 1 - len(cs))
        return Poly(fmpq_poly(cs[::-1]))

    def shift(self, k: int) -> "Poly":
        """Multiply by lambda^k (k >= 0)."""
        if k == 0 or self.is_zero():
            return self
        return Poly(fmpq_poly([0] * k + list(self._p.coeffs())))

    def __call__(self, x: Scalar) -> fmpq:
        return self._p(rat(x))

    def divrem(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q, r = divmod(self._p, other._p)
        return Poly(q), Poly(r)

    def gcd(self, other: "Poly") -> "Poly":
        # flint returns the monic gcd, and 0 for gcd(0, 0)
        return Poly(self._p.gcd(other._p))

    def content_scale(self) -> fmpq:
        """Positive rational c with p / c primitive over Z."""
        if self.is_zero():
            return fmpq(1)
        num = self._p.numer()
        g = fmpz(0)
        for c in num.coeffs():
            g = g.gcd(c)
        return fmpq(g, self._p.denom())

    def __add__(self, o):
        if isinstance(o, RatFn):
            return NotImplemented
        return Poly(self._p + _pp(o))

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, RatFn):
            return NotImplemented
        return Poly(self._p - _pp(o))

    def __rsub__(self, o):
        if isinstance(o, RatFn):
            return NotImplemented
        return Poly(_pp(o) - self._p)

    def __mul__(self, o):
        if isinstance(o, RatFn):
            return NotImplemented
        return Poly(self._p * _pp(o))

    __rmul__ = __mul__

    def __neg__(self):
        return Poly(-self._p)

    def __pow__(self, k: int):
        return Poly(self._p ** k)

    def __floordiv__(self, o):
        return self.divrem(_as_poly(o))[0]

    def __mod__(self, o):
        return self.divrem(_as_poly(o))[1]

    def __eq__(self, o):
        if isinstance(o, Poly):
            return self._p == o._p
        if isinstance(o, (int, fmpq, fmpz, Fraction)):
            return self._p == fmpq_poly([rat(o)])
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"Poly({self.to_text()})"

    def to_text(self, var: str = "l") -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i, c in enumerate(self._p.coeffs()):
            if c == 0:
                continue
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if mono and c == 1:
                t = mono
            elif mono and c == -1:
                t = "-" + mono
            else:
                t = rat_str(c) + ("*" + mono if mono else "")
            terms.append(t)
        s = " + ".join(reversed(terms))
        return s.replace("+ -", "- ")

    def to_json(self) -> list:
        return [rat_str(c) for c in self._p.coeffs()]

    @staticmethod
    def from_json(data: Sequence[str]) -> "Poly":
        return Poly([rat(c) for c in data])


def _pp(o) -> fmpq_poly:
    if isinstance(o, Poly):
        return o._p
    return fmpq_poly([rat(o)])


def _as_poly(o) -> Poly:
    return o if isinstance(o, Poly) else Poly.const(o)


ZERO_POLY = Poly()
ONE_POLY = Poly.const(1)
LAMBDA = Poly([0, 1])


class RatFn:
    """Reduced rational function num/den with monic den."""

    __slots__ = ("num", "den")

    def __init__(self, num=None, den=None, _canonical: bool = False):
        num = ZERO_POLY if num is None else _as_poly(num)
        den = ONE_POLY if den is None else _as_poly(den)
        if _canonical:
            self.num, self.den = num, den
            return
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = ZERO_POLY, ONE_POLY
            return
        if not den.is_const():
            g = num.gcd(den)
            if not g.is_const():
                num, den = num // g, den // g
        c = den.lc()
        if c != 1:
            num, den = Poly(num._p / c), Poly(den._p / c)
        self.num, self.den = num, den

    @staticmethod
    def const(c: Scalar) -> "RatFn":
        return RatFn(Poly.const(c), ONE_POLY, _canonical=True) if rat(c) != 0 else RatFn()

    @staticmethod
    def from_poly(p: Poly) -> "RatFn":
        return RatFn(p, ONE_POLY, _canonical=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.is_const()

    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree

    def is_strictly_proper(self) -> bool:
        return self.num.degree < self.den.degree

    def __call__(self, x: Scalar) -> fmpq:
        x = rat(x)
        d = self.den(x)
        if d == 0:
            raise ZeroDivisionError(f"pole at {rat_str(x)}")
        return self.num(x) / d

    def valuation_at_zero(self):
        """Order at lambda = 0 (positive for zeros, negative for poles)."""
        if self.is_zero():
            return POS_INF
        return self.num.valuation() - self.den.valuation()

    def at_inverse(self) -> "RatFn":
        """The function mu -> g(1/mu)."""
        if self.is_zero():
            return self
        dn, dd = self.num.degree, self.den.degree
        n = dn if dn >= dd else dd
        return RatFn(self.num.reverse(n), self.den.reverse(n))

    def __add__(self, o):
        o = _as_ratfn(o)
        if self.den == o.den:
            if self.den.is_const():
                return RatFn(self.num + o.num, ONE_POLY, _canonical=True)
            return RatFn(self.num + o.num, self.den)
        if o.den.is_const():
            return RatFn(self.num + o.num * self.den, self.den, _canonical=True)
        if self.den.is_const():
            return RatFn(self.num * o.den + o.num, o.den, _canonical=True)
        return RatFn(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFn(-self.num, self.den, _canonical=True)

    def __sub__(self, o):
        return self + (-_as_ratfn(o))

    def __rsub__(self, o):
        return _as_ratfn(o) + (-self)

    def __mul__(self, o):
        o = _as_ratfn(o)
        if self.is_zero() or o.is_zero():
            return RatFn()
        if self.den.is_const() and o.den.is_const():
            return RatFn(self.num * o.num, ONE_POLY, _canonical=True)
        return RatFn(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inv(self) -> "RatFn":
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero rational function")
        return RatFn(self.den, self.num)

    def __truediv__(self, o):
        return self * _as_ratfn(o).inv()

    def __rtruediv__(self, o):
        return _as_ratfn(o) * self.inv()

    def __eq__(self, o):
        if isinstance(o, RatFn):
            return self.num == o.num and self.den == o.den
        if isinstance(o, (Poly, int, fmpq, fmpz, Fraction)):
            return self == _as_ratfn(o)
        return NotImplemented

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"RatFn({self.to_text()})"

    def to_text(self, var: str = "l") -> str:
        if self.den == ONE_POLY:
            return self.num.to_text(var)
        return f"({self.num.to_text(var)})/({self.den.to_text(var)})"

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @staticmethod
    def from_json(data) -> "RatFn":
        return RatFn(Poly.from_json(data["num"]), Poly.from_json(data.get("den", ["1"])))


def _as_ratfn(o) -> RatFn:
    if isinstance(o, RatFn):
        return o
    if isinstance(o, Poly):
        return RatFn.from_poly(o)
    return RatFn.const(o)


def as_ratfn(o) -> RatFn:
    return _as_ratfn(o)


def poly_arith(a: Poly, b: Poly, kind: str):
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "divrem":
        return a.divrem(b)
    if kind == "gcd":
        return a.gcd(b)
    raise ValueError(f"unknown polynomial operation {kind!r}")


def ratfn_arith(a: RatFn, b: RatFn, kind: str) -> RatFn:
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise ValueError(f"unknown rational-function operation {kind!r}")


def poly_rat_decompose(g: RatFn):
    """Split g into its polynomial part and strictly proper remainder."""
    q, r = g.num.divrem(g.den)
    return q, RatFn(r, g.den)


def valuation_at_infinity(g: RatFn):
    """deg den - deg num, the order of g at infinity; POS_INF for g = 0."""
    if g.is_zero():
        return POS_INF
    return g.den.degree - g.num.degree


def series_coeffs(g: RatFn, count: int) -> list:
    """First ``count`` Taylor coefficients of g at 0; g must be regular there."""
    d0 = g.den.coeff(0)
    if d0 == 0:
        raise ValueError("rational function has a pole at 0")
    num = g.num.coeffs
    den = g.den.coeffs
    out = []
    inv0 = 1 / d0
    for k in range(count):
        acc = num[k] if k < len(num) else fmpq(0)
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out.append(acc * inv0)
    return out
