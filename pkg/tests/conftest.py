import pytest

from ratlin.exactalg import LAMBDA, Poly, RatFn

L = LAMBDA


def rf(num, den=(1,)):
    """RatFn from low-to-high coefficient lists."""
    return RatFn(Poly(list(num)), Poly(list(den)))


@pytest.fixture
def lam():
    return LAMBDA
