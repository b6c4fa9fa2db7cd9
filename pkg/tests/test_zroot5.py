import math
from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import given, strategies as st

from combsplit.zroot5 import (
    SQRT5,
    TAU,
    FourierModulePoint,
    QuadraticInt,
    frac_phase,
    frac_phases,
    sign_of,
)

coords = st.integers(min_value=-10**6, max_value=10**6)
small_coords = st.integers(min_value=-1000, max_value=1000)


def qi(m, n):
    return QuadraticInt(m, n)


def test_mul_examples():
    assert (qi(0, 1) * qi(0, 1)).key() == (1, 1)
    assert (qi(1, 1) * qi(1, 1)).key() == (2, 3)
    assert (qi(2, -1) * qi(0, 1)).key() == (-1, 1)


def test_star_examples():
    assert qi(0, 1).star().key() == (1, -1)
    assert qi(2, 3).star().key() == (5, -3)


def test_embed_examples():
    assert qi(0, 1).embed() == pytest.approx(1.6180339887, abs=1e-9)
    assert qi(0, 1).embed_star() == pytest.approx(-0.6180339887, abs=1e-9)
    assert qi(-1, 1).embed() == pytest.approx(0.6180339887, abs=1e-9)


def _phase_oracle(k: FourierModulePoint, x: QuadraticInt) -> float:
    # independent extended-precision evaluation of frac(k*x)
    getcontext().prec = 60
    sqrt5 = Decimal(5).sqrt()
    a, b, m, n = k.a, k.b, x.m, x.n
    A = a * m + b * n
    B = a * n + b * m + b * n
    value = ((2 * A + B) * sqrt5 + 5 * B) / 10
    return float(value - int(value.to_integral_value(rounding="ROUND_FLOOR")))


def test_frac_phase_examples():
    k10, x10 = FourierModulePoint(1, 0), qi(1, 0)
    assert frac_phase(k10, x10) == pytest.approx(0.4472135955, abs=1e-10)
    assert frac_phase(k10, x10) == pytest.approx(_phase_oracle(k10, x10), abs=1e-12)

    assert frac_phase(FourierModulePoint(2, 3), qi(0, 0)) == 0.0

    k01, x01 = FourierModulePoint(0, 1), qi(0, 1)
    assert frac_phase(k01, x01) == pytest.approx(0.1708203932, abs=1e-10)
    assert frac_phase(k01, x01) == pytest.approx(_phase_oracle(k01, x01), abs=1e-12)


@given(coords, coords, coords, coords)
def test_star_is_ring_homomorphism(m1, n1, m2, n2):
    x, y = qi(m1, n1), qi(m2, n2)
    assert (x * y).star() == x.star() * y.star()
    assert (x + y).star() == x.star() + y.star()
    assert x.star().star() == x


@given(coords, coords, coords, coords)
def test_embed_respects_multiplication(m1, n1, m2, n2):
    x, y = qi(m1, n1), qi(m2, n2)
    product = (x * y).embed()
    direct = x.embed() * y.embed()
    assert abs(product - direct) <= 1e-9 * max(1.0, abs(direct))


@given(small_coords, small_coords, st.integers(-5, 5), st.integers(-5, 5))
def test_frac_phase_matches_direct_exponential(m, n, a, b):
    k, x = FourierModulePoint(a, b), qi(m, n)
    via_phase = np.exp(2j * math.pi * frac_phase(k, x))
    direct = np.exp(2j * math.pi * k.value() * x.embed())
    assert abs(via_phase - direct) < 1e-6


def test_frac_phase_huge_argument_matches_oracle():
    # head terms up to order 1e18, far beyond reliable double precision
    cases = [
        (FourierModulePoint(3, 2), qi(10**8, 3 * 10**8)),
        (FourierModulePoint(3, 2), qi(5 * 10**16, 5 * 10**16)),
        (FourierModulePoint(-2, 1), qi(-(10**17), 3 * 10**17)),
    ]
    for k, x in cases:
        assert abs(2 * (k.a * x.m + k.b * x.n)
                   + (k.a * x.n + k.b * x.m + k.b * x.n)) <= 10**18
        assert frac_phase(k, x) == pytest.approx(_phase_oracle(k, x), abs=1e-12)


def test_frac_phases_vectorized_matches_scalar():
    k = FourierModulePoint(1, 1)
    ms, ns = [0, 3, -5, 144], [1, -2, 8, 89]
    vec = frac_phases(k, ms, ns)
    for i, (m, n) in enumerate(zip(ms, ns)):
        assert vec[i] == frac_phase(k, qi(m, n))


@given(coords, coords)
def test_sign_of_matches_embedding(m, n):
    s = sign_of(m, n)
    v = m + n * TAU
    if s == 0:
        assert m == 0 and n == 0
    elif abs(v) > 1e-6:
        assert s == (1 if v > 0 else -1)


@given(coords, coords, coords, coords)
def test_distinct_elements_are_strictly_ordered(m1, n1, m2, n2):
    x, y = qi(m1, n1), qi(m2, n2)
    if (m1, n1) == (m2, n2):
        assert not (x < y) and not (y < x)
    else:
        assert (x < y) != (y < x)


def test_module_point_star_sign_convention():
    k = FourierModulePoint(1, 0)
    assert k.value() == pytest.approx(1 / SQRT5)
    assert k.star_value() == pytest.approx(-1 / SQRT5)
    assert FourierModulePoint(0, 0).is_zero()
    assert not FourierModulePoint(1, 0).is_zero()
