import pytest
from hypothesis import given, settings, strategies as st

from equideform.errors import HypothesisError, ModulusMismatch, PrecisionError
from equideform.series import FpScalar, TruncatedSeries, ZeroToPrecision, check_prime


def S(coeffs, p=3, prec=None):
    return TruncatedSeries(coeffs, p, prec)


PRIMES = st.sampled_from([2, 3, 5, 7, 101])


@st.composite
def series_triple(draw, prec=8):
    p = draw(PRIMES)
    coeffs = st.lists(st.integers(0, p - 1), min_size=prec, max_size=prec)
    return p, [S(draw(coeffs), p, prec) for _ in range(3)]


@st.composite
def unit_series(draw, prec=10):
    p = draw(PRIMES)
    tail = draw(st.lists(st.integers(0, p - 1), min_size=prec - 1, max_size=prec - 1))
    return S([1] + tail, p, prec)


@st.composite
def parameter(draw, prec=10, p=None):
    p = p or draw(PRIMES)
    tail = draw(st.lists(st.integers(0, p - 1), min_size=prec - 2, max_size=prec - 2))
    lead = draw(st.integers(1, p - 1))
    return S([0, lead] + tail, p, prec)


def test_addition_examples():
    assert S([1, 1]) + S([1, 2]) == S([2, 0])
    s = S([1, 2, 0, 1], prec=4)
    assert s + TruncatedSeries.zero(3, 4) == s
    assert (S([0, 0, 1]) + S([0, 0, 2])).is_zero()


def test_precision_is_minimum():
    assert (S([1, 1], prec=5) + S([1], prec=3)).precision == 3
    assert (S([1, 1], prec=5) * S([1], prec=3)).precision == 3


def test_modulus_mismatch():
    with pytest.raises(ModulusMismatch):
        S([1], 3) + S([1], 5)


def test_inverse_examples():
    assert S([1, 1], prec=4).inverse() == S([1, 2, 1, 2])
    assert S([0, 1], prec=3) * S([0, 1], prec=3) == S([0, 0, 1])
    with pytest.raises(HypothesisError):
        S([0, 1], prec=4).inverse()


def test_compose_examples():
    f, g = S([0, 0, 1], prec=4), S([0, 1, 1], prec=4)
    assert f.compose(g) == S([0, 0, 1, 2])
    x = TruncatedSeries.x(3, 4)
    assert f.compose(x) == f
    assert x.compose(g) == g
    with pytest.raises(HypothesisError):
        f.compose(S([1, 1], prec=4))


def test_derivative_and_valuation():
    d = S([0, 0, 0, 1], prec=5).derivative()
    assert d.is_zero() and d.precision == 4
    assert S([0, 0, 1, 0, 0, 1]).valuation() == 2
    v = TruncatedSeries.zero(3, 10).valuation()
    assert v == ZeroToPrecision(10)
    assert str(v) == "indeterminate-at-precision-10"
    assert not isinstance(v, int)


def test_nth_root_examples():
    assert S([1, 1], prec=3).nth_root(2) == S([1, 2, 1])
    u = S([1, 2, 0, 1], prec=4)
    assert u.nth_root(1) == u
    assert (S([1, 1], prec=6) ** 2).nth_root(2) == S([1, 1], prec=6)
    with pytest.raises(HypothesisError):
        S([1, 1], prec=4).nth_root(3)
    with pytest.raises(HypothesisError):
        S([2, 1], prec=4).nth_root(2)


def test_rational_power_examples():
    u = S([1, 1], prec=3)
    assert u.rational_power(1, 2) == u.nth_root(2)
    assert S([1, 1], prec=3).rational_power(2, 1) == S([1, 2, 1])
    with pytest.raises(HypothesisError):
        S([2, 0, 1], prec=5).rational_power(1, 2)


def test_rational_power_non_unit_constant():
    # 4 = 2^2 mod 7, so (4 + x)^(1/2) exists with constant 2 or 5
    r = S([4, 1], 7, 6).rational_power(1, 2)
    assert r**2 == S([4, 1], 7, 6)


def test_reversion_examples():
    x = TruncatedSeries.x(3, 4)
    assert x.reversion() == x
    s = S([0, 1, 1], prec=4)
    assert s.reversion() == S([0, 1, 2, 2])
    assert s.compose(s.reversion()) == x
    with pytest.raises(HypothesisError):
        S([0, 0, 1], prec=4).reversion()


def test_derivative_of_p_power_is_exactly_zero():
    for p in (2, 3, 5, 7):
        assert TruncatedSeries.monomial(p, p, 3 * p).derivative().is_zero()


def test_agrees_with_refuses_unknown_precision():
    a = S([1, 2], prec=3)
    assert a.agrees_with(S([1, 2, 1], prec=5), 2)
    with pytest.raises(PrecisionError):
        a.agrees_with(S([1, 2], prec=5), 4)


def test_check_prime():
    assert check_prime(101) == 101
    for bad in (1, 4, 9, -3, 2.0):
        with pytest.raises(HypothesisError):
            check_prime(bad)


def test_scalars():
    a = FpScalar(2, 5)
    assert a * a.inverse() == 1
    assert int(a + 4) == 1
    with pytest.raises(ZeroDivisionError):
        FpScalar(0, 5).inverse()


@settings(max_examples=60, deadline=None, derandomize=True)
@given(series_triple())
def test_ring_axioms(data):
    p, (a, b, c) = data
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert (a - a).is_zero()


@settings(max_examples=40, deadline=None, derandomize=True)
@given(st.data())
def test_compose_associative(data):
    p = data.draw(PRIMES)
    f = data.draw(parameter(8, p))
    g = data.draw(parameter(8, p))
    h = data.draw(parameter(8, p))
    assert f.compose(g).compose(h) == f.compose(g.compose(h))


@settings(max_examples=40, deadline=None, derandomize=True)
@given(unit_series(), st.integers(1, 12))
def test_nth_root_round_trip(u, m):
    if m % u.p == 0:
        m += 1
    assert u.nth_root(m) ** m == u


@settings(max_examples=40, deadline=None, derandomize=True)
@given(parameter())
def test_reversion_round_trip(s):
    r = s.reversion()
    x = TruncatedSeries.x(s.p, s.precision)
    assert s.compose(r) == x and r.compose(s) == x


@settings(max_examples=40, deadline=None, derandomize=True)
@given(series_triple())
def test_leibniz(data):
    _, (a, b, _) = data
    assert (a * b).derivative() == a.derivative() * b.truncate(7) + a.truncate(7) * b.derivative()


@settings(max_examples=40, deadline=None, derandomize=True)
@given(unit_series())
def test_inverse_property(u):
    assert u * u.inverse() == TruncatedSeries.one(u.p, u.precision)


def test_compose_matches_naive_large_prime():
    p, n = 101, 40
    f = TruncatedSeries([(7 * i * i + 3) % p for i in range(n)], p, n)
    g = TruncatedSeries([0] + [(5 * i + 1) % p for i in range(1, n)], p, n)
    naive = TruncatedSeries.zero(p, n)
    power = TruncatedSeries.one(p, n)
    for c in f.coeffs:
        naive = naive + power * c
        power = power * g
    assert f.compose(g) == naive
