import pytest

from equideform.errors import ExistenceFails, HypothesisError
from equideform.series import TruncatedSeries, ZeroToPrecision
from equideform.smooth_local import (
    INF,
    SmoothAutomorphism,
    VectorField,
    act_on_vector_field,
    ext1_dimension_smooth,
    norm_parameter,
    predict_trace_valuation,
    ramification_profile,
    standard_action,
    theta,
    tower_trace_identity_check,
    trace,
    trace_zero_basis_construct,
    trace_zero_basis_exists,
    trace_zero_with_valuation,
    trivial_action,
)
from equideform.towers import tower_action


def vf(coeffs, p, prec):
    return VectorField(TruncatedSeries(coeffs, p, prec))


def test_standard_action_series():
    a = standard_action(3, 1, precision=5)
    assert a.generator.s == TruncatedSeries([0, 1, 2, 1, 2], 3, 5)


def test_standard_action_rejects_p_dividing_m():
    with pytest.raises(HypothesisError):
        standard_action(3, 3)


def test_order_two_generator_is_involution():
    a = standard_action(2, 1)
    assert a.generator.then(a.generator).is_identity()


@pytest.mark.parametrize("p,m,d", [(3, 2, 6), (2, 1, 2), (5, 3, 16), (3, 1, 4)])
def test_profile_of_standard_actions(p, m, d):
    prof = ramification_profile(standard_action(p, m))
    assert prof.jumps == (m,) and prof.conductor == m and prof.different == d and prof.group_order == p


def test_trivial_profile():
    prof = ramification_profile(trivial_action(3, 20))
    assert prof.conductor is INF and prof.different == 0 and prof.jumps == ()


@pytest.mark.parametrize("p,m", [(3, 1), (3, 2), (5, 2), (2, 3)])
def test_action_on_dx(p, m):
    a = standard_action(p, m)
    N = a.precision - 1
    got = act_on_vector_field(a.generator, vf([1], p, N)).f
    want = (TruncatedSeries.one(p, N) + TruncatedSeries.monomial(m, p, N)).rational_power(m + 1, m)
    assert got == want.truncate(got.precision)


def test_identity_acts_trivially():
    phi = vf([2, 0, 1, 1], 5, 8)
    ident = SmoothAutomorphism.identity(5, 9)
    assert act_on_vector_field(ident, phi).f == phi.f


def test_x_squared_field_is_invariant_for_m1():
    a = standard_action(3, 1)
    N = a.precision - 1
    phi = VectorField(TruncatedSeries.monomial(2, 3, N))
    got = act_on_vector_field(a.generator, phi)
    assert got.f == phi.f.truncate(got.precision)


def test_trace_of_dx_has_valuation_two():
    a = standard_action(3, 1)
    t = trace(a, vf([1], 3, a.precision - 1))
    assert t.f.valuation() == 2


def test_non_faithful_trace_vanishes():
    a = standard_action(3, 2, n=2)
    assert not a.is_faithful
    assert trace(a, vf([1, 2, 1], 3, a.precision - 1)).is_zero()


@pytest.mark.parametrize("p,m", [(2, 1), (3, 2), (5, 4)])
def test_trace_kills_coboundaries(p, m):
    a = standard_action(p, m)
    N = a.precision - 1
    phi = vf([(3 * i + 1) % p for i in range(N)], p, N)
    cob = phi - act_on_vector_field(a.generator, phi)
    assert trace(a, cob).is_zero()


def test_norm_parameter():
    a = standard_action(3, 1)
    z = norm_parameter(a)
    assert z.valuation() == 3
    assert z.compose(a.generator.s.truncate(z.precision)) == z.truncate(z.precision)
    assert norm_parameter(trivial_action(3, 12)) == TruncatedSeries.x(3, 12)


def test_theta_valuations():
    a = standard_action(3, 1)
    assert theta(a, vf([1], 3, a.precision - 1)).valuation() == 2
    b = standard_action(2, 1)
    v = theta(b, vf([1], 2, b.precision - 1)).valuation()
    assert isinstance(v, int)


def test_theta_of_trace_zero_field_is_zero():
    a = standard_action(3, 2)
    w = trace_zero_basis_construct(a)
    assert isinstance(theta(a, w).valuation(), ZeroToPrecision)


def test_predict_trace_valuation_examples():
    prof = ramification_profile(standard_action(3, 1))
    assert predict_trace_valuation(prof, 0) == 2
    assert predict_trace_valuation(prof, 3) == 3
    with pytest.raises(HypothesisError):
        predict_trace_valuation(ramification_profile(standard_action(3, 2)), 0)


@pytest.mark.parametrize("q", [1, 2, 4, 5, 7])
def test_trace_zero_with_valuation(q):
    a = standard_action(3, 1)
    phi = trace_zero_with_valuation(a, q)
    assert phi.f.valuation() == q
    assert trace(a, phi).is_zero()


def test_trace_zero_with_valuation_rejects_p_dividing_q():
    with pytest.raises(HypothesisError):
        trace_zero_with_valuation(standard_action(3, 1), 3)


@pytest.mark.parametrize(
    "p,m,expected", [(3, 1, False), (3, 2, True), (2, 1, True), (2, 3, True), (2, 5, True), (5, 2, False)]
)
def test_trace_zero_basis_exists(p, m, expected):
    assert trace_zero_basis_exists(standard_action(p, m)) is expected


def test_trace_zero_basis_construct():
    a = standard_action(3, 2)
    phi = trace_zero_basis_construct(a)
    assert phi.f[0] != 0 and trace(a, phi).is_zero()
    b = standard_action(3, 1, n=2)
    assert trace_zero_basis_construct(b).f[0] != 0
    with pytest.raises(ExistenceFails):
        trace_zero_basis_construct(standard_action(3, 1))


@pytest.mark.parametrize("p,m,n,dim", [(3, 2, 1, 2), (3, 1, 1, 0), (2, 1, 1, 1)])
def test_ext1_dimension(p, m, n, dim):
    assert ext1_dimension_smooth(ramification_profile(standard_action(p, m)), n) == dim


def test_ext1_dimension_needs_faithful():
    with pytest.raises(HypothesisError):
        ext1_dimension_smooth(ramification_profile(standard_action(3, 2)), 2)


@pytest.mark.parametrize("p,m0,m1", [(2, 1, 3), (3, 1, 7)])
def test_tower_trace_identity(p, m0, m1):
    a = tower_action(p, m0, m1)
    N = a.precision - 1
    assert tower_trace_identity_check(a, vf([1], p, N))
    assert tower_trace_identity_check(a, VectorField(TruncatedSeries.zero(p, N)))


def test_tower_trace_identity_degenerate():
    a = standard_action(3, 2)
    assert tower_trace_identity_check(a, vf([1, 1], 3, a.precision - 1))
