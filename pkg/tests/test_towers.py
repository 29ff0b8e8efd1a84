import pytest

from equideform.errors import HypothesisError
from equideform.series import TruncatedSeries
from equideform.smooth_local import different_from_jumps, ramification_profile
from equideform.towers import Laurent, tower_action, tower_upper_jumps, witt_carry, witt_layer


def test_witt_carry_small_primes():
    assert witt_carry(2) == [0, 1]
    assert witt_carry(3) == [0, 1, 1]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_witt_layer_degree(p):
    g, r0 = witt_layer(p)
    assert len(r0) - 1 == p * p - p + 1
    assert len(g) - 1 == p - 1


def test_laurent_arithmetic():
    a = Laurent.monomial(-2, 3, 6)
    b = Laurent.monomial(2, 3, 6)
    assert (a * b).as_series().truncate(4) == TruncatedSeries.one(3, 4)
    assert (a**2).valuation() == -4


@pytest.mark.parametrize(
    "p,m0,m1,upper", [(2, 1, 3, (1, 2)), (2, 1, 5, (1, 3)), (3, 1, 7, (1, 3)), (3, 2, 14, (2, 6))]
)
def test_upper_jumps(p, m0, m1, upper):
    assert tower_upper_jumps(p, m0, m1) == upper


@pytest.mark.parametrize("p,m0,m1", [(3, 1, 4), (3, 3, 9), (2, 1, 2), (3, 1, 16)])
def test_unrealisable_jumps(p, m0, m1):
    with pytest.raises(HypothesisError):
        tower_upper_jumps(p, m0, m1)


@pytest.mark.parametrize("p,m0,m1", [(2, 1, 3), (2, 1, 5), (2, 3, 9), (3, 1, 7), (3, 1, 10), (3, 2, 14)])
def test_tower_jumps(p, m0, m1):
    a = tower_action(p, m0, m1)
    prof = ramification_profile(a)
    assert prof.jumps == (m0, m1)
    assert prof.group_order == p * p
    assert prof.different == different_from_jumps(p, (m0, m1))
    assert a.generator.power(p * p).is_identity()
    assert not a.generator.power(p).is_identity()
