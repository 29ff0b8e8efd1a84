"""Cyclic p-group actions on k[[x]] and the trace calculus on vector fields.

A vector field ``f dx^vee`` is stored as the series ``f``; an automorphism
``sigma`` acts on it by ``f |-> f(sigma(x)) / sigma'(x)``.  For cyclic
groups the direction of the action is immaterial to traces and to H^1,
which is all this module computes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import EquideformError, ExistenceFails, HypothesisError, PrecisionError
from .linalg import matmul_mod, solve
from .series import TruncatedSeries, ZeroToPrecision, _conv, check_prime


class _Infinity:
    """Conductor of a trivial action."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    __str__ = __repr__

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("inf")

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(v) -> bool:
    return v is INF


def default_precision(p: int, different: int) -> int:
    return 4 * (different + 1) * p


@dataclass(frozen=True, eq=False)
class SmoothAutomorphism:
    """The automorphism ``x |-> s(x)`` of k[[x]]."""

    s: TruncatedSeries

    def __post_init__(self):
        s = self.s
        if s.precision < 2 or s[0] != 0 or s[1] == 0:
            raise HypothesisError("automorphism needs s(0) = 0 and a unit linear term")

    @property
    def p(self) -> int:
        return self.s.p

    @property
    def precision(self) -> int:
        return self.s.precision

    @classmethod
    def identity(cls, p: int, precision: int) -> SmoothAutomorphism:
        return cls(TruncatedSeries.x(p, precision))

    def then(self, other: SmoothAutomorphism) -> SmoothAutomorphism:
        """Automorphism whose image of x is ``other.s(self.s(x))``."""
        return SmoothAutomorphism(other.s.compose(self.s))

    def power(self, k: int) -> SmoothAutomorphism:
        if k < 0:
            return SmoothAutomorphism(self.s.reversion()).power(-k)
        result = SmoothAutomorphism.identity(self.p, self.precision)
        base = self
        while k:
            if k & 1:
                result = result.then(base)
            k >>= 1
            if k:
                base = base.then(base)
        return result

    def is_identity(self) -> bool:
        return (self.s - TruncatedSeries.x(self.p, self.precision)).is_zero()

    def displacement_valuation(self):
        """``nu_x(s(x) - x)``, or :class:`ZeroToPrecision`."""
        return (self.s - TruncatedSeries.x(self.p, self.precision)).valuation()

    @cached_property
    def inverse_derivative(self) -> TruncatedSeries:
        return self.s.derivative().inverse()

    @cached_property
    def vector_field_matrix(self) -> np.ndarray:
        """Matrix of ``f |-> f(s)/s'`` on coefficients of degree < N-1."""
        n = self.precision - 1
        p = self.p
        inv = self.inverse_derivative.array
        cols = np.zeros((n, n), dtype=np.int64)
        power = np.zeros(n, dtype=np.int64)
        power[0] = 1
        sc = self.s.array[:n]
        for j in range(n):
            cols[:, j] = _conv(power, inv, n, p)
            power = _conv(power, sc, n, p)
        cols.setflags(write=False)
        return cols


@dataclass(frozen=True)
class VectorField:
    """``f * d/dx``."""

    f: TruncatedSeries

    @property
    def p(self) -> int:
        return self.f.p

    @property
    def precision(self) -> int:
        return self.f.precision

    def __add__(self, other):
        return VectorField(self.f + other.f)

    def __sub__(self, other):
        return VectorField(self.f - other.f)

    def __mul__(self, c):
        return VectorField(self.f * c)

    __rmul__ = __mul__

    def evaluate(self, differential: TruncatedSeries) -> TruncatedSeries:
        """Pair with ``g(x) dx``: returns ``f * g``."""
        return self.f * differential

    def is_zero(self) -> bool:
        return self.f.is_zero()


@dataclass(frozen=True)
class RamificationProfile:
    p: int
    jumps: tuple
    different: int
    group_order: int

    @property
    def conductor(self):
        return self.jumps[0] if self.jumps else INF

    @property
    def faithful_exponent(self) -> int:
        return len(self.jumps)


def different_from_jumps(p: int, jumps) -> int:
    n0 = len(jumps)
    return (p - 1) * sum(p**i * (jumps[n0 - i - 1] + 1) for i in range(n0))


def _different_from_filtration(p: int, jumps) -> int:
    # sum_{i >= 0} (|G_i| - 1) with |G_i| = p^(n0 - j) on (m_{j-1}, m_j]
    total, prev = 0, -1
    for j, m in enumerate(jumps):
        total += (m - prev) * (p ** (len(jumps) - j) - 1)
        prev = m
    return total


def check_jump_sequence(p: int, jumps) -> None:
    if not jumps:
        return
    if any(b <= a for a, b in zip(jumps, jumps[1:])):
        raise HypothesisError(f"jumps must increase strictly: {list(jumps)}")
    if jumps[0] % p == 0:
        raise HypothesisError(f"p | m_0 (p={p}, m_0={jumps[0]})")
    if any((m - jumps[0]) % p for m in jumps):
        raise HypothesisError(f"jumps must be congruent mod p={p}: {list(jumps)}")


@dataclass(frozen=True, eq=False)
class CyclicSmoothAction:
    """Z/p^n acting on k[[x]] through ``generator``; the image has order p^n0."""

    p: int
    n: int
    generator: SmoothAutomorphism
    faithful_exponent: int

    def __post_init__(self):
        check_prime(self.p)
        if self.generator.p != self.p:
            raise HypothesisError("generator is defined over a different prime field")
        if not 0 <= self.faithful_exponent <= self.n:
            raise HypothesisError("need 0 <= n0 <= n")
        if self.generator.s[1] != 1:
            raise HypothesisError("p-group actions have s'(0) = 1")
        top = self._pth_powers[self.faithful_exponent]
        if not top.is_identity():
            raise HypothesisError(
                f"generator^(p^{self.faithful_exponent}) is not the identity to precision"
            )
        if self.faithful_exponent and self._pth_powers[self.faithful_exponent - 1].is_identity():
            raise PrecisionError("generator image order is smaller than declared")

    @classmethod
    def from_generator(cls, s: TruncatedSeries, n: int | None = None, max_exponent: int = 4):
        """Detect the image order of ``s`` and wrap it as a Z/p^n action."""
        g = SmoothAutomorphism(s)
        cur, n0 = g, 0
        while not cur.is_identity():
            n0 += 1
            if n0 > max_exponent:
                raise PrecisionError(f"no p-power order <= p^{max_exponent} detected")
            cur = cur.power(s.p)
        return cls(s.p, n0 if n is None else n, g, n0)

    @property
    def precision(self) -> int:
        return self.generator.precision

    @property
    def group_order(self) -> int:
        return self.p**self.n

    @property
    def faithful_order(self) -> int:
        return self.p**self.faithful_exponent

    @property
    def is_faithful(self) -> bool:
        return self.faithful_exponent == self.n

    @cached_property
    def _pth_powers(self) -> list:
        out = [self.generator]
        for _ in range(self.faithful_exponent):
            out.append(out[-1].power(self.p))
        return out

    def element(self, k: int) -> SmoothAutomorphism:
        return self.generator.power(k % self.faithful_order)

    def subgroup_generator(self, j: int) -> SmoothAutomorphism:
        """Generator of the subgroup of index p^j in the image."""
        return self._pth_powers[j]

    @cached_property
    def trace_matrix(self) -> np.ndarray:
        """Matrix of Tr_G on coefficients of degree < N-1."""
        T = self.generator.vector_field_matrix
        n = T.shape[0]
        if not self.is_faithful:
            return np.zeros((n, n), dtype=np.int64)
        acc = np.eye(n, dtype=np.int64)
        cur = np.eye(n, dtype=np.int64)
        for _ in range(self.group_order - 1):
            cur = matmul_mod(T, cur, self.p)
            acc = (acc + cur) % self.p
        acc.setflags(write=False)
        return acc


# -- constructions ----------------------------------------------------

def _standard_series(p: int, m: int, precision: int) -> TruncatedSeries:
    u = TruncatedSeries.one(p, precision) + TruncatedSeries.monomial(m, p, precision)
    return u.rational_power(-1, m).shift_up(1).truncate(precision)


def standard_action(p: int, m: int, precision: int | None = None, n: int = 1) -> CyclicSmoothAction:
    """Z/p^n acting through the order-p automorphism ``x/(1+x^m)^(1/m)``."""
    p = check_prime(p)
    if not isinstance(m, int) or m <= 0 or m % p == 0:
        raise HypothesisError(f"conductor must be a positive integer prime to p: p | m (p={p}, m={m})")
    if precision is None:
        precision = default_precision(p, (p - 1) * (m + 1))
    return _standard_action_cached(p, m, precision, n)


@lru_cache(maxsize=256)
def _standard_action_cached(p: int, m: int, precision: int, n: int) -> CyclicSmoothAction:
    return CyclicSmoothAction(p, n, SmoothAutomorphism(_standard_series(p, m, precision)), 1)


def trivial_action(p: int, precision: int, n: int = 1) -> CyclicSmoothAction:
    return CyclicSmoothAction(p, n, SmoothAutomorphism.identity(p, precision), 0)


# -- invariants -------------------------------------------------------

def ramification_profile(a: CyclicSmoothAction) -> RamificationProfile:
    jumps = []
    for j in range(a.faithful_exponent):
        v = a.subgroup_generator(j).displacement_valuation()
        if isinstance(v, ZeroToPrecision):
            raise PrecisionError(
                f"jump {j} not certified: sigma^(p^{j})(x) - x vanishes to precision {v.precision}"
            )
        jumps.append(v - 1)
    jumps = tuple(jumps)
    try:
        check_jump_sequence(a.p, jumps)
    except HypothesisError as exc:
        raise EquideformError(f"computed jumps violate the conductor properties: {exc}") from exc
    d = different_from_jumps(a.p, jumps)
    if d != _different_from_filtration(a.p, jumps):
        raise EquideformError("different formulas disagree")
    return RamificationProfile(a.p, jumps, d, a.faithful_order)


def act_on_vector_field(sigma: SmoothAutomorphism, phi: VectorField) -> VectorField:
    """``(sigma phi)(dx) = f(sigma(x)) / sigma'(x)``; precision drops to ``N-1``."""
    n = min(phi.precision, sigma.precision - 1)
    f = phi.f.truncate(n)
    g = f.compose(sigma.s.truncate(n)) * sigma.inverse_derivative.truncate(n)
    return VectorField(g)


def _apply(matrix: np.ndarray, f: TruncatedSeries, p: int) -> TruncatedSeries:
    n = min(f.precision, matrix.shape[0])
    v = (matrix[:n, :n] @ f.array[:n]) % p
    return TruncatedSeries._raw(v, p, n)


def trace(a: CyclicSmoothAction, phi: VectorField) -> VectorField:
    """Sum of the translates of ``phi`` over the abstract group Z/p^n."""
    if "trace_matrix" in a.__dict__:
        return VectorField(_apply(a.trace_matrix, phi.f, a.p))
    p = a.p
    T = a.generator.vector_field_matrix
    n = min(phi.precision, T.shape[0])
    if not a.is_faithful:
        return VectorField(TruncatedSeries.zero(p, n))
    T = T[:n, :n]
    cur = phi.f.array[:n]
    acc = cur.copy()
    for _ in range(a.group_order - 1):
        cur = (T @ cur) % p
        acc = (acc + cur) % p
    return VectorField(TruncatedSeries._raw(acc, p, n))


def norm_parameter(a: CyclicSmoothAction) -> TruncatedSeries:
    """``z = prod sigma^i(x)`` over the image; generates the invariants."""
    z = TruncatedSeries.x(a.p, a.precision)
    cur = a.generator.s
    for _ in range(a.faithful_order - 1):
        z = z * cur
        cur = cur.compose(a.generator.s)
    return z


def rewrite_in_parameter(f: TruncatedSeries, z: TruncatedSeries) -> TruncatedSeries:
    """Express an invariant series ``f(x)`` as ``g(z)``.

    Greedy elimination from the bottom; ``nu_x(z)`` must divide the
    valuation of every intermediate remainder.
    """
    p = f.p
    n = min(f.precision, z.precision)
    e = z.valuation()
    if isinstance(e, ZeroToPrecision) or e < 1:
        raise HypothesisError("parameter must have positive certified valuation")
    lead_inv = pow(z[e], -1, p)
    k_max = -(-n // e)
    rem = f.truncate(n).array.copy()
    zc = z.array[:n]
    zpow = np.zeros(n, dtype=np.int64)
    zpow[0] = 1
    out = np.zeros(k_max, dtype=np.int64)
    for k in range(k_max):
        lo = k * e
        c = (int(rem[lo]) * pow(lead_inv, k, p)) % p
        out[k] = c
        if c:
            rem = (rem - c * zpow) % p
        if rem[lo + 1 : min(lo + e, n)].any():
            raise EquideformError("series is not invariant to precision (rewrite failed)")
        zpow = _conv(zpow, zc, n, p)
    return TruncatedSeries._raw(out, p, k_max)


class _ThetaContext:
    """Norm parameter and its derivative, cached per action."""

    _cache: dict = {}

    @classmethod
    def get(cls, a: CyclicSmoothAction):
        key = id(a)
        hit = cls._cache.get(key)
        if hit is None or hit[0] is not a:
            z = norm_parameter(a)
            hit = (a, z, z.derivative())
            cls._cache[key] = hit
            if len(cls._cache) > 64:
                cls._cache.pop(next(iter(cls._cache)))
        return hit[1], hit[2]


def theta(a: CyclicSmoothAction, phi: VectorField) -> TruncatedSeries:
    """``(Tr phi)(dz)`` written as a series in the norm parameter ``z``."""
    z, dz = _ThetaContext.get(a)
    t = trace(a, phi).f
    n = min(t.precision, dz.precision)
    return rewrite_in_parameter(t.truncate(n) * dz.truncate(n), z)


def predict_trace_valuation(profile: RamificationProfile, ell: int) -> int:
    """z-valuation of ``(Tr f dx^vee)(dz)`` for ``nu_x(f) = ell``.

    Requires ``2 m_0 + 1 = 0 mod p`` and the congruence on ``ell`` that
    makes the value an integer.
    """
    p, jumps = profile.p, profile.jumps
    n = len(jumps)
    if n == 0:
        raise HypothesisError("trivial action: no ramification jumps")
    if (2 * jumps[0] + 1) % p:
        raise HypothesisError(f"2*m_0+1 = {2 * jumps[0] + 1} is not 0 mod p={p}")
    head = ell + (p - 1) * sum(p**i * (2 * jumps[n - i - 1] + 1) for i in range(n - 1))
    if head % p**n:
        raise HypothesisError(f"ell={ell} fails the congruence mod p^{n}")
    total = ell + (p - 1) * sum((2 * jumps[n - 1 - i] + 1) * p**i for i in range(n))
    return total // p**n


def _require_order_p(a: CyclicSmoothAction):
    if a.faithful_exponent != 1 or a.n != 1:
        raise HypothesisError("operation requires a faithful action of order p")


def trace_zero_with_valuation(a: CyclicSmoothAction, q: int) -> VectorField:
    """Vector field ``f dx^vee`` with ``nu_x(f) = q`` and zero trace."""
    _require_order_p(a)
    p = a.p
    (m,) = ramification_profile(a).jumps
    if (2 * m + 1) % p:
        raise HypothesisError(f"2m+1 = {2 * m + 1} is not 0 mod p={p}")
    if q <= 0 or q % p == 0:
        raise HypothesisError(f"q must be positive and prime to p: p | q (p={p}, q={q})")
    qp, ell = (q - 1) % p + 1, (q - 1) // p
    if qp == p:
        qp, ell = qp - p, ell + 1
    N = a.precision - 1
    z, _ = _ThetaContext.get(a)
    r = (2 * m + 1) * (p - 1) // p
    base = theta(a, VectorField(TruncatedSeries.one(p, N)))
    h = theta(a, VectorField(TruncatedSeries.monomial(qp, p, N)))
    if base.valuation() != r:
        raise PrecisionError(f"theta(dx^vee) valuation {base.valuation()} != {r}")
    g = h.shift_down(r) / base.shift_down(r)
    gx = g.compose(z.truncate(N))
    f = (z.truncate(N) ** ell) * (TruncatedSeries.monomial(qp, p, gx.precision) - gx)
    if f.valuation() != q:
        raise PrecisionError(f"cannot certify nu_x(f) = {q} at precision {f.precision}")
    phi = VectorField(f)
    if not trace(a, phi).is_zero():
        raise EquideformError("constructed field has nonzero trace")
    return phi


def trace_zero_basis_exists(a: CyclicSmoothAction) -> bool:
    if not a.is_faithful:
        return True
    d = ramification_profile(a).different
    return (2 * d + 1) % a.faithful_order != 0


def _bezout(p: int, m: int) -> tuple[int, int]:
    if m % p == p - 1:
        return (1 + m) // p, -1
    b = pow(m, -1, p)
    return (1 - b * m) // p, b


def _closed_form_witness(p: int, m: int, precision: int) -> TruncatedSeries:
    a, _ = _bezout(p, m)
    x_term = TruncatedSeries.monomial(m * (p - 1), p, precision)
    try:
        return (x_term - 1).rational_power(a, m)
    except HypothesisError:
        # -1 has no m-th root in F_p; a scalar multiple has the same trace property
        return (1 - x_term).rational_power(a, m)


def linear_witness(a: CyclicSmoothAction, degree: int | None = None) -> VectorField | None:
    """Solve ``Tr((1 + sum c_i x^i) dx^vee) = 0`` to precision, or ``None``."""
    T = a.trace_matrix
    n = T.shape[0]
    D = n - 1 if degree is None else min(degree, n - 1)
    cols = T[:, 1 : D + 1]
    sol = solve(cols, (-T[:, 0]) % a.p, a.p)
    if sol is None:
        return None
    return VectorField(TruncatedSeries([1, *sol.tolist()], a.p, n))


@dataclass(frozen=True)
class QuotientData:
    """Order-p subgroup H, its norm ``y`` and the induced action on k[[y]]."""

    y: TruncatedSeries
    action: CyclicSmoothAction
    subgroup: CyclicSmoothAction


def quotient_by_order_p(a: CyclicSmoothAction) -> QuotientData:
    if not a.is_faithful or a.n < 1:
        raise HypothesisError("quotient needs a faithful action of order >= p")
    p = a.p
    H = CyclicSmoothAction(p, 1, a.subgroup_generator(a.n - 1), 1)
    y = norm_parameter(H)
    sigma_y = y.compose(a.generator.s)
    s_bar = rewrite_in_parameter(sigma_y, y)
    bar = CyclicSmoothAction(p, a.n - 1, SmoothAutomorphism(s_bar), a.n - 1)
    return QuotientData(y, bar, H)


def trace_zero_basis_construct(a: CyclicSmoothAction) -> VectorField:
    """A unit vector field with vanishing trace, verified by direct trace."""
    if not trace_zero_basis_exists(a):
        raise ExistenceFails("2*different+1 = 0 mod |G_0| and G = G_0: no trace-zero basis")
    p, N = a.p, a.precision - 1
    candidates = []
    if not a.is_faithful:
        candidates.append(TruncatedSeries.one(p, N))
    elif a.n in (1, 2):
        jumps = ramification_profile(a).jumps
        if (2 * jumps[0] + 1) % p:
            candidates.append(_closed_form_witness(p, jumps[-1], N))
        else:
            candidates.append(_descent_witness(a))
    else:
        raise HypothesisError(f"trace-zero construction supports |G_0| <= p^2, got p^{a.n}")
    for f in candidates:
        phi = VectorField(f)
        if f[0] != 0 and trace(a, phi).is_zero():
            return phi
    phi = linear_witness(a)
    if phi is None or not trace(a, phi).is_zero():
        raise PrecisionError("no trace-zero unit witness found to precision")
    return phi


def _descent_witness(a: CyclicSmoothAction) -> TruncatedSeries:
    p = a.p
    quo = quotient_by_order_p(a)
    y, H = quo.y, quo.subgroup
    N = a.precision - 1
    dy = y.derivative()
    h_x = trace(H, VectorField(TruncatedSeries.one(p, N))).f * dy.truncate(N)
    q = h_x.valuation() // p
    f_y = trace_zero_with_valuation(quo.action, q).f
    f_x = f_y.compose(y.truncate(N))
    n = min(f_x.precision, h_x.precision)
    return f_x.truncate(n).shift_down(p * q) / h_x.truncate(n).shift_down(p * q)


def ext1_dimension_smooth(profile: RamificationProfile, n: int) -> int:
    """``floor(2d / p^n) - ceil(d / p^n)`` for a faithful action of order p^n."""
    order = profile.p**n
    if profile.group_order != order:
        raise HypothesisError("formula needs a faithful action of order p^n")
    d = profile.different
    return (2 * d) // order - (-(-d // order))


def tower_trace_identity_check(a: CyclicSmoothAction, phi: VectorField) -> bool:
    """Compare ``Tr_G phi`` with ``Tr_{G/H}((Tr_H phi)(dy) dy^vee)``."""
    p = a.p
    quo = quotient_by_order_p(a)
    y, H = quo.y, quo.subgroup
    dy = y.derivative()
    lhs = trace(a, phi).f
    inner = trace(H, phi).f
    n = min(inner.precision, dy.precision)
    psi = rewrite_in_parameter(inner.truncate(n) * dy.truncate(n), y)
    if quo.action.n == 0:
        outer = psi
    else:
        outer = trace(quo.action, VectorField(psi)).f
    rhs = outer.compose(y.truncate(a.precision))
    lhs_dy = lhs * dy.truncate(lhs.precision)
    m = min(lhs_dy.precision, rhs.precision)
    return lhs_dy.agrees_with(rhs, m)
