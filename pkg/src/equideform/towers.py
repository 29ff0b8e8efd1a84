"""Explicit Z/p^2 actions on k[[x]] from Artin-Schreier-Witt towers.

Over ``k((s))`` with ``a0 = s^-N0`` the standard order-p automorphism
shifts ``a0`` by one.  A second layer ``a1^p - a1 = r`` with
``sigma(a1) = a1 + g`` and ``g`` the Witt carry polynomial in ``a0``
extends it to an automorphism of order p^2.  A uniformizer ``x`` of the
top field is read off from ``a1`` after removing p-th powers from ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .errors import HypothesisError, PrecisionError
from .series import TruncatedSeries, ZeroToPrecision
from .smooth_local import CyclicSmoothAction, SmoothAutomorphism, _standard_series


@dataclass(frozen=True)
class Laurent:
    """``s^e * f(s)``; known modulo ``s^(e + f.precision)``."""

    e: int
    f: TruncatedSeries

    @property
    def p(self) -> int:
        return self.f.p

    @property
    def absolute_precision(self) -> int:
        return self.e + self.f.precision

    @classmethod
    def zero(cls, p: int, absolute_precision: int, e: int = 0) -> Laurent:
        return cls(e, TruncatedSeries.zero(p, absolute_precision - e))

    @classmethod
    def monomial(cls, k: int, p: int, absolute_precision: int, coeff: int = 1) -> Laurent:
        return cls(k, TruncatedSeries([coeff], p, absolute_precision - k))

    def normalized(self) -> Laurent:
        v = self.f.valuation()
        if isinstance(v, ZeroToPrecision) or v == 0:
            return self
        return Laurent(self.e + v, self.f.shift_down(v))

    def valuation(self):
        v = self.f.valuation()
        if isinstance(v, ZeroToPrecision):
            return ZeroToPrecision(self.absolute_precision)
        return self.e + v

    def leading(self) -> int:
        n = self.normalized()
        return n.f[0]

    def _align(self, e: int) -> TruncatedSeries:
        return self.f.shift_up(self.e - e)

    def __add__(self, other: Laurent) -> Laurent:
        e = min(self.e, other.e)
        return Laurent(e, self._align(e) + other._align(e))

    def __neg__(self) -> Laurent:
        return Laurent(self.e, -self.f)

    def __sub__(self, other: Laurent) -> Laurent:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return Laurent(self.e, self.f * other)
        a, b = self.normalized(), other.normalized()
        return Laurent(a.e + b.e, a.f * b.f)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Laurent:
        a = self.normalized()
        return Laurent(a.e * k, a.f**k)

    def truncate(self, absolute_precision: int) -> Laurent:
        n = absolute_precision - self.e
        if n <= 0:
            return Laurent.zero(self.p, absolute_precision, absolute_precision)
        return Laurent(self.e, self.f.truncate(min(n, self.f.precision)))

    def substitute(self, s_of_x: TruncatedSeries, scale: int) -> Laurent:
        """Rewrite in ``x`` where ``s = s_of_x`` has valuation ``scale``."""
        a = self.normalized()
        w = s_of_x.shift_down(scale)
        body = (w**a.e) * a.f.compose(s_of_x)
        return Laurent(scale * a.e, body)

    def as_series(self) -> TruncatedSeries:
        if self.e < 0:
            a = self.normalized()
            if a.e < 0:
                raise HypothesisError("Laurent series has a pole")
            return a.as_series()
        return self.f.shift_up(self.e)


def _poly_mod(coeffs, p):
    out = [c % p for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return out


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _poly_mod(out, p)


def _poly_add(a, b, p):
    n = max(len(a), len(b))
    return _poly_mod([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)], p)


def _poly_pow(a, k, p):
    out = [1]
    for _ in range(k):
        out = _poly_mul(out, a, p)
    return out


def _poly_shift(a, p):
    """``a(T + 1)``."""
    out: list = []
    for c in reversed(a):
        out = _poly_add(_poly_mul(out, [1, 1], p), [c], p)
    return out


def witt_carry(p: int) -> list:
    """Coefficients of ``sum_{0<k<p} binom(p, k)/p * T^k`` mod p."""
    return _poly_mod([0] + [comb(p, k) // p for k in range(1, p)], p)


def witt_layer(p: int) -> tuple[list, list]:
    """``(g, r0)`` with ``r0(T+1) - r0(T) = g^p - g`` and ``deg r0 = p^2 - p + 1``.

    ``g`` is the carry polynomial with the sign that makes this hold.
    """
    P = witt_carry(p)
    b = [0, p - 1] + [0] * (p - 2) + [1]  # T^p - T
    r0: list = []
    for k in range(1, p):
        r0 = _poly_add(r0, _poly_mul([comb(p, k) // p], _poly_mul(_poly_pow([0, 1], k, p), _poly_pow(b, p - k, p), p), p), p)
    r0 = _poly_mod([-c for c in r0], p)
    diff = _poly_add(_poly_shift(r0, p), [-c for c in r0], p)
    for sign in (1, -1):
        g = _poly_mod([sign * c for c in P], p)
        rhs = _poly_add(_poly_pow(g, p, p), [-c for c in g], p)
        if diff == rhs:
            return g, r0
    raise AssertionError("Witt carry identity failed")


def _poly_in_s(poly, N0: int, p: int, absolute_precision: int) -> Laurent:
    """Substitute ``T = s^-N0``."""
    acc = Laurent.zero(p, absolute_precision, min(0, -N0 * (len(poly) - 1)))
    for k, c in enumerate(poly):
        if c:
            acc = acc + Laurent.monomial(-N0 * k, p, absolute_precision, c)
    return acc


@dataclass(frozen=True)
class TowerData:
    action: CyclicSmoothAction
    upper_jumps: tuple
    lower_jumps: tuple


def tower_upper_jumps(p: int, m0: int, m1: int) -> tuple[int, int]:
    """Upper jumps ``(N0, N1)`` realising lower jumps ``(m0, m1)``."""
    if m0 <= 0 or m0 % p == 0:
        raise HypothesisError(f"p | m_0 (p={p}, m_0={m0})")
    if (m1 - m0) % p or m1 <= m0:
        raise HypothesisError(f"need m_1 > m_0 and m_1 = m_0 mod p (p={p}, m={m0},{m1})")
    N1 = m0 + (m1 - m0) // p
    if N1 < p * m0 or (N1 > p * m0 and N1 % p == 0):
        raise HypothesisError(f"jumps ({m0}, {m1}) are not realised by a Z/{p}^2 extension")
    return m0, N1


def tower_action(p: int, m0: int, m1: int, precision: int | None = None) -> CyclicSmoothAction:
    """A faithful Z/p^2 action on k[[x]] with lower jumps ``(m0, m1)``."""
    from .smooth_local import default_precision, different_from_jumps

    N0, N1 = tower_upper_jumps(p, m0, m1)
    if precision is None:
        precision = default_precision(p, different_from_jumps(p, (m0, m1)))
    N = precision
    work = 2 * N + 4 * p * N1
    g_poly, r0_poly = witt_layer(p)
    A = work // p + 2
    r = _poly_in_s(r0_poly, N0, p, A)
    g = _poly_in_s(g_poly, N0, p, A)
    if N1 > p * N0:
        # t is invariant with t^-N0 = a0^p - a0
        t = TruncatedSeries.one(p, A + p * N1) - TruncatedSeries.monomial((p - 1) * N0, p, A + p * N1)
        t_inv_N1 = t.rational_power(N1, N0)
        r = r + Laurent(-p * N1, t_inv_N1)
    # remove p-th powers from the polar part of r
    h_total = Laurent.zero(p, A, 0)
    while True:
        v = r.valuation()
        if isinstance(v, ZeroToPrecision) or v >= 0:
            raise PrecisionError("tower reduction consumed the polar part")
        if (-v) % p:
            break
        c = r.leading()
        h = Laurent.monomial(v // p, p, A, c)
        r = r - h**p + h
        h_total = h_total + h
    u = -v
    c = r.leading()
    rho = r.normalized().f * pow(c, -1, p)
    # S(s) = s * rho^(-1/u) equals x^p (1 - x^((p-1)u))^(-1/u)
    S = rho.rational_power(-1, u).shift_up(1)
    x_prec = work
    X = (TruncatedSeries.one(p, x_prec) - TruncatedSeries.monomial((p - 1) * u, p, x_prec)).rational_power(-1, u).shift_up(p)
    s_of_x = S.reversion().compose(X)
    sigma_bar = _standard_series(p, N0, A + 2)

    def apply_bar(L: Laurent) -> Laurent:
        a = L.normalized()
        return Laurent(a.e, TruncatedSeries.one(p, a.f.precision)).substitute(sigma_bar, 1) * Laurent(0, a.f.compose(sigma_bar))

    gamma = g + h_total - apply_bar(h_total)
    gx = gamma.substitute(s_of_x, p)
    arg = (gx * pow(c, -1, p) * Laurent(u, TruncatedSeries.one(p, x_prec))).as_series()
    sigma_x = (1 + arg).rational_power(-1, u).shift_up(1)
    if sigma_x.precision < N:
        raise PrecisionError(f"tower construction reached precision {sigma_x.precision} < {N}")
    return CyclicSmoothAction(p, 2, SmoothAutomorphism(sigma_x.truncate(N)), 2)
