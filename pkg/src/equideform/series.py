"""Truncated formal power series over a prime field F_p.

A :class:`TruncatedSeries` is a coefficient tuple together with the
precision ``N`` to which it is known: the value is ``sum c_i x^i mod x^N``.
Every operation states the precision of its result; nothing is silently
padded or extended.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence, Union

import numpy as np
from sympy import isprime
from sympy.ntheory.residue_ntheory import nthroot_mod

from .errors import HypothesisError, ModulusMismatch, PrecisionError

_INT64_SAFE = 2**62


@lru_cache(maxsize=None)
def check_prime(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not 2 <= p <= 2**31 or not isprime(int(p)):
        raise HypothesisError(f"modulus must be a prime in [2, 2^31], got {p!r}")
    return int(p)


class ZeroToPrecision(NamedTuple):
    """Valuation of a series with no nonzero coefficient below ``precision``."""

    precision: int

    def __str__(self):
        return f"indeterminate-at-precision-{self.precision}"


Valuation = Union[int, ZeroToPrecision]


@dataclass(frozen=True)
class FpScalar:
    value: int
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _coerce(self, other):
        if isinstance(other, FpScalar):
            if other.p != self.p:
                raise ModulusMismatch(f"F_{self.p} vs F_{other.p}")
            return other.value
        return int(other)

    def __add__(self, other):
        return FpScalar(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FpScalar(self.value - self._coerce(other), self.p)

    def __neg__(self):
        return FpScalar(-self.value, self.p)

    def __mul__(self, other):
        return FpScalar(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def inverse(self) -> FpScalar:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return FpScalar(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * FpScalar(self._coerce(other), self.p).inverse()

    def __eq__(self, other):
        if isinstance(other, FpScalar):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


def _conv(a: np.ndarray, b: np.ndarray, n: int, p: int) -> np.ndarray:
    """First ``n`` coefficients of the product of two residue vectors."""
    a = a[:n]
    b = b[:n]
    if len(a) == 0 or len(b) == 0:
        return np.zeros(n, dtype=np.int64)
    if (p - 1) ** 2 * min(len(a), len(b)) < _INT64_SAFE:
        c = np.convolve(a, b)[:n] % p
    else:
        c = np.zeros(n, dtype=object)
        for i, ai in enumerate(a.tolist()):
            if ai:
                m = min(len(b), n - i)
                c[i : i + m] += ai * b[:m].astype(object)
        c = np.array([int(v) % p for v in c], dtype=np.int64)
    if len(c) < n:
        c = np.concatenate([c, np.zeros(n - len(c), dtype=np.int64)])
    return c.astype(np.int64)


class TruncatedSeries:
    """Immutable power series over F_p known modulo ``x^precision``."""

    __slots__ = ("p", "_c", "precision")

    def __init__(self, coeffs: Sequence[int], p: int, precision: int | None = None):
        p = check_prime(p)
        c = [int(v) % p for v in coeffs]
        if precision is None:
            precision = len(c)
        if precision < 0:
            raise HypothesisError("precision must be non-negative")
        c = c[:precision] + [0] * max(0, precision - len(c))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "precision", int(precision))
        object.__setattr__(self, "_c", np.array(c, dtype=np.int64))
        self._c.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    @classmethod
    def _raw(cls, arr: np.ndarray, p: int, precision: int) -> TruncatedSeries:
        obj = cls.__new__(cls)
        arr = np.asarray(arr, dtype=np.int64)[:precision] % p
        if len(arr) < precision:
            arr = np.concatenate([arr, np.zeros(precision - len(arr), dtype=np.int64)])
        arr.setflags(write=False)
        object.__setattr__(obj, "p", p)
        object.__setattr__(obj, "precision", precision)
        object.__setattr__(obj, "_c", arr)
        return obj

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, p: int, precision: int) -> TruncatedSeries:
        return cls([], p, precision)

    @classmethod
    def one(cls, p: int, precision: int) -> TruncatedSeries:
        return cls([1], p, precision)

    @classmethod
    def monomial(cls, k: int, p: int, precision: int, coeff: int = 1) -> TruncatedSeries:
        c = [0] * precision
        if k < precision:
            c[k] = coeff
        return cls(c, p, precision)

    @classmethod
    def x(cls, p: int, precision: int) -> TruncatedSeries:
        return cls.monomial(1, p, precision)

    # -- access -------------------------------------------------------
    @property
    def coeffs(self) -> tuple:
        return tuple(int(v) for v in self._c)

    @property
    def array(self) -> np.ndarray:
        return self._c

    def __getitem__(self, k: int) -> int:
        if not 0 <= k < self.precision:
            raise PrecisionError(f"coefficient {k} unknown at precision {self.precision}")
        return int(self._c[k])

    def __len__(self):
        return self.precision

    def truncate(self, n: int) -> TruncatedSeries:
        if n > self.precision:
            raise PrecisionError(f"cannot raise precision {self.precision} to {n}")
        return TruncatedSeries._raw(self._c[:n], self.p, n)

    def valuation(self) -> Valuation:
        nz = np.flatnonzero(self._c)
        if len(nz) == 0:
            return ZeroToPrecision(self.precision)
        return int(nz[0])

    def is_zero(self) -> bool:
        """True when indistinguishable from 0 at this precision."""
        return not self._c.any()

    def shift_down(self, k: int) -> TruncatedSeries:
        """Divide by ``x^k``; the first ``k`` coefficients must vanish."""
        if k > self.precision or self._c[:k].any():
            raise HypothesisError(f"series is not divisible by x^{k}")
        return TruncatedSeries._raw(self._c[k:], self.p, self.precision - k)

    def shift_up(self, k: int) -> TruncatedSeries:
        """Multiply by ``x^k``; precision grows by ``k``."""
        arr = np.concatenate([np.zeros(k, dtype=np.int64), self._c])
        return TruncatedSeries._raw(arr, self.p, self.precision + k)

    # -- arithmetic ---------------------------------------------------
    def _check(self, other: TruncatedSeries):
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.p != self.p:
            raise ModulusMismatch(f"cannot combine series over F_{self.p} and F_{other.p}")

    def _lift(self, other) -> TruncatedSeries:
        if isinstance(other, (int, np.integer, FpScalar)):
            return TruncatedSeries([int(other)], self.p, self.precision)
        self._check(other)
        return other

    def __add__(self, other):
        other = self._lift(other)
        n = min(self.precision, other.precision)
        return TruncatedSeries._raw(self._c[:n] + other._c[:n], self.p, n)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw(-self._c, self.p, self.precision)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, np.integer, FpScalar)):
            return TruncatedSeries._raw(self._c * (int(other) % self.p), self.p, self.precision)
        self._check(other)
        n = min(self.precision, other.precision)
        return TruncatedSeries._raw(_conv(self._c, other._c, n, self.p), self.p, n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = TruncatedSeries.one(self.p, self.precision)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.p == other.p
            and self.precision == other.precision
            and np.array_equal(self._c, other._c)
        )

    def __hash__(self):
        return hash((self.p, self.precision, self._c.tobytes()))

    def agrees_with(self, other: TruncatedSeries, n: int | None = None) -> bool:
        """Equality of the first ``n`` coefficients (default: common precision)."""
        self._check(other)
        m = min(self.precision, other.precision)
        if n is None:
            n = m
        if n > m:
            raise PrecisionError(f"cannot compare to precision {n}; only {m} known")
        return bool(np.array_equal(self._c[:n], other._c[:n]))

    def inverse(self) -> TruncatedSeries:
        """Multiplicative inverse; requires a unit constant term."""
        if self.precision == 0:
            return self
        c0 = int(self._c[0])
        if c0 == 0:
            raise HypothesisError("inverse of a series with zero constant term")
        p, n = self.p, self.precision
        inv0 = pow(c0, -1, p)
        g = TruncatedSeries._raw(np.array([inv0]), p, 1)
        k = 1
        while k < n:
            k = min(2 * k, n)
            a = self.truncate(k)
            g = TruncatedSeries._raw(g._c, p, k)
            # Newton step g <- g (2 - a g)
            g = g * (2 - a * g)
        return g

    def __truediv__(self, other):
        if isinstance(other, (int, np.integer, FpScalar)):
            return self * pow(int(other), -1, self.p)
        return self * self._lift(other).inverse()

    def derivative(self) -> TruncatedSeries:
        """Formal derivative; known to precision ``N - 1``."""
        n = max(self.precision - 1, 0)
        k = np.arange(1, n + 1, dtype=np.int64)
        return TruncatedSeries._raw((self._c[1 : n + 1] * (k % self.p)) % self.p, self.p, n)

    def compose(self, g: TruncatedSeries) -> TruncatedSeries:
        """``self(g(x))``; requires ``g(0) = 0``.

        Precision is ``min(prec g, nu(g) * prec self)``.
        """
        self._check(g)
        if g.precision and g._c[0] != 0:
            raise HypothesisError("compose: inner series must have zero constant term")
        v = g.valuation()
        p = self.p
        if isinstance(v, ZeroToPrecision):
            n = g.precision if self.precision else 0
            arr = np.zeros(n, dtype=np.int64)
            arr[:1] = self._c[:1]
            return TruncatedSeries._raw(arr, p, n)
        n = min(g.precision, v * self.precision)
        top = min(self.precision, (n - 1) // v + 1) if n else 0
        if top == 0:
            return TruncatedSeries._raw(np.zeros(n, dtype=np.int64), p, n)
        gc = g._c[:n]
        # baby steps g^0..g^(k-1), then Horner in g^k
        k = max(1, math.isqrt(top))
        powers = np.zeros((k, n), dtype=np.int64)
        powers[0, 0] = 1
        for i in range(1, k):
            powers[i] = _conv(powers[i - 1], gc, n, p)
        giant = _conv(powers[k - 1], gc, n, p)
        blocks = -(-top // k)
        coeffs = np.zeros(blocks * k, dtype=np.int64)
        coeffs[:top] = self._c[:top]
        coeffs = coeffs.reshape(blocks, k)
        if (p - 1) ** 2 * k < _INT64_SAFE:
            parts = (coeffs @ powers) % p
        else:
            parts = np.array((coeffs.astype(object) @ powers.astype(object)) % p, dtype=np.int64)
        acc = parts[blocks - 1].copy()
        for j in range(blocks - 2, -1, -1):
            acc = (_conv(acc, giant, n, p) + parts[j]) % p
        return TruncatedSeries._raw(acc, p, n)

    def __call__(self, g: TruncatedSeries) -> TruncatedSeries:
        return self.compose(g)

    def nth_root(self, m: int) -> TruncatedSeries:
        """Unique ``v`` with ``v(0) = 1`` and ``v^m = self``."""
        p, n = self.p, self.precision
        if m <= 0 or m % p == 0:
            raise HypothesisError(f"nth_root: need m > 0 prime to p={p}, got m={m}")
        if n == 0:
            return self
        if self._c[0] != 1:
            raise HypothesisError("nth_root: constant term must be 1")
        if m == 1:
            return self
        inv_m = pow(m, -1, p)
        v = TruncatedSeries.one(p, 1)
        k = 1
        while k < n:
            k = min(2 * k, n)
            u = self.truncate(k)
            v = TruncatedSeries._raw(v._c, p, k)
            # v <- v + (u v^{1-m} - v)/m
            v = v + (u * v.inverse() ** (m - 1) - v) * inv_m
        return v

    def rational_power(self, a: int, m: int) -> TruncatedSeries:
        """``self^(a/m)`` normalised through the prime-field m-th root of ``self(0)``."""
        p, n = self.p, self.precision
        if m <= 0 or m % p == 0:
            raise HypothesisError(f"rational_power: need m > 0 prime to p={p}, got m={m}")
        if n == 0:
            return self
        c0 = int(self._c[0])
        if c0 == 0:
            raise HypothesisError("rational_power: constant term must be nonzero")
        roots = nthroot_mod(c0, m, p, all_roots=True) if m > 1 else [c0]
        if not roots:
            raise HypothesisError(f"{c0} has no {m}-th root in F_{p}")
        r = min(int(x) for x in roots)
        v = (self * pow(c0, -1, p)).nth_root(m)
        return (v ** a) * pow(r, a, p)

    def reversion(self) -> TruncatedSeries:
        """Compositional inverse ``r`` with ``self(r) = x = r(self)``."""
        p, n = self.p, self.precision
        if n < 2 or self._c[0] != 0 or self._c[1] == 0:
            raise HypothesisError("reversion: need s(0) = 0 and a unit linear coefficient")
        ds = self.derivative()
        r = TruncatedSeries._raw(np.array([0, pow(int(self._c[1]), -1, p)]), p, 2)
        k = 2
        while k < n:
            k = min(2 * k, n)
            r = TruncatedSeries._raw(r._c, p, k)
            s = self.truncate(k)
            err = s.compose(r) - TruncatedSeries.x(p, k)
            dsr = ds.truncate(k - 1).compose(r.truncate(k - 1))
            # err = O(x^2): divide out one x so the correction keeps precision k
            corr = (err.shift_down(1) * dsr.inverse()).shift_up(1)
            r = r - corr
        return r

    # -- display ------------------------------------------------------
    def __repr__(self):
        terms = []
        for i, c in enumerate(self._c.tolist()):
            if c:
                if i == 0:
                    terms.append(f"{c}")
                else:
                    mono = "x" if i == 1 else f"x^{i}"
                    terms.append(mono if c == 1 else f"{c}*{mono}")
        body = " + ".join(terms) if terms else "0"
        return f"{body} + O(x^{self.precision}) [F_{self.p}]"


# Module-level names for the documented operations.
def add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a + b


def mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a * b


def inverse(a: TruncatedSeries) -> TruncatedSeries:
    return a.inverse()


def compose(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    return f.compose(g)


def derivative(f: TruncatedSeries) -> TruncatedSeries:
    return f.derivative()


def valuation(f: TruncatedSeries) -> Valuation:
    return f.valuation()


def nth_root(u: TruncatedSeries, m: int) -> TruncatedSeries:
    return u.nth_root(m)


def rational_power(u: TruncatedSeries, a: int, m: int) -> TruncatedSeries:
    return u.rational_power(a, m)


def reversion(s: TruncatedSeries) -> TruncatedSeries:
    return s.reversion()


def series(coeffs: Sequence[int], p: int, precision: int | None = None) -> TruncatedSeries:
    return TruncatedSeries(coeffs, p, precision)
