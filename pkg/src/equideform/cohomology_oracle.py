"""Brute-force H^1 of cyclic groups on truncated modules of vector fields.

Matrices are assembled from the series of every group element, independently
of the matrix-power route used in ``smooth_local``.  For a module
``M = x^s k[[x]] d/dx`` and ``W`` large, ``H^1 = Z/B`` is read off in
``M / x^W M``: ``B`` is computed exactly there (``1 - sigma`` raises degrees),
while ``Z = ker Tr`` is approximated inside an ambient precision ``A > W``
and certified by re-running at a larger window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import HypothesisError, PrecisionError, StabilizationFailure
from .linalg import rank, solve
from .node_local import CyclicNodeAction
from .series import TruncatedSeries, ZeroToPrecision, _conv
from .smooth_local import (
    CyclicSmoothAction,
    VectorField,
    ramification_profile,
    theta,
)

DEFAULT_BUFFER_CAP = 512


def _element_matrix(s: TruncatedSeries, size: int) -> np.ndarray:
    """Columns: coefficients of ``t^j(s(x)) / s'(x)`` mod ``x^size``, j < size."""
    p = s.p
    if s.precision < size + 1:
        raise PrecisionError(f"action known to precision {s.precision}, need {size + 1}")
    inv = s.derivative().inverse().array[:size]
    sc = s.array[:size]
    out = np.zeros((size, size), dtype=np.int64)
    cur = np.zeros(size, dtype=np.int64)
    cur[0] = 1
    for j in range(size):
        out[:, j] = _conv(cur, inv, size, p)
        cur = _conv(cur, sc, size, p)
    return out


@dataclass(frozen=True, eq=False)
class TruncatedModule:
    """``x^start k[[x]] d/dx`` in degrees below ``ambient``."""

    action: CyclicSmoothAction
    start: int
    ambient: int

    @property
    def p(self) -> int:
        return self.action.p

    @cached_property
    def element_matrices(self) -> list:
        a = self.action
        g = a.generator.s.truncate(self.ambient + 1)
        cur = TruncatedSeries.x(self.p, self.ambient + 1)
        out = []
        for _ in range(a.faithful_order):
            out.append(_element_matrix(cur, self.ambient))
            cur = g.compose(cur)
        if not (cur - TruncatedSeries.x(self.p, self.ambient + 1)).is_zero():
            raise HypothesisError("generator order differs from the declared image order")
        return out

    @cached_property
    def action_matrix(self) -> np.ndarray:
        return self.element_matrices[1 % len(self.element_matrices)]

    @cached_property
    def coboundary_matrix(self) -> np.ndarray:
        """``1 - sigma`` on the full ambient basis."""
        return (np.eye(self.ambient, dtype=np.int64) - self.action_matrix) % self.p

    @cached_property
    def trace_matrix(self) -> np.ndarray:
        a = self.action
        if not a.is_faithful:
            return np.zeros((self.ambient, self.ambient), dtype=np.int64)
        acc = np.zeros((self.ambient, self.ambient), dtype=np.int64)
        for M in self.element_matrices:
            acc = (acc + M) % self.p
        # Z/p^n acting through its image: each image element appears p^(n - n0) times
        return (acc * pow(self.p, a.n - a.faithful_exponent)) % self.p

    def h1_dimension(self, window: int) -> int:
        s, A, p = self.start, self.ambient, self.p
        if not s <= window <= A:
            raise HypothesisError("need start <= window <= ambient")
        T = self.trace_matrix
        rank_all = rank(T[:, s:A], p) if A > s else 0
        rank_high = rank(T[:, window:A], p) if A > window else 0
        z_image = (window - s) - rank_all + rank_high
        b_image = rank(self.coboundary_matrix[:window, s:window], p) if window > s else 0
        return z_image - b_image


def _jump_data(a: CyclicSmoothAction) -> tuple[int, int]:
    if a.faithful_exponent == 0:
        return 0, 0
    prof = ramification_profile(a)
    return prof.different, prof.jumps[-1]


def _branch_h1(a: CyclicSmoothAction, start: int, window: int, ambient: int) -> int:
    return TruncatedModule(a, start, ambient).h1_dimension(window)


def _branches(a, shape: str):
    if shape == "smooth":
        if not isinstance(a, CyclicSmoothAction):
            raise HypothesisError("shape 'smooth' needs a CyclicSmoothAction")
        return [(a, 0)]
    if shape == "node":
        if not isinstance(a, CyclicNodeAction):
            raise HypothesisError("shape 'node' needs a CyclicNodeAction")
        return [(a.branch_x, 1), (a.branch_y, 1)]
    raise HypothesisError(f"unknown module shape {shape!r}")


def initial_window(a: CyclicSmoothAction) -> tuple[int, int]:
    d, m = _jump_data(a)
    window = 2 * d + m + a.p
    return window, d + m + 1


@dataclass(frozen=True)
class OracleResult:
    dimension: int
    window: int
    ambient: int
    bumped: int


def h1_dimension_bruteforce(a, shape: str = "smooth", window: int | None = None,
                            ambient: int | None = None, buffer_cap: int = DEFAULT_BUFFER_CAP,
                            detail: bool = False):
    """``dim H^1(G, M)`` for ``M = k[[x]] d/dx`` (smooth) or ``x k[[x]] d/dx + y k[[y]] d/dy`` (node).

    Each branch is evaluated at ``(W, A)`` and ``(W + p, A + 2p)``; on a
    mismatch the buffer ``A - W`` doubles until ``buffer_cap``.
    """
    total, results = 0, []
    for b, start in _branches(a, shape):
        w0, buf0 = initial_window(b)
        W = window if window is not None else w0
        W = max(W, start + 1)
        buf = (ambient - W) if ambient is not None else buf0
        if buf < buf0:
            raise HypothesisError(f"ambient buffer {buf} below different + top jump + 1 = {buf0}")
        while True:
            A = W + buf
            if b.precision < A + 2 * b.p + 1:
                raise PrecisionError(
                    f"oracle needs action precision >= {A + 2 * b.p + 1}, have {b.precision}"
                )
            first = _branch_h1(b, start, W, A)
            second = _branch_h1(b, start, W + b.p, A + 2 * b.p)
            if first == second:
                break
            if 2 * buf > buffer_cap:
                raise StabilizationFailure(
                    f"H^1 changed from {first} to {second} under the precision bump", (first, second)
                )
            buf *= 2
        total += first
        results.append(OracleResult(first, W, A, second))
    return (total, results) if detail else total


def cocycle_class_is_zero(a: CyclicSmoothAction, value: VectorField, start: int = 0) -> bool:
    """Whether the cocycle with ``c(sigma) = value`` is ``(1 - sigma) psi`` for ``psi`` in ``x^start k[[x]] d/dx``.

    Decided by a linear solve modulo ``x^K``, ``K = prec(value)``, which is
    exact at that precision since ``1 - sigma`` raises degrees.
    """
    if value.is_zero():
        return True
    if a.faithful_exponent == 0:
        return False
    K = min(value.precision, a.precision - 1)
    mod = TruncatedModule(a, start, K)
    cols = mod.coboundary_matrix[:, start:K]
    return solve(cols, value.f.truncate(K).array, a.p) is not None


def trace_image_principal_valuation(a: CyclicSmoothAction, basis_size: int | None = None) -> int:
    """``min nu_z theta(x^i d/dx)``; checked against ``(2m+1)(p-1)/p`` when ``2m+1 = 0 mod p``."""
    if a.faithful_exponent != 1 or a.n != 1:
        raise HypothesisError("defined for faithful actions of order p")
    p = a.p
    (m,) = ramification_profile(a).jumps
    n = basis_size if basis_size is not None else 2 * p + m + 1
    N = a.precision - 1
    vals = []
    for i in range(n):
        v = theta(a, VectorField(TruncatedSeries.monomial(i, p, N))).valuation()
        if not isinstance(v, ZeroToPrecision):
            vals.append(v)
    if not vals:
        raise PrecisionError("theta vanishes on all sampled basis fields")
    r = min(vals)
    if (2 * m + 1) % p == 0 and r != (2 * m + 1) * (p - 1) // p:
        raise AssertionError(f"trace image valuation {r} != {(2 * m + 1) * (p - 1) // p}")
    return r


def unit_trace_zero_search(a: CyclicSmoothAction, degree: int | None = None, modulus: int | None = None) -> bool:
    """Is there ``f = 1 + sum_{1<=i<=degree} c_i x^i`` with ``Tr(f d/dx) = 0 mod x^modulus``?

    Complete over F_p: the condition is linear in the ``c_i``.
    """
    K = modulus if modulus is not None else a.precision - 1
    D = degree if degree is not None else K - 1
    size = max(K, D + 1)
    mod = TruncatedModule(a, 0, size)
    T = mod.trace_matrix[:K]
    return solve(T[:, 1 : D + 1], (-T[:, 0]) % a.p, a.p) is not None
