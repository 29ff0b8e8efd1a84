"""Cyclic actions on the formal node k[[x, y]]/(xy).

The first coordinate of every pair refers to the x-branch.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from sympy import isprime

from .errors import HypothesisError, NotLiftable, PrecisionError
from .linalg import solve
from .series import FpScalar, TruncatedSeries, check_prime
from .smooth_local import (
    INF,
    CyclicSmoothAction,
    RamificationProfile,
    SmoothAutomorphism,
    VectorField,
    act_on_vector_field,
    default_precision,
    different_from_jumps,
    is_inf,
    ramification_profile,
    standard_action,
    trace,
    trivial_action,
)


class RelevabilityClass(enum.Enum):
    UNCONDITIONAL = "Unconditional"
    CONDITIONAL = "Conditional"
    NON_RELEVABLE = "NonRelevable"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class NodeAutomorphism:
    P0: TruncatedSeries
    P1: TruncatedSeries

    def __post_init__(self):
        if self.P0.p != self.P1.p:
            raise HypothesisError("branches defined over different prime fields")
        for name, P in (("P0", self.P0), ("P1", self.P1)):
            if P.precision < 2 or P[0] != 0 or P[1] == 0:
                raise HypothesisError(f"{name} must lie in the maximal ideal with unit linear term")

    @property
    def p(self) -> int:
        return self.P0.p

    @property
    def v0(self) -> int:
        """Coefficient of x^2 in sigma(x)."""
        return self.P0[2] if self.P0.precision > 2 else 0

    @property
    def v1(self) -> int:
        """Coefficient of y^2 in sigma(y)."""
        return self.P1[2] if self.P1.precision > 2 else 0


@dataclass(frozen=True, eq=False)
class CyclicNodeAction:
    p: int
    n: int
    generator: NodeAutomorphism
    faithful_exponent_x: int
    faithful_exponent_y: int
    permutes_branches: bool = False

    def __post_init__(self):
        check_prime(self.p)
        if self.permutes_branches:
            raise HypothesisError(
                "branch-permuting actions are not supported: pass to the index-2 subgroup "
                "fixing the branches, which reduces to the non-permuting case"
            )
        # validates the branch restrictions
        self.branch_x
        self.branch_y

    @cached_property
    def branch_x(self) -> CyclicSmoothAction:
        return CyclicSmoothAction(self.p, self.n, SmoothAutomorphism(self.generator.P0), self.faithful_exponent_x)

    @cached_property
    def branch_y(self) -> CyclicSmoothAction:
        return CyclicSmoothAction(self.p, self.n, SmoothAutomorphism(self.generator.P1), self.faithful_exponent_y)

    @property
    def faithful_order_x(self) -> int:
        return self.p**self.faithful_exponent_x

    @property
    def faithful_order_y(self) -> int:
        return self.p**self.faithful_exponent_y

    @property
    def group_order(self) -> int:
        return self.p**self.n

    @property
    def precision(self) -> int:
        return min(self.generator.P0.precision, self.generator.P1.precision)

    @classmethod
    def from_branches(cls, bx: CyclicSmoothAction, by: CyclicSmoothAction) -> CyclicNodeAction:
        if bx.p != by.p or bx.n != by.n:
            raise HypothesisError("branch actions must share p and the group Z/p^n")
        return cls(bx.p, bx.n, NodeAutomorphism(bx.generator.s, by.generator.s),
                   bx.faithful_exponent, by.faithful_exponent)


@dataclass(frozen=True)
class NodeProfile:
    conductor_pair: tuple
    different_pair: tuple
    image_orders: tuple = (1, 1)


@dataclass(frozen=True)
class FirstOrderNodeLift:
    lam: FpScalar
    f0: TruncatedSeries
    f1: TruncatedSeries


def _branch(p: int, m, precision: int, n: int) -> CyclicSmoothAction:
    if is_inf(m):
        return trivial_action(p, precision, n)
    if not isinstance(m, int) or m <= 0:
        raise HypothesisError(f"invalid conductor {m!r}: need a positive integer or inf")
    return standard_action(p, m, precision, n)


def standard_node_action(p: int, m, mp, precision: int | None = None, n: int = 1) -> CyclicNodeAction:
    """``sigma(x) = x/(1+x^m)^(1/m)``, ``sigma(y) = y/(1+y^m')^(1/m')``; ``INF`` is trivial."""
    p = check_prime(p)
    if precision is None:
        d = max((p - 1) * (c + 1) for c in (m, mp) if not is_inf(c)) if not (is_inf(m) and is_inf(mp)) else 0
        precision = default_precision(p, d)
    return CyclicNodeAction.from_branches(_branch(p, m, precision, n), _branch(p, mp, precision, n))


def _profile(b: CyclicSmoothAction) -> RamificationProfile:
    return ramification_profile(b)


def node_profile(a: CyclicNodeAction) -> NodeProfile:
    px, py = _profile(a.branch_x), _profile(a.branch_y)
    return NodeProfile((px.conductor, py.conductor), (px.different, py.different),
                       (px.group_order, py.group_order))


def h1_ext0_dimension(a: CyclicNodeAction) -> int:
    """Dimension of the topologically trivial first-order deformations (order p)."""
    if a.n != 1:
        raise HypothesisError("formula is stated for Z/p")
    prof = node_profile(a)
    m, mp = prof.conductor_pair
    if is_inf(m) or is_inf(mp):
        raise HypothesisError("formula needs a faithful action on both branches (conductor inf given)")
    p = a.p
    return m + mp + 2 + m // p - (-(-(2 * m + 1) // p)) + mp // p - (-(-(2 * mp + 1) // p))


def _phi_kernel_term(p: int, m) -> int:
    return 1 if is_inf(m) or (m + 1) % p == 0 else 0


def phi_kernel_dimension(a: CyclicNodeAction) -> int:
    m, mp = node_profile(a).conductor_pair
    return _phi_kernel_term(a.p, m) + _phi_kernel_term(a.p, mp)


def explicit_invariant_primitive(p: int, m: int, precision: int) -> TruncatedSeries:
    """``(1 - x^(m(p-1)))^((m+1)/(pm)) - 1`` for ``m+1 = 0 mod p``."""
    if (m + 1) % p:
        raise HypothesisError(f"m+1 = {m + 1} is not 0 mod p={p}")
    u = TruncatedSeries.one(p, precision) - TruncatedSeries.monomial(m * (p - 1), p, precision)
    return u.rational_power((m + 1) // p, m) - 1


def _coboundary_system(b: CyclicSmoothAction, N: int):
    """Columns ``(1 - sigma) x^i`` for ``1 <= i < N`` and the target ``(1 - sigma) 1``, mod x^(N-1)."""
    V = b.generator.vector_field_matrix[: N - 1, :N]
    M = (np.eye(N, dtype=np.int64)[: N - 1] - V) % b.p
    return M[:, 1:], M[:, 0]


def phi_cocycle_is_coboundary(a: CyclicNodeAction, branch: str = "x") -> bool:
    """Whether ``sigma |-> d - sigma d`` is a coboundary in the maximal-ideal fields of a branch."""
    b = {"x": a.branch_x, "y": a.branch_y}[branch]
    if b.faithful_exponent == 0:
        return True
    N = b.precision - 1
    cols, target = _coboundary_system(b, N)
    found = solve(cols, target, b.p) is not None
    m = ramification_profile(b).conductor
    if b.faithful_exponent == 1 and (m + 1) % b.p == 0 and _is_standard(b, m):
        f = explicit_invariant_primitive(b.p, m, N)
        field = VectorField(1 + f)
        if not (field - act_on_vector_field(b.generator, field)).is_zero():
            raise AssertionError("explicit primitive is not invariant")
        if not found:
            raise AssertionError("explicit primitive exists but linear solve failed")
    return found


def _is_standard(b: CyclicSmoothAction, m: int) -> bool:
    std = standard_action(b.p, m, b.precision)
    return std.generator.s == b.generator.s


def _solve_branch(b: CyclicSmoothAction, v: int):
    """``f in x k[[x]]`` with ``Tr((f - v) d) = 0`` to precision, else ``None``."""
    p = b.p
    N = b.precision - 1
    if v % p == 0:
        return TruncatedSeries.zero(p, N)
    if not b.is_faithful:
        return TruncatedSeries.zero(p, N)
    T = b.trace_matrix
    sol = solve(T[:, 1:], (v * T[:, 0]) % p, p)
    if sol is None:
        return None
    return TruncatedSeries([0, *sol.tolist()], p, N)


def lift_first_order(a: CyclicNodeAction) -> FirstOrderNodeLift:
    """A lift of the generator to ``xy = eps`` with ``lambda = 1``.

    Solves ``Tr((f0 - v1) dx^vee) = 0`` and ``Tr((f1 - v0) dy^vee) = 0``,
    where ``v1``, ``v0`` are the quadratic coefficients of sigma(y), sigma(x).
    """
    g = a.generator
    f0 = _solve_branch(a.branch_x, g.v1)
    f1 = _solve_branch(a.branch_y, g.v0)
    if f0 is None or f1 is None:
        side = "x" if f0 is None else "y"
        raise NotLiftable(f"trace equation on the {side}-branch has no solution to precision")
    return FirstOrderNodeLift(FpScalar(1, a.p), f0, f1)


# -- the ring k[eps]/(eps^2)[[x, y]]/(xy - lam eps) -------------------
#
# Monomials x^i y^j with i, j >= 1 equal lam eps x^(i-1) y^(j-1), and
# vanish once multiplied by eps, so every element is
# a0(x) + b0(y) + eps (a1(x) + b1(y)) with b0(0) = b1(0) = 0.

@dataclass(frozen=True)
class NodeElement:
    a0: TruncatedSeries
    b0: TruncatedSeries
    a1: TruncatedSeries
    b1: TruncatedSeries

    @property
    def precision(self) -> int:
        return min(s.precision for s in (self.a0, self.b0, self.a1, self.b1))

    def agrees_with(self, other: NodeElement, n: int) -> bool:
        mine = (self.a0, self.b0, self.a1, self.b1)
        theirs = (other.a0, other.b0, other.a1, other.b1)
        return all(s.agrees_with(t, n) for s, t in zip(mine, theirs))


class NodeRing:
    def __init__(self, p: int, lam: int, precision: int):
        self.p, self.lam, self.N = p, lam % p, precision

    def element(self, a0=None, b0=None, a1=None, b1=None) -> NodeElement:
        z = TruncatedSeries.zero(self.p, self.N)
        a0, b0, a1, b1 = (z if s is None else s for s in (a0, b0, a1, b1))
        return NodeElement(a0 + b0[0], b0 - b0[0], a1 + b1[0], b1 - b1[0])

    def x(self) -> NodeElement:
        return self.element(TruncatedSeries.x(self.p, self.N))

    def y(self) -> NodeElement:
        return self.element(None, TruncatedSeries.x(self.p, self.N))

    def mul(self, u: NodeElement, v: NodeElement) -> NodeElement:
        lam = self.lam
        a0 = u.a0 * v.a0
        b0 = u.b0 * v.b0 + v.b0 * u.a0[0] + u.b0 * v.a0[0]
        a1 = u.a0 * v.a1 + u.a1 * v.a0
        b1 = (u.b0 * v.b1 + u.b1 * v.b0 + v.b1 * u.a0[0] + u.b1 * v.a0[0]
              + u.b0 * v.a1[0] + v.b0 * u.a1[0])
        if lam:
            # (A - A(0)) B = lam eps At(x) Bt(y), with A = x At + A(0), B = y Bt
            for A, B in ((u.a0, v.b0), (v.a0, u.b0)):
                At = (A - A[0]).shift_down(1)
                Bt = B.shift_down(1)
                a1 = a1 + At * (Bt[0] * lam)
                b1 = b1 + (Bt - Bt[0]) * (At[0] * lam)
        return self.element(a0, b0, a1, b1)

    def substitute(self, u: NodeElement, X: NodeElement, Y: NodeElement) -> NodeElement:
        """Image of ``u`` under ``x |-> X``, ``y |-> Y``.

        ``X`` must be ``X0(x) + eps (ux(x) + vx(y))`` and ``Y`` must be
        ``Y0(y) + eps (uy(x) + vy(y))`` with ``X0(0) = Y0(0) = 0``.
        """
        if X.a0[0] or not X.b0.is_zero() or Y.a0[0] or not Y.a0.is_zero():
            raise HypothesisError("images must fix the branches modulo eps")
        X0, ux, vx = X.a0, X.a1, X.b1
        Y0, uy, vy = Y.b0, Y.a1, Y.b1
        dA = u.a0.derivative().compose(X0)
        dB = u.b0.derivative().compose(Y0)
        # Taylor in eps, then eps x^i y^j = 0 for i, j >= 1
        a0 = u.a0.compose(X0)
        b0 = u.b0.compose(Y0)
        a1 = u.a1.compose(X0) + dA * ux + uy * dB[0]
        b1 = u.b1.compose(Y0) + dB * vy + vx * dA[0] + (dB - dB[0]) * uy[0]
        return self.element(a0, b0, a1, b1)


def lift_generator_images(a: CyclicNodeAction, lift: FirstOrderNodeLift, precision: int | None = None):
    """Node ring and the images ``sigma_eps(x)``, ``sigma_eps(y)`` of the lifted generator.

    ``sigma_eps(x) = sigma(x) - lam eps E1(y) + eps f0(x) sigma'(x)`` with
    ``E1(y) = (sigma(y) - y) / (y sigma(y))``, and symmetrically for y.
    """
    return _generator_images(a.generator, lift, precision or a.precision)


def _generator_images(g: NodeAutomorphism, lift: FirstOrderNodeLift, precision: int):
    p = g.p
    lam = int(lift.lam) % p
    N = min(precision, g.P0.precision, g.P1.precision) - 2
    P0 = g.P0.truncate(N + 2)
    P1 = g.P1.truncate(N + 2)
    t = TruncatedSeries.x(p, N + 2)
    E0 = (P0 - t).shift_down(2) / P0.shift_down(1)
    E1 = (P1 - t).shift_down(2) / P1.shift_down(1)
    h0 = lift.f0 * P0.derivative()
    h1 = lift.f1 * P1.derivative()
    n = min(N, h0.precision, h1.precision)
    R = NodeRing(p, lam, n)
    E0, E1, h0, h1 = (s.truncate(n) for s in (E0, E1, h0, h1))
    X = R.element(P0.truncate(n), None, h0, E1 * (-lam))
    Y = R.element(None, P1.truncate(n), E0 * (-lam), h1)
    return R, X, Y


def verify_lift(a: CyclicNodeAction, lift: FirstOrderNodeLift, precision: int | None = None) -> bool:
    """Ideal ``(xy - lam eps)`` preserved and ``sigma_eps^(p^n) = id`` to first order."""
    R, X, Y = lift_generator_images(a, lift, precision)
    eps_lam = R.element(None, None, TruncatedSeries([R.lam], R.p, R.N))
    XY = R.mul(X, Y)
    if not XY.agrees_with(eps_lam, XY.precision):
        return False
    cx, cy = X, Y
    for _ in range(a.group_order - 1):
        cx, cy = R.substitute(cx, X, Y), R.substitute(cy, X, Y)
    n = min(cx.precision, cy.precision)
    if n < R.N // 2:
        raise PrecisionError(f"lift verification kept only precision {n}")
    return cx.agrees_with(R.x(), n) and cy.agrees_with(R.y(), n)


def _branch_condition(different: int, image_order: int) -> bool:
    """``2d + 1 != 0 mod |G_branch|``: a trace-zero unit exists on a faithful branch."""
    return (2 * different + 1) % image_order != 0


def classify_relevability_data(conductor, different, image_orders, group_order: int) -> RelevabilityClass:
    """Relevability from numeric local data; pairs are (x-branch, y-branch)."""
    m, mp = conductor
    d, dp = different
    gx, gy = image_orders
    for c, dd, g in ((m, d, gx), (mp, dp, gy)):
        if is_inf(c) != (g == 1):
            raise HypothesisError(f"conductor {c} inconsistent with branch image order {g}")
        if is_inf(c) and dd != 0:
            raise HypothesisError("a trivial branch action has different 0")
        if not is_inf(c) and isprime(g) and dd != (g - 1) * (c + 1):
            raise HypothesisError(f"order-{g} branch with conductor {c} has different {(g - 1) * (c + 1)}, not {dd}")
        if group_order % g:
            raise HypothesisError(f"branch image order {g} does not divide |G| = {group_order}")
    # the branch carrying conductor 1 forces a unit term on the other branch
    needs = []
    if mp == 1:
        needs.append((d, gx))
    if m == 1:
        needs.append((dp, gy))
    if not needs:
        return RelevabilityClass.UNCONDITIONAL
    unconditional = all(_branch_condition(dd, g) for dd, g in needs)
    relevable = all(_branch_condition(dd, g) or g != group_order for dd, g in needs)
    if unconditional:
        return RelevabilityClass.UNCONDITIONAL
    if relevable:
        return RelevabilityClass.CONDITIONAL
    return RelevabilityClass.NON_RELEVABLE


def classify_relevability(a: CyclicNodeAction) -> RelevabilityClass:
    prof = node_profile(a)
    return classify_relevability_data(prof.conductor_pair, prof.different_pair, prof.image_orders, a.group_order)


def lift_family(a: CyclicNodeAction, lift: FirstOrderNodeLift):
    """``(f_{sigma^k,0}, f_{sigma^k,1})`` for all k, read off from powers of the lifted generator."""
    R, X, Y = lift_generator_images(a, lift)
    lam = R.lam
    f0s, f1s = [TruncatedSeries.zero(a.p, R.N - 2)], [TruncatedSeries.zero(a.p, R.N - 2)]
    cx, cy = X, Y
    for k in range(1, a.group_order):
        # eps-part of sigma^k_eps(x) is h0(x) - lam E1(y), E1(0) the y^2 coefficient of sigma^k(y);
        # for y the x-series part carries all of -lam E0(x)
        h0 = cx.a1 + lam * cy.b0[2]
        h1 = cy.b1
        n = min(h0.precision, h1.precision, cx.a0.precision, cy.b0.precision) - 1
        f0s.append(h0.truncate(n) / cx.a0.derivative().truncate(n))
        f1s.append(h1.truncate(n) / cy.b0.derivative().truncate(n))
        cx, cy = R.substitute(cx, X, Y), R.substitute(cy, X, Y)
    n = min(f.precision for f in f0s + f1s)
    return [f.truncate(n) for f in f0s], [f.truncate(n) for f in f1s]


def check_recurrences(a: CyclicNodeAction, f0_family, f1_family, lam: int = 1) -> bool:
    """Check a family ``k |-> (f_{sigma^k,0}, f_{sigma^k,1})`` against the cocycle recurrences.

    The lifts built from the family must satisfy
    ``sigma^(k+1)_eps = sigma^k_eps o sigma_eps`` to first order for every k
    (indices mod |G|), and ``f_{id}`` must vanish.
    """
    order = a.group_order
    if len(f0_family) != order or len(f1_family) != order:
        raise HypothesisError(f"need one pair of series per group element ({order})")
    if not (f0_family[0].is_zero() and f1_family[0].is_zero()):
        return False
    N = min(f.precision for f in list(f0_family) + list(f1_family))
    images = []
    for k in range(order):
        gk = NodeAutomorphism(a.branch_x.element(k).s, a.branch_y.element(k).s) if k else None
        if gk is None:
            images.append(None)
            continue
        lift = FirstOrderNodeLift(FpScalar(lam, a.p), f0_family[k], f1_family[k])
        images.append(_generator_images(gk, lift, N))
    R = NodeRing(a.p, lam, min(im[0].N for im in images[1:]))
    ident = (R.x(), R.y())
    _, X1, Y1 = images[1]
    for k in range(1, order):
        _, Xk, Yk = images[k]
        Xk, Yk, X1c, Y1c = (_cut(u, R.N) for u in (Xk, Yk, X1, Y1))
        cx, cy = R.substitute(X1c, Xk, Yk), R.substitute(Y1c, Xk, Yk)
        nxt = (k + 1) % order
        Xn, Yn = ident if nxt == 0 else images[nxt][1:]
        n = min(cx.precision, cy.precision)
        if n < R.N // 2:
            raise PrecisionError(f"recurrence check kept only precision {n}")
        if not (cx.agrees_with(_cut(Xn, n), n) and cy.agrees_with(_cut(Yn, n), n)):
            return False
    return True


def _cut(u: NodeElement, n: int) -> NodeElement:
    return NodeElement(*(s.truncate(n) for s in (u.a0, u.b0, u.a1, u.b1)))
