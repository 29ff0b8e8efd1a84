"""Dimension of Ext^1_G(Omega_C, O_C) for stable curves with a p-group action.

The curve is described orbit by orbit: component orbits of the
normalization, orbits of points with nontrivial image stabilizer on the
normalization, and orbits of nodes.  Node data is either numeric or an
explicit pair of branch series, in which case every invariant is recomputed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .errors import HypothesisError, SpecError
from .node_local import (
    CyclicNodeAction,
    NodeAutomorphism,
    RelevabilityClass,
    classify_relevability_data,
    node_profile,
)
from .series import TruncatedSeries, check_prime
from .smooth_local import INF, CyclicSmoothAction, is_inf, ramification_profile

TOP_KEYS = {"p", "group_order", "components", "ramification_orbits", "singular_orbits", "flags"}
COMPONENT_KEYS = {"id", "quotient_genus", "component_genus", "stabilizer_order", "inertia_order"}
RAM_KEYS = {"component", "different", "stabilizer_order", "image_group_order"}
RAM_OPTIONAL = {"action"}
SING_KEYS = {"branch_components", "stabilizer_order", "permutes_branches"}
SING_NUMERIC = {"conductor", "different", "image_orders"}
SING_OPTIONAL = SING_NUMERIC | {"relevability", "action"}
FLAG_KEYS = {"all_stabilizers_cyclic", "components_genus_ge_2", "action_free_on_dense_open"}

PERMUTING_MESSAGE = (
    "node stabilizer permutes the branches; pass to the index-2 subgroup fixing them "
    "(which reduces to the non-permuting case) and describe that action instead"
)


@dataclass(frozen=True)
class ComponentOrbit:
    id: str
    quotient_genus: int
    component_genus: int
    stabilizer_order: int
    inertia_order: int


@dataclass(frozen=True)
class RamificationOrbit:
    component: str
    different: int
    stabilizer_order: int
    image_group_order: int
    from_series: bool = False


@dataclass(frozen=True)
class SingularOrbit:
    branch_components: tuple
    conductor: tuple
    different: tuple
    image_orders: tuple
    stabilizer_order: int
    relevability: RelevabilityClass
    from_series: bool = False


@dataclass(frozen=True)
class GlobalCurveSpec:
    p: int
    group_order: int
    components: tuple
    ramification_orbits: tuple
    singular_orbits: tuple
    flags: dict


# -- parsing ----------------------------------------------------------

def _ptr(base: str, key) -> str:
    return f"{base}/{str(key).replace('~', '~0').replace('/', '~1')}"


def _obj(value, pointer: str, required: set, optional: set = frozenset()) -> dict:
    if not isinstance(value, dict):
        raise SpecError("expected an object", pointer)
    for k in value:
        if k not in required and k not in optional:
            raise SpecError(f"unknown field {k!r}", _ptr(pointer, k))
    for k in sorted(required):
        if k not in value:
            raise SpecError(f"missing field {k!r}", _ptr(pointer, k))
    return value


def _int(value, pointer: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"expected an integer, got {value!r}", pointer)
    if value < minimum:
        raise SpecError(f"expected an integer >= {minimum}, got {value}", pointer)
    return value


def _bool(value, pointer: str) -> bool:
    if not isinstance(value, bool):
        raise SpecError(f"expected a boolean, got {value!r}", pointer)
    return value


def _conductor(value, pointer: str, p: int):
    if value == "inf":
        return INF
    m = _int(value, pointer, 1)
    if m % p == 0:
        raise SpecError(f"p | m (p={p}, m={m})", pointer)
    return m


def _different(value, pointer: str) -> int:
    # a trivial branch may spell its different "inf" like its conductor
    return 0 if value == "inf" else _int(value, pointer)


def _pair(value, pointer: str, item):
    if not isinstance(value, list) or len(value) != 2:
        raise SpecError("expected a list of two entries", pointer)
    return tuple(item(v, _ptr(pointer, i)) for i, v in enumerate(value))


def _p_power(value: int, p: int, pointer: str) -> int:
    v = value
    while v % p == 0:
        v //= p
    if v != 1:
        raise SpecError(f"{value} is not a power of p={p}", pointer)
    return value


def _divides(a: int, b: int, pointer: str, what: str):
    if b % a:
        raise SpecError(f"{what}: {a} does not divide {b}", pointer)


def _series(value, pointer: str, p: int) -> TruncatedSeries:
    if not isinstance(value, list) or len(value) < 3:
        raise SpecError("expected a list of at least 3 integer coefficients", pointer)
    coeffs = [_int(c, _ptr(pointer, i), 0) for i, c in enumerate(value)]
    return TruncatedSeries(coeffs, p, len(coeffs))


def _series_action(value, pointer: str, p: int) -> CyclicSmoothAction:
    obj = _obj(value, pointer, {"generator"}, {"n"})
    s = _series(obj["generator"], _ptr(pointer, "generator"), p)
    try:
        a = CyclicSmoothAction.from_generator(s)
        n = _int(obj["n"], _ptr(pointer, "n"), a.faithful_exponent) if "n" in obj else a.faithful_exponent
        return CyclicSmoothAction(p, n, a.generator, a.faithful_exponent)
    except SpecError:
        raise
    except Exception as exc:
        raise SpecError(f"invalid action series: {exc}", pointer) from exc


def _node_action(value, pointer: str, p: int) -> CyclicNodeAction:
    obj = _obj(value, pointer, {"P0", "P1"}, {"n"})
    P0 = _series(obj["P0"], _ptr(pointer, "P0"), p)
    P1 = _series(obj["P1"], _ptr(pointer, "P1"), p)
    try:
        bx = CyclicSmoothAction.from_generator(P0)
        by = CyclicSmoothAction.from_generator(P1)
        top = max(bx.faithful_exponent, by.faithful_exponent)
        n = _int(obj["n"], _ptr(pointer, "n"), top) if "n" in obj else top
        return CyclicNodeAction(p, n, NodeAutomorphism(P0, P1), bx.faithful_exponent, by.faithful_exponent)
    except SpecError:
        raise
    except Exception as exc:
        raise SpecError(f"invalid node action: {exc}", pointer) from exc


def _check_branch_data(p, conductor, different, image, pointer):
    """Consistency of one branch: trivial iff conductor inf iff different 0; order-p differents."""
    if is_inf(conductor) != (image == 1) or (different == 0) != (image == 1):
        raise SpecError(
            f"conductor {conductor}, different {different} and image order {image} are inconsistent",
            pointer,
        )
    if image == p and different != (p - 1) * (conductor + 1):
        raise SpecError(f"order-p branch with conductor {conductor} has different {(p - 1) * (conductor + 1)}, "
                        f"not {different}", pointer)


def parse_spec(doc: Any) -> GlobalCurveSpec:
    """Validate a decoded JSON document; errors carry JSON pointers."""
    top = _obj(doc, "", TOP_KEYS)
    p = _int(top["p"], "/p", 2)
    try:
        check_prime(p)
    except HypothesisError as exc:
        raise SpecError(str(exc), "/p") from exc
    order = _p_power(_int(top["group_order"], "/group_order", 1), p, "/group_order")

    flags_obj = _obj(top["flags"], "/flags", FLAG_KEYS)
    flags = {k: _bool(flags_obj[k], _ptr("/flags", k)) for k in sorted(FLAG_KEYS)}

    if not isinstance(top["components"], list) or not top["components"]:
        raise SpecError("expected a non-empty list", "/components")
    comps, ids = [], {}
    for i, c in enumerate(top["components"]):
        ptr = f"/components/{i}"
        c = _obj(c, ptr, COMPONENT_KEYS)
        cid = c["id"]
        if not isinstance(cid, str) or not cid:
            raise SpecError("expected a non-empty string", _ptr(ptr, "id"))
        if cid in ids:
            raise SpecError(f"duplicate component id {cid!r}", _ptr(ptr, "id"))
        stab = _p_power(_int(c["stabilizer_order"], _ptr(ptr, "stabilizer_order"), 1), p, _ptr(ptr, "stabilizer_order"))
        inert = _int(c["inertia_order"], _ptr(ptr, "inertia_order"), 1)
        _divides(stab, order, _ptr(ptr, "stabilizer_order"), "stabilizer order must divide |G|")
        _divides(inert, stab, _ptr(ptr, "inertia_order"), "inertia order must divide the stabilizer order")
        comp = ComponentOrbit(cid, _int(c["quotient_genus"], _ptr(ptr, "quotient_genus")),
                              _int(c["component_genus"], _ptr(ptr, "component_genus")), stab, inert)
        ids[cid] = comp
        comps.append(comp)

    def ref(value, pointer):
        if value not in ids:
            raise SpecError(f"unknown component {value!r}", pointer)
        return value

    if not isinstance(top["ramification_orbits"], list):
        raise SpecError("expected a list", "/ramification_orbits")
    rams = []
    for i, r in enumerate(top["ramification_orbits"]):
        ptr = f"/ramification_orbits/{i}"
        r = _obj(r, ptr, RAM_KEYS - ({"different", "image_group_order"} if isinstance(r, dict) and "action" in r else set()),
                 RAM_OPTIONAL | {"different", "image_group_order"})
        comp = ref(r["component"], _ptr(ptr, "component"))
        stab = _int(r["stabilizer_order"], _ptr(ptr, "stabilizer_order"), 1)
        _divides(stab, ids[comp].stabilizer_order, _ptr(ptr, "stabilizer_order"),
                 "point stabilizer must divide the component stabilizer")
        from_series = "action" in r
        if from_series:
            a = _series_action(r["action"], _ptr(ptr, "action"), p)
            d = ramification_profile(a).different
            img = a.faithful_order
            for key, got in (("different", d), ("image_group_order", img)):
                if key in r and _int(r[key], _ptr(ptr, key)) != got:
                    raise SpecError(f"{key} {r[key]} disagrees with the action series ({got})", _ptr(ptr, key))
        else:
            d = _int(r["different"], _ptr(ptr, "different"))
            img = _int(r["image_group_order"], _ptr(ptr, "image_group_order"), 1)
        _divides(img, stab, _ptr(ptr, "image_group_order"), "image order must divide the stabilizer order")
        if (d == 0) != (img == 1):
            raise SpecError("different is 0 exactly when the image group is trivial", _ptr(ptr, "different"))
        rams.append(RamificationOrbit(comp, d, stab, img, from_series))

    if not isinstance(top["singular_orbits"], list):
        raise SpecError("expected a list", "/singular_orbits")
    sings = []
    for i, s in enumerate(top["singular_orbits"]):
        ptr = f"/singular_orbits/{i}"
        has_action = isinstance(s, dict) and "action" in s
        s = _obj(s, ptr, SING_KEYS | (set() if has_action else SING_NUMERIC), SING_OPTIONAL)
        if _bool(s["permutes_branches"], _ptr(ptr, "permutes_branches")):
            raise SpecError(PERMUTING_MESSAGE, _ptr(ptr, "permutes_branches"))
        bc = _pair(s["branch_components"], _ptr(ptr, "branch_components"), ref)
        stab = _p_power(_int(s["stabilizer_order"], _ptr(ptr, "stabilizer_order"), 1), p, _ptr(ptr, "stabilizer_order"))
        _divides(stab, order, _ptr(ptr, "stabilizer_order"), "node stabilizer must divide |G|")
        numeric = None
        if all(k in s for k in SING_NUMERIC):
            numeric = (
                _pair(s["conductor"], _ptr(ptr, "conductor"), lambda v, q: _conductor(v, q, p)),
                _pair(s["different"], _ptr(ptr, "different"), _different),
                _pair(s["image_orders"], _ptr(ptr, "image_orders"), lambda v, q: _int(v, q, 1)),
            )
        elif any(k in s for k in SING_NUMERIC) and not has_action:
            missing = sorted(SING_NUMERIC - set(s))
            raise SpecError(f"missing field {missing[0]!r}", _ptr(ptr, missing[0]))
        if has_action:
            a = _node_action(s["action"], _ptr(ptr, "action"), p)
            if a.group_order != stab:
                raise SpecError(f"action group order {a.group_order} differs from stabilizer order {stab}",
                                _ptr(ptr, "stabilizer_order"))
            prof = node_profile(a)
            computed = (prof.conductor_pair, prof.different_pair, prof.image_orders)
            if numeric is not None and numeric != computed:
                raise SpecError(f"numeric data {numeric} disagrees with the action series {computed}", ptr)
            numeric = computed
        cond, diff, imgs = numeric
        for j in range(2):
            _divides(imgs[j], stab, _ptr(_ptr(ptr, "image_orders"), j), "branch image order must divide |D|")
            _check_branch_data(p, cond[j], diff[j], imgs[j], _ptr(_ptr(ptr, "different"), j))
        try:
            rel = classify_relevability_data(cond, diff, imgs, stab)
        except HypothesisError as exc:
            raise SpecError(str(exc), ptr) from exc
        if "relevability" in s:
            given = s["relevability"]
            names = {c.value for c in RelevabilityClass}
            if given not in names:
                raise SpecError(f"expected one of {sorted(names)}", _ptr(ptr, "relevability"))
            if given != rel.value:
                raise SpecError(f"supplied relevability {given} but the local data give {rel.value}",
                                _ptr(ptr, "relevability"))
        sings.append(SingularOrbit(bc, cond, diff, imgs, stab, rel, has_action))

    return GlobalCurveSpec(p, order, tuple(comps), tuple(rams), tuple(sings), flags)


def load_spec(path) -> GlobalCurveSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    return parse_spec(doc)


# -- formulas ---------------------------------------------------------

def _floor_term(spec: GlobalCurveSpec) -> int:
    return sum((2 * r.different) // r.stabilizer_order for r in spec.ramification_orbits)


def _require_cyclic(spec: GlobalCurveSpec):
    if not spec.flags["all_stabilizers_cyclic"]:
        raise HypothesisError("formula needs cyclic stabilizers at ramified and singular points")


def dim_ext1_smooth_curve(spec: GlobalCurveSpec) -> int:
    """``3 p_a(C/G) - 3 + sum floor(2 d / |D|)`` for a smooth curve."""
    _require_cyclic(spec)
    if spec.singular_orbits:
        raise HypothesisError("smooth-curve formula applies only without nodes")
    if len(spec.components) != 1:
        raise HypothesisError("a smooth connected curve has exactly one component orbit")
    (c,) = spec.components
    if c.stabilizer_order != spec.group_order or c.inertia_order != 1:
        raise HypothesisError("smooth-curve formula needs a faithful action on the (connected) curve")
    if c.component_genus < 2:
        raise HypothesisError(f"curve genus {c.component_genus} < 2 is not stable")
    return 3 * c.quotient_genus - 3 + _floor_term(spec)


def _p_cyclic_nodes(spec: GlobalCurveSpec):
    for s in spec.singular_orbits:
        if s.stabilizer_order != spec.p:
            raise HypothesisError(f"count needs node stabilizers of order p, got {s.stabilizer_order}")


def _f_term(p: int, m) -> int:
    return 1 if is_inf(m) or (m + 1) % p == 0 else 0


def f_sheaf_dimension(spec: GlobalCurveSpec) -> int:
    _p_cyclic_nodes(spec)
    return sum(_f_term(spec.p, m) for s in spec.singular_orbits for m in s.conductor)


def _g_term(d: int, image: int, stabilizer: int) -> int:
    return 1 if (2 * d + 1) % image != 0 or image != stabilizer else 0


def g_sheaf_counts(spec: GlobalCurveSpec) -> tuple[int, int]:
    """The x-branch and y-branch counts."""
    _require_cyclic(spec)
    cx = sum(_g_term(s.different[0], s.image_orders[0], s.stabilizer_order) for s in spec.singular_orbits)
    cy = sum(_g_term(s.different[1], s.image_orders[1], s.stabilizer_order) for s in spec.singular_orbits)
    return cx, cy


def g_sheaf_dimension(spec: GlobalCurveSpec) -> int:
    return sum(g_sheaf_counts(spec))


def riemann_hurwitz_defects(spec: GlobalCurveSpec) -> list:
    """Components where ``2g - 2 = |G_b|(2g' - 2) + sum (|G_b|/|G_q|) d_q`` fails."""
    out = []
    for c in spec.components:
        gb = c.stabilizer_order // c.inertia_order
        rhs = gb * (2 * c.quotient_genus - 2) + sum(
            (gb // r.image_group_order) * r.different for r in spec.ramification_orbits if r.component == c.id
        )
        if 2 * c.component_genus - 2 != rhs:
            out.append((c.id, 2 * c.component_genus - 2, rhs))
    return out


REPORT_FIELDS = (
    "dim_smooth_global",
    "dim_H1_local_global_term",
    "F_dimension",
    "G_dimension",
    "unconditional_count",
    "dim_ext1_total",
)


@dataclass
class DimensionReport:
    dim_smooth_global: int | None = None
    dim_H1_local_global_term: int | None = None
    F_dimension: int | None = None
    G_dimension: int | None = None
    unconditional_count: int | None = None
    dim_ext1_total: int | None = None
    notes: dict = field(default_factory=dict)
    inapplicable: dict = field(default_factory=dict)
    hypotheses_checked: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in REPORT_FIELDS}
        out.update(notes=dict(self.notes), inapplicable=dict(self.inapplicable),
                   hypotheses_checked=list(self.hypotheses_checked), warnings=list(self.warnings))
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> DimensionReport:
        keys = set(REPORT_FIELDS) | {"notes", "inapplicable", "hypotheses_checked", "warnings"}
        _obj(doc, "", keys)
        for k in REPORT_FIELDS:
            v = doc[k]
            if v is not None and (isinstance(v, bool) or not isinstance(v, int)):
                raise SpecError("expected an integer or null", _ptr("", k))
            if v is None and k not in doc["inapplicable"]:
                raise SpecError("null field without an inapplicability reason", _ptr("", k))
        for k in ("notes", "inapplicable"):
            if not isinstance(doc[k], dict) or not all(isinstance(v, str) for v in doc[k].values()):
                raise SpecError("expected an object of strings", _ptr("", k))
        for k in ("hypotheses_checked", "warnings"):
            if not isinstance(doc[k], list) or not all(isinstance(v, str) for v in doc[k]):
                raise SpecError("expected a list of strings", _ptr("", k))
        return cls(**{k: doc[k] for k in keys})


def _genus_gate(spec: GlobalCurveSpec, report: DimensionReport):
    f = spec.flags
    if f["components_genus_ge_2"]:
        low = [c.id for c in spec.components if c.component_genus < 2]
        if low:
            raise HypothesisError(f"flag components_genus_ge_2 set but components {low} have genus < 2")
        report.hypotheses_checked.append("every component of the normalization has genus >= 2")
        return
    if f["action_free_on_dense_open"]:
        bad = [c.id for c in spec.components if c.inertia_order != 1]
        if bad:
            raise HypothesisError(f"flag action_free_on_dense_open set but components {bad} have inertia")
        report.hypotheses_checked.append("action is free on a dense open (all inertia orders 1)")
        return
    raise HypothesisError(
        "neither components_genus_ge_2 nor action_free_on_dense_open holds; the correction "
        "term from low-genus components is not computed"
    )


def dim_ext1_stable_curve(spec: GlobalCurveSpec) -> DimensionReport:
    """``2|C_sing/G| + sum(3 p_a(C_b/G) - 3) + sum floor(2 d/|D|) - G_x - G_y + #unconditional``."""
    report = DimensionReport()
    _require_cyclic(spec)
    report.hypotheses_checked.append("stabilizers at ramified and singular points are cyclic")
    if _cyclic_certified(spec):
        report.hypotheses_checked.append("G is cyclic (it equals a cyclic stabilizer)")
    else:
        report.warnings.append("cyclicity of G is taken from the input; no stabilizer has full order")
    report.hypotheses_checked.append("no node stabilizer permutes the branches")
    _genus_gate(spec, report)
    for cid, lhs, rhs in riemann_hurwitz_defects(spec):
        report.warnings.append(f"component {cid}: Riemann-Hurwitz gives 2g-2 = {rhs}, the input says {lhs}")

    nodes = len(spec.singular_orbits)
    comp_term = sum(3 * c.quotient_genus - 3 for c in spec.components)
    floor_term = _floor_term(spec)
    gx, gy = g_sheaf_counts(spec)
    unconditional = sum(1 for s in spec.singular_orbits if s.relevability is RelevabilityClass.UNCONDITIONAL)
    local_global = 2 * nodes + comp_term + floor_term - gx - gy

    report.dim_H1_local_global_term = local_global
    report.notes["dim_H1_local_global_term"] = (
        f"2*{nodes} + {comp_term} (components) + {floor_term} (ramification) - {gx} - {gy} (G-counts)"
    )
    report.G_dimension = gx + gy
    report.notes["G_dimension"] = "branch-wise counts of 2d+1 != 0 mod |G_p| or G_p != D_p"
    report.unconditional_count = unconditional
    report.notes["unconditional_count"] = "nodes whose action lifts to xy = eps unconditionally"
    report.dim_ext1_total = local_global + unconditional
    report.notes["dim_ext1_total"] = "local-global term plus unconditionally relevable nodes"
    try:
        report.F_dimension = f_sheaf_dimension(spec)
        report.notes["F_dimension"] = "branch-wise counts of m+1 = 0 mod p or m = inf"
    except HypothesisError as exc:
        report.inapplicable["F_dimension"] = str(exc)
    try:
        report.dim_smooth_global = dim_ext1_smooth_curve(spec)
        report.notes["dim_smooth_global"] = "3 p_a(C/G) - 3 + sum floor(2d/|D|)"
    except HypothesisError as exc:
        report.inapplicable["dim_smooth_global"] = str(exc)
    return report


def _cyclic_certified(spec: GlobalCurveSpec) -> bool:
    orders = [r.stabilizer_order for r in spec.ramification_orbits]
    orders += [s.stabilizer_order for s in spec.singular_orbits]
    return spec.group_order == 1 or spec.group_order in orders


def restrict_to_component(spec: GlobalCurveSpec, cid: str) -> GlobalCurveSpec:
    """The smooth description of one component orbit with its stabilizer as the group."""
    (c,) = [c for c in spec.components if c.id == cid]
    rams = tuple(r for r in spec.ramification_orbits if r.component == cid)
    return GlobalCurveSpec(spec.p, c.stabilizer_order, (c,), rams, (), dict(spec.flags))
