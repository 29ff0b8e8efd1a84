import copy
import json

import pytest
from hypothesis import given, settings, strategies as st

from equideform.errors import HypothesisError, SpecError
from equideform.global_curve import (
    DimensionReport,
    dim_ext1_smooth_curve,
    dim_ext1_stable_curve,
    f_sheaf_dimension,
    g_sheaf_dimension,
    load_spec,
    parse_spec,
    restrict_to_component,
)
from equideform.node_local import classify_relevability, standard_node_action
from equideform.smooth_local import standard_action

FLAGS = {"all_stabilizers_cyclic": True, "components_genus_ge_2": True, "action_free_on_dense_open": True}


def component(cid, qg, g, stab=3, inertia=1):
    return {"id": cid, "quotient_genus": qg, "component_genus": g, "stabilizer_order": stab, "inertia_order": inertia}


def ram(comp, d, stab=3, image=3):
    return {"component": comp, "different": d, "stabilizer_order": stab, "image_group_order": image}


def node(conductor, different, images=(3, 3), stab=3, comps=("A", "B"), **extra):
    out = {
        "branch_components": list(comps),
        "conductor": list(conductor),
        "different": list(different),
        "image_orders": list(images),
        "stabilizer_order": stab,
        "permutes_branches": False,
    }
    out.update(extra)
    return out


def doc(components, rams=(), nodes=(), p=3, order=3, flags=None):
    return {
        "p": p,
        "group_order": order,
        "components": list(components),
        "ramification_orbits": list(rams),
        "singular_orbits": list(nodes),
        "flags": dict(flags or FLAGS),
    }


def worked_example(m, d, genus):
    return doc(
        [component("A", 2, genus), component("B", 2, genus)],
        [ram("A", d), ram("B", d)],
        [node((m, m), (d, d))],
    )


def series_version(spec_doc, m):
    out = copy.deepcopy(spec_doc)
    a = standard_node_action(3, m, m)
    sing = out["singular_orbits"][0]
    for k in ("conductor", "different", "image_orders"):
        del sing[k]
    sing["action"] = {"P0": list(a.generator.P0.coeffs), "P1": list(a.generator.P1.coeffs)}
    gen = list(standard_action(3, m).generator.s.coeffs)
    for r in out["ramification_orbits"]:
        del r["different"], r["image_group_order"]
        r["action"] = {"generator": gen}
    return out


@pytest.mark.parametrize("m,d,genus,total", [(2, 6, 7, 15), (1, 4, 6, 12)])
def test_worked_examples(m, d, genus, total):
    numeric = dim_ext1_stable_curve(parse_spec(worked_example(m, d, genus)))
    raw = dim_ext1_stable_curve(parse_spec(series_version(worked_example(m, d, genus), m)))
    assert numeric.dim_ext1_total == total
    assert numeric.to_dict() == raw.to_dict()
    assert numeric.warnings == []


def test_worked_example_breakdown():
    r = dim_ext1_stable_curve(parse_spec(worked_example(2, 6, 7)))
    assert (r.G_dimension, r.unconditional_count, r.F_dimension) == (2, 1, 2)
    assert r.dim_H1_local_global_term == 14
    assert r.dim_smooth_global is None and "dim_smooth_global" in r.inapplicable


def test_smooth_curve_examples():
    assert dim_ext1_smooth_curve(parse_spec(doc([component("C", 2, 6)], [ram("C", 4)]))) == 5
    assert dim_ext1_smooth_curve(parse_spec(doc([component("C", 4, 10)]))) == 9
    two = doc([component("C", 3, 9, stab=2)], [ram("C", 2, 2, 2), ram("C", 6, 2, 2)], p=2, order=2)
    assert dim_ext1_smooth_curve(parse_spec(two)) == 14


def test_smooth_curve_gates():
    with pytest.raises(HypothesisError, match="genus"):
        dim_ext1_smooth_curve(parse_spec(doc([component("C", 0, 1)])))
    with pytest.raises(HypothesisError, match="faithful"):
        dim_ext1_smooth_curve(parse_spec(doc([component("C", 2, 2, stab=3, inertia=3)])))
    with pytest.raises(HypothesisError, match="without nodes"):
        dim_ext1_smooth_curve(parse_spec(worked_example(2, 6, 7)))
    flags = dict(FLAGS, all_stabilizers_cyclic=False)
    with pytest.raises(HypothesisError, match="cyclic"):
        dim_ext1_smooth_curve(parse_spec(doc([component("C", 2, 6)], flags=flags)))


@pytest.mark.parametrize("conductor,count", [((2, 2), 2), ((1, 1), 0), (("inf", 1), 1)])
def test_f_counts(conductor, count):
    diffs = [0 if c == "inf" else 2 * (c + 1) for c in conductor]
    images = [1 if c == "inf" else 3 for c in conductor]
    spec = parse_spec(doc([component("A", 2, 7), component("B", 2, 7)], nodes=[node(conductor, diffs, images)]))
    assert f_sheaf_dimension(spec) == count


def test_g_counts():
    pair = [component("A", 2, 7), component("B", 2, 7)]
    assert g_sheaf_dimension(parse_spec(doc(pair, nodes=[node((2, 2), (6, 6))]))) == 2
    assert g_sheaf_dimension(parse_spec(doc(pair, nodes=[node((1, 1), (4, 4))]))) == 0
    # image orders 3 inside a node stabilizer of order 9: the second clause fires on both branches
    big = [component("A", 2, 7, stab=9), component("B", 2, 7, stab=9)]
    spec = parse_spec(doc(big, nodes=[node((1, 1), (4, 4), stab=9)], order=9))
    assert g_sheaf_dimension(spec) == 2
    with pytest.raises(HypothesisError):
        f_sheaf_dimension(spec)
    r = dim_ext1_stable_curve(spec)
    assert r.F_dimension is None and "F_dimension" in r.inapplicable


def _error(document):
    with pytest.raises(SpecError) as info:
        parse_spec(document)
    return info.value


def test_strict_parsing_pointers():
    base = worked_example(2, 6, 7)
    d = copy.deepcopy(base)
    d["colour"] = 1
    assert _error(d).pointer == "/colour"
    d = copy.deepcopy(base)
    d["singular_orbits"][0]["extra"] = True
    assert _error(d).pointer == "/singular_orbits/0/extra"
    d = copy.deepcopy(base)
    del d["components"][1]["quotient_genus"]
    assert _error(d).pointer == "/components/1/quotient_genus"
    d = copy.deepcopy(base)
    d["singular_orbits"][0]["conductor"][1] = 3
    assert _error(d).pointer == "/singular_orbits/0/conductor/1"
    d = copy.deepcopy(base)
    d["ramification_orbits"][0]["component"] = "Z"
    assert _error(d).pointer == "/ramification_orbits/0/component"
    d = copy.deepcopy(base)
    d["p"] = 4
    assert _error(d).pointer == "/p"
    d = copy.deepcopy(base)
    d["flags"]["components_genus_ge_2"] = "yes"
    assert _error(d).pointer == "/flags/components_genus_ge_2"
    assert str(_error(d)).startswith("/flags/components_genus_ge_2: ")


def test_inconsistent_local_data():
    d = worked_example(2, 6, 7)
    d["singular_orbits"][0]["different"] = [5, 6]
    _error(d)
    d = worked_example(2, 6, 7)
    d["ramification_orbits"][0]["different"] = 0
    _error(d)


def test_permuting_node_rejected():
    d = worked_example(2, 6, 7)
    d["singular_orbits"][0]["permutes_branches"] = True
    err = _error(d)
    assert err.pointer == "/singular_orbits/0/permutes_branches"
    assert "index-2 subgroup" in str(err)


def test_supplied_relevability_is_rechecked():
    d = worked_example(1, 4, 6)
    d["singular_orbits"][0]["relevability"] = "NonRelevable"
    assert dim_ext1_stable_curve(parse_spec(d)).dim_ext1_total == 12
    d["singular_orbits"][0]["relevability"] = "Unconditional"
    assert _error(d).pointer == "/singular_orbits/0/relevability"


def test_series_and_numbers_must_agree():
    d = series_version(worked_example(2, 6, 7), 2)
    d["singular_orbits"][0]["conductor"] = [2, 2]
    d["singular_orbits"][0]["different"] = [6, 6]
    d["singular_orbits"][0]["image_orders"] = [3, 3]
    parse_spec(d)
    d["singular_orbits"][0]["different"] = [6, 7]
    _error(d)
    d = series_version(worked_example(2, 6, 7), 2)
    d["ramification_orbits"][0]["different"] = 4
    assert _error(d).pointer == "/ramification_orbits/0/different"


def test_genus_gate():
    flags = dict(FLAGS, components_genus_ge_2=False, action_free_on_dense_open=False)
    d = doc([component("A", 0, 0)], flags=flags)
    with pytest.raises(HypothesisError, match="neither"):
        dim_ext1_stable_curve(parse_spec(d))
    d = doc([component("A", 0, 1)], flags=dict(FLAGS, action_free_on_dense_open=False))
    with pytest.raises(HypothesisError, match="genus < 2"):
        dim_ext1_stable_curve(parse_spec(d))
    free = dict(FLAGS, components_genus_ge_2=False)
    d = doc([component("A", 0, 1, stab=3, inertia=3)], flags=free)
    with pytest.raises(HypothesisError, match="inertia"):
        dim_ext1_stable_curve(parse_spec(d))
    ok = dim_ext1_stable_curve(parse_spec(doc([component("A", 2, 1)], flags=free)))
    assert ok.dim_ext1_total == 3


def test_riemann_hurwitz_warning():
    r = dim_ext1_stable_curve(parse_spec(worked_example(2, 6, 8)))
    assert any("Riemann-Hurwitz" in w for w in r.warnings)


def test_report_round_trip_and_file(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(worked_example(2, 6, 7)))
    r = dim_ext1_stable_curve(load_spec(path))
    again = DimensionReport.from_dict(json.loads(json.dumps(r.to_dict())))
    assert again.to_dict() == r.to_dict()
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(SpecError):
        load_spec(tmp_path / "bad.json")


def test_relevability_matches_node_local():
    for m, mp in ((2, 2), (1, 1), (2, 1), (1, 4), (4, 5)):
        a = standard_node_action(3, m, mp)
        d = doc(
            [component("A", 2, 7), component("B", 2, 7)],
            nodes=[node((m, mp), (2 * (m + 1), 2 * (mp + 1)))],
        )
        assert parse_spec(d).singular_orbits[0].relevability is classify_relevability(a)


CONDUCTORS = st.sampled_from([1, 2, 4, 5, 7])


@st.composite
def node_free_spec(draw):
    n = draw(st.integers(1, 3))
    comps, rams = [], []
    for i in range(n):
        cid = f"C{i}"
        ms = draw(st.lists(CONDUCTORS, max_size=3))
        qg = draw(st.integers(2, 4))
        ds = [2 * (m + 1) for m in ms]
        genus = (3 * (2 * qg - 2) + sum(ds)) // 2 + 1
        comps.append(component(cid, qg, genus))
        rams += [ram(cid, d) for d in ds]
    return doc(comps, rams)


@settings(max_examples=40, deadline=None, derandomize=True)
@given(node_free_spec())
def test_node_free_reduces_to_smooth_formula(d):
    spec = parse_spec(d)
    total = dim_ext1_stable_curve(spec).dim_ext1_total
    assert total == sum(dim_ext1_smooth_curve(restrict_to_component(spec, c.id)) for c in spec.components)
    if len(spec.components) == 1:
        assert total == dim_ext1_smooth_curve(spec)


@settings(max_examples=30, deadline=None, derandomize=True)
@given(node_free_spec(), st.sampled_from([2, 4, 5, 7]), st.sampled_from([2, 4, 5, 7]))
def test_adding_unconditional_node(d, m, mp):
    before = dim_ext1_stable_curve(parse_spec(d)).dim_ext1_total
    dd, ddp = 2 * (m + 1), 2 * (mp + 1)
    grown = copy.deepcopy(d)
    grown["singular_orbits"].append(node((m, mp), (dd, ddp), comps=("C0", "C0")))
    grown["ramification_orbits"] += [ram("C0", dd), ram("C0", ddp)]
    spec = parse_spec(grown)
    assert spec.singular_orbits[-1].relevability.value == "Unconditional"
    g_terms = int((2 * dd + 1) % 3 != 0) + int((2 * ddp + 1) % 3 != 0)
    increment = 2 + (2 * dd) // 3 + (2 * ddp) // 3 - g_terms + 1
    assert dim_ext1_stable_curve(spec).dim_ext1_total == before + increment
