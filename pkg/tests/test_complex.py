import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from strata import corpus
from strata.complex import (
    ComplexError,
    FilteredComplex,
    PerversityError,
    PerversitySpec,
    SchemaError,
    barycentric_subdivision,
    closed_star,
    cone,
    from_json,
    load_json,
    make_perversity,
    open_star_complement,
    product_with_interval,
    pseudomanifold_check,
    realize,
    save_json,
    stellar_near,
    suspension,
    to_json,
    trivially_filtered,
    validate,
    vertex_link,
)


def test_facets_keep_only_maximal_simplices():
    fc = FilteredComplex("t", 2, {"a": 2, "b": 2, "c": 2}, [["a", "b"], ["a", "b", "c"], ["c"]])
    assert fc.facets == (("a", "b", "c"),)
    assert fc.f_vector() == [3, 3, 1]


def test_unknown_vertex_is_rejected():
    with pytest.raises(ComplexError):
        FilteredComplex("t", 1, {"a": 1}, [["a", "b"]])


def test_vertices_sorted_by_level_then_name():
    fc = cone(trivially_filtered("I", [("x", "y")]))
    assert fc.vertices == ["c", "x", "y"]
    assert fc.sort(["y", "c", "x"]) == ("c", "x", "y")


@pytest.mark.parametrize("name", corpus.names())
def test_corpus_spaces_are_valid_pseudomanifolds(name):
    fc = corpus.get(name)
    assert validate(fc).ok, validate(fc).failures
    if name not in ("susp-RP3-minus-point", "cone-two-points-x-I", "RP2-x-I", "cone-two-points",
                    "cone-S2", "cone-RP2", "cone-RP3"):
        # spaces with boundary fail the closed pseudomanifold check
        assert pseudomanifold_check(fc).ok, pseudomanifold_check(fc).failures[:3]


@pytest.mark.parametrize("name", ["cone-S2", "RP2-x-I"])
def test_spaces_with_boundary_are_flagged(name):
    rep = pseudomanifold_check(corpus.get(name))
    assert not rep.ok
    assert any("top simplices" in f for f in rep.failures)


def test_validation_failures():
    no_top = FilteredComplex("t", 2, {"a": 1, "b": 1}, [["a", "b"]])
    assert not validate(no_top).ok
    singular_facet = FilteredComplex("t", 1, {"a": 0, "b": 1, "c": 0}, [["a", "b"], ["c"]])
    rep = validate(singular_facet)
    assert not rep.ok
    assert any("no vertex of level" in f for f in rep.failures)


@pytest.mark.parametrize("name,f", [("S2", [4, 6, 4]), ("T2", [7, 21, 14]), ("RP2", [6, 15, 10]),
                                    ("RP3", [11, 52, 82, 41])])
def test_f_vectors(name, f):
    fc = corpus.get(name)
    assert fc.f_vector() == f


@pytest.mark.parametrize("name,chi", [("S2", 2), ("T2", 0), ("RP2", 1), ("RP3", 0), ("S4", 2)])
def test_euler_characteristic(name, chi):
    fv = corpus.get(name).f_vector()
    assert sum((-1) ** k * n for k, n in enumerate(fv)) == chi


def test_strata_of_cone_and_suspension():
    c = corpus.get("cone-RP2")
    assert [(s.id, s.codim, len(s.vertices)) for s in c.strata] == [("S0.0", 3, 1), ("S3.0", 0, 6)]
    s = corpus.get("susp-S1")
    assert [(st.level, st.codim, len(st.vertices)) for st in s.strata] == [(0, 2, 1), (0, 2, 1), (2, 0, 3)]
    w = corpus.get("wedge-S2-S2")
    assert [st.codim for st in w.singular_strata] == [2]


def test_strata_components_follow_equal_level_edges():
    # the two open half-strips are separate regular strata
    fc = product_with_interval(corpus.get("cone-two-points"))
    assert [(st.level, st.codim, len(st.vertices)) for st in fc.strata] == [(1, 1, 2), (2, 0, 2), (2, 0, 2)]


def test_vertex_link_conventions():
    c = corpus.get("cone-RP2")
    link, anomalies = vertex_link(c, "c")
    assert not anomalies
    assert link.dim == 2 and link.f_vector() == [6, 15, 10]
    assert set(link.levels.values()) == {2}
    p = product_with_interval(corpus.get("cone-two-points"))
    link, anomalies = vertex_link(p, "v@0")
    assert link.dim == 1
    assert not anomalies


def test_generators_shift_levels():
    s1 = corpus.get("circle")
    c = cone(s1)
    assert c.dim == 2 and c.levels["c"] == 0 and all(c.levels[v] == 2 for v in s1.levels)
    s = suspension(s1)
    assert s.dim == 2 and sorted(s.levels[v] for v in ("N", "S")) == [0, 0]
    p = product_with_interval(s1, subdivisions=2)
    assert p.dim == 2 and p.f_vector()[0] == 9 and p.f_vector()[2] == 12


def test_generator_names_avoid_clashes():
    fc = trivially_filtered("I", [("c", "N")])
    assert "c1" in cone(fc).levels
    assert {"N1", "S"} <= set(suspension(fc).levels)


def test_barycentric_subdivision_counts():
    sd = barycentric_subdivision(corpus.get("S2"))
    # one vertex per simplex, 3! top simplices per triangle
    assert sd.f_vector()[0] == 14
    assert sd.f_vector()[2] == 24
    assert validate(sd).ok


def test_stellar_near_separates_the_vertex():
    fc = corpus.get("S2")
    sn = stellar_near(fc, ["0"])
    assert not (sn.neighbors["0"] & set(fc.levels))
    assert len(closed_star(sn, ["0"])) < len(sn.simplex_set)


def test_open_star_complement():
    fc = corpus.get("S2")
    d = open_star_complement(fc, ["0"])
    assert d.f_vector() == [3, 3, 1]
    with pytest.raises(ComplexError):
        open_star_complement(fc, ["nope"])
    with pytest.raises(ComplexError):
        open_star_complement(corpus.get("point"), ["0"])


@pytest.mark.parametrize("text,kind", [("zero", "zero"), ("0", "zero"), ("top", "top"), ("2", "constant"),
                                       ("const:-1", "constant"), ("gm:0,1", "gm"), ("dual:1", "dual"),
                                       ("S0.0=1", "explicit")])
def test_perversity_parse(text, kind):
    assert PerversitySpec.parse(text).kind == kind


def test_perversity_values():
    fc = corpus.get("cone-RP3")
    apex = fc.stratum_of["c"]
    assert make_perversity(fc, "top")[apex] == 2
    assert make_perversity(fc, "dual:1")[apex] == 1
    assert make_perversity(fc, "dual:zero")[apex] == 2
    assert make_perversity(fc, "gm:0,1")[apex] == 1
    assert make_perversity(fc, f"{apex}=5")[apex] == 5
    assert all(v == 0 for k, v in make_perversity(fc, "7").values.items() if k != apex)
    with pytest.raises(PerversityError):
        make_perversity(fc, "S9.9=1")
    with pytest.raises(PerversityError):
        make_perversity(fc, f"{fc.stratum_of['1']}=1")


@given(st.integers(-3, 5), st.integers(-3, 5))
def test_perversity_order_and_sum(a, b):
    fc = corpus.get("susp-S1")
    p, q = make_perversity(fc, str(a)), make_perversity(fc, str(b))
    assert (p <= q) == (a <= b)
    assert (p + q).values == make_perversity(fc, str(a + b)).values


def test_explicit_values_follow_generators():
    fc = corpus.get("cone-S2")
    spec = PerversitySpec("explicit", {fc.stratum_of["c"]: 1})
    sd = barycentric_subdivision(fc)
    p = realize(spec, sd, source=fc)
    assert p.at_vertex(sd, "c") == 1
    assert p.at_vertex(sd, "b(c|0)") == 0


def test_dual_perversity_sums_to_top():
    fc = corpus.get("susp-RP3")
    p = make_perversity(fc, "1")
    dp = make_perversity(fc, "dual:1")
    assert (p + dp).values == make_perversity(fc, "top").values


def test_json_round_trip(tmp_path):
    fc = corpus.get("cone-RP2")
    perv = {"zero": PerversitySpec("zero"), "apex": PerversitySpec("explicit", {"S0.0": 1}),
            "dual": PerversitySpec("dual", PerversitySpec("constant", 1))}
    path = tmp_path / "c.json"
    save_json(path, fc, perv)
    back, named, orient = load_json(path)
    assert back.facets == fc.facets and back.levels == fc.levels and back.dim == fc.dim
    assert named == perv
    assert orient is None


simplex_lists = st.lists(st.sets(st.integers(0, 6), min_size=1, max_size=3), min_size=1, max_size=12)


@given(simplex_lists, st.integers(0, 2), st.data())
def test_json_round_trip_random(faces, dim, data):
    verts = sorted({v for f in faces for v in f})
    levels = {str(v): data.draw(st.integers(0, dim)) for v in verts}
    fc = FilteredComplex("r", dim, levels, [[str(v) for v in f] for f in faces])
    back, _, _ = from_json(json.loads(json.dumps(to_json(fc))))
    assert back.facets == fc.facets
    assert back.levels == fc.levels
    assert [s.vertices for s in back.strata] == [s.vertices for s in fc.strata]


@pytest.mark.parametrize("obj,field", [
    ({}, "name"),
    ({"name": "x", "dimension": "2", "vertices": [], "simplices": []}, "dimension"),
    ({"name": "x", "dimension": 1, "vertices": [{"id": "a", "level": 3}], "simplices": []}, "vertices[0].level"),
    ({"name": "x", "dimension": 1, "vertices": [{"id": "a", "level": 1}], "simplices": [["b"]]}, "simplices[0][0]"),
    ({"name": "x", "dimension": 1, "vertices": [{"id": "a", "level": 1}], "simplices": [["a"]],
      "perversities": [{"name": "p", "kind": "nope"}]}, "perversities[0].kind"),
    ({"name": "x", "dimension": 1, "vertices": [{"id": "a", "level": 1}], "simplices": [["a"]],
      "perversities": [{"name": "p", "kind": "explicit", "data": {"S7.0": 1}}]}, "perversities[0].data"),
])
def test_schema_errors_name_the_field(obj, field):
    with pytest.raises(SchemaError, match=field.replace("[", r"\[").replace("]", r"\]")):
        from_json(obj)


def test_bad_json_text_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"name": }')
    with pytest.raises(SchemaError, match="line 1"):
        load_json(path)
