"""JSON round trips and validation errors for the interchange layer."""

import json
from fractions import Fraction

import pytest

from gwalk import construction, corpus, groups, specs
from gwalk.classifier import Budgets
from gwalk.groupoids import Arrow, build_finite_relation

F = Fraction


def roundtrip_instance(P):
    blob = json.dumps(specs.instance_to_json(P), sort_keys=True)
    Q = specs.instance_from_json(json.loads(blob))
    return blob, json.dumps(specs.instance_to_json(Q), sort_keys=True)


def test_rational_round_trip():
    for q in (F(1, 2), F(-7, 3), F(5), F(0)):
        assert specs.rational(specs.rational_text(q), "$") == q
    assert specs.rational(3, "$") == 3
    with pytest.raises(specs.ValidationError, match=r"\$\.x"):
        specs.rational("one half", "$.x")
    with pytest.raises(specs.ValidationError):
        specs.rational(True, "$")
    with pytest.raises(specs.ValidationError):
        specs.rational("1/0", "$")


def test_exact_pair_rendering():
    assert specs.exact_pair(F(1, 4)) == {"exact": "1/4", "decimal": 0.25}


def test_instance_round_trips_all_kinds():
    pool = corpus.finite_fiber_instances()
    for P in [corpus.swap_walk(), corpus.relation_instances(1, seed=8)[0],
              pool[0], pool[11], pool[15]]:
        first, second = roundtrip_instance(P)
        assert first == second


def test_infinite_prefix_round_trip():
    R = corpus.infinite_orbit_window(4)
    obj = specs.groupoid_to_json(R)
    assert obj == {"kind": "infinite_orbit_prefix", "size": 4}
    back = specs.groupoid_from_json(obj)
    assert back.infinite_prefix and back.n_units == 4
    assert back.weights == R.weights and back.tail_mass == R.tail_mass


def test_arrow_round_trip_and_errors():
    T = corpus.swap_walk().groupoid
    a = Arrow(1, 0, (-2,))
    assert specs.arrow_from_json(T, specs.arrow_to_json(T, a), "$") == a
    with pytest.raises(specs.ValidationError, match="out of range"):
        specs.arrow_from_json(T, ["(1,)", 0, 5], "$")
    with pytest.raises(specs.ValidationError, match=r"\$\[0\]"):
        specs.arrow_from_json(T, ["wat", 0, 1], "$")
    with pytest.raises(specs.ValidationError, match="payload, source, target"):
        specs.arrow_from_json(T, ["(1,)", 0], "$")


def test_operator_duplicate_atoms_merge():
    R = build_finite_relation([[0, 1]])
    obj = [{"unit": 0, "atoms": [["e", 0, 0, "1/4"], ["e", 0, 0, "1/4"],
                                 ["e", 1, 0, "1/2"]]},
           {"unit": 1, "atoms": [["e", 1, 1, "1/2"], ["e", 0, 1, "1/2"]]}]
    P = specs.operator_from_json(R, obj)
    assert P.per_unit[0][R.unit_arrow(0)] == F(1, 2)


def test_validation_error_paths_are_specific():
    with pytest.raises(specs.ValidationError, match="groupoid.kind"):
        specs.groupoid_from_json({"kind": "mystery"})
    with pytest.raises(specs.ValidationError, match="missing field 'kind'"):
        specs.groupoid_from_json({})
    with pytest.raises(specs.ValidationError, match=r"operator\[0\]\.unit"):
        specs.operator_from_json(build_finite_relation([[0, 1]]),
                                 [{"unit": 9, "atoms": []}])
    bad = {"groupoid": {"kind": "finite_relation", "blocks": [[0, 1]]},
           "operator": [{"unit": 0, "atoms": [["e", 0, 0, "2/3"]]}]}
    with pytest.raises(specs.ValidationError, match="operator"):
        specs.instance_from_json(bad)  # masses do not sum to one


def test_nontrivial_cocycle_refuses_to_serialize():
    from gwalk.groupoids import Iso, build_semidirect

    C = groups.cyclic_table(3)
    twist = Iso("table", (0, 2, 1))
    G = build_semidirect([C, C], [[0, 1]], cocycle={(1, 0): twist})
    with pytest.raises(specs.ValidationError, match="identity cocycles"):
        specs.groupoid_to_json(G)


def test_load_json_reports_file_context(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(specs.ParseError, match="nope.json"):
        specs.load_json(str(missing))
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  broken\n")
    with pytest.raises(specs.ParseError, match=r"bad\.json:2:3"):
        specs.load_json(str(bad))


def test_save_and_load_instance(tmp_path):
    P = corpus.finite_fiber_instances()[0]
    path = tmp_path / "inst.json"
    specs.save_json(str(path), specs.instance_to_json(P))
    Q = specs.load_instance(str(path))
    assert specs.instance_to_json(Q) == specs.instance_to_json(P)


def test_budgets_from_json():
    assert specs.budgets_from_json(None) == Budgets()
    assert specs.budgets_from_json({"ball_radius": 2}) == Budgets(ball_radius=2)
    with pytest.raises(specs.ValidationError, match="unknown budget"):
        specs.budgets_from_json({"depth": 3})
    with pytest.raises(specs.ValidationError, match="positive"):
        specs.budgets_from_json({"class_budget": 0})


def test_certificate_round_trip_and_verify():
    cert = construction.build_nonliouville_measure(
        groups.Lamplighter(), "1/16", depth=3)
    blob = json.dumps(specs.certificate_to_json(cert), sort_keys=True)
    back = specs.certificate_from_json(json.loads(blob))
    assert back == cert
    assert construction.verify_certificate(back) == construction.Valid(cert.checks)


def test_certificate_size_mismatch_is_flagged():
    cert = construction.build_nonliouville_measure(
        groups.Lamplighter(), "1/16", depth=2)
    obj = specs.certificate_to_json(cert)
    obj["levels"][1]["sizes"]["c"] += 1
    with pytest.raises(specs.ValidationError, match=r"levels\[1\]\.sizes\.c"):
        specs.certificate_from_json(obj)


def test_certificate_mutated_tau_still_verifies_as_invalid():
    cert = construction.build_nonliouville_measure(
        groups.Lamplighter(), "1/16", depth=3)
    obj = specs.certificate_to_json(cert)
    obj["levels"][1]["tau"] = "t^1"
    back = specs.certificate_from_json(obj)
    out = construction.verify_certificate(back)
    assert out == construction.Invalid("super-switching at level 2")


def test_hitting_and_path_serialization():
    from gwalk import markov

    P = corpus.swap_walk()
    nu = markov.hitting_measure(P, 0, markov.Enumerated(2))
    obj = specs.hitting_to_json(P.groupoid, nu)
    assert obj["unit"] == 0
    assert obj["mode"] == {"kind": "enumerated", "horizon": 2}
    assert [a["mass"]["exact"] for a in obj["atoms"]] == ["1/4", "1/2", "1/4"]
    assert obj["unaccounted"] == {"exact": "0", "decimal": 0.0}
    assert obj["tail_certificate"] == {"exact": "0", "decimal": 0.0}

    path = markov.sample_path(P, 0, 3, seed=1)
    pobj = specs.path_to_json(P.groupoid, path)
    assert len(pobj["steps"]) == 4
    assert pobj["steps"][0] == ["0", 0, 0]


def test_tower_serialization():
    D = groups.InfiniteDihedral()
    tower = groups.fc_tower(D, 3, 64)
    obj = specs.tower_to_json(D, tower)
    assert obj["status"] == {"kind": "hypercentral", "level": 2, "note": ""}
    assert [lv["index"] for lv in obj["levels"]] == [1, 2]
    assert "e" in obj["levels"][0]["members"]
