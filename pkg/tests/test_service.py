"""Endpoint behavior, exercised in process through the ASGI transport."""

import asyncio
import json
from fractions import Fraction

import httpx

from gwalk import corpus, specs
from gwalk.service import app

SWAP = specs.instance_to_json(corpus.swap_walk())
FINITE = specs.instance_to_json(corpus.finite_fiber_instances()[11])


def post(path: str, payload: dict) -> httpx.Response:
    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://service") as client:
            return await client.post(path, json=payload)
    return asyncio.run(go())


def get(path: str) -> httpx.Response:
    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://service") as client:
            return await client.get(path)
    return asyncio.run(go())


def test_health():
    r = get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_classify_swap_is_choquet_deny():
    r = post("/classify", {"groupoid": SWAP["groupoid"]})
    assert r.status_code == 200
    result = r.json()["result"]
    assert result["outcome"] == "choquet_deny"
    assert any(e["criterion"] == "orbit finiteness" for e in result["evidence"])


def test_classify_cross_checks_finite_fiber_operator():
    r = post("/classify", {"groupoid": FINITE["groupoid"],
                           "operator": FINITE["operator"]})
    assert r.status_code == 200
    result = r.json()["result"]
    assert result["outcome"] == "choquet_deny"
    assert result["cross_checks"] == [
        {"description": "operator 0 on semidirect", "dimension": 1}]


def test_classify_rejects_unknown_budget():
    r = post("/classify", {"groupoid": SWAP["groupoid"],
                           "budgets": {"nonsense": 3}})
    assert r.status_code == 400
    assert r.json()["detail"]["kind"] == "validation"


def test_exhausted_search_maps_to_413():
    r = post("/construct", {"group": {"family": "lamplighter"},
                            "depth": 3, "search_budget": 0})
    assert r.status_code == 413
    assert r.json()["detail"]["kind"] == "resource"
    assert r.json()["detail"]["type"] == "SearchExhausted"


def test_liouville_finite_fiber():
    r = post("/liouville", {"groupoid": FINITE["groupoid"],
                            "operator": FINITE["operator"]})
    assert r.status_code == 200
    result = r.json()["result"]
    assert result["liouville"] is True
    assert all(u["dimension"] == 1 for u in result["units"])


def test_liouville_refuses_infinite_fibers():
    r = post("/liouville", {"groupoid": SWAP["groupoid"],
                            "operator": SWAP["operator"]})
    assert r.status_code == 400
    assert "fiber" in r.json()["detail"]["detail"].lower()


def test_hitting_enumerated_swap_values():
    r = post("/hitting", {"groupoid": SWAP["groupoid"],
                          "operator": SWAP["operator"],
                          "unit": 0, "mode": "enumerated", "horizon": 2})
    assert r.status_code == 200
    masses = {tuple(a["arrow"]): a["mass"]["exact"]
              for a in r.json()["result"]["atoms"]}
    assert masses == {("0", 0, 0): "1/2", ("2", 0, 0): "1/4",
                      ("-2", 0, 0): "1/4"}
    assert r.json()["result"]["unaccounted"]["exact"] == "0"


def test_hitting_exact_and_enumerated_agree_on_finite_fibers():
    exact = post("/hitting", {"groupoid": FINITE["groupoid"],
                              "operator": FINITE["operator"],
                              "unit": 0, "mode": "exact"})
    enum = post("/hitting", {"groupoid": FINITE["groupoid"],
                             "operator": FINITE["operator"],
                             "unit": 0, "mode": "enumerated", "horizon": 12})
    assert exact.status_code == enum.status_code == 200
    exact_atoms = {tuple(a["arrow"]): a["mass"]["exact"]
                   for a in exact.json()["result"]["atoms"]}
    enum_atoms = {tuple(a["arrow"]): a["mass"]["exact"]
                  for a in enum.json()["result"]["atoms"]}
    assert set(enum_atoms) <= set(exact_atoms)
    slack = float(enum.json()["result"]["unaccounted"]["decimal"])
    for arrow, mass in exact_atoms.items():
        got = Fraction(enum_atoms.get(arrow, "0"))
        assert abs(got - Fraction(mass)) <= slack


def test_hitting_enumerated_requires_horizon():
    r = post("/hitting", {"groupoid": SWAP["groupoid"],
                          "operator": SWAP["operator"],
                          "unit": 0, "mode": "enumerated"})
    assert r.status_code == 400


def test_hitting_monte_carlo_reports_unaccounted_warning():
    r = post("/hitting", {"groupoid": SWAP["groupoid"],
                          "operator": SWAP["operator"], "unit": 0,
                          "mode": "monte_carlo", "samples": 200, "seed": 5,
                          "max_steps": 1})
    assert r.status_code == 200
    assert any("unaccounted" in w for w in r.json()["warnings"])


def test_walk_is_seed_deterministic():
    req = {"groupoid": SWAP["groupoid"], "operator": SWAP["operator"],
           "unit": 0, "length": 50, "seed": 7}
    a, b = post("/walk", req), post("/walk", req)
    assert a.status_code == 200
    assert a.json() == b.json()
    assert len(a.json()["result"]["steps"]) == 51
    other = dict(req, seed=8)
    assert post("/walk", other).json() != a.json()


def test_fc_tower_endpoint():
    r = post("/fc-tower", {"group": {"family": "dihedral_inf"}})
    assert r.status_code == 200
    assert r.json()["result"]["status"] == {"kind": "hypercentral", "level": 2,
                                           "note": ""}


def test_construct_then_verify_round_trip():
    r = post("/construct", {"group": {"family": "lamplighter"},
                            "epsilon": "1/16", "depth": 3})
    assert r.status_code == 200
    cert = r.json()["result"]
    v = post("/verify", {"certificate": cert})
    assert v.status_code == 200
    assert v.json()["result"]["valid"] is True

    mutated = json.loads(json.dumps(cert))
    mutated["epsilon"] = "1/4"
    v2 = post("/verify", {"certificate": mutated})
    assert v2.status_code == 200
    assert v2.json()["result"] == {"valid": False,
                                   "first_failed": "epsilon range"}


def test_construct_rejects_malformed_probabilities():
    r = post("/construct", {"group": {"family": "lamplighter"},
                            "p": {"first": "1/2"}})
    assert r.status_code == 400


def test_corpus_listing():
    r = post("/corpus", {"relations": 3, "forced_return": False})
    assert r.status_code == 200
    result = r.json()["result"]
    names = [e["name"] for e in result["instances"]]
    assert names[0] == "z_on_two_points"
    assert "relation-000" in names and "finite-fiber-00" in names
    assert not any(n.startswith("forced-return") for n in names)
    assert result["count"] == len(names)


def test_request_validation_has_stable_shape():
    r = post("/walk", {"groupoid": SWAP["groupoid"]})
    assert r.status_code == 400
    detail = r.json()["detail"]
    assert detail["kind"] == "validation"
    assert "type" in detail and "detail" in detail
