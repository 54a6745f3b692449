"""Service endpoints wrapping the core package, one route per command.

Every route answers {"result": ..., "warnings": [...]}.  Failures map to a
structured error body {"kind", "type", "detail"} with kind one of
validation, resource, or internal; clients key their exit codes off kind.
"""

import functools

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import (classifier, construction, corpus, groupoids, groups, harmonic,
                markov, specs)
from .. import __version__
from ..markov import Enumerated, ExactFinite, MonteCarlo
from . import schemas

_STATUS = {"validation": 400, "resource": 413, "internal": 500}

_RESOURCE = (markov.ResourceCap, groups.BallCapExceeded,
             construction.PowerSetCap, construction.SearchExhausted)
_VALIDATION = (specs.SpecError, groups.GroupError, groupoids.GroupoidError,
               markov.MarkovError, harmonic.HarmonicError,
               construction.ConstructionError, classifier.ClassifierError)


def error_kind(exc: Exception) -> str:
    if isinstance(exc, classifier.OracleConflict):
        return "internal"
    if isinstance(exc, _RESOURCE):
        return "resource"
    if isinstance(exc, _VALIDATION):
        return "validation"
    return "internal"


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except HTTPException:
            raise
        except Exception as exc:
            kind = error_kind(exc)
            raise HTTPException(
                status_code=_STATUS[kind],
                detail={"kind": kind, "type": type(exc).__name__,
                        "detail": str(exc)})
    return wrapper


app = FastAPI(title="gwalk", version=__version__)


@app.exception_handler(RequestValidationError)
def on_request_validation(request, exc: RequestValidationError):
    detail = {"kind": "validation", "type": "RequestValidationError",
              "detail": str(exc.errors())}
    return JSONResponse(status_code=400, content={"detail": detail})


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


def _load_instance(groupoid: dict, operator: list) -> markov.MarkovOperator:
    G = specs.groupoid_from_json(groupoid)
    return specs.operator_from_json(G, operator)


def _check_unit(G: groupoids.Groupoid, x: int) -> None:
    if not 0 <= x < G.n_units:
        raise specs.ValidationError(f"unit {x} out of range 0..{G.n_units - 1}")


@app.post("/classify")
@guarded
def classify(req: schemas.ClassifyRequest):
    G = specs.groupoid_from_json(req.groupoid)
    budgets = specs.budgets_from_json(req.budgets)
    operators = []
    if req.operator is not None:
        operators.append(specs.operator_from_json(G, req.operator))
    verdict = classifier.classify(G, budgets, cross_check_operators=operators)
    return {"result": specs.verdict_to_json(verdict), "warnings": []}


@app.post("/liouville")
@guarded
def liouville(req: schemas.LiouvilleRequest):
    P = _load_instance(req.groupoid, req.operator)
    G = P.groupoid
    units = req.units if req.units is not None else list(G.units())
    per_unit = []
    for x in units:
        _check_unit(G, x)
        basis = harmonic.harmonic_space(P, x, req.fiber_cap)
        per_unit.append(specs.basis_to_json(G, basis))
    result = {"units": per_unit,
              "liouville": all(b["liouville"] for b in per_unit)}
    return {"result": result, "warnings": []}


@app.post("/hitting")
@guarded
def hitting(req: schemas.HittingRequest):
    P = _load_instance(req.groupoid, req.operator)
    _check_unit(P.groupoid, req.unit)
    if req.mode == "exact":
        mode = ExactFinite()
    elif req.mode == "enumerated":
        if req.horizon is None:
            raise specs.ValidationError("enumerated mode needs a horizon")
        mode = Enumerated(req.horizon)
    elif req.mode in ("monte_carlo", "monte-carlo"):
        if req.samples is None or req.seed is None:
            raise specs.ValidationError("monte_carlo mode needs samples and seed")
        mode = MonteCarlo(req.samples, req.seed, req.max_steps)
    else:
        raise specs.ValidationError(f"unknown hitting mode {req.mode!r}")
    nu = markov.hitting_measure(P, req.unit, mode)
    warnings = []
    if nu.unaccounted > 0:
        note = f"unaccounted mass {specs.rational_text(nu.unaccounted)}"
        if nu.tail_certificate is not None:
            note += f", certified <= {specs.rational_text(nu.tail_certificate)}"
        warnings.append(note)
    return {"result": specs.hitting_to_json(P.groupoid, nu),
            "warnings": warnings}


@app.post("/walk")
@guarded
def walk(req: schemas.WalkRequest):
    P = _load_instance(req.groupoid, req.operator)
    _check_unit(P.groupoid, req.unit)
    if req.length < 0:
        raise specs.ValidationError("length must be >= 0")
    path = markov.sample_path(P, req.unit, req.length, req.seed)
    return {"result": specs.path_to_json(P.groupoid, path), "warnings": []}


@app.post("/fc-tower")
@guarded
def fc_tower(req: schemas.FcTowerRequest):
    G = specs.group_from_json(req.group, "group")
    for name in ("ball_radius", "class_budget", "max_levels"):
        if getattr(req, name) < 1:
            raise specs.ValidationError(f"{name} must be >= 1")
    tower = groups.fc_tower(G, req.ball_radius, req.class_budget, req.max_levels)
    return {"result": specs.tower_to_json(G, tower), "warnings": []}


@app.post("/construct")
@guarded
def construct(req: schemas.ConstructRequest):
    G = specs.group_from_json(req.group, "group")
    p = None
    if req.p is not None:
        p = {}
        for key, val in req.p.items():
            if not key.isdigit():
                raise specs.ValidationError(f"p.{key}: levels are integers")
            p[int(key)] = specs.rational(val, f"p.{key}")
    cert = construction.build_nonliouville_measure(
        G, req.epsilon, p=p, depth=req.depth,
        search_budget=req.search_budget,
        n_identity_levels=req.identity_levels)
    return {"result": specs.certificate_to_json(cert), "warnings": []}


@app.post("/verify")
@guarded
def verify(req: schemas.VerifyRequest):
    cert = specs.certificate_from_json(req.certificate)
    outcome = construction.verify_certificate(cert)
    return {"result": specs.verify_outcome_to_json(outcome), "warnings": []}


@app.post("/corpus")
@guarded
def corpus_endpoint(req: schemas.CorpusRequest):
    if req.relations < 0:
        raise specs.ValidationError("relations must be >= 0")
    entries = [{"name": "z_on_two_points",
                "instance": specs.instance_to_json(corpus.swap_walk())}]
    for i, P in enumerate(corpus.relation_instances(req.relations, req.seed)):
        entries.append({"name": f"relation-{i:03d}",
                        "instance": specs.instance_to_json(P)})
    if req.finite_fiber:
        for i, P in enumerate(corpus.finite_fiber_instances(req.seed)):
            entries.append({"name": f"finite-fiber-{i:02d}",
                            "instance": specs.instance_to_json(P)})
    if req.forced_return:
        for i, fr in enumerate(corpus.forced_return_instances(req.seed)):
            entries.append({"name": f"forced-return-{i:02d}",
                            "instance": specs.instance_to_json(fr.operator),
                            "unit": fr.unit, "horizon": fr.horizon})
    result = {"seed": req.seed, "count": len(entries), "instances": entries}
    return {"result": result, "warnings": []}
