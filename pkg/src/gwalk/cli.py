"""Command line client for the groupoid walk service.

Commands run against an in-process copy of the service by default, so no
server needs to be up; --server points them at a remote instance instead.
Every run prints a JSON report (command echo, config echo, result, timing,
warnings) and exits 0 on success, 2 on validation errors, 3 on resource
caps, 4 on internal failures.  Identical configs produce byte-identical
result payloads; only the timing block varies.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
import time
from pathlib import Path
from typing import Any, Optional

import httpx

from . import __version__, corpus, specs

_EXIT_BY_KIND = {"validation": 2, "resource": 3, "internal": 4}

_BUDGET_FLAGS = ("ball_radius", "class_budget", "max_levels", "icc_radius",
                 "fiber_budget")

_GROUP_TAGS = "z[:d], dihedral, heisenberg, lamplighter, fsym[:bound], cyclic:n, sym:n"


def group_spec_from_tag(tag: str) -> dict:
    name, _, arg = tag.partition(":")
    try:
        if name == "z":
            return {"family": "Zd", "d": int(arg) if arg else 1}
        if name == "dihedral":
            return {"family": "dihedral_inf"}
        if name == "heisenberg":
            return {"family": "heisenberg"}
        if name == "lamplighter":
            return {"family": "lamplighter"}
        if name == "fsym":
            return {"family": "finitary_sym",
                    "support_bound": int(arg) if arg else 12}
        if name == "cyclic":
            return {"family": "finite_table", "preset": "cyclic",
                    "n": int(arg) if arg else 2}
        if name == "sym":
            return {"family": "finite_table", "preset": "sym",
                    "n": int(arg) if arg else 3}
    except ValueError:
        raise specs.ValidationError(f"bad group tag argument in {tag!r}") from None
    raise specs.ValidationError(
        f"unknown group tag {tag!r}; expected one of {_GROUP_TAGS}")


def _resolve_out(path: str) -> Path:
    p = Path(path)
    if p.is_absolute():
        return p
    return Path(os.environ.get("GWALK_OUT_DIR", ".")) / p


def _load_input(args) -> Any:
    """The --in file, or the built-in two-point swap instance."""
    if args.infile is None:
        return specs.instance_to_json(corpus.swap_walk())
    return specs.load_json(args.infile)


def _instance_parts(obj: Any, where: str) -> tuple[dict, Optional[list]]:
    if isinstance(obj, dict) and "groupoid" in obj:
        return obj["groupoid"], obj.get("operator")
    if isinstance(obj, dict) and "kind" in obj:
        return obj, None
    raise specs.ValidationError(
        f"{where}: expected an instance file or a bare groupoid spec")


def _require_operator(operator: Optional[list], where: str) -> list:
    if operator is None:
        raise specs.ValidationError(f"{where}: the input file has no operator")
    return operator


# ---------------------------------------------------------------------------
# payload builders, one per command


def _build_classify(args):
    obj = _load_input(args)
    gobj, operator = _instance_parts(obj, args.infile or "built-in input")
    payload: dict = {"groupoid": gobj}
    budgets = {k: getattr(args, k) for k in _BUDGET_FLAGS
               if getattr(args, k) is not None}
    if budgets:
        payload["budgets"] = budgets
    if args.cross_check:
        payload["operator"] = _require_operator(
            operator, args.infile or "built-in input")
    return "/classify", payload


def _build_liouville(args):
    obj = _load_input(args)
    gobj, operator = _instance_parts(obj, args.infile or "built-in input")
    payload = {"groupoid": gobj,
               "operator": _require_operator(operator, args.infile or "input"),
               "fiber_cap": args.fiber_cap}
    if args.units is not None:
        payload["units"] = args.units
    return "/liouville", payload


def _build_hitting(args):
    obj = _load_input(args)
    gobj, operator = _instance_parts(obj, args.infile or "built-in input")
    payload = {"groupoid": gobj,
               "operator": _require_operator(operator, args.infile or "input"),
               "unit": args.unit,
               "mode": args.mode.replace("-", "_"),
               "max_steps": args.max_steps}
    for key in ("horizon", "samples", "seed"):
        if getattr(args, key) is not None:
            payload[key] = getattr(args, key)
    return "/hitting", payload


def _build_walk(args):
    obj = _load_input(args)
    gobj, operator = _instance_parts(obj, args.infile or "built-in input")
    return "/walk", {"groupoid": gobj,
                     "operator": _require_operator(operator, args.infile or "input"),
                     "unit": args.unit,
                     "length": args.length,
                     "seed": args.seed}


def _build_fc_tower(args):
    return "/fc-tower", {"group": group_spec_from_tag(args.group),
                         "ball_radius": args.ball_radius,
                         "class_budget": args.class_budget,
                         "max_levels": args.max_levels}


def _build_construct(args):
    payload = {"group": group_spec_from_tag(args.group),
               "epsilon": args.epsilon,
               "depth": args.depth,
               "identity_levels": args.identity_levels,
               "search_budget": args.search_budget}
    return "/construct", payload


def _build_verify(args):
    obj = specs.load_json(args.infile)
    if isinstance(obj, dict) and "certificate" in obj:
        obj = obj["certificate"]
    return "/verify", {"certificate": obj}


def _build_corpus(args):
    return "/corpus", {"seed": args.seed,
                       "relations": args.relations,
                       "finite_fiber": not args.skip_finite_fiber,
                       "forced_return": not args.skip_forced_return}


# ---------------------------------------------------------------------------
# transport and reporting


def _post(server: Optional[str], path: str, payload: dict,
          timeout: float = 600.0) -> tuple[int, Any]:
    if server:
        with httpx.Client(base_url=server, timeout=timeout) as client:
            resp = client.post(path, json=payload)
            return resp.status_code, resp.json()

    from .service import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://gwalk",
                                     timeout=timeout) as client:
            resp = await client.post(path, json=payload)
            return resp.status_code, resp.json()

    return asyncio.run(go())


def _config_echo(args) -> dict:
    skip = {"command", "builder", "out"}
    config = {k: v for k, v in vars(args).items()
              if k not in skip and v is not None}
    config["version"] = __version__
    config.setdefault("workers", 1)
    if config.get("server") is None:
        config["server"] = "in-process"
    return config


def _emit(args, report: dict, stream) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text, file=stream)
    if getattr(args, "out", None):
        out_path = _resolve_out(args.out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text + "\n", encoding="utf-8")


def _emit_error(args, detail: dict) -> int:
    report = {"command": args.command, "config": _config_echo(args),
              "error": detail}
    _emit(args, report, sys.stderr)
    return _EXIT_BY_KIND.get(detail.get("kind"), 4)


def _write_corpus_files(out_dir: str, result: dict) -> None:
    base = _resolve_out(out_dir)
    base.mkdir(parents=True, exist_ok=True)
    for entry in result["instances"]:
        specs.save_json(str(base / f"{entry['name']}.json"), entry["instance"])


def run(args) -> int:
    try:
        path, payload = args.builder(args)
    except specs.SpecError as exc:
        return _emit_error(args, {"kind": "validation",
                                  "type": type(exc).__name__,
                                  "detail": str(exc)})
    started = time.perf_counter()
    try:
        status, body = _post(args.server, path, payload)
    except httpx.HTTPError as exc:
        return _emit_error(args, {"kind": "internal",
                                  "type": type(exc).__name__,
                                  "detail": str(exc)})
    elapsed = time.perf_counter() - started
    if status != 200 or not isinstance(body, dict) or "result" not in body:
        detail = body.get("detail") if isinstance(body, dict) else None
        if not isinstance(detail, dict):
            detail = {"kind": "internal", "type": "UnexpectedResponse",
                      "detail": f"status {status}: {body!r}"}
        return _emit_error(args, detail)
    report = {"command": args.command,
              "config": _config_echo(args),
              "result": body["result"],
              "warnings": body.get("warnings", []),
              "timing": {"seconds": round(elapsed, 6)}}
    _emit(args, report, sys.stdout)
    if args.command == "corpus" and args.out_dir:
        _write_corpus_files(args.out_dir, body["result"])
    if args.command == "construct" and args.cert_out:
        cert_path = _resolve_out(args.cert_out)
        cert_path.parent.mkdir(parents=True, exist_ok=True)
        specs.save_json(str(cert_path), body["result"])
    return 0


def _serve(args) -> int:
    import uvicorn

    uvicorn.run("gwalk.service.app:app", host=args.host, port=args.port,
                workers=args.workers)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--server", help="remote service URL; default runs in process")
    sub.add_argument("--out", help="also write the report here "
                                   "(relative to $GWALK_OUT_DIR if set)")
    sub.add_argument("--workers", type=int, default=1,
                     help="recorded worker count (in-process runs use one)")


def _add_infile(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--in", dest="infile",
                     help="instance JSON; defaults to the built-in "
                          "two-point swap instance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwalk",
        description="Random walks and Liouville classification on discrete "
                    "measured groupoids.")
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("classify", help="two-condition classification")
    _add_infile(p)
    for flag in _BUDGET_FLAGS:
        p.add_argument("--" + flag.replace("_", "-"), type=int, default=None)
    p.add_argument("--cross-check", action="store_true",
                   help="cross-check the verdict against the file's operator")
    _add_common(p)
    p.set_defaults(builder=_build_classify)

    p = commands.add_parser("liouville", help="exact harmonic basis per fiber")
    _add_infile(p)
    p.add_argument("--unit", dest="units", type=int, action="append",
                   help="fiber to probe; repeatable, default all")
    p.add_argument("--fiber-cap", type=int, default=100_000)
    _add_common(p)
    p.set_defaults(builder=_build_liouville)

    p = commands.add_parser("hitting", help="first-return hitting measure")
    _add_infile(p)
    p.add_argument("--unit", type=int, default=0)
    p.add_argument("--mode", default="exact",
                   choices=["exact", "enumerated", "monte-carlo", "monte_carlo"])
    p.add_argument("--horizon", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-steps", type=int, default=1000)
    _add_common(p)
    p.set_defaults(builder=_build_hitting)

    p = commands.add_parser("walk", help="sample one fiber walk")
    _add_infile(p)
    p.add_argument("--unit", type=int, default=0)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_common(p)
    p.set_defaults(builder=_build_walk)

    p = commands.add_parser("fc-tower", help="iterated FC-central series")
    p.add_argument("--group", required=True,
                   help=f"group tag, one of {_GROUP_TAGS}")
    p.add_argument("--ball-radius", type=int, default=4)
    p.add_argument("--class-budget", type=int, default=64)
    p.add_argument("--max-levels", type=int, default=8)
    _add_common(p)
    p.set_defaults(builder=_build_fc_tower)

    p = commands.add_parser("construct",
                            help="build a certified non-Liouville measure")
    p.add_argument("--group", required=True,
                   help=f"group tag, one of {_GROUP_TAGS}")
    p.add_argument("--epsilon", default="1/16")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--identity-levels", type=int, default=1)
    p.add_argument("--search-budget", type=int, default=256)
    p.add_argument("--cert-out", help="also write the bare certificate here")
    _add_common(p)
    p.set_defaults(builder=_build_construct)

    p = commands.add_parser("verify", help="check a certificate file")
    p.add_argument("--in", dest="infile", required=True,
                   help="certificate JSON (bare or under a 'certificate' key)")
    _add_common(p)
    p.set_defaults(builder=_build_verify)

    p = commands.add_parser("corpus", help="emit the seeded test corpus")
    p.add_argument("--seed", type=int, default=corpus.DEFAULT_SEED)
    p.add_argument("--relations", type=int, default=100)
    p.add_argument("--skip-finite-fiber", action="store_true")
    p.add_argument("--skip-forced-return", action="store_true")
    p.add_argument("--out-dir", help="write one instance file per entry "
                                     "(relative to $GWALK_OUT_DIR if set)")
    _add_common(p)
    p.set_defaults(builder=_build_corpus)

    p = commands.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--workers", type=int, default=1)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return _serve(args)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
