"""JSON encoding of instances, results, and certificates.

Rationals travel as "p/q" strings so nothing is rounded; arrows travel as
[payload word, source, target] triples using each fiber group's element
syntax.  Loading validates shapes eagerly and reports the file and JSON
path of the first offending field.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional

from . import construction, groups
from .classifier import Budgets, Verdict
from .construction import NonLiouvilleCertificate, SwitchSets
from .groupoids import (Arrow, FiniteRelation, GroupBundle, Groupoid,
                        SemidirectProduct, Transformation,
                        build_finite_relation, build_infinite_orbit_prefix,
                        build_semidirect, build_transformation,
                        build_bundle)
from .harmonic import HarmonicBasis
from .markov import (Enumerated, ExactFinite, HittingMeasure, MarkovOperator,
                     MonteCarlo, Path, make_operator)


class SpecError(Exception):
    pass


class ParseError(SpecError):
    pass


class ValidationError(SpecError):
    pass


# ---------------------------------------------------------------------------
# scalars


def rational_text(q: Fraction) -> str:
    return str(Fraction(q))


def rational(obj: Any, where: str) -> Fraction:
    if isinstance(obj, bool) or not isinstance(obj, (str, int)):
        raise ValidationError(f"{where}: expected a rational string, got {obj!r}")
    try:
        return Fraction(obj)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"{where}: {exc}") from None


def exact_pair(q: Fraction) -> dict:
    """A rational as emitted in reports: exact string plus decimal rendering."""
    return {"exact": rational_text(q), "decimal": float(q)}


def _expect(obj: Any, kind: type, where: str) -> Any:
    names = {dict: "object", list: "array", str: "string", int: "integer"}
    if isinstance(obj, bool) or not isinstance(obj, kind):
        raise ValidationError(f"{where}: expected {names[kind]}, got {obj!r}")
    return obj


def _field(obj: dict, key: str, kind: type, where: str) -> Any:
    if key not in obj:
        raise ValidationError(f"{where}: missing field {key!r}")
    return _expect(obj[key], kind, f"{where}.{key}")


# ---------------------------------------------------------------------------
# groups and arrows


def group_to_json(G: groups.Group) -> dict:
    try:
        return groups.to_spec(G)
    except groups.GroupError as exc:
        raise ValidationError(str(exc)) from None


def group_from_json(obj: Any, where: str) -> groups.Group:
    _expect(obj, dict, where)
    try:
        return groups.from_spec(obj)
    except (groups.GroupError, TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from None


def element_from_text(G: groups.Group, text: Any, where: str):
    _expect(text, str, where)
    try:
        return G.parse(text)
    except (groups.GroupError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from None


def arrow_to_json(G: Groupoid, a: Arrow) -> list:
    word = G.payload_group(a.source).describe(a.payload)
    return [word, a.source, a.target]


def arrow_from_json(G: Groupoid, obj: Any, where: str) -> Arrow:
    _expect(obj, list, where)
    if len(obj) != 3:
        raise ValidationError(f"{where}: an arrow is [payload, source, target]")
    word, source, target = obj
    _expect(source, int, f"{where}[1]")
    _expect(target, int, f"{where}[2]")
    if not (0 <= source < G.n_units and 0 <= target < G.n_units):
        raise ValidationError(f"{where}: unit out of range")
    payload = element_from_text(G.payload_group(source), word, f"{where}[0]")
    return Arrow(source, target, payload)


# ---------------------------------------------------------------------------
# groupoids


def _weights_to_json(G: Groupoid) -> list[str]:
    return [rational_text(w) for w in G.weights]


def _weights_from_json(obj: dict, n: int, where: str) -> Optional[list[Fraction]]:
    if "weights" not in obj:
        return None
    raw = _expect(obj["weights"], list, f"{where}.weights")
    if len(raw) != n:
        raise ValidationError(f"{where}.weights: expected {n} entries")
    return [rational(w, f"{where}.weights[{i}]") for i, w in enumerate(raw)]


def groupoid_to_json(G: Groupoid) -> dict:
    if isinstance(G, FiniteRelation):
        if G.infinite_prefix:
            return {"kind": "infinite_orbit_prefix", "size": G.n_units}
        return {"kind": "finite_relation",
                "blocks": [sorted(b) for b in G.blocks],
                "weights": _weights_to_json(G)}
    if isinstance(G, GroupBundle):
        return {"kind": "group_bundle",
                "fibers": [group_to_json(H) for H in G.fibers],
                "weights": _weights_to_json(G)}
    if isinstance(G, SemidirectProduct):
        if any(iso.shape != "identity" for iso in G.cocycle.values()):
            raise ValidationError("only identity cocycles serialize to JSON")
        return {"kind": "semidirect",
                "fibers": [group_to_json(H) for H in G.fibers],
                "blocks": [sorted(b) for b in G.relation.blocks],
                "weights": _weights_to_json(G)}
    if isinstance(G, Transformation):
        gens = {G.group.describe(g): list(p) for g, p in sorted(
            G.gen_perms.items(), key=lambda kv: G.group.sort_key(kv[0]))}
        return {"kind": "transformation",
                "group": group_to_json(G.group),
                "generators": gens,
                "weights": _weights_to_json(G)}
    raise ValidationError(f"cannot serialize groupoid kind {type(G).__name__}")


def groupoid_from_json(obj: Any, where: str = "groupoid") -> Groupoid:
    _expect(obj, dict, where)
    kind = _field(obj, "kind", str, where)
    try:
        if kind == "infinite_orbit_prefix":
            return build_infinite_orbit_prefix(_field(obj, "size", int, where))
        if kind == "finite_relation":
            blocks = _field(obj, "blocks", list, where)
            weights = _weights_from_json(obj, sum(len(b) for b in blocks), where)
            return build_finite_relation(blocks, weights)
        if kind == "group_bundle":
            fibers = [group_from_json(s, f"{where}.fibers[{i}]")
                      for i, s in enumerate(_field(obj, "fibers", list, where))]
            return build_bundle(fibers, _weights_from_json(obj, len(fibers), where))
        if kind == "semidirect":
            fibers = [group_from_json(s, f"{where}.fibers[{i}]")
                      for i, s in enumerate(_field(obj, "fibers", list, where))]
            blocks = _field(obj, "blocks", list, where)
            return build_semidirect(fibers, blocks,
                                    weights=_weights_from_json(obj, len(fibers), where))
        if kind == "transformation":
            G = group_from_json(_field(obj, "group", dict, where), f"{where}.group")
            raw = _field(obj, "generators", dict, where)
            perms = {}
            n = None
            for word, perm in raw.items():
                g = element_from_text(G, word, f"{where}.generators")
                perm = _expect(perm, list, f"{where}.generators[{word!r}]")
                n = len(perm) if n is None else n
                perms[g] = tuple(perm)
            T = build_transformation(G, perms,
                                     _weights_from_json(obj, n or 0, where))
            return T
    except SpecError:
        raise
    except Exception as exc:
        raise ValidationError(f"{where}: {exc}") from None
    raise ValidationError(f"{where}.kind: unknown groupoid kind {kind!r}")


# ---------------------------------------------------------------------------
# operators and instances


def operator_to_json(P: MarkovOperator) -> list:
    out = []
    for x in P.groupoid.units():
        atoms = [arrow_to_json(P.groupoid, a) + [rational_text(p)]
                 for a, p in P.per_unit[x].atoms]
        out.append({"unit": x, "atoms": atoms})
    return out


def operator_from_json(G: Groupoid, obj: Any, where: str = "operator"
                       ) -> MarkovOperator:
    _expect(obj, list, where)
    per_unit: dict[int, dict[Arrow, Fraction]] = {}
    for i, entry in enumerate(obj):
        here = f"{where}[{i}]"
        _expect(entry, dict, here)
        x = _field(entry, "unit", int, here)
        if not 0 <= x < G.n_units:
            raise ValidationError(f"{here}.unit: out of range")
        atoms: dict[Arrow, Fraction] = {}
        for j, item in enumerate(_field(entry, "atoms", list, here)):
            spot = f"{here}.atoms[{j}]"
            _expect(item, list, spot)
            if len(item) != 4:
                raise ValidationError(
                    f"{spot}: an atom is [payload, source, target, mass]")
            a = arrow_from_json(G, item[:3], spot)
            atoms[a] = atoms.get(a, Fraction(0)) + rational(item[3], f"{spot}[3]")
        per_unit[x] = atoms
    try:
        return make_operator(G, per_unit)
    except Exception as exc:
        raise ValidationError(f"{where}: {exc}") from None


def instance_to_json(P: MarkovOperator) -> dict:
    return {"groupoid": groupoid_to_json(P.groupoid),
            "operator": operator_to_json(P)}


def instance_from_json(obj: Any, where: str = "$") -> MarkovOperator:
    _expect(obj, dict, where)
    G = groupoid_from_json(_field(obj, "groupoid", dict, where), f"{where}.groupoid")
    return operator_from_json(G, _field(obj, "operator", list, where),
                              f"{where}.operator")


def load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def save_json(path: str, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_instance(path: str) -> MarkovOperator:
    return instance_from_json(load_json(path), path)


# ---------------------------------------------------------------------------
# results


def mode_to_json(mode) -> dict:
    if isinstance(mode, ExactFinite):
        return {"kind": "exact"}
    if isinstance(mode, Enumerated):
        return {"kind": "enumerated", "horizon": mode.horizon}
    if isinstance(mode, MonteCarlo):
        return {"kind": "monte_carlo", "samples": mode.samples,
                "seed": mode.seed, "max_steps": mode.max_steps}
    raise ValidationError(f"unknown hitting mode {mode!r}")


def hitting_to_json(G: Groupoid, nu: HittingMeasure) -> dict:
    out = {"unit": nu.unit,
           "mode": mode_to_json(nu.method),
           "atoms": [{"arrow": arrow_to_json(G, a), "mass": exact_pair(p)}
                     for a, p in nu.atoms],
           "unaccounted": exact_pair(nu.unaccounted)}
    if nu.tail_certificate is not None:
        out["tail_certificate"] = exact_pair(nu.tail_certificate)
    return out


def basis_to_json(G: Groupoid, basis: HarmonicBasis) -> dict:
    functions = []
    for vec in basis.vectors:
        functions.append([{"arrow": arrow_to_json(G, a), "value": exact_pair(v)}
                          for a, v in zip(basis.fiber, vec)])
    return {"unit": basis.unit, "dimension": basis.dimension,
            "liouville": basis.dimension == 1, "functions": functions}


def path_to_json(G: Groupoid, path: Path) -> dict:
    return {"unit": path.unit,
            "steps": [arrow_to_json(G, a) for a in path.steps]}


def verdict_to_json(v: Verdict) -> dict:
    return {"outcome": v.outcome.value,
            "evidence": [{"criterion": e.criterion, "result": e.result,
                          "budget": e.budget} for e in v.evidence],
            "cross_checks": [{"description": c.description,
                              "dimension": c.dimension}
                             for c in v.cross_checks]}


def tower_to_json(G: groups.Group, tower: groups.FCTower) -> dict:
    levels = []
    for lv in tower.levels:
        members = sorted(lv.members, key=G.sort_key)
        levels.append({"index": lv.index,
                       "group": lv.group_desc,
                       "members": [G.describe(g) for g in members]})
    return {"status": {"kind": tower.status.kind, "level": tower.status.level,
                       "note": tower.status.note},
            "levels": levels}


def budgets_from_json(obj: Any, where: str = "budgets") -> Budgets:
    if obj is None:
        return Budgets()
    _expect(obj, dict, where)
    fields = {"ball_radius", "class_budget", "max_levels", "icc_radius",
              "fiber_budget"}
    values = {}
    for key, val in obj.items():
        if key not in fields:
            raise ValidationError(f"{where}.{key}: unknown budget")
        _expect(val, int, f"{where}.{key}")
        if val < 1:
            raise ValidationError(f"{where}.{key}: budgets are positive")
        values[key] = val
    return Budgets(**values)


# ---------------------------------------------------------------------------
# construction certificates


def certificate_to_json(cert: NonLiouvilleCertificate) -> dict:
    G = cert.group
    levels = []
    for lv in cert.levels:
        levels.append({
            "n": lv.n,
            "tau": G.describe(lv.tau_n),
            "a": [G.describe(g) for g in sorted(lv.A_n, key=G.sort_key)],
            "sizes": {"a": len(lv.A_n), "b": len(lv.B_n), "c": len(lv.C_n)}})
    return {"group": group_to_json(G),
            "group_tag": cert.group_tag,
            "epsilon": rational_text(cert.epsilon),
            "p": [[str(n), rational_text(w)] for n, w in cert.p],
            "removed_mass": rational_text(cert.removed_mass),
            "identity_levels": cert.identity_levels,
            "tau": G.describe(cert.tau),
            "levels": levels,
            "measure": [[G.describe(g), rational_text(w)]
                        for g, w in cert.measure],
            "checks": list(cert.checks)}


def certificate_from_json(obj: Any, where: str = "certificate"
                          ) -> NonLiouvilleCertificate:
    """Rebuild a certificate, rederiving the set chains from the level data.

    The per-level generating sets are stored element by element, so the
    cumulative chains come back exactly; the recorded sizes are checked
    against the rebuilt sets.
    """
    _expect(obj, dict, where)
    G = group_from_json(_field(obj, "group", dict, where), f"{where}.group")
    tau = element_from_text(G, _field(obj, "tau", str, where), f"{where}.tau")
    p = []
    for i, entry in enumerate(_field(obj, "p", list, where)):
        here = f"{where}.p[{i}]"
        _expect(entry, list, here)
        if len(entry) != 2:
            raise ValidationError(f"{here}: expected [level, weight]")
        level = _expect(entry[0], str, f"{here}[0]")
        if not level.isdigit():
            raise ValidationError(f"{here}[0]: expected a level number")
        p.append((int(level), rational(entry[1], f"{here}[1]")))
    levels = []
    running_b: frozenset = frozenset()
    tau_pair = frozenset({tau, G.inv(tau)})
    for i, entry in enumerate(_field(obj, "levels", list, where)):
        here = f"{where}.levels[{i}]"
        _expect(entry, dict, here)
        n = _field(entry, "n", int, here)
        tau_n = element_from_text(G, _field(entry, "tau", str, here), f"{here}.tau")
        a_set = frozenset(
            element_from_text(G, w, f"{here}.a[{j}]")
            for j, w in enumerate(_field(entry, "a", list, here)))
        running_b = running_b | a_set
        c_set = running_b | tau_pair
        sizes = _field(entry, "sizes", dict, here)
        got = {"a": len(a_set), "b": len(running_b), "c": len(c_set)}
        for key in ("a", "b", "c"):
            want = _field(sizes, key, int, f"{here}.sizes")
            if want != got[key]:
                raise ValidationError(
                    f"{here}.sizes.{key}: recorded {want}, rebuilt {got[key]}")
        levels.append(SwitchSets(n, tau_n, a_set, running_b, c_set))
    measure = []
    for i, entry in enumerate(_field(obj, "measure", list, where)):
        here = f"{where}.measure[{i}]"
        _expect(entry, list, here)
        if len(entry) != 2:
            raise ValidationError(f"{here}: expected [element, mass]")
        g = element_from_text(G, entry[0], f"{here}[0]")
        measure.append((g, rational(entry[1], f"{here}[1]")))
    checks = [_expect(c, str, f"{where}.checks[{i}]")
              for i, c in enumerate(_field(obj, "checks", list, where))]
    return NonLiouvilleCertificate(
        group=G,
        group_tag=_field(obj, "group_tag", str, where),
        epsilon=rational(_field(obj, "epsilon", str, where), f"{where}.epsilon"),
        p=tuple(p),
        removed_mass=rational(_field(obj, "removed_mass", str, where),
                              f"{where}.removed_mass"),
        identity_levels=_field(obj, "identity_levels", int, where),
        tau=tau,
        levels=tuple(levels),
        measure=tuple(measure),
        checks=tuple(checks))


def load_certificate(path: str) -> NonLiouvilleCertificate:
    return certificate_from_json(load_json(path), path)


def verify_outcome_to_json(outcome) -> dict:
    if isinstance(outcome, construction.Valid):
        return {"valid": True, "checks": list(outcome.checks)}
    return {"valid": False, "first_failed": outcome.first_failed}
