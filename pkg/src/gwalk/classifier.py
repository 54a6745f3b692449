"""Choquet-Deny decision procedure for the built-in groupoid kinds.

A verdict needs two witnessed conditions: every orbit finite, and every
isotropy group Choquet-Deny.  Isotropy status comes from finite order, a
hypercentral FC tower, or the family oracle; a budget running out yields
Inconclusive, never a negative claim.  Oracles are cross-checked against
the structural computation and a disagreement raises instead of silently
winning.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import groups
from .groupoids import ExceedsUnitSpace, Groupoid, fiber_enumerate
from .harmonic import harmonic_space
from .markov import MarkovOperator


class ClassifierError(Exception):
    pass


class OracleConflict(ClassifierError):
    """Structural computation and family oracle disagree; inputs are broken."""


class Outcome(enum.Enum):
    CHOQUET_DENY = "choquet_deny"
    NOT_CHOQUET_DENY = "not_choquet_deny"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Budgets:
    ball_radius: int = 4
    class_budget: int = 64
    max_levels: int = 8
    icc_radius: int = 2
    fiber_budget: int = 4096

    def describe(self) -> str:
        return (f"radius {self.ball_radius}, class budget {self.class_budget}, "
                f"levels {self.max_levels}")


@dataclass(frozen=True)
class Evidence:
    criterion: str
    result: str
    budget: str = ""


@dataclass(frozen=True)
class CrossCheck:
    description: str
    dimension: int


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    evidence: tuple[Evidence, ...]
    cross_checks: tuple[CrossCheck, ...] = ()


def group_cd_status(G: groups.Group, budgets: Budgets = Budgets()
                    ) -> tuple[Outcome, list[Evidence]]:
    """Choquet-Deny status of one group, with the evidence trail."""
    ev: list[Evidence] = []
    structural: Optional[Outcome] = None
    if G.order() is not None:
        structural = Outcome.CHOQUET_DENY
        ev.append(Evidence("finite group", f"{G.name()} has order {G.order()}"))
    else:
        tower = groups.fc_tower(G, budgets.ball_radius, budgets.class_budget,
                                budgets.max_levels)
        ev.append(Evidence("fc tower", f"{G.name()}: {tower.status.kind} at level "
                           f"{tower.status.level}", budgets.describe()))
        if tower.status.kind == "hypercentral":
            structural = Outcome.CHOQUET_DENY
    oracle = G.oracle
    if oracle is not None:
        oracle_outcome = Outcome(oracle.status)
        ev.append(Evidence("oracle", f"{G.name()}: {oracle.status} ({oracle.source})"))
        if structural is not None and structural != oracle_outcome:
            raise OracleConflict(
                f"{G.name()}: structural {structural.value} vs oracle {oracle.status}")
        return oracle_outcome, ev
    if structural is not None:
        return structural, ev
    return Outcome.INCONCLUSIVE, ev


def _isotropy_statuses(G: Groupoid, budgets: Budgets) -> tuple[Outcome, list[Evidence]]:
    seen: set[str] = set()
    worst = Outcome.CHOQUET_DENY
    ev: list[Evidence] = []
    for x in G.units():
        H = G.isotropy_group(x)
        if H is None:
            ev.append(Evidence("isotropy", f"unit {x}: no group handle available"))
            worst = _combine(worst, Outcome.INCONCLUSIVE)
            continue
        tag = H.name()
        if tag in seen:
            continue
        seen.add(tag)
        status, sub = group_cd_status(H, budgets)
        ev.extend(sub)
        worst = _combine(worst, status)
    return worst, ev


def _combine(a: Outcome, b: Outcome) -> Outcome:
    if Outcome.NOT_CHOQUET_DENY in (a, b):
        return Outcome.NOT_CHOQUET_DENY
    if Outcome.INCONCLUSIVE in (a, b):
        return Outcome.INCONCLUSIVE
    return Outcome.CHOQUET_DENY


def classify(G: Groupoid, budgets: Budgets = Budgets(),
             cross_check_operators: Sequence[MarkovOperator] = ()) -> Verdict:
    """The two-condition decision: finite orbits plus Choquet-Deny isotropy."""
    evidence: list[Evidence] = []
    for x in G.units():
        orb = G.orbit_of(x)
        if isinstance(orb, ExceedsUnitSpace):
            evidence.append(Evidence(
                "orbit finiteness",
                f"violated: unit {x} lies in an orbit exceeding the unit space"))
            return Verdict(Outcome.NOT_CHOQUET_DENY, tuple(evidence))
    evidence.append(Evidence("orbit finiteness",
                             f"all {G.n_units} units have finite orbits"))
    iso_outcome, iso_ev = _isotropy_statuses(G, budgets)
    evidence.extend(iso_ev)
    checks = tuple(_cross_check(P, i) for i, P in enumerate(cross_check_operators))
    if iso_outcome == Outcome.CHOQUET_DENY:
        bad = [c for c in checks if c.dimension != 1]
        if bad:
            raise OracleConflict(
                f"classified choquet_deny but exact harmonic dimension is "
                f"{bad[0].dimension} on {bad[0].description}")
    return Verdict(iso_outcome, tuple(evidence), checks)


def _cross_check(P: MarkovOperator, index: int) -> CrossCheck:
    dim = harmonic_space(P, next(iter(P.groupoid.units()))).dimension
    return CrossCheck(f"operator {index} on {P.groupoid.kind}", dim)


# ---------------------------------------------------------------------------
# groupoid-level icc


@dataclass(frozen=True)
class IccUpToBudget:
    radius: int
    class_budget: int
    note: str = ""


@dataclass(frozen=True)
class NotIcc:
    witness: str


def _closure_semidirect(G, unit, g, budget):
    """Conjugacy closure of the loop g at `unit` across its block, budgeted."""
    block = sorted(G.orbit_of(unit).units)
    seen = {(unit, g)}
    frontier = [(unit, g)]
    while frontier:
        nxt = []
        for u, a in frontier:
            fiber = G.payload_group(u)
            moves = [(u, fiber.mul(fiber.inv(c), fiber.mul(a, c)))
                     for c in fiber.generators]
            moves += [(w, G.delta(w, u).apply(a)) for w in block if w != u]
            for pair in moves:
                if pair not in seen:
                    if len(seen) >= budget:
                        return None
                    seen.add(pair)
                    nxt.append(pair)
        frontier = nxt
    return seen


def _closure_transformation(G, unit, m, budget):
    grp = G.group
    seen = {(unit, m)}
    frontier = [(unit, m)]
    while frontier:
        nxt = []
        for u, a in frontier:
            for c in grp.generators:
                w = G.act(grp.inv(c), u)
                pair = (w, grp.mul(grp.inv(c), grp.mul(a, c)))
                if pair not in seen:
                    if len(seen) >= budget:
                        return None
                    seen.add(pair)
                    nxt.append(pair)
        frontier = nxt
    return seen


def icc_groupoid_check(G: Groupoid, budgets: Budgets = Budgets()):
    """NotIcc with a finite-closure witness section, else a budget statement."""
    if G.kind == "finite_relation":
        return IccUpToBudget(0, 0, "trivial isotropy; condition is vacuous")
    for x in G.units():
        if G.kind == "transformation":
            grp = G.group
            candidates = [g for g in groups.ball(grp, budgets.icc_radius)
                          if g != grp.identity() and G.act(g, x) == x]
            describe = grp.describe
        else:
            H = G.isotropy_group(x)
            e = H.identity()
            candidates = [g for g in groups.ball(H, budgets.icc_radius) if g != e]
            describe = H.describe
        for g in candidates:
            if G.kind == "transformation":
                closure = _closure_transformation(G, x, g, budgets.class_budget)
            else:
                closure = _closure_semidirect(G, x, g, budgets.class_budget)
            if closure is not None:
                return NotIcc(f"section {x} -> {describe(g)} "
                              f"(conjugacy closure size {len(closure)})")
    return IccUpToBudget(budgets.icc_radius, budgets.class_budget)


# ---------------------------------------------------------------------------
# fiberwise FC-quotient tower for group bundles


@dataclass(frozen=True)
class BundleTower:
    towers: tuple[tuple[int, groups.FCTower], ...]
    lengths: tuple[Optional[int], ...]
    terminal: tuple[str, ...]

    @property
    def budget_exhausted(self) -> bool:
        return any(t.status.kind == "budget_exhausted" for _, t in self.towers)


def fc_quotient_tower(G: Groupoid, budgets: Budgets = Budgets()) -> BundleTower:
    """Per-fiber FC towers; terminal fibers are trivial or budget-certified icc."""
    if G.kind != "group_bundle":
        raise ClassifierError("fc_quotient_tower needs a group bundle")
    towers = []
    lengths: list[Optional[int]] = []
    terminal = []
    for x in G.units():
        H = G.isotropy_group(x)
        tower = groups.fc_tower(H, budgets.ball_radius, budgets.class_budget,
                                budgets.max_levels)
        towers.append((x, tower))
        if tower.status.kind == "hypercentral":
            lengths.append(tower.status.level)
            terminal.append("trivial")
        elif tower.status.kind == "stabilized_proper":
            lengths.append(tower.status.level - 1)
            icc = groups.is_icc_up_to_budget(H, budgets.icc_radius,
                                             budgets.class_budget)
            terminal.append("icc_up_to_budget" if isinstance(icc, groups.IccUpToBudget)
                            else f"undecided (finite class witness {icc.witness})")
        else:
            lengths.append(None)
            terminal.append("budget_exhausted")
    return BundleTower(tuple(towers), tuple(lengths), tuple(terminal))
