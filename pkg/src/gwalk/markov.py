"""Invariant Markov operators on groupoid fibers, exactly over the rationals.

An operator stores one finitely supported probability measure per unit;
the measure a fiber walk uses at an arrow g is always the translate of
the measure at s(g), so invariance holds structurally and is never
stored per arrow.  Walks on the fiber over x start at the unit arrow and
multiply increments on the right: X_{i+1} = X_i . h with h drawn from
the measure at s(X_i).

Everything on the certified paths (convolution, cylinder masses, tail
bounds, exact and enumerated hitting measures) uses Fraction arithmetic
with no tolerance.  Monte Carlo sampling uses a counter-based Philox
generator with the seed recorded in the result.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .exactlin import solve
from .groupoids import (Arrow, ExceedsUnitSpace, Groupoid, fiber_enumerate)


class MarkovError(Exception):
    pass


class NormalizationError(MarkovError):
    pass


class TargetMismatch(MarkovError):
    pass


class InfiniteOrbit(MarkovError):
    pass


class InfiniteFiber(MarkovError):
    pass


class NonabsorbingWalk(MarkovError):
    pass


class ResourceCap(MarkovError):
    pass


@dataclass(frozen=True)
class FiberMeasure:
    """Finitely supported probability measure on the fiber over `unit`."""

    unit: int
    atoms: tuple[tuple[Arrow, Fraction], ...]

    @staticmethod
    def make(G: Groupoid, unit: int, atoms: dict[Arrow, Fraction]) -> "FiberMeasure":
        cleaned = {}
        for arrow, p in atoms.items():
            p = Fraction(p)
            if p < 0:
                raise NormalizationError(f"negative mass at {arrow}")
            if p == 0:
                continue
            if arrow.target != unit:
                raise TargetMismatch(
                    f"atom {arrow} does not lie in the fiber over {unit}")
            cleaned[arrow] = cleaned.get(arrow, Fraction(0)) + p
        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            raise NormalizationError(f"atoms at unit {unit} sum to {total}, not 1")
        ordered = sorted(
            cleaned.items(),
            key=lambda kv: (kv[0].source,
                            G.payload_group(kv[0].source).sort_key(kv[0].payload)))
        return FiberMeasure(unit, tuple(ordered))

    def __getitem__(self, arrow: Arrow) -> Fraction:
        for a, p in self.atoms:
            if a == arrow:
                return p
        return Fraction(0)

    def support(self) -> list[Arrow]:
        return [a for a, _ in self.atoms]

    def as_dict(self) -> dict[Arrow, Fraction]:
        return dict(self.atoms)


class MarkovOperator:
    """Family of fiber measures, one per unit, over a fixed groupoid."""

    def __init__(self, groupoid: Groupoid, per_unit: dict[int, FiberMeasure]):
        self.groupoid = groupoid
        missing = [x for x in groupoid.units() if x not in per_unit]
        if missing:
            raise MarkovError(f"no measure for units {missing}")
        self.per_unit = {x: per_unit[x] for x in groupoid.units()}
        self._samplers: dict[int, tuple] = {}

    def measure_at(self, unit: int) -> FiberMeasure:
        return self.per_unit[unit]

    def arrow_measure(self, g: Arrow) -> dict[Arrow, Fraction]:
        """The translated measure at g: mass of d_{s(g)}P pushed along g."""
        G = self.groupoid
        return {G.compose(g, h): p for h, p in self.per_unit[g.source].atoms}


def make_operator(G: Groupoid, unit_measures: dict[int, dict[Arrow, Fraction]]
                  ) -> MarkovOperator:
    return MarkovOperator(
        G, {x: FiberMeasure.make(G, x, atoms) for x, atoms in unit_measures.items()})


def uniform_fiber_operator(G: Groupoid, budget: int = 4096) -> MarkovOperator:
    """Uniform measure on each (finite) fiber; handy full-support default."""
    per_unit = {}
    for x in G.units():
        arrows, done = fiber_enumerate(G, x, budget)
        if not done:
            raise InfiniteFiber(f"fiber over {x} is not finite within {budget}")
        p = Fraction(1, len(arrows))
        per_unit[x] = FiberMeasure.make(G, x, {a: p for a in arrows})
    return MarkovOperator(G, per_unit)


# ---------------------------------------------------------------------------
# convolution and regularization


def convolve(P: MarkovOperator, x: int, n: int,
             support_cap: int = 200_000) -> FiberMeasure:
    """n-step distribution of the fiber walk from x, as a fiber measure."""
    if n < 0:
        raise MarkovError("n must be >= 0")
    G = P.groupoid
    if n == 0:
        return FiberMeasure.make(G, x, {G.unit_arrow(x): Fraction(1)})
    dist = P.per_unit[x].as_dict()
    for _ in range(n - 1):
        nxt: dict[Arrow, Fraction] = {}
        for a, p in dist.items():
            for h, q in P.per_unit[a.source].atoms:
                b = G.compose(a, h)
                nxt[b] = nxt.get(b, Fraction(0)) + p * q
        if len(nxt) > support_cap:
            raise ResourceCap(f"convolution support exceeds {support_cap}")
        dist = nxt
    return FiberMeasure.make(G, x, dist)


@dataclass(frozen=True)
class CoveredBall:
    probed_arrows: int
    steps_used: int


@dataclass(frozen=True)
class Uncovered:
    witness: Arrow
    probed_steps: int


def nondegenerate_check(P: MarkovOperator, x: int, budget_n: int,
                        budget_fiber: int):
    """Do supports of the first budget_n convolution powers cover the fiber?

    The fiber is probed through its first budget_fiber arrows in canonical
    order; for infinite fibers this is a window check.
    """
    arrows, _ = fiber_enumerate(P.groupoid, x, budget_fiber)
    seen: set[Arrow] = set()
    for n in range(1, budget_n + 1):
        seen.update(convolve(P, x, n).support())
        if all(a in seen for a in arrows):
            return CoveredBall(len(arrows), n)
    for a in arrows:
        if a not in seen:
            return Uncovered(a, budget_n)
    return CoveredBall(len(arrows), budget_n)


def regularize(P: MarkovOperator, depth: int) -> MarkovOperator:
    """Geometric mixture of the first `depth` powers, weights 2^-i renormalized.

    Any fixed function of P is fixed for the mixture, and the support at
    one step already covers every power's support up to `depth`.
    """
    if depth < 1:
        raise MarkovError("depth must be >= 1")
    scale = 1 - Fraction(1, 2 ** depth)
    per_unit = {}
    for x in P.groupoid.units():
        mix: dict[Arrow, Fraction] = {}
        for i in range(1, depth + 1):
            w = Fraction(1, 2 ** i) / scale
            for a, p in convolve(P, x, i).atoms:
                mix[a] = mix.get(a, Fraction(0)) + w * p
        per_unit[x] = FiberMeasure.make(P.groupoid, x, mix)
    return MarkovOperator(P.groupoid, per_unit)


# ---------------------------------------------------------------------------
# paths and cylinders


@dataclass(frozen=True)
class Path:
    """Positions X_0, ..., X_n of a fiber walk; X_0 is the unit arrow."""

    unit: int
    steps: tuple[Arrow, ...]

    def __len__(self) -> int:
        return len(self.steps)


def cylinder_prob(P: MarkovOperator, path: Path) -> Fraction:
    """Mass of the cylinder pinning the first positions to `path`."""
    G = P.groupoid
    if not path.steps:
        return Fraction(1)
    if path.steps[0] != G.unit_arrow(path.unit):
        return Fraction(0)
    total = Fraction(1)
    for prev, cur in zip(path.steps, path.steps[1:]):
        if cur.target != path.unit:
            return Fraction(0)
        increment = G.compose(G.invert(prev), cur)
        total *= P.per_unit[prev.source][increment]
        if total == 0:
            return Fraction(0)
    return total


def _sampler(P: MarkovOperator, unit: int):
    cached = P._samplers.get(unit)
    if cached is None:
        atoms = P.per_unit[unit].atoms
        denom = 1
        for _, p in atoms:
            denom = denom * p.denominator // math.gcd(denom, p.denominator)
        if denom > 2 ** 62:
            raise ResourceCap("common denominator too large for exact sampling")
        cum = []
        acc = 0
        for _, p in atoms:
            acc += int(p * denom)
            cum.append(acc)
        cached = ([a for a, _ in atoms], cum, denom)
        P._samplers[unit] = cached
    return cached


def sample_path(P: MarkovOperator, x: int, length: int, seed: int) -> Path:
    """One trajectory of the fiber walk, exact inverse-threshold sampling."""
    rng = np.random.Generator(np.random.Philox(seed))
    G = P.groupoid
    cur = G.unit_arrow(x)
    steps = [cur]
    for _ in range(length):
        arrows, cum, denom = _sampler(P, cur.source)
        r = int(rng.integers(denom))
        cur = G.compose(cur, arrows[bisect_right(cum, r)])
        steps.append(cur)
    return Path(x, tuple(steps))


def path_frequencies(P: MarkovOperator, x: int, length: int, seed: int,
                     count: int) -> dict[tuple[Arrow, ...], int]:
    """Empirical cylinder counts over `count` walks from one Philox stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    G = P.groupoid
    unit = G.unit_arrow(x)
    freq: dict[tuple[Arrow, ...], int] = {}
    for _ in range(count):
        cur = unit
        steps = [cur]
        for _ in range(length):
            arrows, cum, denom = _sampler(P, cur.source)
            r = int(rng.integers(denom))
            cur = G.compose(cur, arrows[bisect_right(cum, r)])
            steps.append(cur)
        key = tuple(steps)
        freq[key] = freq.get(key, 0) + 1
    return freq


# ---------------------------------------------------------------------------
# return times


def source_chain(P: MarkovOperator, x: int) -> tuple[list[int], dict]:
    """The walk's source process: a Markov chain on the orbit of x."""
    orb = P.groupoid.orbit_of(x)
    if isinstance(orb, ExceedsUnitSpace):
        raise InfiniteOrbit(f"orbit of {x} is not finite")
    units = sorted(orb.units)
    Q = {u: {v: Fraction(0) for v in units} for u in units}
    for u in units:
        for h, p in P.per_unit[u].atoms:
            Q[u][h.source] += p
    return units, Q


@dataclass(frozen=True)
class TailBound:
    """Certified return-time tail: P[T > m*k] <= alpha^(m-1) for m >= 1.

    The doubling shape P[T > 2^n k] <= alpha^(2^n - 1) is the n-fold
    chaining of the one-block estimate P[T > K] <= P[T > K-k] * alpha,
    which needs K-k >= 1; no bound on P[T > k] itself comes for free.
    """

    unit: int
    k: int
    alpha: Fraction

    def bound_steps(self, horizon: int) -> Fraction:
        m = horizon // self.k
        return self.alpha ** (m - 1) if m >= 2 else Fraction(1)

    def bound(self, n: int) -> Fraction:
        return self.bound_steps((2 ** n) * self.k)

    @property
    def statement(self) -> str:
        a = self.alpha
        return (f"P[T > m * {self.k}] <= ({a.numerator}/{a.denominator})^(m-1) "
                f"for the first return time T to the isotropy copy at unit {self.unit}")


def return_time_tail(P: MarkovOperator, x: int, k: int) -> TailBound:
    """Avoidance maximum alpha_k over the orbit, computed exactly.

    alpha_k is the worst-case chance, over start units in the orbit, of the
    source chain avoiding x at all times 0..k.
    """
    if k < 1:
        raise MarkovError("k must be >= 1")
    units, Q = source_chain(P, x)
    avoid = [u for u in units if u != x]
    r = {u: Fraction(1) for u in avoid}  # time-0 avoidance from u != x
    for _ in range(k):
        r = {u: sum((Q[u][v] * r[v] for v in avoid), Fraction(0)) for u in avoid}
    alpha = max(r.values(), default=Fraction(0))
    return TailBound(x, k, alpha)


# ---------------------------------------------------------------------------
# hitting measures


@dataclass(frozen=True)
class ExactFinite:
    pass


@dataclass(frozen=True)
class Enumerated:
    horizon: int


@dataclass(frozen=True)
class MonteCarlo:
    samples: int
    seed: int
    max_steps: int = 1000


@dataclass(frozen=True)
class HittingMeasure:
    """Distribution of the walk's position at its first return to source x."""

    unit: int
    atoms: tuple[tuple[Arrow, Fraction], ...]
    unaccounted: Fraction
    method: object
    tail_certificate: Optional[Fraction] = None

    def __getitem__(self, arrow: Arrow) -> Fraction:
        for a, p in self.atoms:
            if a == arrow:
                return p
        return Fraction(0)

    def support(self) -> list[Arrow]:
        return [a for a, _ in self.atoms]

    def total(self) -> Fraction:
        return sum((p for _, p in self.atoms), Fraction(0))


def _sorted_atoms(G: Groupoid, atoms: dict[Arrow, Fraction]):
    return tuple(sorted(
        ((a, p) for a, p in atoms.items() if p > 0),
        key=lambda kv: (kv[0].source,
                        G.payload_group(kv[0].source).sort_key(kv[0].payload))))


def hitting_measure(P: MarkovOperator, x: int, mode) -> HittingMeasure:
    if isinstance(mode, ExactFinite):
        return _hitting_exact(P, x, mode)
    if isinstance(mode, Enumerated):
        return _hitting_enumerated(P, x, mode)
    if isinstance(mode, MonteCarlo):
        return _hitting_monte_carlo(P, x, mode)
    raise MarkovError(f"unknown hitting mode {mode!r}")


def _hitting_exact(P: MarkovOperator, x: int, mode: ExactFinite) -> HittingMeasure:
    G = P.groupoid
    arrows, done = fiber_enumerate(G, x, 100_000)
    if not done:
        raise InfiniteFiber(f"fiber over {x} is not finite; use Enumerated")
    absorbing = [a for a in arrows if a.source == x]
    transient = [a for a in arrows if a.source != x]
    t_index = {a: i for i, a in enumerate(transient)}
    a_index = {a: i for i, a in enumerate(absorbing)}
    nt, na = len(transient), len(absorbing)
    qtt = [[Fraction(0)] * nt for _ in range(nt)]
    qta = [[Fraction(0)] * na for _ in range(nt)]
    for a in transient:
        i = t_index[a]
        for h, p in P.per_unit[a.source].atoms:
            b = G.compose(a, h)
            if b.source == x:
                qta[i][a_index[b]] += p
            else:
                qtt[i][t_index[b]] += p
    if nt:
        sys = [[(Fraction(1) if i == j else Fraction(0)) - qtt[i][j]
                for j in range(nt)] for i in range(nt)]
        try:
            absorb = solve(sys, qta)
        except ValueError:
            raise NonabsorbingWalk(
                "some fiber states cannot reach the isotropy copy") from None
    else:
        absorb = []
    nu: dict[Arrow, Fraction] = {}
    for h, p in P.per_unit[x].atoms:  # the first step leaves the unit arrow
        if h.source == x:
            nu[h] = nu.get(h, Fraction(0)) + p
        else:
            row = absorb[t_index[h]]
            for j, b in enumerate(absorbing):
                if row[j]:
                    nu[b] = nu.get(b, Fraction(0)) + p * row[j]
    total = sum(nu.values(), Fraction(0))
    if total != 1:
        raise NonabsorbingWalk(f"absorbed mass {total} != 1")
    return HittingMeasure(x, _sorted_atoms(G, nu), Fraction(0), mode)


def _alpha_probe(P: MarkovOperator, x: int, horizon: int) -> dict[int, Fraction]:
    units, Q = source_chain(P, x)
    avoid = [u for u in units if u != x]
    r = {u: Fraction(1) for u in avoid}
    alphas = {}
    for k in range(1, horizon + 1):
        r = {u: sum((Q[u][v] * r[v] for v in avoid), Fraction(0)) for u in avoid}
        alphas[k] = max(r.values(), default=Fraction(0))
    return alphas


def _certified_tail(alphas: dict[int, Fraction], horizon: int) -> Fraction:
    best = Fraction(1)
    for k, alpha in alphas.items():
        m = horizon // k
        if m >= 2:
            best = min(best, alpha ** (m - 1))
    return best


def _hitting_enumerated(P: MarkovOperator, x: int, mode: Enumerated) -> HittingMeasure:
    if mode.horizon < 1:
        raise MarkovError("horizon must be >= 1")
    G = P.groupoid
    alphas = _alpha_probe(P, x, mode.horizon)
    nu: dict[Arrow, Fraction] = {}
    live: dict[Arrow, Fraction] = {G.unit_arrow(x): Fraction(1)}
    for _ in range(mode.horizon):
        nxt: dict[Arrow, Fraction] = {}
        for a, p in live.items():
            for h, q in P.per_unit[a.source].atoms:
                b = G.compose(a, h)
                if b.source == x:
                    nu[b] = nu.get(b, Fraction(0)) + p * q
                else:
                    nxt[b] = nxt.get(b, Fraction(0)) + p * q
        live = nxt
        if not live:
            break
    unaccounted = sum(live.values(), Fraction(0))
    if unaccounted > 0 and all(a == 1 for a in alphas.values()):
        # escape with a vacuous certificate: refuse rather than report junk
        raise NonabsorbingWalk(
            f"alpha_k = 1 for all k <= {mode.horizon}: nothing to certify")
    cert = _certified_tail(alphas, mode.horizon)
    if unaccounted > cert:
        raise MarkovError("internal: enumerated tail exceeds its certificate")
    return HittingMeasure(x, _sorted_atoms(G, nu), unaccounted, mode,
                          tail_certificate=cert)


def _hitting_monte_carlo(P: MarkovOperator, x: int, mode: MonteCarlo) -> HittingMeasure:
    G = P.groupoid
    rng = np.random.Generator(np.random.Philox(mode.seed))
    counts: dict[Arrow, int] = {}
    missed = 0
    unit = G.unit_arrow(x)
    for _ in range(mode.samples):
        cur = unit
        for _ in range(mode.max_steps):
            arrows, cum, denom = _sampler(P, cur.source)
            r = int(rng.integers(denom))
            cur = G.compose(cur, arrows[bisect_right(cum, r)])
            if cur.source == x:
                counts[cur] = counts.get(cur, 0) + 1
                break
        else:
            missed += 1
    atoms = {a: Fraction(c, mode.samples) for a, c in counts.items()}
    return HittingMeasure(x, _sorted_atoms(G, atoms),
                          Fraction(missed, mode.samples), mode)
