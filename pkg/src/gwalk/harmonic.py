"""Bounded harmonic functions on fibers: exact kernels, residuals, martingales.

On a finite fiber the harmonic space ker(P_x - I) is computed exactly over
the rationals; the walk is Liouville at x exactly when the dimension is 1.
On infinite fibers every check is window-relative: functions are finite
tables with a default value, and each report names the window it probed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exactlin import kernel_basis
from .groupoids import Arrow, Groupoid, fiber_enumerate
from .markov import (Enumerated, InfiniteFiber, MarkovOperator, Path,
                     ResourceCap, hitting_measure)


class HarmonicError(Exception):
    pass


@dataclass(frozen=True)
class BoundedFunction:
    """Windowed rational function on a fiber: finite table plus a default."""

    table: tuple[tuple[Arrow, Fraction], ...]
    default: Fraction
    bound: Fraction

    @staticmethod
    def make(G: Groupoid, table: dict[Arrow, Fraction], default: Fraction = Fraction(0),
             bound: Optional[Fraction] = None) -> "BoundedFunction":
        default = Fraction(default)
        values = [Fraction(v) for v in table.values()] + [default]
        needed = max((abs(v) for v in values), default=Fraction(0))
        if bound is None:
            bound = needed
        bound = Fraction(bound)
        if needed > bound:
            raise HarmonicError(f"values exceed the declared bound {bound}")
        ordered = sorted(
            ((a, Fraction(v)) for a, v in table.items()),
            key=lambda kv: (kv[0].target, kv[0].source,
                            G.payload_group(kv[0].source).sort_key(kv[0].payload)))
        return BoundedFunction(tuple(ordered), default, bound)

    @staticmethod
    def constant(c: Fraction) -> "BoundedFunction":
        c = Fraction(c)
        return BoundedFunction((), c, abs(c))

    def __call__(self, arrow: Arrow) -> Fraction:
        for a, v in self.table:
            if a == arrow:
                return v
        return self.default

    def window(self) -> list[Arrow]:
        return [a for a, _ in self.table]


@dataclass(frozen=True)
class HarmonicBasis:
    unit: int
    fiber: tuple[Arrow, ...]
    vectors: tuple[tuple[Fraction, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def functions(self, G: Groupoid) -> list[BoundedFunction]:
        out = []
        for v in self.vectors:
            out.append(BoundedFunction.make(G, dict(zip(self.fiber, v))))
        return out


def _transition_row(P: MarkovOperator, g: Arrow, index: dict[Arrow, int],
                    size: int) -> list[Fraction]:
    row = [Fraction(0)] * size
    for h, q in P.per_unit[g.source].atoms:
        row[index[P.groupoid.compose(g, h)]] += q
    return row


def harmonic_space(P: MarkovOperator, x: int, fiber_cap: int = 100_000) -> HarmonicBasis:
    """Exact basis of the bounded harmonic functions on a finite fiber."""
    fiber, done = fiber_enumerate(P.groupoid, x, fiber_cap)
    if not done:
        raise InfiniteFiber(f"fiber over {x} is not finite within {fiber_cap}")
    index = {a: i for i, a in enumerate(fiber)}
    n = len(fiber)
    matrix = []
    for i, g in enumerate(fiber):
        row = _transition_row(P, g, index, n)
        row[i] -= 1
        matrix.append(row)
    return HarmonicBasis(x, tuple(fiber), tuple(tuple(v) for v in kernel_basis(matrix)))


def liouville(P: MarkovOperator, x: int, fiber_cap: int = 100_000) -> bool:
    return harmonic_space(P, x, fiber_cap).dimension == 1


def check_harmonic(P: MarkovOperator, x: int, f: BoundedFunction,
                   ball_budget: int) -> Fraction:
    """Max |P_x f - f| over the first ball_budget fiber arrows, exactly.

    Outside the table f falls back to its default, so on infinite fibers
    the residual is meaningful on the probed window only.
    """
    if ball_budget < 1:
        raise HarmonicError("ball_budget must be >= 1")
    G = P.groupoid
    arrows, _ = fiber_enumerate(G, x, ball_budget)
    worst = Fraction(0)
    for g in arrows:
        acc = sum((q * f(G.compose(g, h)) for h, q in P.per_unit[g.source].atoms),
                  Fraction(0))
        worst = max(worst, abs(acc - f(g)))
    return worst


@dataclass(frozen=True)
class Holds:
    depth: int
    cylinders_checked: int


@dataclass(frozen=True)
class Fails:
    witness: Path
    residual: Fraction


def martingale_check(P: MarkovOperator, x: int, f: BoundedFunction, depth: int,
                     cylinder_cap: int = 200_000):
    """Conditional-expectation identity on every positive-mass cylinder.

    On a cylinder ending at arrow g the conditional expectation of the next
    value is (P_x f)(g), so one check per reached arrow per depth suffices;
    the witness reported for a failure is the first cylinder reaching it.
    """
    if depth < 1:
        raise HarmonicError("depth must be >= 1")
    G = P.groupoid
    unit = G.unit_arrow(x)
    layer: dict[Arrow, Path] = {unit: Path(x, (unit,))}
    checked = 0
    for _ in range(depth):
        key = lambda a: (a.source, G.payload_group(a.source).sort_key(a.payload))
        for g in sorted(layer, key=key):
            acc = sum((q * f(G.compose(g, h)) for h, q in P.per_unit[g.source].atoms),
                      Fraction(0))
            checked += 1
            if acc != f(g):
                return Fails(layer[g], abs(acc - f(g)))
        nxt: dict[Arrow, Path] = {}
        for g, path in layer.items():
            for h, _ in P.per_unit[g.source].atoms:
                b = G.compose(g, h)
                if b not in nxt:
                    nxt[b] = Path(x, path.steps + (b,))
        if len(nxt) > cylinder_cap:
            raise ResourceCap(f"cylinder frontier exceeds {cylinder_cap}")
        layer = nxt
    return Holds(depth, checked)


@dataclass(frozen=True)
class StoppingReport:
    horizon: int
    harmonic_residual: Fraction
    residual: Fraction
    unaccounted: Fraction
    certified_bound: Fraction

    @property
    def harmonic_precheck_passed(self) -> bool:
        return self.harmonic_residual == 0


def optional_stopping_check(P: MarkovOperator, x: int, f: BoundedFunction,
                            horizon: int, precheck_budget: int = 64) -> StoppingReport:
    """Compare f at the start with its average under the hitting measure.

    The certified bound |f(x) - sum nu f| <= residual + bound * unaccounted
    covers the mass not yet absorbed at the horizon.  A nonzero harmonic
    residual on the precheck window flags the identity as inapplicable.
    """
    nu = hitting_measure(P, x, Enumerated(horizon))
    pre = check_harmonic(P, x, f, precheck_budget)
    start = f(P.groupoid.unit_arrow(x))
    avg = sum((p * f(h) for h, p in nu.atoms), Fraction(0))
    residual = abs(start - avg)
    return StoppingReport(horizon, pre, residual, nu.unaccounted,
                          residual + f.bound * nu.unaccounted)


@dataclass(frozen=True)
class RestrictionReport:
    residuals: tuple[tuple[Arrow, Fraction], ...]
    skipped: tuple[Arrow, ...]
    unaccounted: Fraction
    slack: Fraction  # bound * unaccounted, the allowed residual per element

    @property
    def max_residual(self) -> Fraction:
        return max((r for _, r in self.residuals), default=Fraction(0))

    @property
    def within_slack(self) -> bool:
        return all(r <= self.slack for _, r in self.residuals)


def restriction_harmonic_check(P: MarkovOperator, x: int, f: BoundedFunction,
                               horizon: int, isotropy_budget: int = 64
                               ) -> RestrictionReport:
    """Is f's isotropy restriction harmonic for the hitting measure?

    Probes |f(g) - sum_h nu(h) f(gh)| over isotropy arrows g; elements whose
    translates gh leave f's table are skipped and reported rather than read
    from the default.
    """
    G = P.groupoid
    nu = hitting_measure(P, x, Enumerated(horizon))
    window = set(f.window())
    arrows, _ = fiber_enumerate(G, x, isotropy_budget)
    residuals = []
    skipped = []
    for g in (a for a in arrows if a.source == x):
        translates = [G.compose(g, h) for h in nu.support()]
        if g not in window or any(t not in window for t in translates):
            skipped.append(g)
            continue
        avg = sum((p * f(G.compose(g, h)) for h, p in nu.atoms), Fraction(0))
        residuals.append((g, abs(f(g) - avg)))
    return RestrictionReport(tuple(residuals), tuple(skipped), nu.unaccounted,
                             f.bound * nu.unaccounted)


def lift_group_harmonic(T, x: int, table: dict, default: Fraction = Fraction(0),
                        bound: Optional[Fraction] = None,
                        fiber_budget: int = 4096) -> BoundedFunction:
    """Transport a function on the acting group to the fiber over x.

    The arrow reaching x with payload g gets the value at g, so the fiber
    copy inherits the group function along g |-> (g, g^{-1} x).
    """
    if T.kind != "transformation":
        raise HarmonicError("lift needs a transformation groupoid")
    arrows, _ = fiber_enumerate(T, x, fiber_budget)
    fiber_table = {a: Fraction(table[a.payload]) for a in arrows if a.payload in table}
    return BoundedFunction.make(T, fiber_table, default, bound)
