"""Seeded instance corpora backing the experiment harness and acceptance checks.

Every generator takes an integer seed and returns the same instances for the
same seed; randomness only picks orbit sizes, partitions, and operator masses.
Masses are small-denominator rationals so the exact linear algebra downstream
stays cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random

from . import groups
from .groupoids import (Arrow, FiniteRelation, GroupBundle, Groupoid,
                        Transformation, build_bundle, build_finite_relation,
                        build_infinite_orbit_prefix, build_semidirect,
                        build_transformation, constant_bundle, fiber_enumerate)
from .markov import MarkovOperator, make_operator

DEFAULT_SEED = 271828


def random_masses(rng: Random, n: int, max_weight: int = 9) -> list[Fraction]:
    """n strictly positive rationals summing to one."""
    weights = [rng.randint(1, max_weight) for _ in range(n)]
    total = sum(weights)
    return [Fraction(w, total) for w in weights]


def full_support_operator(G: Groupoid, rng: Random,
                          fiber_budget: int = 256) -> MarkovOperator:
    """Random operator charging every arrow of every fiber."""
    per_unit: dict[int, dict[Arrow, Fraction]] = {}
    for x in G.units():
        fiber, done = fiber_enumerate(G, x, fiber_budget)
        if not done:
            raise ValueError(f"fiber over {x} is not finite within {fiber_budget}")
        per_unit[x] = dict(zip(fiber, random_masses(rng, len(fiber))))
    return make_operator(G, per_unit)


def lazy_generator_operator(B: GroupBundle, rng: Random) -> MarkovOperator:
    """Random operator on a bundle charging the identity and the generators."""
    per_unit: dict[int, dict[Arrow, Fraction]] = {}
    for x in B.units():
        H = B.fibers[x]
        support = [Arrow(x, x, H.identity())]
        support += [Arrow(x, x, g) for g in H.generators]
        support = list(dict.fromkeys(support))
        per_unit[x] = dict(zip(support, random_masses(rng, len(support))))
    return make_operator(B, per_unit)


# ---------------------------------------------------------------------------
# named instances


def integer_rotation_action(points: int) -> Transformation:
    """Transitive action of the integers rotating `points` units."""
    Z = groups.IntegerLattice(1)
    rot = tuple((i + 1) % points for i in range(points))
    return build_transformation(Z, {(1,): rot})


def swap_walk() -> MarkovOperator:
    """Simple walk on the integers acting on two points by the swap."""
    T = integer_rotation_action(2)
    half = Fraction(1, 2)
    per_unit = {}
    for x in T.units():
        y = 1 - x
        per_unit[x] = {T.arrow((1,), y): half, T.arrow((-1,), y): half}
    return make_operator(T, per_unit)


def cyclic_action(n: int) -> Transformation:
    """Z/n rotating n points."""
    C = groups.cyclic_table(n)
    perms = {g: tuple((i + g) % n for i in range(n)) for g in C.generators}
    return build_transformation(C, perms)


def symmetric_action(n: int = 3) -> Transformation:
    """S_n on n points through its one-line element labels."""
    S = groups.symmetric_table(n)

    def perm(g: int) -> tuple[int, ...]:
        one_line = [int(t) for t in S.describe(g).strip("[]").split()]
        return tuple(v - 1 for v in one_line)

    return build_transformation(S, {g: perm(g) for g in S.generators})


def cross_relation_walk(size: int) -> MarkovOperator:
    """Deterministic cyclic tour of one orbit: the walk source steps i -> i+1."""
    R = build_finite_relation([range(size)])
    per_unit = {}
    for x in R.units():
        per_unit[x] = {Arrow((x + 1) % size, x, 0): Fraction(1)}
    return make_operator(R, per_unit)


def lamplighter_bundle() -> GroupBundle:
    return constant_bundle(groups.Lamplighter())


def infinite_orbit_window(size: int = 6) -> FiniteRelation:
    return build_infinite_orbit_prefix(size)


def z_rotation_groupoids(max_points: int = 12) -> list[Transformation]:
    """Transitive integer actions on 2..max_points units."""
    return [integer_rotation_action(k) for k in range(2, max_points + 1)]


# ---------------------------------------------------------------------------
# corpora


def relation_instances(count: int = 100,
                       seed: int = DEFAULT_SEED) -> list[MarkovOperator]:
    """Random finite equivalence relations with full-support operators.

    Each instance carries one to three orbits of size two to eight.
    """
    rng = Random(seed)
    out = []
    for _ in range(count):
        blocks = []
        start = 0
        for _ in range(rng.randint(1, 3)):
            size = rng.randint(2, 8)
            blocks.append(range(start, start + size))
            start += size
        out.append(full_support_operator(build_finite_relation(blocks), rng))
    return out


def finite_fiber_instances(seed: int = DEFAULT_SEED) -> list[MarkovOperator]:
    """Mixed pool of finite-fiber instances; at least twenty, deterministic.

    Bundles over small cyclic and symmetric groups (full-support and lazy
    generator operators), semidirect products over two- and three-point
    orbits with the identity cocycle, and transitive finite actions.
    """
    rng = Random(seed)
    out: list[MarkovOperator] = []
    for n in range(2, 7):
        B = constant_bundle(groups.cyclic_table(n), 1 + n % 2)
        out.append(full_support_operator(B, rng))
    out.append(full_support_operator(constant_bundle(groups.symmetric_table(3)), rng))
    for n in (3, 4, 5):
        out.append(lazy_generator_operator(constant_bundle(groups.cyclic_table(n)), rng))
    out.append(lazy_generator_operator(constant_bundle(groups.symmetric_table(3)), rng))
    out.append(full_support_operator(
        build_bundle([groups.cyclic_table(2), groups.cyclic_table(3)]), rng))
    for n in (2, 3, 4):
        C = groups.cyclic_table(n)
        out.append(full_support_operator(build_semidirect([C, C], [[0, 1]]), rng))
    C = groups.cyclic_table(2)
    out.append(full_support_operator(build_semidirect([C, C, C], [[0, 1, 2]]), rng))
    for n in range(2, 7):
        out.append(full_support_operator(cyclic_action(n), rng))
    out.append(full_support_operator(symmetric_action(3), rng))
    return out


@dataclass(frozen=True)
class ForcedReturn:
    """Instance whose alpha probe certifies zero unaccounted mass at `horizon`."""

    operator: MarkovOperator
    unit: int
    horizon: int


def forced_return_instances(seed: int = DEFAULT_SEED) -> list[ForcedReturn]:
    """Walks whose return time to the start unit is bounded surely.

    Bundle walks sit in the isotropy copy after one step; purely crossing
    walks on small orbits tour back in a fixed number of steps.
    """
    rng = Random(seed)
    out = []
    for n in (2, 3, 4):
        P = full_support_operator(constant_bundle(groups.cyclic_table(n)), rng)
        out.append(ForcedReturn(P, 0, 2))
    P = lazy_generator_operator(constant_bundle(groups.symmetric_table(3)), rng)
    out.append(ForcedReturn(P, 0, 2))
    for x in (0, 1):
        out.append(ForcedReturn(swap_walk(), x, 2))
    out.append(ForcedReturn(cross_relation_walk(2), 0, 2))
    out.append(ForcedReturn(cross_relation_walk(3), 0, 4))
    return out
