"""Switching-element search and the recursive non-Liouville measure builder.

The builder assembles, level by level, a symmetric measure whose far levels
are carried by super-switching elements, and emits a certificate that an
independent checker can replay.  Certificates record the chosen elements and
set chains; the power sets they are checked against are always recomputed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Union

from . import groups
from .groups import Element, Group

POWER_CAP = 400_000


class ConstructionError(Exception):
    pass


class SearchExhausted(ConstructionError):
    """No super-switching element surfaced within the candidate budget."""

    def __init__(self, level: int):
        super().__init__(f"switching search exhausted at level {level}")
        self.level = level


class PowerSetCap(ConstructionError):
    """A materialized product set outgrew the configured cap."""

    def __init__(self, size: int, cap: int):
        super().__init__(f"product set reached {size} elements (cap {cap})")
        self.size = size
        self.cap = cap


# ---------------------------------------------------------------------------
# product sets and switching predicates


def power_set(G: Group, S: Iterable[Element], k: int,
              cap: int = POWER_CAP) -> frozenset:
    """The k-fold product set S^k = {s_1 * ... * s_k}.

    When the identity lies in S, S^k is the k-ball of S-words; it is then
    grown frontier by frontier and the loop stops as soon as it saturates.
    """
    if k < 1:
        raise ConstructionError("power exponent must be >= 1")
    base = frozenset(S)
    if not base:
        return frozenset()
    mul = G.mul
    if G.identity() in base:
        total = set(base)
        frontier: Iterable[Element] = base
        for _ in range(k - 1):
            new = {mul(g, s) for g in frontier for s in base}
            new -= total
            if not new:
                break
            total.update(new)
            if len(total) > cap:
                raise PowerSetCap(len(total), cap)
            frontier = new
        return frozenset(total)
    cur = base
    for _ in range(k - 1):
        cur = {mul(g, s) for g in cur for s in base}
        if len(cur) > cap:
            raise PowerSetCap(len(cur), cap)
    return frozenset(cur)


def is_switching(G: Group, g: Element, A: Iterable[Element]) -> bool:
    """Whether conjugation by g moves every nontrivial element of A off A."""
    Aset = A if isinstance(A, frozenset) else frozenset(A)
    e = G.identity()
    gi = G.inv(g)
    mul = G.mul
    for a in Aset:
        p = mul(mul(g, a), gi)
        if p != e and p in Aset:
            return False
    return True


def is_super_switching(G: Group, g: Element, A: Iterable[Element]) -> bool:
    """The four-product test: g^x * a * g^y lands in A only at the identity."""
    Aset = A if isinstance(A, frozenset) else frozenset(A)
    e = G.identity()
    gi = G.inv(g)
    mul = G.mul
    for a in Aset:
        for left in (mul(g, a), mul(gi, a)):
            for right in (g, gi):
                p = mul(left, right)
                if p != e and p in Aset:
                    return False
    return True


def super_switching_search(G: Group, A: Iterable[Element],
                           search_radius: int) -> list[Element]:
    """All super-switching elements for A in the word-length ball.

    An empty result is valid; the caller widens the radius.  The identity is
    filtered out by the predicate itself whenever A contains a nontrivial
    element, so no special-casing is needed for the vacuous A = {}.
    """
    Aset = frozenset(A)
    return [g for g in groups.ball(G, search_radius)
            if is_super_switching(G, g, Aset)]


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class SwitchSets:
    """One level of the recursion: its section value and set chain."""
    n: int
    tau_n: Element
    A_n: frozenset
    B_n: frozenset
    C_n: frozenset


@dataclass(frozen=True)
class NonLiouvilleCertificate:
    group: Group = field(compare=False)
    group_tag: str
    epsilon: Fraction
    p: tuple[tuple[int, Fraction], ...]
    removed_mass: Fraction
    identity_levels: int
    tau: Element
    levels: tuple[SwitchSets, ...]
    measure: tuple[tuple[Element, Fraction], ...]
    checks: tuple[str, ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def support(self) -> frozenset:
        return frozenset(g for g, _ in self.measure)


@dataclass(frozen=True)
class Valid:
    checks: tuple[str, ...]


@dataclass(frozen=True)
class Invalid:
    first_failed: str


def geometric_levels(depth: int) -> tuple[dict[int, Fraction], Fraction]:
    """Geometric level weights truncated at depth, renormalized exactly.

    Returns the renormalized table and the mass removed by truncation.
    """
    removed = Fraction(1, 2 ** depth)
    scale = 1 - removed
    return {n: Fraction(1, 2 ** n) / scale for n in range(1, depth + 1)}, removed


# ---------------------------------------------------------------------------
# the builder


def _max_norm(G: Group, S: Iterable[Element]) -> Optional[int]:
    best = 0
    for g in S:
        n = G.size_norm(g)
        if n is None:
            return None
        best = max(best, n)
    return best


def _find_tau(G: Group, n: int, T_set: frozenset, C_n: frozenset,
              budget: int, cap: int) -> Element:
    """A super-switching element for T_set = (C_n)^(2n+1), provably outside
    (C_n)^(8n+1).

    Far candidates are tried first: any element whose subadditive norm
    exceeds (8n+1) * max_norm(C_n) cannot be a product of 8n+1 factors from
    C_n, so the outside condition holds without materializing the power.
    Otherwise the power is materialized (within the cap) and membership is
    tested directly against candidates drawn from the family stream and the
    plain ball enumeration.
    """
    e = G.identity()
    window = _max_norm(G, T_set) or 0
    max_c = _max_norm(G, C_n)
    tried = 0
    if max_c is not None:
        bound = (8 * n + 1) * max_c
        for g in G.switching_candidates(window, window, bound):
            if tried >= budget:
                break
            tried += 1
            norm = G.size_norm(g)
            if norm is None or norm <= bound:
                continue
            if is_super_switching(G, g, T_set):
                return g
    outside = power_set(G, C_n, 8 * n + 1, cap)
    candidates = itertools.chain(G.switching_candidates(window, window, 0),
                                 groups.enumerate_nontrivial(G))
    for g in candidates:
        if tried >= budget:
            raise SearchExhausted(n + 1)
        tried += 1
        if g == e or g in outside:
            continue
        if is_super_switching(G, g, T_set):
            return g
    raise SearchExhausted(n + 1)


def build_nonliouville_measure(
        G: Group,
        epsilon: Union[Fraction, int, str],
        p: Optional[Mapping[int, Fraction]] = None,
        depth: int = 4,
        enumeration: Optional[Iterable[Element]] = None,
        search_budget: int = 256,
        n_identity_levels: int = 1,
        power_cap: int = POWER_CAP) -> NonLiouvilleCertificate:
    """Recursively build the level measures and emit a replayable certificate.

    Level n mixes weight epsilon * 2^-n on the n-th enumeration pair with the
    rest on the n-th section pair; the first n_identity_levels sections and
    enumeration blocks are pinned to the identity, so those levels are lazy.
    Raises SearchExhausted when some level admits no super-switching element
    within the budget (abelian groups fail this way at the first search).
    """
    epsilon = Fraction(epsilon)
    if not (0 < epsilon < Fraction(1, 8)):
        raise ConstructionError("epsilon must lie strictly between 0 and 1/8")
    if depth < 1:
        raise ConstructionError("depth must be >= 1")
    N = n_identity_levels
    if N < 1:
        raise ConstructionError("at least one identity level is required")
    if p is None:
        table, removed = geometric_levels(depth)
    else:
        table = {int(n): Fraction(v) for n, v in p.items()}
        if sorted(table) != list(range(1, depth + 1)):
            raise ConstructionError("p must have full support on levels 1..depth")
        if any(v <= 0 for v in table.values()):
            raise ConstructionError("p masses must be positive")
        total = sum(table.values())
        if total > 1:
            raise ConstructionError("p masses must not exceed 1")
        removed = 1 - total
        table = {n: v / total for n, v in table.items()}

    e = G.identity()
    enum_iter: Iterator[Element] = (iter(enumeration) if enumeration is not None
                                    else groups.enumerate_nontrivial(G))

    def draw() -> Element:
        try:
            g = next(enum_iter)
        except StopIteration:
            raise ConstructionError("enumeration exhausted before all levels "
                                    "were assigned") from None
        if g == e:
            raise ConstructionError("enumeration must not contain the identity")
        return g

    tau = draw()
    sigma: dict[int, Element] = {}
    for lvl in range(N + 1, depth + 1):
        sigma[lvl] = tau if lvl == N + 1 else draw()

    taus: dict[int, Element] = {lvl: e for lvl in range(1, depth + 1) if lvl <= N}
    levels: list[SwitchSets] = []
    B: set = set()
    for lvl in range(1, depth + 1):
        t_lvl = taus[lvl]
        if lvl <= N:
            A = {e}
        else:
            A = {t_lvl, G.inv(t_lvl), sigma[lvl], G.inv(sigma[lvl])}
        B |= A
        C = frozenset(B | {tau, G.inv(tau)})
        levels.append(SwitchSets(lvl, t_lvl, frozenset(A), frozenset(B), C))
        if N < lvl + 1 <= depth:
            T_set = power_set(G, C, 2 * lvl + 1, power_cap)
            taus[lvl + 1] = _find_tau(G, lvl, T_set, C, search_budget, power_cap)

    masses: dict[Element, Fraction] = {}

    def add(g: Element, m: Fraction) -> None:
        if m:
            masses[g] = masses.get(g, Fraction(0)) + m

    for lvl in range(1, depth + 1):
        w = table[lvl]
        sig = e if lvl <= N else sigma[lvl]
        sec = e if lvl <= N else taus[lvl]
        near = w * epsilon / 2 ** lvl
        far = w - near
        add(sig, near / 2)
        add(G.inv(sig), near / 2)
        add(sec, far / 2)
        add(G.inv(sec), far / 2)
    measure = tuple(sorted(masses.items(), key=lambda kv: G.sort_key(kv[0])))

    cert = NonLiouvilleCertificate(
        group=G, group_tag=G.name(), epsilon=epsilon,
        p=tuple(sorted(table.items())), removed_mass=removed,
        identity_levels=N, tau=tau, levels=tuple(levels),
        measure=measure, checks=())
    outcome = verify_certificate(cert, power_cap=power_cap)
    if isinstance(outcome, Invalid):
        raise ConstructionError(
            f"internal: fresh certificate failed check {outcome.first_failed!r}")
    return replace(cert, checks=outcome.checks)


# ---------------------------------------------------------------------------
# the independent checker


def _provably_outside(G: Group, g: Element, C: frozenset, k: int,
                      cap: int) -> bool:
    """Whether g certifiably avoids C^k: by norm excess, else by membership.

    When the power cannot be materialized within the cap and the norm bound
    does not apply, the element counts as unproven and the check fails.
    """
    max_c = _max_norm(G, C)
    if max_c is not None:
        norm = G.size_norm(g)
        if norm is not None and norm > k * max_c:
            return True
    try:
        return g not in power_set(G, C, k, cap)
    except PowerSetCap:
        return False


def verify_certificate(cert: NonLiouvilleCertificate,
                       power_cap: int = POWER_CAP) -> Union[Valid, Invalid]:
    """Replay every condition of a certificate from its recorded data.

    Checks run in a fixed order: epsilon range, the level distribution, then
    per level ascending the identity convention or the super-switching and
    outside conditions (power sets recomputed from the recorded C-chain),
    then symmetry and normalization of the measure.  The first failure wins.
    """
    G = cert.group
    passed: list[str] = []
    if not (0 < cert.epsilon < Fraction(1, 8)):
        return Invalid("epsilon range")
    passed.append("epsilon range")
    table = dict(cert.p)
    depth = len(cert.levels)
    if (sorted(table) != list(range(1, depth + 1))
            or any(v <= 0 for v in table.values())
            or sum(table.values()) != 1
            or not 0 <= cert.removed_mass < 1):
        return Invalid("p distribution")
    passed.append("p distribution")
    if (cert.identity_levels < 1
            or tuple(l.n for l in cert.levels) != tuple(range(1, depth + 1))):
        return Invalid("level indexing")
    e = G.identity()
    for i, lvl in enumerate(cert.levels):
        n = lvl.n
        if n <= cert.identity_levels:
            if lvl.tau_n != e or lvl.A_n != frozenset({e}):
                return Invalid(f"identity convention at level {n}")
            passed.append(f"identity convention at level {n}")
            continue
        prev = cert.levels[i - 1]
        try:
            T_set = power_set(G, prev.C_n, 2 * (n - 1) + 1, power_cap)
        except PowerSetCap:
            return Invalid(f"super-switching at level {n}")
        if not is_super_switching(G, lvl.tau_n, T_set):
            return Invalid(f"super-switching at level {n}")
        passed.append(f"super-switching at level {n}")
        if not _provably_outside(G, lvl.tau_n, prev.C_n, 8 * (n - 1) + 1,
                                 power_cap):
            return Invalid(f"outside power at level {n}")
        passed.append(f"outside power at level {n}")
    md = dict(cert.measure)
    if (len(md) != len(cert.measure)
            or any(md.get(G.inv(g)) != m for g, m in md.items())):
        return Invalid("symmetry")
    passed.append("symmetry")
    if sum(md.values()) != 1 or any(m <= 0 for m in md.values()):
        return Invalid("normalization")
    passed.append("normalization")
    return Valid(tuple(passed))
