"""Discrete measured groupoids over finite atomic unit spaces.

Four kinds are supported: finite equivalence relations (optionally a
finite prefix of one countably infinite orbit), transformation groupoids
of group actions on the unit space, bundles of groups, and semidirect
products of a group bundle with an equivalence relation twisted by a
cocycle of fiber isomorphisms.

Arrows are plain frozen records (source, target, payload); the payload
lives in the fiber group attached to the arrow's source (for
transformation groupoids, in the acting group).  Composition follows
function order: compose(a, b) is defined when source(a) == target(b).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator, Optional

from . import groups as groups_mod
from .groups import Element, Group, IntegerLattice, FiniteTable, trivial_group


class GroupoidError(Exception):
    pass


class NotComposable(GroupoidError):
    pass


class InvalidPartition(GroupoidError):
    pass


class ActionInconsistent(GroupoidError):
    pass


class CocycleViolation(GroupoidError):
    def __init__(self, triple, message):
        self.triple = triple
        super().__init__(f"{message} at {triple}")


@dataclass(frozen=True)
class Arrow:
    source: int
    target: int
    payload: Any


@dataclass(frozen=True)
class FiniteOrbit:
    units: frozenset


@dataclass(frozen=True)
class ExceedsUnitSpace:
    prefix: frozenset


# ---------------------------------------------------------------------------
# permutations of unit indices

Perm = tuple[int, ...]


def perm_id(n: int) -> Perm:
    return tuple(range(n))


def perm_mul(p: Perm, q: Perm) -> Perm:
    """Apply q first, then p."""
    return tuple(p[q[i]] for i in range(len(p)))


def perm_inv(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def perm_pow(p: Perm, k: int) -> Perm:
    if k < 0:
        return perm_pow(perm_inv(p), -k)
    result = perm_id(len(p))
    base = p
    while k:
        if k & 1:
            result = perm_mul(base, result)
        base = perm_mul(base, base)
        k >>= 1
    return result


def perm_order(p: Perm, cap: int = 10_000) -> int:
    q = p
    n = 1
    while q != perm_id(len(p)):
        q = perm_mul(q, p)
        n += 1
        if n > cap:
            raise GroupoidError("permutation order exceeds cap")
    return n


# ---------------------------------------------------------------------------
# unit spaces


def _check_weights(weights: tuple[Fraction, ...], tail: Fraction) -> None:
    if any(w <= 0 for w in weights):
        raise GroupoidError("unit weights must be strictly positive")
    if tail < 0:
        raise GroupoidError("tail mass cannot be negative")
    if sum(weights, Fraction(0)) + tail != 1:
        raise GroupoidError("unit weights (plus tail) must sum to 1")


def uniform_weights(n: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1, n) for _ in range(n))


class Groupoid(ABC):
    kind: str = ""

    def __init__(self, weights: tuple[Fraction, ...], tail_mass: Fraction = Fraction(0)):
        _check_weights(weights, tail_mass)
        self.weights = weights
        self.tail_mass = tail_mass
        self.n_units = len(weights)

    def units(self) -> range:
        return range(self.n_units)

    def weight(self, x: int) -> Fraction:
        return self.weights[x]

    @abstractmethod
    def payload_group(self, source: int) -> Group:
        """Group the payload of an arrow with this source lives in."""

    def unit_arrow(self, x: int) -> Arrow:
        return Arrow(x, x, self.payload_group(x).identity())

    def is_unit(self, a: Arrow) -> bool:
        return a == self.unit_arrow(a.source)

    @abstractmethod
    def compose(self, a: Arrow, b: Arrow) -> Arrow:
        """a after b; requires source(a) == target(b)."""

    @abstractmethod
    def invert(self, a: Arrow) -> Arrow: ...

    @abstractmethod
    def _fiber_iter(self, x: int) -> Iterator[Arrow]:
        """Arrows with target x, in canonical order, lazily."""

    @abstractmethod
    def orbit_of(self, x: int) -> FiniteOrbit | ExceedsUnitSpace: ...

    @abstractmethod
    def fiber_is_finite(self, x: int) -> bool: ...

    def isotropy_group(self, x: int) -> Optional[Group]:
        """The isotropy at x as a group handle, when the kind exposes one."""
        return None

    def check_composable(self, a: Arrow, b: Arrow) -> None:
        if a.source != b.target:
            raise NotComposable(
                f"source {a.source} of left arrow != target {b.target} of right")


def fiber_enumerate(G: Groupoid, x: int, budget: int) -> tuple[list[Arrow], bool]:
    """First `budget` arrows of the fiber over x, and whether that was all.

    Order: payload word length, then the family's lexicographic key, then
    source id.  The same call always returns the same list.
    """
    out: list[Arrow] = []
    it = G._fiber_iter(x)
    for a in it:
        if len(out) == budget:
            return out, False
        out.append(a)
    return out, G.fiber_is_finite(x)


def orbit_of(G: Groupoid, x: int) -> FiniteOrbit | ExceedsUnitSpace:
    return G.orbit_of(x)


# ---------------------------------------------------------------------------
# finite equivalence relations


class FiniteRelation(Groupoid):
    """Equivalence relation groupoid; arrows are ordered pairs of units.

    With infinite_prefix=True the single block is read as a finite window
    of one countably infinite orbit: enumeration works per-prefix and
    orbit_of reports ExceedsUnitSpace.
    """

    kind = "finite_relation"

    def __init__(self, blocks, weights=None, tail_mass: Fraction = Fraction(0),
                 infinite_prefix: bool = False):
        blocks = tuple(frozenset(b) for b in blocks)
        units = sorted(u for b in blocks for u in b)
        n = len(units)
        if units != list(range(n)) or sum(len(b) for b in blocks) != n or n == 0:
            raise InvalidPartition("blocks must partition 0..n-1")
        if infinite_prefix and len(blocks) != 1:
            raise InvalidPartition("an infinite-orbit prefix is a single block")
        if weights is None:
            weights = uniform_weights(n)
        super().__init__(tuple(weights), tail_mass)
        self.blocks = blocks
        self.infinite_prefix = infinite_prefix
        self._block_of = {u: b for b in blocks for u in b}
        self._trivial = trivial_group()

    def payload_group(self, source: int) -> Group:
        return self._trivial

    def compose(self, a: Arrow, b: Arrow) -> Arrow:
        self.check_composable(a, b)
        return Arrow(b.source, a.target, 0)

    def invert(self, a: Arrow) -> Arrow:
        return Arrow(a.target, a.source, 0)

    def _fiber_iter(self, x: int):
        for y in sorted(self._block_of[x]):
            yield Arrow(y, x, 0)

    def fiber_is_finite(self, x: int) -> bool:
        return not self.infinite_prefix

    def orbit_of(self, x: int):
        block = frozenset(self._block_of[x])
        if self.infinite_prefix:
            return ExceedsUnitSpace(block)
        return FiniteOrbit(block)

    def isotropy_group(self, x: int) -> Group:
        return self._trivial


def build_finite_relation(blocks, weights=None) -> FiniteRelation:
    return FiniteRelation(blocks, weights)


def build_infinite_orbit_prefix(n: int) -> FiniteRelation:
    """Window of the full relation on a countable unit space (one orbit).

    Unit i carries weight 2^-(i+1); the unseen tail keeps the rest.
    """
    weights = tuple(Fraction(1, 2 ** (i + 1)) for i in range(n))
    tail = 1 - sum(weights, Fraction(0))
    return FiniteRelation([range(n)], weights, tail_mass=tail, infinite_prefix=True)


# ---------------------------------------------------------------------------
# group actions on the unit space


def _resolve_gen_perms(G: Group, gen_perms: dict, n: int) -> dict:
    full: dict[Element, Perm] = {}
    for g, p in gen_perms.items():
        p = tuple(p)
        if sorted(p) != list(range(n)):
            raise ActionInconsistent(f"not a permutation of 0..{n - 1}: {p}")
        full[g] = p
    for g in G.generators:
        gi = G.inv(g)
        if g not in full and gi in full:
            full[g] = perm_inv(full[gi])
    missing = [g for g in G.generators if g not in full]
    if missing:
        raise ActionInconsistent(
            f"no permutation for generator {G.describe(missing[0])}")
    for g in G.generators:
        if perm_mul(full[g], full[G.inv(g)]) != perm_id(n):
            raise ActionInconsistent(
                f"permutations of {G.describe(g)} and its inverse do not cancel")
    return full


def _family_action_check(G: Group, perms: dict, n: int) -> None:
    """Verify the generator permutations respect the family's relations.

    Z^d: generator commutation.  Dihedral: s^2 and sts = t^-1.  Heisenberg:
    the commutator permutation is central among the generators.  Lamplighter:
    lamp involution plus commutation of all t-conjugates of the lamp, which
    only depends on the exponent mod the order of the shift permutation, so
    the finite check is exhaustive.  Finitary symmetric: the transposition
    presentation.  Finite tables: the full multiplication table.
    """
    ident = perm_id(n)

    def pof(g: Element) -> Perm:
        return perms[g]

    fam = G.family
    if fam == "Zd":
        pos = [g for g in G.generators if sum(g) > 0 or (sum(g) == 0 and g > G.identity())]
        for i, g in enumerate(pos):
            for h in pos[i + 1:]:
                if perm_mul(pof(g), pof(h)) != perm_mul(pof(h), pof(g)):
                    raise ActionInconsistent(
                        f"generators {G.describe(g)}, {G.describe(h)} must commute")
    elif fam == "dihedral_inf":
        s, t = pof((0, 1)), pof((1, 0))
        if perm_mul(s, s) != ident:
            raise ActionInconsistent("s^2 must act trivially")
        if perm_mul(perm_mul(s, t), s) != perm_inv(t):
            raise ActionInconsistent("sts must act as t^-1")
    elif fam == "heisenberg":
        x, y = pof((1, 0, 0)), pof((0, 1, 0))
        z = perm_mul(perm_mul(x, y), perm_mul(perm_inv(x), perm_inv(y)))
        for p, nm in ((x, "x"), (y, "y")):
            if perm_mul(z, p) != perm_mul(p, z):
                raise ActionInconsistent(f"[x,y] must commute with {nm}")
    elif fam == "lamplighter":
        t, a = pof((frozenset(), 1)), pof((frozenset([0]), 0))
        if perm_mul(a, a) != ident:
            raise ActionInconsistent("the lamp generator must act as an involution")
        m = perm_order(t, cap=4 * n * n + 16)
        conj = [perm_mul(perm_mul(perm_pow(t, k), a), perm_pow(t, -k))
                for k in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                if perm_mul(conj[i], conj[j]) != perm_mul(conj[j], conj[i]):
                    raise ActionInconsistent(
                        f"lamp conjugates t^{i} a t^-{i} and t^{j} a t^-{j} must commute")
    elif fam == "finitary_sym":
        gens = list(G.generators)
        for g in gens:
            if perm_mul(pof(g), pof(g)) != ident:
                raise ActionInconsistent(f"{G.describe(g)}^2 must act trivially")
        for g in gens:
            for h in gens:
                prod = G.mul(G.mul(g, h), g)
                if prod in perms:
                    lhs = perm_mul(perm_mul(pof(g), pof(h)), pof(g))
                    if lhs != pof(prod):
                        raise ActionInconsistent(
                            f"conjugation relation fails on {G.describe(g)}, {G.describe(h)}")
    elif fam == "finite_table":
        order = G.order() or 0
        if order > 512:
            raise GroupoidError("finite table too large for the full action check")
        elems = groups_mod.ball(G, order)
        evaluated = {g: _evaluate_perm(G, g, perms, n) for g in elems}
        for g in elems:
            for h in elems:
                if perm_mul(evaluated[g], evaluated[h]) != evaluated[G.mul(g, h)]:
                    raise ActionInconsistent(
                        f"action is not multiplicative on {G.describe(g)}, {G.describe(h)}")
    else:
        raise ActionInconsistent(f"no action check for family {fam!r}")


def _evaluate_perm(G: Group, g: Element, perms: dict, n: int) -> Perm:
    """Permutation of g, composed from generator permutations by family shape."""
    fam = G.family
    if fam == "Zd":
        out = perm_id(n)
        for i in range(G.d):
            e_i = tuple(1 if j == i else 0 for j in range(G.d))
            out = perm_mul(out, perm_pow(perms[e_i], g[i]))
        return out
    if fam == "dihedral_inf":
        k, r = g
        return perm_mul(perm_pow(perms[(1, 0)], k), perm_pow(perms[(0, 1)], r))
    if fam == "heisenberg":
        a, b, c = g
        x, y = perms[(1, 0, 0)], perms[(0, 1, 0)]
        z = perm_mul(perm_mul(x, y), perm_mul(perm_inv(x), perm_inv(y)))
        return perm_mul(perm_mul(perm_pow(x, a), perm_pow(y, b)), perm_pow(z, c - a * b))
    if fam == "lamplighter":
        lamps, m = g
        t, a = perms[(frozenset(), 1)], perms[(frozenset([0]), 0)]
        out = perm_id(n)
        for k in sorted(lamps):
            out = perm_mul(out, perm_mul(perm_mul(perm_pow(t, k), a), perm_pow(t, -k)))
        return perm_mul(out, perm_pow(t, m))
    if fam == "finitary_sym":
        out = perm_id(n)
        for s in G.transposition_word(g):
            out = perm_mul(out, perms[s])
        return out
    # generic fallback: breadth-first generator word
    out = perm_id(n)
    for s in groups_mod.word_of(G, g):
        out = perm_mul(out, perms[s])
    return out


class Transformation(Groupoid):
    """Transformation groupoid of a group acting on the unit space."""

    kind = "transformation"

    def __init__(self, group: Group, gen_perms: dict, weights=None):
        if not gen_perms:
            raise ActionInconsistent("need at least one generator permutation")
        n = len(next(iter(gen_perms.values())))
        if weights is None:
            weights = uniform_weights(n)
        super().__init__(tuple(weights))
        self.group = group
        self.gen_perms = _resolve_gen_perms(group, gen_perms, n)
        _family_action_check(group, self.gen_perms, n)
        self._perm_cache: dict[Element, Perm] = {group.identity(): perm_id(n)}

    def payload_group(self, source: int) -> Group:
        return self.group

    def perm_of(self, g: Element) -> Perm:
        if g not in self._perm_cache:
            self._perm_cache[g] = _evaluate_perm(self.group, g, self.gen_perms,
                                                 self.n_units)
        return self._perm_cache[g]

    def act(self, g: Element, x: int) -> int:
        return self.perm_of(g)[x]

    def arrow(self, g: Element, source: int) -> Arrow:
        return Arrow(source, self.act(g, source), g)

    def compose(self, a: Arrow, b: Arrow) -> Arrow:
        self.check_composable(a, b)
        return self.arrow(self.group.mul(a.payload, b.payload), b.source)

    def invert(self, a: Arrow) -> Arrow:
        return Arrow(a.target, a.source, self.group.inv(a.payload))

    def _fiber_iter(self, x: int):
        G = self.group
        for shell in _lazy_shells(G):
            for g in shell:
                yield Arrow(perm_inv(self.perm_of(g))[x], x, g)

    def fiber_is_finite(self, x: int) -> bool:
        return self.group.order() is not None

    def orbit_of(self, x: int):
        seen = {x}
        frontier = [x]
        while frontier:
            nxt = []
            for u in frontier:
                for g in self.group.generators:
                    v = self.act(g, u)
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        return FiniteOrbit(frozenset(seen))

    def isotropy_group(self, x: int) -> Optional[Group]:
        G = self.group
        if isinstance(G, IntegerLattice) and G.d == 1:
            # the stabilizer of x is (orbit length) * Z, again infinite cyclic
            return IntegerLattice(1)
        if G.order() is not None:
            elems = groups_mod.ball(G, G.order() or 1)
            fixing = [g for g in elems if self.act(g, x) == x]
            return _subgroup_table(G, fixing)
        return None

    def stabilizer_index(self, x: int) -> int:
        orb = self.orbit_of(x)
        return len(orb.units)


def _lazy_shells(G: Group) -> Iterator[list[Element]]:
    seen = {G.identity()}
    frontier = [G.identity()]
    yield [G.identity()]
    while frontier:
        nxt = set()
        for g in frontier:
            for s in G.generators:
                h = G.mul(g, s)
                if h not in seen:
                    nxt.add(h)
        seen.update(nxt)
        frontier = sorted(nxt, key=G.sort_key)
        if frontier:
            yield frontier


def _subgroup_table(G: Group, elements: list[Element]) -> FiniteTable:
    elems = sorted(set(elements), key=G.sort_key)
    ident = G.identity()
    elems.remove(ident)
    elems.insert(0, ident)
    index = {g: i for i, g in enumerate(elems)}
    for g in elems:
        for h in elems:
            if G.mul(g, h) not in index:
                raise GroupoidError("elements do not form a subgroup")
    table = [[index[G.mul(g, h)] for h in elems] for g in elems]
    labels = tuple(G.describe(g) for g in elems)
    return FiniteTable(table, labels=labels, name=f"subgroup of {G.name()}")


def build_transformation(group: Group, gen_perms: dict, weights=None) -> Transformation:
    return Transformation(group, gen_perms, weights)


# ---------------------------------------------------------------------------
# group bundles and semidirect products


@dataclass(frozen=True)
class Iso:
    """Isomorphism between two fiber groups, in one of three shapes."""

    shape: str  # "identity" | "table" | "linear"
    data: tuple = ()

    def apply(self, g: Element) -> Element:
        if self.shape == "identity":
            return g
        if self.shape == "table":
            return self.data[g]
        if self.shape == "linear":
            return tuple(sum(row[j] * g[j] for j in range(len(g))) for row in self.data)
        raise GroupoidError(f"unknown iso shape {self.shape!r}")

    def inverse(self) -> "Iso":
        if self.shape == "identity":
            return self
        if self.shape == "table":
            out = [0] * len(self.data)
            for i, v in enumerate(self.data):
                out[v] = i
            return Iso("table", tuple(out))
        if self.shape == "linear":
            return Iso("linear", _int_matrix_inverse(self.data))
        raise GroupoidError(f"unknown iso shape {self.shape!r}")


def _int_matrix_inverse(rows: tuple) -> tuple:
    from .exactlin import solve
    d = len(rows)
    mat = [[Fraction(v) for v in row] for row in rows]
    rhs = [[Fraction(1 if i == j else 0) for j in range(d)] for i in range(d)]
    inv = solve(mat, rhs)
    out = []
    for row in inv:
        if any(v.denominator != 1 for v in row):
            raise GroupoidError("cocycle matrix is not invertible over Z")
        out.append(tuple(int(v) for v in row))
    return tuple(out)


def _check_iso(iso: Iso, src: Group, dst: Group, pair) -> None:
    e = src.identity()
    if iso.apply(e) != dst.identity():
        raise CocycleViolation(pair, "iso does not fix the identity")
    probe = list(src.generators) + [src.mul(a, b) for a in src.generators
                                    for b in src.generators]
    for a in probe:
        for b in src.generators:
            if iso.apply(src.mul(a, b)) != dst.mul(iso.apply(a), iso.apply(b)):
                raise CocycleViolation(pair, "iso is not multiplicative")
    back = iso.inverse()
    for a in src.generators:
        if back.apply(iso.apply(a)) != a:
            raise CocycleViolation(pair, "iso is not invertible")


class SemidirectProduct(Groupoid):
    """Bundle of groups twisted by an equivalence relation and a cocycle.

    Arrows are (g, (y, x)) with g in the fiber over x; composition is
    (h, (z, y)) . (g, (y, x)) = (delta_{(x,y)}(h) g, (z, x)) and inversion
    (g, (y, x))^-1 = (delta_{(y,x)}(g^-1), (x, y)), where delta_{(x,y)}
    maps the fiber over y to the fiber over x.
    """

    kind = "semidirect"

    def __init__(self, fibers, blocks, cocycle: Optional[dict] = None, weights=None):
        relation = FiniteRelation(blocks, weights)
        super().__init__(relation.weights)
        self.relation = relation
        self.fibers = tuple(fibers)
        if len(self.fibers) != self.n_units:
            raise GroupoidError("one fiber group per unit required")
        self.cocycle = dict(cocycle or {})
        self._complete_and_check_cocycle()

    def _complete_and_check_cocycle(self) -> None:
        # delta[(y, x)]: fiber over x -> fiber over y ("to", "from") keying.
        for x in self.units():
            pair = (x, x)
            self.cocycle.setdefault(pair, Iso("identity"))
        for (y, x), iso in list(self.cocycle.items()):
            if (x, y) not in self.cocycle:
                self.cocycle[(x, y)] = iso.inverse()
        for block in self.relation.blocks:
            bs = sorted(block)
            for y in bs:
                for x in bs:
                    if (y, x) not in self.cocycle:
                        if groups_mod.to_spec(self.fibers[x]) == \
                                groups_mod.to_spec(self.fibers[y]):
                            self.cocycle[(y, x)] = Iso("identity")
                        else:
                            raise CocycleViolation((y, x), "missing cocycle entry")
        for (y, x), iso in self.cocycle.items():
            _check_iso(iso, self.fibers[x], self.fibers[y], (y, x))
            if (y, x) == (x, x) and any(
                    iso.apply(g) != g for g in self.fibers[x].generators):
                raise CocycleViolation((x, x), "diagonal cocycle must be the identity")
        for block in self.relation.blocks:
            bs = sorted(block)
            for z in bs:
                for y in bs:
                    for x in bs:
                        left = self.cocycle[(z, y)]
                        right = self.cocycle[(y, x)]
                        direct = self.cocycle[(z, x)]
                        for g in self.fibers[x].generators:
                            if left.apply(right.apply(g)) != direct.apply(g):
                                raise CocycleViolation(
                                    (z, y, x), "cocycle chain rule fails")

    def delta(self, to_unit: int, from_unit: int) -> Iso:
        return self.cocycle[(to_unit, from_unit)]

    def payload_group(self, source: int) -> Group:
        return self.fibers[source]

    def arrow(self, g: Element, source: int, target: int) -> Arrow:
        if target not in self.relation._block_of[source]:
            raise GroupoidError("source and target must share a block")
        return Arrow(source, target, g)

    def compose(self, a: Arrow, b: Arrow) -> Arrow:
        self.check_composable(a, b)
        moved = self.delta(b.source, a.source).apply(a.payload)
        return Arrow(b.source, a.target,
                     self.fibers[b.source].mul(moved, b.payload))

    def invert(self, a: Arrow) -> Arrow:
        g = self.fibers[a.source].inv(a.payload)
        return Arrow(a.target, a.source, self.delta(a.target, a.source).apply(g))

    def _fiber_iter(self, x: int):
        sources = sorted(self.relation._block_of[x])
        shell_iters = [_lazy_shells(self.fibers[w]) for w in sources]
        while True:
            batch = []
            alive = False
            for w, it in zip(sources, shell_iters):
                shell = next(it, None)
                if shell is None:
                    continue
                alive = True
                fib = self.fibers[w]
                batch.extend(
                    Arrow(w, x, g) for g in sorted(shell, key=fib.sort_key))
            if not alive:
                return
            yield from batch

    def fiber_is_finite(self, x: int) -> bool:
        return all(self.fibers[w].order() is not None
                   for w in self.relation._block_of[x])

    def orbit_of(self, x: int):
        return self.relation.orbit_of(x)

    def isotropy_group(self, x: int) -> Group:
        return self.fibers[x]


def build_semidirect(fibers, blocks, cocycle=None, weights=None) -> SemidirectProduct:
    return SemidirectProduct(fibers, blocks, cocycle, weights)


class GroupBundle(SemidirectProduct):
    """Disjoint bundle of groups: the relation part is trivial."""

    kind = "group_bundle"

    def __init__(self, fibers, weights=None):
        fibers = tuple(fibers)
        blocks = [[i] for i in range(len(fibers))]
        super().__init__(fibers, blocks, cocycle=None, weights=weights)


def build_bundle(fibers, weights=None) -> GroupBundle:
    return GroupBundle(fibers, weights)


def constant_bundle(group: Group, n_units: int = 1, weights=None) -> GroupBundle:
    return GroupBundle([group] * n_units, weights)
