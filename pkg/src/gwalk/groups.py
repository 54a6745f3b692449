"""Built-in countable discrete groups with canonical normal forms.

Each family exposes a uniform handle interface: exact multiplication and
inversion on plain hashable normal forms, a symmetric generating set, a
deterministic enumeration order (word length, then a per-family key), and
the structural hooks used elsewhere: conjugacy-class closures with an
element budget, FC-central towers with per-family quotients, and norm
data for the switching-element search.

Elements are ordinary Python values (tuples, frozensets, ints), never
wrapper objects; the handle owns all operations.
"""

from __future__ import annotations

import itertools
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Optional

Element = Any


class GroupError(Exception):
    pass


class BallCapExceeded(GroupError):
    """Ball enumeration hit the element cap (resource condition)."""

    def __init__(self, radius: int, cap: int):
        self.radius = radius
        self.cap = cap
        super().__init__(f"ball of radius {radius} exceeds cap {cap}")


class UnsupportedQuotient(GroupError):
    """FC tower needed a quotient this family does not provide."""


@dataclass(frozen=True)
class ClassificationOracle:
    """Known Liouville-type status of a family, with its literature source."""

    status: str  # "choquet_deny" | "not_choquet_deny"
    source: str


@dataclass(frozen=True)
class FiniteClass:
    elements: frozenset

    @property
    def is_finite(self) -> bool:
        return True


@dataclass(frozen=True)
class ExceedsBudget:
    count_found: int
    budget: int

    @property
    def is_finite(self) -> bool:
        return False


ConjugacyResult = FiniteClass | ExceedsBudget


class Group(ABC):
    """Handle for a countable discrete group on canonical normal forms."""

    family: str = ""
    oracle: Optional[ClassificationOracle] = None

    @property
    @abstractmethod
    def generators(self) -> tuple[Element, ...]:
        """Symmetric generating set, identity excluded, in canonical order."""

    @abstractmethod
    def identity(self) -> Element: ...

    @abstractmethod
    def mul(self, a: Element, b: Element) -> Element: ...

    @abstractmethod
    def inv(self, a: Element) -> Element: ...

    @abstractmethod
    def sort_key(self, g: Element) -> tuple:
        """Total deterministic order within a word-length shell."""

    @abstractmethod
    def describe(self, g: Element) -> str:
        """Render the normal form as a string; parse() inverts this."""

    @abstractmethod
    def parse(self, text: str) -> Element: ...

    def order(self) -> Optional[int]:
        """Group order, or None when infinite (or treated as infinite)."""
        return None

    def conjugate(self, c: Element, g: Element) -> Element:
        return self.mul(self.mul(c, g), self.inv(c))

    # --- structural hooks -------------------------------------------------

    def fc_structure(self) -> str:
        """One of "all", "trivial", "proper" for the family's FC-center."""
        return "all" if self.order() is not None else "proper"

    def in_fc_center(self, g: Element) -> bool:
        s = self.fc_structure()
        if s == "all":
            return True
        if s == "trivial":
            return g == self.identity()
        raise NotImplementedError

    def fc_quotient(self) -> tuple["Group", Callable[[Element], Element], str]:
        raise UnsupportedQuotient(f"{self.family}: no built-in FC quotient")

    def size_norm(self, g: Element) -> Optional[int]:
        """Symmetric subadditive norm used for word-length lower bounds.

        Must satisfy n(gh) <= n(g)+n(h), n(g^-1) = n(g), n(e) = 0.
        None when the family provides no such certificate.
        """
        return None

    def switching_candidates(self, avoid_support: int, avoid_shift: int,
                             min_norm: int) -> Iterator[Element]:
        """Deterministic far-out candidates for the switching search."""
        return iter(())

    def name(self) -> str:
        return self.family


# ---------------------------------------------------------------------------
# enumeration


def shells(G: Group, radius: int, cap: int = 2_000_000) -> list[list[Element]]:
    """Word-length shells S_0, ..., S_radius, each sorted by sort_key."""
    seen = {G.identity()}
    out = [[G.identity()]]
    frontier = [G.identity()]
    total = 1
    for _ in range(radius):
        nxt = set()
        for g in frontier:
            for s in G.generators:
                h = G.mul(g, s)
                if h not in seen:
                    nxt.add(h)
        total += len(nxt)
        if total > cap:
            raise BallCapExceeded(radius, cap)
        seen.update(nxt)
        frontier = sorted(nxt, key=G.sort_key)
        out.append(frontier)
        if not frontier:
            break
    return out


def ball(G: Group, radius: int, cap: int = 2_000_000) -> list[Element]:
    """Ball of the given word-length radius, in canonical enumeration order."""
    return [g for shell in shells(G, radius, cap) for g in shell]


def enumerate_nontrivial(G: Group, cap: int = 2_000_000) -> Iterator[Element]:
    """All nontrivial elements in canonical order (shell by shell), lazily."""
    seen = {G.identity()}
    frontier = [G.identity()]
    total = 1
    while frontier:
        nxt = set()
        for g in frontier:
            for s in G.generators:
                h = G.mul(g, s)
                if h not in seen:
                    nxt.add(h)
        total += len(nxt)
        if total > cap:
            raise BallCapExceeded(-1, cap)
        seen.update(nxt)
        frontier = sorted(nxt, key=G.sort_key)
        yield from frontier


def word_of(G: Group, g: Element, max_radius: int = 64) -> list[Element]:
    """A generator word for g, found by breadth-first search."""
    if g == G.identity():
        return []
    seen = {G.identity(): []}
    frontier = [G.identity()]
    for _ in range(max_radius):
        nxt = []
        for h in frontier:
            for s in G.generators:
                k = G.mul(h, s)
                if k not in seen:
                    seen[k] = seen[h] + [s]
                    if k == g:
                        return seen[k]
                    nxt.append(k)
        frontier = nxt
        if not frontier:
            break
    raise GroupError(f"no word of length <= {max_radius} for {G.describe(g)}")


# ---------------------------------------------------------------------------
# conjugacy


def conjugacy_class(G: Group, g: Element, budget: int,
                    conjugator_radius: int = 1) -> ConjugacyResult:
    """Closure of {g} under conjugation, stopped past `budget` elements.

    Conjugators are the ball of `conjugator_radius` (radius 1, the
    generators, already suffices for the closure to be exact once it
    stabilizes).  Finite-table groups and abelian families short-circuit
    to the exact class.
    """
    if G.fc_structure() == "all":
        if G.order() is not None and not isinstance(G, _AbelianMixin):
            return FiniteClass(frozenset(_table_class(G, g)))
        return FiniteClass(frozenset([g]))
    conjugators = [c for c in ball(G, conjugator_radius) if c != G.identity()]
    found = {g}
    queue = [g]
    while queue:
        h = queue.pop(0)
        for c in conjugators:
            k = G.conjugate(c, h)
            if k not in found:
                found.add(k)
                if len(found) > budget:
                    return ExceedsBudget(len(found), budget)
                queue.append(k)
    return FiniteClass(frozenset(found))


def _table_class(G: Group, g: Element) -> set:
    found = {g}
    queue = [g]
    while queue:
        h = queue.pop(0)
        for c in G.generators:
            k = G.conjugate(c, h)
            if k not in found:
                found.add(k)
                queue.append(k)
    return found


def fc_center_in_ball(G: Group, radius: int, class_budget: int) -> frozenset:
    """Ball elements whose conjugacy class stays within the budget."""
    out = []
    for g in ball(G, radius):
        if conjugacy_class(G, g, class_budget).is_finite:
            out.append(g)
    return frozenset(out)


@dataclass(frozen=True)
class IccUpToBudget:
    radius: int
    class_budget: int


@dataclass(frozen=True)
class NotIcc:
    witness: Element


def is_icc_up_to_budget(G: Group, radius: int, class_budget: int):
    """Semi-decision: NotIcc carries a finite-class witness when one exists."""
    e = G.identity()
    for g in ball(G, radius):
        if g == e:
            continue
        if conjugacy_class(G, g, class_budget).is_finite:
            return NotIcc(g)
    return IccUpToBudget(radius, class_budget)


# ---------------------------------------------------------------------------
# FC tower


@dataclass(frozen=True)
class TowerLevel:
    index: int
    members: frozenset  # certified members inside the probed ball of the base group
    group_desc: str  # which quotient this level was computed in


@dataclass(frozen=True)
class TowerStatus:
    kind: str  # "hypercentral" | "stabilized_proper" | "budget_exhausted"
    level: int
    note: str = ""


@dataclass(frozen=True)
class FCTower:
    levels: tuple[TowerLevel, ...]
    status: TowerStatus


def fc_tower(G: Group, radius: int, class_budget: int, max_levels: int = 8) -> FCTower:
    """Iterated FC-central series, one level per built-in quotient step."""
    levels: list[TowerLevel] = []
    base_ball = ball(G, radius)
    current: Group = G
    project: Callable[[Element], Element] = lambda g: g
    for index in range(1, max_levels + 1):
        cur_ball = ball(current, radius)
        fc = fc_center_in_ball(current, radius, class_budget)
        structural = frozenset(g for g in cur_ball if current.in_fc_center(g))
        members = frozenset(g for g in base_ball if project(g) in fc)
        levels.append(TowerLevel(index, members, current.name()))
        if fc != structural:
            return FCTower(tuple(levels), TowerStatus(
                "budget_exhausted", index,
                "budgeted FC-center disagrees with the family's structural "
                "center; raise class_budget"))
        shape = current.fc_structure()
        if shape == "all":
            return FCTower(tuple(levels), TowerStatus("hypercentral", index))
        if shape == "trivial":
            return FCTower(tuple(levels), TowerStatus("stabilized_proper", index))
        quotient, step, desc = current.fc_quotient()
        prev = project
        project = (lambda st, pr: (lambda g: st(pr(g))))(step, prev)
        current = quotient
    return FCTower(tuple(levels),
                   TowerStatus("budget_exhausted", max_levels, "max_levels reached"))


# ---------------------------------------------------------------------------
# families


class _AbelianMixin:
    def fc_structure(self) -> str:
        return "all"


class IntegerLattice(_AbelianMixin, Group):
    """Z^d with the 2d signed standard generators."""

    def __init__(self, d: int):
        if d < 1:
            raise GroupError("dimension must be >= 1")
        self.d = d
        self.family = "Zd"
        self.oracle = ClassificationOracle(
            "choquet_deny", "abelian (Blackwell 1955; Choquet-Deny 1960)")
        gens = []
        for i in range(d):
            for sign in (1, -1):
                v = [0] * d
                v[i] = sign
                gens.append(tuple(v))
        self._gens = tuple(gens)

    @property
    def generators(self):
        return self._gens

    def identity(self):
        return (0,) * self.d

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def sort_key(self, g):
        return g

    def describe(self, g):
        if self.d == 1:
            return str(g[0])
        return "(" + ",".join(str(x) for x in g) + ")"

    def parse(self, text):
        text = text.strip()
        if self.d == 1 and not text.startswith("("):
            return (int(text),)
        inner = text.strip("()")
        parts = [int(p) for p in inner.split(",") if p.strip() != ""]
        if len(parts) != self.d:
            raise GroupError(f"expected {self.d} coordinates: {text!r}")
        return tuple(parts)

    def name(self):
        return f"Z^{self.d}"


class InfiniteDihedral(Group):
    """Infinite dihedral group on normal forms (translation, reflection bit)."""

    family = "dihedral_inf"

    def __init__(self):
        self.oracle = ClassificationOracle(
            "choquet_deny", "virtually abelian, hence FC-hypercentral")

    @property
    def generators(self):
        return ((1, 0), (-1, 0), (0, 1))

    def identity(self):
        return (0, 0)

    def mul(self, a, b):
        k1, r1 = a
        k2, r2 = b
        return (k1 + (k2 if r1 == 0 else -k2), r1 ^ r2)

    def inv(self, a):
        k, r = a
        return (-k, 0) if r == 0 else (k, 1)

    def sort_key(self, g):
        return (g[1], g[0])

    def describe(self, g):
        k, r = g
        if k == 0 and r == 0:
            return "e"
        parts = []
        if k != 0:
            parts.append(f"t^{k}")
        if r:
            parts.append("s")
        return "*".join(parts)

    def parse(self, text):
        text = text.strip()
        if text == "e":
            return (0, 0)
        k, r = 0, 0
        for part in text.split("*"):
            part = part.strip()
            if part == "s":
                r = 1
            elif part.startswith("t^"):
                k = int(part[2:])
            elif part == "t":
                k = 1
            else:
                raise GroupError(f"bad dihedral element: {text!r}")
        return (k, r)

    def fc_structure(self):
        return "proper"

    def in_fc_center(self, g):
        return g[1] == 0  # the translations

    def fc_quotient(self):
        c2 = cyclic_table(2, labels=("e", "s"))
        return c2, (lambda g: g[1]), "D_inf -> Z/2 (kill translations)"

    def name(self):
        return "D_inf"


class Heisenberg(Group):
    """Discrete Heisenberg group, triples (a, b, c) with c the upper corner."""

    family = "heisenberg"

    def __init__(self):
        self.oracle = ClassificationOracle(
            "choquet_deny", "nilpotent (Dynkin-Malyutov 1961)")

    @property
    def generators(self):
        return ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))

    def identity(self):
        return (0, 0, 0)

    def mul(self, g, h):
        a, b, c = g
        x, y, z = h
        return (a + x, b + y, c + z + a * y)

    def inv(self, g):
        a, b, c = g
        return (-a, -b, -c + a * b)

    def sort_key(self, g):
        return g

    def describe(self, g):
        return "(" + ",".join(str(x) for x in g) + ")"

    def parse(self, text):
        parts = [int(p) for p in text.strip().strip("()").split(",")]
        if len(parts) != 3:
            raise GroupError(f"bad Heisenberg element: {text!r}")
        return tuple(parts)

    def fc_structure(self):
        return "proper"

    def in_fc_center(self, g):
        return g[0] == 0 and g[1] == 0  # the center

    def fc_quotient(self):
        z2 = IntegerLattice(2)
        return z2, (lambda g: (g[0], g[1])), "H -> Z^2 (kill center)"

    def name(self):
        return "Heisenberg"


class Lamplighter(Group):
    """Wreath product Z/2 wr Z: (finite lamp set, shift)."""

    family = "lamplighter"

    def __init__(self):
        self.oracle = ClassificationOracle(
            "not_choquet_deny",
            "amenable icc wreath product (Kaimanovich-Vershik 1983)")

    @property
    def generators(self):
        return ((frozenset(), 1), (frozenset(), -1), (frozenset([0]), 0))

    def identity(self):
        return (frozenset(), 0)

    def mul(self, g, h):
        lamps1, m = g
        lamps2, n = h
        return (lamps1 ^ frozenset(m + p for p in lamps2), m + n)

    def inv(self, g):
        lamps, m = g
        return (frozenset(p - m for p in lamps), -m)

    def sort_key(self, g):
        lamps, m = g
        return (len(lamps), tuple(sorted(lamps)), m)

    def describe(self, g):
        lamps, m = g
        if not lamps and m == 0:
            return "e"
        parts = []
        if lamps:
            parts.append("a(" + ",".join(str(p) for p in sorted(lamps)) + ")")
        if m != 0:
            parts.append(f"t^{m}")
        return "*".join(parts)

    def parse(self, text):
        text = text.strip()
        if text == "e":
            return self.identity()
        lamps: frozenset = frozenset()
        m = 0
        for part in text.split("*"):
            part = part.strip()
            if part.startswith("a(") and part.endswith(")"):
                lamps = frozenset(int(p) for p in part[2:-1].split(","))
            elif part.startswith("t^"):
                m = int(part[2:])
            elif part == "t":
                m = 1
            else:
                raise GroupError(f"bad lamplighter element: {text!r}")
        return (lamps, m)

    def fc_structure(self):
        return "trivial"

    def size_norm(self, g):
        lamps, m = g
        pts = [abs(p) for p in lamps] + [abs(p - m) for p in lamps] + [abs(m)]
        return max(pts)

    def switching_candidates(self, avoid_support, avoid_shift, min_norm):
        # One lamp far beyond the avoided window, on top of a large shift:
        # conjugation then always either moves the far lamp into view or
        # changes the shift past the window, so the four-product test has
        # a chance on the first few candidates.
        d0 = max(2 * (avoid_support + avoid_shift) + 1, min_norm + 1, 1)
        for step in itertools.count():
            d = d0 + step
            far = d + avoid_support + avoid_shift + 1
            yield (frozenset([far]), d)
            yield (frozenset([-far]), -d)

    def name(self):
        return "Z/2 wr Z"


def _cycles_of(moved: dict[int, int]) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    cycles = []
    for start in sorted(moved):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        nxt = moved[start]
        while nxt != start:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = moved[nxt]
        if len(cyc) > 1:
            cycles.append(tuple(cyc))
    return cycles


class FinitarySym(Group):
    """Finite-support permutations of {1, 2, ...}, truncated at a support bound.

    The handle is a stand-in for the infinite finitary symmetric group: the
    bound only limits which points enumeration and searches may touch, so
    order() reports None and the FC structure is the infinite group's
    (trivial center, all nontrivial classes infinite).  Generators are all
    transpositions within the bound.
    """

    family = "finitary_sym"

    def __init__(self, support_bound: int = 12):
        if support_bound < 2:
            raise GroupError("support bound must be >= 2")
        self.bound = support_bound
        self.oracle = ClassificationOracle(
            "not_choquet_deny", "infinite icc (it is amenable and icc)")
        self._gens = tuple(
            self._from_map({i: j, j: i})
            for i in range(1, support_bound + 1)
            for j in range(i + 1, support_bound + 1))

    @staticmethod
    def _from_map(moved: dict[int, int]) -> Element:
        return tuple(sorted((i, j) for i, j in moved.items() if i != j))

    @staticmethod
    def _to_map(g: Element) -> dict[int, int]:
        return dict(g)

    @property
    def generators(self):
        return self._gens

    def identity(self):
        return ()

    def apply(self, g: Element, point: int) -> int:
        return self._to_map(g).get(point, point)

    def mul(self, g, h):
        # composition: (g*h)(p) = g(h(p))
        gm, hm = self._to_map(g), self._to_map(h)
        pts = set(gm) | set(hm)
        return self._from_map({p: gm.get(hm.get(p, p), hm.get(p, p)) for p in pts})

    def inv(self, g):
        return self._from_map({j: i for i, j in g})

    def sort_key(self, g):
        return (len(g), g)

    def describe(self, g):
        if not g:
            return "e"
        return "".join("(" + " ".join(str(p) for p in cyc) + ")"
                       for cyc in _cycles_of(self._to_map(g)))

    def parse(self, text):
        text = text.strip()
        if text == "e":
            return ()
        if not re.fullmatch(r"(\(\d+( \d+)*\))+", text):
            raise GroupError(f"bad cycle notation: {text!r}")
        result = self.identity()
        for cyc in re.findall(r"\(([\d ]+)\)", text):
            pts = [int(p) for p in cyc.split()]
            moved = {pts[i]: pts[(i + 1) % len(pts)] for i in range(len(pts))}
            result = self.mul(result, self._from_map(moved))
        return result

    def fc_structure(self):
        return "trivial"

    def size_norm(self, g):
        return max((max(i, j) for i, j in g), default=0)

    def transposition_word(self, g: Element) -> list[Element]:
        word: list[Element] = []
        for cyc in _cycles_of(self._to_map(g)):
            for i in range(len(cyc) - 1):
                word.append(self._from_map({cyc[i]: cyc[i + 1], cyc[i + 1]: cyc[i]}))
        return word

    def switching_candidates(self, avoid_support, avoid_shift, min_norm):
        # Pair every point of the avoided window with a fresh one; products
        # with window permutations then always move points outside it.
        k = max(avoid_support, min_norm, 1)
        if 2 * k <= self.bound:
            moved = {}
            for i in range(1, k + 1):
                moved[i] = k + i
                moved[k + i] = i
            yield self._from_map(moved)

    def name(self):
        return f"FSym(N) (support <= {self.bound})"


class FiniteTable(Group):
    """Finite group given by an explicit multiplication table on 0..n-1."""

    family = "finite_table"

    def __init__(self, table: list[list[int]], labels: Optional[tuple[str, ...]] = None,
                 generators: Optional[tuple[int, ...]] = None, name: str = "finite"):
        n = len(table)
        if any(len(row) != n for row in table):
            raise GroupError("table must be square")
        if any(sorted(row) != list(range(n)) for row in table):
            raise GroupError("table rows must be permutations of 0..n-1")
        if any(table[0][j] != j or table[j][0] != j for j in range(n)):
            raise GroupError("index 0 must be the identity")
        self.table = tuple(tuple(row) for row in table)
        self.n = n
        self.labels = tuple(labels) if labels else tuple(str(i) for i in range(n))
        if len(self.labels) != n or len(set(self.labels)) != n:
            raise GroupError("labels must be distinct, one per element")
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        self._inv = [next(j for j in range(n) if self.table[i][j] == 0)
                     for i in range(n)]
        if generators is None:
            generators = tuple(range(1, n))
        gens = set(generators)
        gens |= {self._inv[i] for i in gens}
        gens.discard(0)
        self._gens = tuple(sorted(gens))
        if n > 1 and len(ball(self, n)) != n:
            raise GroupError("generators do not generate the whole table")
        self._name = name
        self.oracle = ClassificationOracle("choquet_deny", "finite group")

    @property
    def generators(self):
        return self._gens

    def identity(self):
        return 0

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    def sort_key(self, g):
        return (g,)

    def describe(self, g):
        return self.labels[g]

    def parse(self, text):
        text = text.strip()
        if text not in self._label_index:
            raise GroupError(f"unknown element label {text!r}")
        return self._label_index[text]

    def order(self):
        return self.n

    def fc_structure(self):
        return "all"

    def name(self):
        return self._name


def cyclic_table(n: int, labels: Optional[tuple[str, ...]] = None) -> FiniteTable:
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    if labels is None:
        labels = tuple("e" if i == 0 else f"g^{i}" for i in range(n))
    return FiniteTable(table, labels=labels, generators=(1 % n,) if n > 1 else (),
                       name=f"Z/{n}")


def symmetric_table(n: int) -> FiniteTable:
    """S_n as a table, elements labelled by one-line permutation arrays."""
    perms = sorted(itertools.permutations(range(1, n + 1)))
    ident = tuple(range(1, n + 1))
    perms.remove(ident)
    perms.insert(0, ident)
    index = {p: i for i, p in enumerate(perms)}

    def compose(p, q):  # (p*q)(i) = p(q(i))
        return tuple(p[q[i] - 1] for i in range(n))

    table = [[index[compose(p, q)] for q in perms] for p in perms]
    labels = tuple("[" + " ".join(str(x) for x in p) + "]" for p in perms)
    gens = []
    if n >= 2:
        swap = (2, 1) + tuple(range(3, n + 1))
        gens.append(index[swap])
    if n >= 3:
        cycle = tuple(range(2, n + 1)) + (1,)
        gens.append(index[cycle])
    return FiniteTable(table, labels=labels, generators=tuple(gens), name=f"S_{n}")


def trivial_group() -> FiniteTable:
    return FiniteTable([[0]], labels=("e",), generators=(), name="trivial")


_FAMILY_BUILDERS = {
    "Zd": lambda params: IntegerLattice(int(params.get("d", 1))),
    "dihedral_inf": lambda params: InfiniteDihedral(),
    "heisenberg": lambda params: Heisenberg(),
    "lamplighter": lambda params: Lamplighter(),
    "finitary_sym": lambda params: FinitarySym(int(params.get("support_bound", 12))),
}


def from_spec(spec: dict) -> Group:
    """Build a group handle from its JSON description."""
    family = spec.get("family")
    if family in _FAMILY_BUILDERS:
        return _FAMILY_BUILDERS[family](spec)
    if family == "finite_table":
        if "preset" in spec:
            preset = spec["preset"]
            n = int(spec.get("n", 3))
            if preset == "sym":
                return symmetric_table(n)
            if preset == "cyclic":
                return cyclic_table(n)
            raise GroupError(f"unknown finite_table preset {preset!r}")
        table = spec.get("table")
        if table is None:
            raise GroupError("finite_table needs 'table' or 'preset'")
        labels = tuple(spec["labels"]) if "labels" in spec else None
        gens = tuple(spec["generators"]) if "generators" in spec else None
        return FiniteTable([list(r) for r in table], labels=labels, generators=gens,
                           name=spec.get("name", "finite"))
    raise GroupError(f"unknown group family {family!r}")


def to_spec(G: Group) -> dict:
    if isinstance(G, IntegerLattice):
        return {"family": "Zd", "d": G.d}
    if isinstance(G, InfiniteDihedral):
        return {"family": "dihedral_inf"}
    if isinstance(G, Heisenberg):
        return {"family": "heisenberg"}
    if isinstance(G, Lamplighter):
        return {"family": "lamplighter"}
    if isinstance(G, FinitarySym):
        return {"family": "finitary_sym", "support_bound": G.bound}
    if isinstance(G, FiniteTable):
        return {"family": "finite_table", "table": [list(r) for r in G.table],
                "labels": list(G.labels), "generators": list(G._gens),
                "name": G._name}
    raise GroupError(f"cannot serialize {type(G).__name__}")
