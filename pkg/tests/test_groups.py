"""Group families: normal forms, balls, conjugacy budgets, FC towers."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from gwalk import groups
from gwalk.groups import (
    ExceedsBudget, FiniteClass, FinitarySym, Heisenberg, InfiniteDihedral,
    IntegerLattice, Lamplighter, NotIcc, IccUpToBudget, ball, conjugacy_class,
    cyclic_table, enumerate_nontrivial, fc_center_in_ball, fc_tower,
    is_icc_up_to_budget, symmetric_table, trivial_group, word_of,
)

ALL_FAMILIES = [
    IntegerLattice(1),
    IntegerLattice(2),
    InfiniteDihedral(),
    Heisenberg(),
    Lamplighter(),
    FinitarySym(6),
    symmetric_table(3),
    cyclic_table(5),
]


@pytest.mark.parametrize("G", ALL_FAMILIES, ids=lambda G: G.name())
def test_group_axioms_on_ball(G):
    rng = random.Random(7)
    elems = ball(G, 2)
    e = G.identity()
    for g in elems:
        assert G.mul(e, g) == g
        assert G.mul(g, e) == g
        assert G.mul(g, G.inv(g)) == e
        assert G.mul(G.inv(g), g) == e
    for _ in range(200):
        a, b, c = (rng.choice(elems) for _ in range(3))
        assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))
        assert G.inv(G.mul(a, b)) == G.mul(G.inv(b), G.inv(a))


@pytest.mark.parametrize("G", ALL_FAMILIES, ids=lambda G: G.name())
def test_describe_parse_roundtrip(G):
    for g in ball(G, 2):
        assert G.parse(G.describe(g)) == g


@pytest.mark.parametrize("G", ALL_FAMILIES, ids=lambda G: G.name())
def test_ball_enumeration_deterministic_and_graded(G):
    first = ball(G, 3)
    assert first == ball(G, 3)
    assert len(set(first)) == len(first)
    # every element's word length matches its shell
    shells = groups.shells(G, 3)
    for r, shell in enumerate(shells):
        for g in shell:
            assert len(word_of(G, g)) == r


@given(st.integers(-40, 40), st.integers(-40, 40), st.integers(0, 1), st.integers(0, 1))
@settings(max_examples=60, deadline=None)
def test_dihedral_relations(k1, k2, r1, r2):
    D = InfiniteDihedral()
    s, t = (0, 1), (1, 0)
    # s t s = t^-1 and s^2 = e, on arbitrary products
    g = D.mul((k1, r1), (k2, r2))
    assert D.mul(D.mul(s, g), s) == D.inv(g) if g[1] == 0 else True
    assert D.mul(s, s) == D.identity()
    assert D.mul(D.mul(s, D.mul(t, s)), t) == D.identity()


@given(st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-9, 9)),
       st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-9, 9)))
@settings(max_examples=60, deadline=None)
def test_heisenberg_center(g, h):
    H = Heisenberg()
    z = (0, 0, 1)
    assert H.mul(H.mul(g, z), H.inv(g)) == z
    comm = H.mul(H.mul(g, h), H.mul(H.inv(g), H.inv(h)))
    assert comm[0] == 0 and comm[1] == 0


def test_heisenberg_ball_radius_one_has_five_elements():
    assert len(ball(Heisenberg(), 1)) == 5


def test_dihedral_translation_class_is_pair():
    D = InfiniteDihedral()
    assert conjugacy_class(D, (1, 0), 10) == FiniteClass(frozenset({(1, 0), (-1, 0)}))


def test_lamplighter_lamp_class_exceeds_budget():
    L = Lamplighter()
    res = conjugacy_class(L, (frozenset([0]), 0), 10)
    assert res == ExceedsBudget(count_found=11, budget=10)


def test_fc_center_dihedral_radius_three():
    D = InfiniteDihedral()
    got = fc_center_in_ball(D, 3, 10)
    assert got == frozenset({(k, 0) for k in range(-3, 4)})


def test_fc_center_lamplighter_trivial():
    L = Lamplighter()
    assert fc_center_in_ball(L, 2, 10) == frozenset({L.identity()})


def test_fc_tower_s3_hypercentral_level_one():
    tower = fc_tower(symmetric_table(3), 3, 30)
    assert tower.status.kind == "hypercentral"
    assert tower.status.level == 1


def test_fc_tower_dihedral_two_levels():
    tower = fc_tower(InfiniteDihedral(), 3, 10)
    assert tower.status == groups.TowerStatus("hypercentral", 2)
    assert len(tower.levels) == 2
    # levels increase: translations first, everything at the top
    assert tower.levels[0].members < tower.levels[1].members
    assert tower.levels[0].members == frozenset({(k, 0) for k in range(-3, 4)})


def test_fc_tower_lamplighter_stabilizes_proper():
    tower = fc_tower(Lamplighter(), 2, 10)
    assert tower.status.kind == "stabilized_proper"
    assert tower.levels[0].members == frozenset({Lamplighter().identity()})


def test_fc_tower_heisenberg_two_levels():
    tower = fc_tower(Heisenberg(), 2, 10)
    assert tower.status == groups.TowerStatus("hypercentral", 2)
    assert all(g[0] == g[1] == 0 for g in tower.levels[0].members)


def test_fc_tower_budget_too_small_is_flagged():
    # with budget 1 even the size-2 translation classes look infinite
    tower = fc_tower(InfiniteDihedral(), 3, 1)
    assert tower.status.kind == "budget_exhausted"


def test_icc_witnesses():
    assert isinstance(is_icc_up_to_budget(IntegerLattice(2), 2, 10), NotIcc)
    assert is_icc_up_to_budget(Lamplighter(), 2, 10) == IccUpToBudget(2, 10)
    assert is_icc_up_to_budget(FinitarySym(12), 2, 20) == IccUpToBudget(2, 20)
    wit = is_icc_up_to_budget(InfiniteDihedral(), 2, 10)
    assert isinstance(wit, NotIcc) and wit.witness[1] == 0


def test_finitary_sym_cycle_notation():
    F = FinitarySym(8)
    g = F.parse("(1 2 3)(5 6)")
    assert F.apply(g, 1) == 2 and F.apply(g, 3) == 1 and F.apply(g, 5) == 6
    assert F.describe(g) == "(1 2 3)(5 6)"
    assert F.mul(g, F.inv(g)) == F.identity()


def test_finite_table_validation():
    with pytest.raises(groups.GroupError):
        groups.FiniteTable([[0, 1], [1, 1]])
    with pytest.raises(groups.GroupError):
        groups.FiniteTable([[1, 0], [0, 1]])


def test_symmetric_table_s3():
    S3 = symmetric_table(3)
    assert S3.order() == 6
    transposition = S3.parse("[2 1 3]")
    cls = conjugacy_class(S3, transposition, 100)
    assert isinstance(cls, FiniteClass) and len(cls.elements) == 3


def test_enumerate_nontrivial_matches_ball_order():
    L = Lamplighter()
    lazy = []
    for g in enumerate_nontrivial(L):
        lazy.append(g)
        if len(lazy) >= 12:
            break
    eager = [g for g in ball(L, 3) if g != L.identity()][:12]
    assert lazy == eager


def test_group_spec_roundtrip():
    for G in ALL_FAMILIES:
        spec = groups.to_spec(G)
        H = groups.from_spec(spec)
        assert type(H) is type(G)
        assert ball(H, 2) == ball(G, 2)


def test_trivial_group():
    T = trivial_group()
    assert T.order() == 1 and T.generators == ()
