"""Determinism and advertised shape of the seeded corpora."""

from fractions import Fraction
from random import Random

from gwalk import corpus, harmonic, markov

F = Fraction


def test_random_masses_are_a_distribution():
    rng = Random(4)
    for n in (1, 3, 7):
        masses = corpus.random_masses(rng, n)
        assert len(masses) == n
        assert all(m > 0 for m in masses)
        assert sum(masses) == 1


def test_relation_corpus_shape():
    rels = corpus.relation_instances(count=25, seed=5)
    assert len(rels) == 25
    for P in rels:
        G = P.groupoid
        assert G.kind == "finite_relation"
        assert all(2 <= len(b) <= 8 for b in G.blocks)
        assert 1 <= len(G.blocks) <= 3
        for x in G.units():
            block = next(b for b in G.blocks if x in b)
            assert len(P.per_unit[x].atoms) == len(block)
            assert all(p > 0 for _, p in P.per_unit[x].atoms)


def test_corpora_are_seed_deterministic():
    def fingerprint(instances):
        return [tuple(sorted((str(a), str(p))
                             for a, p in P.per_unit[x].atoms))
                for P in instances for x in P.groupoid.units()]

    assert fingerprint(corpus.relation_instances(5, seed=11)) == \
        fingerprint(corpus.relation_instances(5, seed=11))
    assert fingerprint(corpus.relation_instances(5, seed=11)) != \
        fingerprint(corpus.relation_instances(5, seed=12))
    assert fingerprint(corpus.finite_fiber_instances(seed=3)) == \
        fingerprint(corpus.finite_fiber_instances(seed=3))


def test_finite_fiber_pool_is_finite_and_big_enough():
    pool = corpus.finite_fiber_instances()
    assert len(pool) >= 20
    kinds = {P.groupoid.kind for P in pool}
    assert kinds == {"group_bundle", "semidirect", "transformation"}
    for P in pool:
        for x in P.groupoid.units():
            assert P.groupoid.fiber_is_finite(x)


def test_full_support_operator_charges_whole_fiber():
    from gwalk.groupoids import fiber_enumerate

    P = corpus.finite_fiber_instances()[0]
    for x in P.groupoid.units():
        fiber, done = fiber_enumerate(P.groupoid, x, 256)
        assert done
        assert set(P.per_unit[x].support()) == set(fiber)


def test_swap_walk_hitting_value():
    nu = markov.hitting_measure(corpus.swap_walk(), 0, markov.Enumerated(2))
    masses = {a.payload: p for a, p in nu.atoms}
    assert masses == {(0,): F(1, 2), (2,): F(1, 4), (-2,): F(1, 4)}
    assert nu.unaccounted == 0


def test_forced_return_certifies_zero_unaccounted():
    for fr in corpus.forced_return_instances():
        nu = markov.hitting_measure(fr.operator, fr.unit,
                                    markov.Enumerated(fr.horizon))
        assert nu.unaccounted == 0
        assert nu.tail_certificate == 0
        assert nu.total() == 1


def test_cross_relation_walk_returns_in_exactly_size_steps():
    P = corpus.cross_relation_walk(3)
    units, Q = markov.source_chain(P, 0)
    assert Q[0][1] == 1 and Q[1][2] == 1 and Q[2][0] == 1


def test_integer_rotation_actions_are_transitive():
    for T in corpus.z_rotation_groupoids(6):
        assert T.orbit_of(0).units == frozenset(T.units())


def test_symmetric_action_matches_composition():
    T = corpus.symmetric_action(3)
    S = T.group
    for g in S.generators:
        for h in S.generators:
            gh = S.mul(g, h)
            for x in T.units():
                assert T.act(gh, x) == T.act(g, T.act(h, x))


def test_lazy_generator_operator_support():
    B_walk = corpus.finite_fiber_instances()[6]  # first lazy instance
    assert B_walk.groupoid.kind == "group_bundle"
    H = B_walk.groupoid.fibers[0]
    support = {a.payload for a in B_walk.per_unit[0].support()}
    assert support == {H.identity()} | set(H.generators)


def test_relation_corpus_is_liouville_everywhere():
    for P in corpus.relation_instances(10, seed=2):
        for x in P.groupoid.units():
            assert harmonic.harmonic_space(P, x).dimension == 1
