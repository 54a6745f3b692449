"""Markov operators: convolution, cylinders, tail bounds, hitting measures."""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwalk import groups
from gwalk.groupoids import (
    Arrow, build_finite_relation, build_infinite_orbit_prefix, build_semidirect,
    build_transformation, constant_bundle, fiber_enumerate,
)
from gwalk.markov import (
    CoveredBall, Enumerated, ExactFinite, FiberMeasure, InfiniteFiber,
    InfiniteOrbit, MarkovError, MonteCarlo, NonabsorbingWalk, NormalizationError,
    Path, ResourceCap, TargetMismatch, Uncovered, convolve, cylinder_prob,
    hitting_measure, make_operator, nondegenerate_check, path_frequencies,
    regularize, return_time_tail, sample_path, uniform_fiber_operator,
)

F = Fraction

R2 = build_finite_relation([[0, 1]])
U0, U1 = R2.unit_arrow(0), R2.unit_arrow(1)
A10, A01 = Arrow(1, 0, 0), Arrow(0, 1, 0)


def uniform_two_point():
    return make_operator(R2, {
        0: {U0: F(1, 2), A10: F(1, 2)},
        1: {U1: F(1, 2), A01: F(1, 2)},
    })


def asymmetric_two_point():
    # mu(T > K) = (2/3)(1/4)^(K-1), computable in closed form
    return make_operator(R2, {
        0: {U0: F(1, 3), A10: F(2, 3)},
        1: {U1: F(1, 4), A01: F(3, 4)},
    })


def swap_walk():
    T = build_transformation(groups.IntegerLattice(1), {(1,): (1, 0)})
    half = F(1, 2)
    return make_operator(T, {
        0: {Arrow(1, 0, (1,)): half, Arrow(1, 0, (-1,)): half},
        1: {Arrow(0, 1, (1,)): half, Arrow(0, 1, (-1,)): half},
    })


def random_relation_operator(rnd, n_units):
    G = build_finite_relation([list(range(n_units))])
    per = {}
    for u in range(n_units):
        arrows, _ = fiber_enumerate(G, u, 32)
        cuts = sorted(rnd.randint(0, 12) for _ in range(len(arrows) - 1))
        probs, last = [], 0
        for c in cuts + [12]:
            probs.append(F(c - last, 12))
            last = c
        per[u] = {a: p for a, p in zip(arrows, probs) if p > 0}
    return make_operator(G, per)


def test_fiber_measure_validation():
    with pytest.raises(TargetMismatch):
        FiberMeasure.make(R2, 0, {A01: F(1)})
    with pytest.raises(NormalizationError):
        FiberMeasure.make(R2, 0, {U0: F(9, 10)})
    with pytest.raises(NormalizationError):
        FiberMeasure.make(R2, 0, {U0: F(3, 2), A10: F(-1, 2)})


def test_make_operator_requires_every_unit():
    with pytest.raises(MarkovError):
        make_operator(R2, {0: {U0: F(1)}})


def test_convolve_two_point_uniform():
    P = uniform_two_point()
    assert convolve(P, 0, 1).as_dict() == {U0: F(1, 2), A10: F(1, 2)}
    assert convolve(P, 0, 2).as_dict() == {U0: F(1, 2), A10: F(1, 2)}
    assert convolve(P, 0, 0).as_dict() == {U0: F(1)}


def test_identity_operator_is_convolution_fixed_point():
    P = make_operator(R2, {0: {U0: F(1)}, 1: {U1: F(1)}})
    for n in range(4):
        assert convolve(P, 0, n).as_dict() == {U0: F(1)}


def test_convolve_support_cap():
    P = uniform_two_point()
    with pytest.raises(ResourceCap):
        convolve(P, 0, 3, support_cap=1)


@given(st.integers(1, 5), st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_convolve_conserves_mass(n, seed):
    P = random_relation_operator(random.Random(seed), 3)
    dist = convolve(P, 0, n)
    assert sum((p for _, p in dist.atoms), F(0)) == 1
    assert all(a.target == 0 for a, _ in dist.atoms)


def test_chapman_kolmogorov():
    rnd = random.Random(20)
    for _ in range(8):
        P = random_relation_operator(rnd, rnd.choice([2, 3]))
        G = P.groupoid
        m, n = rnd.randint(1, 3), rnd.randint(1, 3)
        lhs = convolve(P, 0, m + n).as_dict()
        rhs = {}
        for b, pb in convolve(P, 0, m).atoms:
            for h, q in convolve(P, b.source, n).atoms:
                c = G.compose(b, h)
                rhs[c] = rhs.get(c, F(0)) + pb * q
        assert lhs == rhs


def test_cylinder_two_point_uniform():
    P = uniform_two_point()
    assert cylinder_prob(P, Path(0, (U0, A10, U0))) == F(1, 4)
    assert cylinder_prob(P, Path(0, (U0,))) == 1
    assert cylinder_prob(P, Path(0, ())) == 1
    assert cylinder_prob(P, Path(0, (A10, U0))) == 0  # must start at the unit


def test_cylinders_sum_to_convolution():
    P = asymmetric_two_point()
    arrows, _ = fiber_enumerate(R2, 0, 8)
    total = F(0)
    marginal = {}
    for a in arrows:
        for b in arrows:
            p = cylinder_prob(P, Path(0, (U0, a, b)))
            total += p
            marginal[b] = marginal.get(b, F(0)) + p
    assert total == 1
    assert {a: p for a, p in marginal.items() if p} == convolve(P, 0, 2).as_dict()


def test_nondegenerate_swap_of_two_units():
    P = make_operator(R2, {0: {A10: F(1)}, 1: {A01: F(1)}})
    assert nondegenerate_check(P, 0, 2, 10) == CoveredBall(2, 2)
    short = nondegenerate_check(P, 0, 1, 10)
    assert isinstance(short, Uncovered) and short.witness == U0


def test_nondegenerate_identity_fails():
    P = make_operator(R2, {0: {U0: F(1)}, 1: {U1: F(1)}})
    out = nondegenerate_check(P, 0, 5, 10)
    assert isinstance(out, Uncovered) and out.witness == A10


def test_nondegenerate_full_support_first_step():
    P = uniform_fiber_operator(R2)
    assert nondegenerate_check(P, 0, 3, 10) == CoveredBall(2, 1)


def test_regularize_depth_one_is_identity_on_operator():
    P = asymmetric_two_point()
    reg = regularize(P, 1)
    assert all(reg.per_unit[u].atoms == P.per_unit[u].atoms for u in (0, 1))


def test_regularize_identity_operator():
    P = make_operator(R2, {0: {U0: F(1)}, 1: {U1: F(1)}})
    reg = regularize(P, 3)
    assert reg.per_unit[0].as_dict() == {U0: F(1)}


def test_regularize_swap_walk_frozen_values():
    reg = regularize(swap_walk(), 3)
    m = reg.per_unit[0].as_dict()
    assert m[Arrow(1, 0, (1,))] == F(19, 56)
    assert m[Arrow(0, 0, (0,))] == F(1, 7)
    assert m[Arrow(1, 0, (3,))] == F(1, 56)
    assert sum(m.values(), F(0)) == 1
    # support covers every power's support up to the depth
    for n in (1, 2, 3):
        assert set(convolve(swap_walk(), 0, n).support()) <= set(m)


def test_tail_bound_swap_forced_return():
    P = swap_walk()
    assert return_time_tail(P, 0, 1).alpha == 0
    tb = return_time_tail(P, 0, 2)
    assert tb.alpha == 0
    assert "(0/1)^(m-1)" in tb.statement


def test_tail_bound_bundle_orbit_is_a_point():
    B = constant_bundle(groups.cyclic_table(2), 1)
    g = Arrow(0, 0, 1)
    P = make_operator(B, {0: {B.unit_arrow(0): F(1, 3), g: F(2, 3)}})
    assert return_time_tail(P, 0, 1).alpha == 0


def test_tail_bound_nonreturning_loop():
    P = make_operator(R2, {0: {A10: F(1)}, 1: {Arrow(1, 1, 0): F(1)}})
    for k in (1, 2, 3):
        assert return_time_tail(P, 0, k).alpha == 1


def test_tail_bound_asymmetric_closed_form():
    P = asymmetric_two_point()
    tb = return_time_tail(P, 0, 1)
    assert tb.alpha == F(1, 4)
    assert tb.bound_steps(2) == F(1, 4)
    assert tb.bound(1) == F(1, 4)
    for K in range(2, 9):
        exact_tail = F(2, 3) * F(1, 4) ** (K - 1)
        assert exact_tail <= tb.bound_steps(K)


def test_tail_bound_monotone_in_k():
    rnd = random.Random(31)
    for _ in range(10):
        P = random_relation_operator(rnd, rnd.choice([2, 3, 4]))
        alphas = [return_time_tail(P, 0, k).alpha for k in range(1, 7)]
        assert all(a2 <= a1 for a1, a2 in zip(alphas, alphas[1:]))


def test_tail_bound_infinite_orbit_raises():
    G = build_infinite_orbit_prefix(4)
    P = make_operator(
        G, {u: {a: F(1, 4) for a in fiber_enumerate(G, u, 4)[0]} for u in range(4)})
    with pytest.raises(InfiniteOrbit):
        return_time_tail(P, 0, 2)
    with pytest.raises(InfiniteOrbit):
        hitting_measure(P, 0, Enumerated(4))


def test_hitting_swap_enumerated_frozen():
    nu = hitting_measure(swap_walk(), 0, Enumerated(2))
    got = {a.payload: p for a, p in nu.atoms}
    assert got == {(0,): F(1, 2), (2,): F(1, 4), (-2,): F(1, 4)}
    assert nu.unaccounted == 0
    assert nu.tail_certificate == 0
    assert all(a.source == 0 for a in nu.support())


def test_hitting_swap_exact_mode_needs_finite_fiber():
    with pytest.raises(InfiniteFiber):
        hitting_measure(swap_walk(), 0, ExactFinite())


def test_hitting_swap_monte_carlo_within_three_sigma():
    P = swap_walk()
    exact = {a.payload: p for a, p in hitting_measure(P, 0, Enumerated(2)).atoms}
    mc = hitting_measure(P, 0, MonteCarlo(4000, seed=7))
    assert mc.unaccounted == 0
    for a, freq in mc.atoms:
        p = float(exact[a.payload])
        sigma = math.sqrt(p * (1 - p) / 4000)
        assert abs(float(freq) - p) <= 3 * sigma
    again = hitting_measure(P, 0, MonteCarlo(4000, seed=7))
    assert again.atoms == mc.atoms


def test_hitting_bundle_first_step_absorbs():
    B = constant_bundle(groups.cyclic_table(3), 1)
    g1, g2 = Arrow(0, 0, 1), Arrow(0, 0, 2)
    step = {B.unit_arrow(0): F(1, 6), g1: F(1, 2), g2: F(1, 3)}
    nu = hitting_measure(make_operator(B, {0: step}), 0, ExactFinite())
    assert dict(nu.atoms) == step
    assert nu.unaccounted == 0


def test_hitting_nonabsorbing_loop():
    P = make_operator(R2, {0: {A10: F(1)}, 1: {Arrow(1, 1, 0): F(1)}})
    with pytest.raises(NonabsorbingWalk):
        hitting_measure(P, 0, Enumerated(4))
    with pytest.raises(NonabsorbingWalk):
        hitting_measure(P, 0, ExactFinite())
    mc = hitting_measure(P, 0, MonteCarlo(50, seed=1, max_steps=20))
    assert mc.unaccounted == 1 and not mc.atoms


def test_hitting_identity_operator_is_exact_despite_vacuous_alphas():
    # unreachable units keep alpha_k = 1, but absorption is total at T=1
    P = make_operator(R2, {0: {U0: F(1)}, 1: {U1: F(1)}})
    nu = hitting_measure(P, 0, Enumerated(1))
    assert dict(nu.atoms) == {U0: F(1)}
    assert nu.unaccounted == 0


def test_hitting_exact_agrees_with_enumerated():
    C2 = groups.cyclic_table(2)
    G = build_semidirect([C2, C2], [[0, 1]])
    rnd = random.Random(77)
    for _ in range(12):
        per = {}
        for u in (0, 1):
            arrows, done = fiber_enumerate(G, u, 16)
            assert done
            cuts = sorted(rnd.randint(0, 12) for _ in range(len(arrows) - 1))
            probs, last = [], 0
            for c in cuts + [12]:
                probs.append(F(c - last, 12))
                last = c
            per[u] = {a: p for a, p in zip(arrows, probs) if p > 0}
        P = make_operator(G, per)
        try:
            exact = hitting_measure(P, 0, ExactFinite())
            enum = hitting_measure(P, 0, Enumerated(24))
        except NonabsorbingWalk:
            continue
        assert exact.total() == 1
        assert enum.unaccounted <= enum.tail_certificate
        for a, p in exact.atoms:
            assert 0 <= p - enum[a] <= enum.unaccounted


def test_hitting_enumerated_unaccounted_is_exact_tail():
    P = asymmetric_two_point()
    nu = hitting_measure(P, 0, Enumerated(6))
    assert nu.unaccounted == F(2, 3) * F(1, 4) ** 5
    assert nu.unaccounted <= nu.tail_certificate
    assert nu.total() + nu.unaccounted == 1


def test_sample_path_deterministic_and_supported():
    P = swap_walk()
    p1 = sample_path(P, 0, 6, seed=11)
    p2 = sample_path(P, 0, 6, seed=11)
    assert p1 == p2
    assert len(p1.steps) == 7 and p1.steps[0] == P.groupoid.unit_arrow(0)
    for i in range(2, 7):
        assert cylinder_prob(P, Path(0, p1.steps[:i])) > 0


def test_sample_path_identity_operator_stays_put():
    P = make_operator(R2, {0: {U0: F(1)}, 1: {U1: F(1)}})
    path = sample_path(P, 0, 5, seed=0)
    assert all(a == U0 for a in path.steps)


def test_path_frequencies_match_cylinder_probabilities():
    P = asymmetric_two_point()
    count = 20000
    freq = path_frequencies(P, 0, 2, seed=3, count=count)
    assert sum(freq.values()) == count
    for steps, c in freq.items():
        p = float(cylinder_prob(P, Path(0, steps)))
        sigma = math.sqrt(p * (1 - p) / count)
        assert abs(c / count - p) <= 3 * sigma


def test_arrow_measure_is_translation():
    P = uniform_two_point()
    pushed = P.arrow_measure(A10)
    manual = {R2.compose(A10, h): q for h, q in P.per_unit[1].atoms}
    assert pushed == manual
    # mass of a translated set equals the source measure of its pullback
    for b, mass in pushed.items():
        assert mass == P.per_unit[1][R2.compose(R2.invert(A10), b)]


def test_uniform_fiber_operator_rejects_infinite_fiber():
    T = swap_walk().groupoid
    with pytest.raises(InfiniteFiber):
        uniform_fiber_operator(T)
