"""Tests for the probabilistic instance: stochastic automata, finite and
limit acceptance queries, the exact bottom-class oracle, Monte Carlo
estimation, the weighted-arrow theory instance, and the file formats.

Expectations come from closed-form path probabilities, exact Fraction
recursions over raw traces, and Fraction linear algebra on the product chain
(the oracles module) — never from the value iterations under test."""

import math
import random
from fractions import Fraction

import pytest

from oracles import accepting_limit_prob, exec_event_prob, reach_prob_exact

from omega_kleisli.kernel import check_theory_laws, format_report, star_iterative
from omega_kleisli.prob import (
    BadTolerance,
    ComposeArrow,
    IterationBudgetExceeded,
    JoinArrow,
    LinearArrow,
    MonteCarloEstimate,
    ProbAutomaton,
    ProbInstance,
    ProbTest,
    StarArrow,
    TestLanguage,
    behaviour_value,
    bscc_exact,
    chi_test,
    f_F_prob,
    finite_query,
    finite_table,
    format_dfa,
    format_pa,
    make_prob_sampler,
    monte_carlo,
    nu_arrow,
    omega_query,
    omega_table,
    parse_dfa,
    parse_pa,
    prob_automaton,
    prob_behaviour,
    sample_prob_automaton,
    sample_test_language,
)
from omega_kleisli.words import Alphabet, Dfa

BITS = Alphabet(("0", "1"))
AB = Alphabet(("a", "b"))


def coin_emission() -> ProbAutomaton:
    """Two-state automaton that flips a fair bit each step and remembers it:
    from either state, emit 0 into state 0 or 1 into state 1, each with mass
    1/2; state 1 is accepting.  Every length-n word is emitted with
    probability 2^{-n}, and the state after reading w is accepting exactly
    when w ends in 1."""
    return prob_automaton(
        BITS,
        2,
        {
            (0, "0", 0): 0.5,
            (0, "1", 1): 0.5,
            (1, "0", 0): 0.5,
            (1, "1", 1): 0.5,
        },
        {1},
    )


def fair_coin_race() -> ProbAutomaton:
    """One fair flip decides between two absorbing states; heads (state 1)
    is accepting."""
    return prob_automaton(
        AB,
        3,
        {
            (0, "a", 1): 0.5,
            (0, "b", 2): 0.5,
            (1, "a", 1): 1.0,
            (2, "b", 2): 1.0,
        },
        {1},
    )


def word_lang(alphabet: Alphabet, *words) -> TestLanguage:
    return TestLanguage.from_words(alphabet, [tuple(w) for w in words])


def product_rows(auto: ProbAutomaton, dfa: Dfa):
    """Fraction transition rows of the joint chain over (state, DFA state),
    built directly from the definitions for the exact oracles."""
    rows = {}
    good = set()
    for s in range(auto.n):
        for q in range(dfa.n):
            key = s * dfa.n + q
            row: dict = {}
            for ai in range(len(auto.alphabet)):
                q2 = dfa.delta[q][ai]
                for y in range(auto.n):
                    p = auto.trans[s][ai][y]
                    if p:
                        k2 = y * dfa.n + q2
                        row[k2] = row.get(k2, Fraction(0)) + Fraction(p)
            rows[key] = row
            if s in auto.accepting and q in dfa.accepting:
                good.add(key)
    return rows, good


def fraction_trans(auto: ProbAutomaton):
    trans = {}
    for s in range(auto.n):
        for ai, sym in enumerate(auto.alphabet):
            for y in range(auto.n):
                p = auto.trans[s][ai][y]
                if p:
                    trans[(s, sym, y)] = Fraction(p)
    return trans


# -- model validation -----------------------------------------------------------------


def test_automaton_rejects_substochastic_rows():
    """Outgoing mass below 1 is rejected with the offending state named."""
    with pytest.raises(ValueError, match="state 0"):
        prob_automaton(AB, 1, {(0, "a", 0): 0.7}, set())


def test_automaton_rejects_excess_mass():
    with pytest.raises(ValueError, match="not 1"):
        prob_automaton(AB, 1, {(0, "a", 0): 0.8, (0, "b", 0): 0.8}, set())


def test_automaton_rejects_bad_probability():
    with pytest.raises(ValueError, match="out of"):
        prob_automaton(AB, 1, {(0, "a", 0): 1.5, (0, "b", 0): -0.5}, set())


def test_automaton_rejects_bad_accepting_state():
    with pytest.raises(ValueError, match="accepting"):
        prob_automaton(AB, 1, {(0, "a", 0): 1.0}, {3})


def test_automaton_accepts_mass_within_tolerance():
    """Row sums within the stochasticity tolerance pass."""
    auto = prob_automaton(AB, 1, {(0, "a", 0): 0.5 + 2e-10, (0, "b", 0): 0.5}, set())
    assert auto.prob(0, "a", 0) == pytest.approx(0.5)


def test_language_constructors_agree():
    """The same singleton language via words, regex, and an explicit DFA."""
    by_words = word_lang(BITS, "01")
    by_regex = TestLanguage.from_regex("01", BITS)
    auto = coin_emission()
    assert finite_query(auto, 0, by_words) == pytest.approx(
        finite_query(auto, 0, by_regex), abs=1e-9
    )


# -- finite queries: closed forms ------------------------------------------------------


def test_singleton_word_ending_in_one_pays_its_path_mass():
    """For Λ = {w} with w ending in 1, the only way to be accepting at the
    moment the trace lies in Λ is to emit exactly w, so the value is
    2^{-|w|}."""
    auto = coin_emission()
    for w in ["1", "01", "11", "101", "0101", "110011"]:
        got = finite_query(auto, 0, word_lang(BITS, w))
        assert got == pytest.approx(0.5 ** len(w), abs=1e-9), w


def test_singleton_word_ending_in_zero_pays_nothing():
    """A word ending in 0 leaves the automaton in the rejecting state at the
    only possible hit moment."""
    auto = coin_emission()
    assert finite_query(auto, 0, word_lang(BITS, "010")) == pytest.approx(0.0, abs=1e-9)
    assert finite_query(auto, 0, word_lang(BITS, "0")) == pytest.approx(0.0, abs=1e-9)


def test_incomparable_words_add_up():
    """Hits at pairwise prefix-incomparable words are disjoint events, so the
    query is additive over them."""
    auto = coin_emission()
    words = ["1", "01", "001", "0001"]
    whole = finite_query(auto, 0, word_lang(BITS, *words))
    parts = sum(finite_query(auto, 0, word_lang(BITS, w)) for w in words)
    assert whole == pytest.approx(parts, abs=len(words) * 1e-9)
    assert whole == pytest.approx(sum(0.5 ** len(w) for w in words), abs=1e-8)


def test_empty_language_scores_zero():
    """No trace ever lies in the empty language."""
    auto = coin_emission()
    assert finite_query(auto, 0, word_lang(BITS)) == 0.0


def test_no_accepting_states_scores_zero():
    """With 𝔉 = ∅ the goal set of the product is empty."""
    auto = prob_automaton(
        BITS, 2,
        {(0, "0", 0): 0.5, (0, "1", 1): 0.5, (1, "0", 0): 0.5, (1, "1", 1): 0.5},
        set(),
    )
    lang = TestLanguage.from_regex("(0+1)*", BITS)
    assert finite_query(auto, 0, lang) == 0.0
    assert omega_query(auto, 0, lang) == pytest.approx(0.0, abs=1e-8)


def test_finite_value_depends_only_on_the_language():
    """Two DFA presentations of the same language (minimal and padded with a
    redundant reachable copy) give the same value: the query consumes the
    language, not the presentation."""
    auto = coin_emission()
    lean = word_lang(BITS, "11")
    d = lean.dfa
    padded = Dfa(
        d.alphabet,
        d.n + 1,
        d.delta + (d.delta[d.initial],),
        d.n,
        d.accepting | ({d.n} if d.initial in d.accepting else frozenset()),
    )
    assert finite_query(auto, 0, TestLanguage(padded)) == pytest.approx(
        finite_query(auto, 0, lean), abs=1e-9
    )


# -- finite queries: oracle sweep ------------------------------------------------------


def test_finite_query_matches_trace_recursion_on_random_automata():
    """Sweep random stochastic automata and word sets against the exact
    Fraction recursion over raw traces.  Every hit happens by the time the
    trace outgrows the longest word, so the truncated recursion is exact."""
    rng = random.Random(314159)
    for _ in range(40):
        n = rng.randrange(1, 5)
        auto = sample_prob_automaton(rng, n, AB)
        x = rng.randrange(n)
        words = set()
        for _ in range(rng.randrange(1, 4)):
            length = rng.randrange(0, 4)
            words.add(tuple(rng.choice(AB.symbols) for _ in range(length)))
        lang = TestLanguage.from_words(AB, words)
        maxlen = max((len(w) for w in words), default=0)
        oracle = exec_event_prob(
            fraction_trans(auto), auto.accepting, x, words, maxlen + 1
        )
        assert finite_query(auto, x, lang) == pytest.approx(float(oracle), abs=1e-8)


def test_finite_table_metadata_and_range():
    """Tables carry iteration metadata and stay inside [0,1]."""
    auto = coin_emission()
    table = finite_table(auto, word_lang(BITS, "0101"))
    assert table.direction == "ascending"
    assert table.rounds >= 1
    assert table.residual < 1e-9
    assert all(0.0 <= v <= 1.0 for row in table.values for v in row)


def test_finite_iteration_ascends():
    """The value iteration approaches the fixpoint from below, so successive
    iterates never decrease."""
    auto = coin_emission()
    steps: list = []
    finite_table(auto, word_lang(BITS, "0101"), trace=steps)
    for prev, nxt in zip(steps, steps[1:]):
        assert all(b >= a - 1e-12 for a, b in zip(prev, nxt))


# -- limit queries ---------------------------------------------------------------------


def test_trivial_prefix_makes_limit_query_pure_acceptance():
    """With Λ = {ε} every run qualifies on the prefix side, and the
    coin-emission automaton visits its accepting state infinitely often
    almost surely."""
    auto = coin_emission()
    lang = TestLanguage.from_regex("e", BITS)
    assert omega_query(auto, 0, lang) == pytest.approx(1.0, abs=1e-8)
    assert bscc_exact(auto, 0, lang) == 1.0


def test_limit_query_charges_the_prefix_constraint():
    """With Λ = {010} only runs starting 010 qualify; acceptance afterwards
    is almost sure, so the value is the prefix mass 1/8."""
    auto = coin_emission()
    lang = word_lang(BITS, "010")
    assert omega_query(auto, 0, lang) == pytest.approx(0.125, abs=1e-8)
    assert bscc_exact(auto, 0, lang) == pytest.approx(0.125, abs=1e-12)


def test_fair_coin_race_splits_evenly():
    """One flip decides between an accepting and a rejecting absorbing state:
    all three routes agree on 1/2."""
    auto = fair_coin_race()
    lang = TestLanguage.from_regex("(a+b)*", AB)
    assert omega_query(auto, 0, lang) == pytest.approx(0.5, abs=1e-8)
    assert bscc_exact(auto, 0, lang) == pytest.approx(0.5, abs=1e-12)
    est = monte_carlo(auto, 0, lang, samples=4000, seed=9)
    assert abs(est.mean - 0.5) <= 3 * est.stderr + 1e-12


def test_rejecting_absorbing_state_scores_zero():
    """A run trapped in a non-accepting loop never accepts in the limit."""
    auto = prob_automaton(AB, 1, {(0, "a", 0): 1.0}, set())
    lang = TestLanguage.from_regex("(a+b)*", AB)
    assert omega_query(auto, 0, lang) == pytest.approx(0.0, abs=1e-8)
    assert bscc_exact(auto, 0, lang) == 0.0


def test_limit_query_matches_bottom_class_oracle_on_random_automata():
    """Sweep: the descending iteration, the exact bottom-class solver, and
    the independent Fraction oracle agree within 10 tolerances."""
    rng = random.Random(271828)
    checked = 0
    for _ in range(40):
        n = rng.randrange(1, 6)
        auto = sample_prob_automaton(rng, n, AB)
        x = rng.randrange(n)
        lang = sample_test_language(rng, AB, max_states=3)
        rows, good = product_rows(auto, lang.sink)
        oracle = accepting_limit_prob(rows, good)
        start = x * lang.sink.n + lang.sink.initial
        want = float(oracle[start])
        assert bscc_exact(auto, x, lang) == pytest.approx(want, abs=1e-9)
        assert omega_query(auto, x, lang) == pytest.approx(want, abs=1e-8)
        checked += 1
    assert checked == 40


def test_limit_iteration_descends():
    """The outer chain starts at the constant-1 table and never increases."""
    auto = coin_emission()
    steps: list = []
    omega_table(auto, word_lang(BITS, "01"), trace=steps)
    assert all(v <= 1.0 + 1e-12 for v in steps[0])
    for prev, nxt in zip(steps, steps[1:]):
        assert all(b <= a + 1e-9 for a, b in zip(prev, nxt))


def test_omega_table_metadata():
    auto = coin_emission()
    table = omega_table(auto, word_lang(BITS, "01"))
    assert table.direction == "descending"
    assert table.rounds >= 1
    assert all(0.0 <= v <= 1.0 + 1e-12 for row in table.values for v in row)


def test_reach_probability_oracle_agrees_with_query_on_a_gadget():
    """Cross-check the Fraction linear-system oracle itself on a 3-state
    gadget with a known closed form: from s0, reach s2 with probability
    (1/3)/(1/3+1/3) = 1/2 given escape, i.e. overall 1/2."""
    rows = {
        0: {0: Fraction(1, 3), 1: Fraction(1, 3), 2: Fraction(1, 3)},
        1: {1: Fraction(1)},
        2: {2: Fraction(1)},
    }
    h = reach_prob_exact(rows, {2})
    assert h[0] == Fraction(1, 2)
    assert h[1] == 0 and h[2] == 1


# -- tolerances and budgets ------------------------------------------------------------


def test_bad_tolerances_are_rejected():
    auto = coin_emission()
    lang = word_lang(BITS, "1")
    for bad in [0.0, -1e-9, math.nan, math.inf]:
        with pytest.raises(BadTolerance):
            finite_query(auto, 0, lang, tol=bad)
        with pytest.raises(BadTolerance):
            omega_query(auto, 0, lang, tol=bad)


def test_finite_budget_exception_carries_best_bound():
    """Starving the iteration raises the budget error with the partial table,
    its residual, and the rounds spent attached."""
    auto = coin_emission()
    with pytest.raises(IterationBudgetExceeded) as info:
        finite_table(auto, word_lang(BITS, "010101"), max_iter=3)
    exc = info.value
    assert exc.rounds == 3
    assert exc.residual > 0
    assert all(0.0 <= v <= 1.0 for row in exc.best.values for v in row)


def test_omega_budget_exception_carries_best_bound():
    auto = coin_emission()
    with pytest.raises(IterationBudgetExceeded) as info:
        omega_table(auto, word_lang(BITS, "01"), max_iter_outer=1)
    exc = info.value
    assert exc.rounds == 1
    assert exc.best.direction == "descending"


# -- Monte Carlo -----------------------------------------------------------------------


def test_monte_carlo_is_exact_on_a_deterministic_accepting_loop():
    """A single accepting self-loop accepts every run: mean 1, stderr 0."""
    auto = prob_automaton(AB, 1, {(0, "a", 0): 1.0}, {0})
    lang = TestLanguage.from_regex("(a+b)*", AB)
    est = monte_carlo(auto, 0, lang, samples=500, seed=1)
    assert est == MonteCarloEstimate(1.0, 0.0, 500, 500)


def test_monte_carlo_finite_event_matches_square_of_a_half():
    """Finite mode on Λ = {11}: the trace must start 11, each bit costs 1/2."""
    auto = coin_emission()
    lang = word_lang(BITS, "11")
    exact = finite_query(auto, 0, lang)
    assert exact == pytest.approx(0.25, abs=1e-9)
    est = monte_carlo(auto, 0, lang, samples=6000, seed=5, finite=True)
    assert abs(est.mean - exact) <= 3 * est.stderr + 1e-12


def test_monte_carlo_limit_mode_matches_exact_on_random_automata():
    """Sweep: the sampling estimate stays within three standard errors of the
    exact bottom-class value (plus slack for the zero-variance corners)."""
    rng = random.Random(99)
    for _ in range(10):
        auto = sample_prob_automaton(rng, rng.randrange(1, 5), AB)
        lang = sample_test_language(rng, AB, max_states=3)
        exact = bscc_exact(auto, 0, lang)
        est = monte_carlo(auto, 0, lang, samples=3000, seed=rng.randrange(10**6))
        assert abs(est.mean - exact) <= 3 * est.stderr + 0.03


def test_monte_carlo_is_reproducible_per_seed_and_workers():
    """Identical (seed, workers) replays the same estimate; the worker count
    changes the stream split and may change it."""
    auto = fair_coin_race()
    lang = TestLanguage.from_regex("(a+b)*", AB)
    a = monte_carlo(auto, 0, lang, samples=2000, seed=42, workers=3)
    b = monte_carlo(auto, 0, lang, samples=2000, seed=42, workers=3)
    assert a == b
    c = monte_carlo(auto, 0, lang, samples=2000, seed=43, workers=3)
    assert a != c


def test_monte_carlo_rejects_empty_sampling_plans():
    auto = fair_coin_race()
    lang = TestLanguage.from_regex("(a+b)*", AB)
    with pytest.raises(ValueError):
        monte_carlo(auto, 0, lang, samples=0, seed=1)
    with pytest.raises(ValueError):
        monte_carlo(auto, 0, lang, samples=5, seed=1, workers=0)


# -- the weighted-arrow instance -------------------------------------------------------


def test_one_step_layers_compose_with_stop_only_arrows_in_closed_form():
    """Composition with a stop-only arrow on either side stays a one-step
    layer (matrix product on the stop part)."""
    inst = ProbInstance(AB)
    base = inst.base_map((1, 0), 2)
    layer = LinearArrow(
        2, 2,
        ((0.1, 0.0), (0.0, 0.0)),
        (((0.4, 0.0), (0.0, 1.0)), ((0.0, 0.5), (0.0, 0.0))),
    )
    assert isinstance(inst.compose(base, layer), LinearArrow)
    assert isinstance(inst.compose(layer, base), LinearArrow)
    assert inst.equal(
        inst.compose(inst.identity(2), layer), layer
    )


def test_join_is_pointwise_maximum():
    """Joining two deterministic emitters scores the better option on every
    probe; the join is idempotent and commutative numerically."""
    inst = ProbInstance(AB)
    f = LinearArrow(1, 1, ((0.3,),), ((((0.0,),)), (((0.0,),))))
    g = LinearArrow(1, 1, ((0.7,),), ((((0.0,),)), (((0.0,),))))
    j = inst.join(f, g)
    probe = ProbTest(((0, 0),), ((1.0,),), 0)
    assert inst.value(j, 0, probe) == pytest.approx(0.7)
    assert inst.equal(inst.join(f, f), f)
    assert inst.equal(inst.join(f, g), inst.join(g, f))


def test_bottom_is_a_join_unit_and_absorbs_composition():
    inst = ProbInstance(AB)
    f = LinearArrow(1, 2, ((0.2, 0.3),), (((0.25, 0.0),), ((0.25, 0.0),)))
    bot = inst.bottom(1, 2)
    assert inst.equal(inst.join(f, bot), f)
    assert inst.equal(inst.compose(bot, inst.identity(1)), bot)


def test_star_solves_the_optimal_stopping_fixpoint():
    """For the always-emit self-loop, stopping is only worthwhile where the
    reward sits: the saturation value at the start equals the reward reached
    after one emission."""
    inst = ProbInstance(AB)
    alpha = LinearArrow(1, 1, ((0.0,),), (((1.0,),), ((0.0,),)))
    star = inst.star(alpha)
    # rewards: 0.8 after one 'a', nothing elsewhere (two-state chain DFA)
    delta = ((1, 1), (1, 1))
    probe = ProbTest(delta, ((0.0,), (0.8,)), 0)
    assert inst.value(star, 0, probe) == pytest.approx(0.8, abs=1e-8)
    # stopping immediately is better when the immediate reward dominates
    probe2 = ProbTest(delta, ((0.9,), (0.1,)), 0)
    assert inst.value(star, 0, probe2) == pytest.approx(0.9, abs=1e-8)


def test_star_iterative_stabilizes_on_the_half_reward_example():
    """The generic chain-of-powers engine stabilizes under probe equality on
    an always-emitting loop, and scores 1/2 against a reward of 1/2 placed
    one step in."""
    inst = ProbInstance(AB)
    alpha = LinearArrow(1, 1, ((0.0,),), (((1.0,),), ((0.0,),)))
    star = star_iterative(alpha, inst)
    delta = ((1, 1), (1, 1))
    probe = ProbTest(delta, ((0.5,), (0.5,)), 0)
    assert inst.value(star, 0, probe) == pytest.approx(0.5, abs=1e-8)


def test_star_unfolds_once_from_the_root():
    """α* = id ∨ α*·α on a lossy loop, checked by the probe comparator."""
    inst = ProbInstance(AB)
    alpha = LinearArrow(1, 1, ((0.0,),), (((0.6,),), ((0.3,),)))
    star = inst.star(alpha)
    unrolled = inst.join(inst.identity(1), inst.compose(star, alpha))
    assert inst.equal(star, unrolled)


def test_one_step_recognizer_is_structural():
    """One-step means: a single layer, or joins/cotuples/stop-only
    compositions thereof — and never a saturation."""
    inst = ProbInstance(AB)
    lin = LinearArrow(1, 1, ((0.5,),), (((0.5,),), ((0.0,),)))
    assert inst.is_one_step(lin)
    assert inst.is_one_step(inst.join(lin, lin))
    assert inst.is_one_step(inst.compose(inst.base_map((0,), 1), lin))
    assert not inst.is_one_step(inst.star(lin))
    assert inst.is_one_step(ComposeArrow(1, 1, inst.join(lin, lin), inst.base_map((0,), 1)))


def test_cotuple_stacks_one_step_layers():
    inst = ProbInstance(AB)
    f = LinearArrow(1, 2, ((1.0, 0.0),), (((0.0, 0.0),), ((0.0, 0.0),)))
    g = LinearArrow(2, 2, ((0.0, 0.0), (0.0, 1.0)), (((0.5, 0.5), (0.0, 0.0),), ((0.0, 0.0), (0.0, 0.0),)))
    stacked = inst.cotuple([f, g])
    assert isinstance(stacked, LinearArrow)
    assert stacked.dom == 3 and stacked.cod == 2
    probe = ProbTest(((0, 0),), ((0.25, 1.0),), 0)
    assert inst.value(stacked, 0, probe) == pytest.approx(0.25)
    assert inst.value(stacked, 2, probe) == pytest.approx(1.0)


def test_equal_distinguishes_unequal_weights_and_tolerates_noise():
    inst = ProbInstance(AB)
    f = LinearArrow(1, 1, ((0.5,),), (((0.5,),), ((0.0,),)))
    g = LinearArrow(1, 1, ((0.5 + 1e-8,),), (((0.5,),), ((0.0,),)))
    h = LinearArrow(1, 1, ((0.25,),), (((0.75,),), ((0.0,),)))
    assert inst.equal(f, g)
    assert not inst.equal(f, h)
    assert not inst.equal(f, inst.bottom(1, 1))


def test_prob_instance_passes_the_law_suite():
    """All applicable kernel laws hold for the weighted instance under the
    probe comparator (no limit laws: the instance exposes no top element)."""
    inst = ProbInstance(AB)
    sampler = make_prob_sampler(AB)
    results = check_theory_laws(inst, sampler, budget=4, rng=random.Random(1207))
    report = format_report(results)
    assert all(r.failures == 0 for r in results), report
    assert all(r.checked > 0 for r in results), report
    assert not any(r.law.startswith("omega") for r in results)


# -- behaviour arrows ------------------------------------------------------------------


def test_loaded_automaton_arrow_never_stops():
    """The one-step arrow of an automaton carries exactly the transition
    masses and no stopping mass."""
    auto = coin_emission()
    arrow = nu_arrow(auto)
    assert all(v == 0.0 for row in arrow.eps for v in row)
    assert arrow.letters[1][0][1] == pytest.approx(0.5)


def test_acceptance_filter_keeps_only_marked_entries():
    inst = ProbInstance(BITS)
    filt = f_F_prob({1}, 2, BITS)
    probe = ProbTest(((0, 0),), ((0.4, 0.9),), 0)
    assert inst.value(filt, 0, probe) == 0.0
    assert inst.value(filt, 1, probe) == pytest.approx(0.9)


def test_behaviour_arrow_agrees_with_finite_query():
    """Evaluating collapse·filter·saturation against the language indicator
    is the same number the product value iteration computes."""
    auto = coin_emission()
    for w in ["1", "01", "11", "010"]:
        lang = word_lang(BITS, w)
        assert behaviour_value(auto, 0, lang) == pytest.approx(
            finite_query(auto, 0, lang), abs=1e-7
        ), w


def test_behaviour_arrow_agrees_with_finite_query_on_random_automata():
    rng = random.Random(615)
    inst = ProbInstance(AB)
    for _ in range(8):
        auto = sample_prob_automaton(rng, rng.randrange(1, 4), AB)
        lang = sample_test_language(rng, AB, max_states=3)
        x = rng.randrange(auto.n)
        assert behaviour_value(auto, x, lang, instance=inst) == pytest.approx(
            finite_query(auto, x, lang), abs=1e-6
        )


def test_language_indicator_test_tracks_the_dfa():
    lang = word_lang(BITS, "01")
    t = chi_test(lang.dfa)
    assert t.root == lang.dfa.initial
    accepting_rows = [q for q, r in enumerate(t.rewards) if r == (1.0,)]
    assert set(accepting_rows) == set(lang.dfa.accepting)


# -- file formats ----------------------------------------------------------------------


def test_pa_roundtrip():
    auto = fair_coin_race()
    assert parse_pa(format_pa(auto)) == auto


def test_pa_accepts_fractions_and_comments():
    text = """pa  # header
alphabet h t
states 1
trans 0 h 0 1/2
trans 0 t 0 0.5  # the other half
"""
    auto = parse_pa(text)
    assert auto.trans[0][0][0] == pytest.approx(0.5)


def test_pa_parse_errors_name_the_line():
    cases = [
        ("nope\n", "line 1"),
        ("pa\nalphabet a b\nstates 1\ntrans 0 c 0 1.0\n", "line 4: unknown symbol"),
        ("pa\nalphabet a b\ntrans 0 a 0 1.0\n", "line 3: trans before"),
        ("pa\nalphabet a b\nstates 1\ntrans 0 a 0 huh\n", "line 4: bad probability"),
        ("pa\nalphabet a b\nstates 1\naccept 7\n", "line 4: bad accepting"),
        ("pa\nalphabet a b\nstates 1\nwobble\n", "line 4: unknown directive"),
        ("", "empty"),
    ]
    for text, needle in cases:
        with pytest.raises(ValueError, match=needle):
            parse_pa(text)


def test_pa_rejects_substochastic_files():
    with pytest.raises(ValueError, match="invalid automaton"):
        parse_pa("pa\nalphabet a b\nstates 1\ntrans 0 a 0 0.9\n")


def test_dfa_roundtrip():
    lang = word_lang(BITS, "0110")
    assert parse_dfa(format_dfa(lang.dfa)) == lang.dfa


def test_dfa_parse_requires_a_total_table():
    text = "dfa\nalphabet a b\nstates 2\ntrans 0 a 1\ntrans 0 b 0\ntrans 1 a 0\ninitial 0\n"
    with pytest.raises(ValueError, match="not total"):
        parse_dfa(text)


def test_dfa_parse_rejects_duplicate_edges():
    text = "dfa\nalphabet a\nstates 1\ntrans 0 a 0\ntrans 0 a 0\ninitial 0\n"
    with pytest.raises(ValueError, match="line 5: duplicate"):
        parse_dfa(text)
