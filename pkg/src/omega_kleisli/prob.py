"""Probabilistic-automaton theory instance: weighted arrows evaluated against
test functions, reachability-style finite queries, and limit-acceptance
queries with two independent oracles.

Arrows here denote maps x ↦ (test ↦ value): a test assigns a reward in [0,1]
to every pair (finite word, exit), and an arrow turns it into a value in
[0,1].  The full space of such functionals is not finitely representable, so
this module never normalizes arrows; it keeps them as small evaluation trees
(linear one-step layers combined by join/compose/star) and evaluates them
against tests whose word-dependence is tracked by a complete DFA — reward
tables indexed by (DFA state, exit).  This family is closed under every
operation the evaluation needs and covers the membership-indicator tests that
the query functions use.

Equality of arrows is a bounded comparator — agreement within a tolerance on
a fixed battery of probe tests (all point rewards on a short prefix tree plus
a few dense random tables).  That is a representation choice of this toolkit,
not a canonical one: probe agreement can never reject equal arrows, but it
only distinguishes arrows that differ within the probe horizon.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .kernel import Sampler, TheoryInstance
from .words import Alphabet, Dfa, WordLang, determinize, parse_regex

STOCHASTICITY_TOL = 1e-9


class BadTolerance(ValueError):
    """A query was given a non-positive or non-finite tolerance."""


class IterationBudgetExceeded(Exception):
    """A value iteration ran out of rounds before meeting its tolerance.

    Carries the best table computed so far (`best`), its last residual and
    the number of rounds spent, so callers can still inspect the bound."""

    def __init__(self, message, best=None, residual=None, rounds=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.rounds = rounds


# -- models -----------------------------------------------------------------------


@dataclass(frozen=True)
class ProbAutomaton:
    """Finite-state automaton with a stochastic transition function: for every
    state x the masses P(x, a, y) sum to 1 (within STOCHASTICITY_TOL), stored
    densely as trans[x][symbol index][y]."""

    alphabet: Alphabet
    n: int
    trans: tuple[tuple[tuple[float, ...], ...], ...]
    accepting: frozenset[int]

    def __post_init__(self):
        k = len(self.alphabet)
        if len(self.trans) != self.n:
            raise ValueError("trans must have one row block per state")
        for x, block in enumerate(self.trans):
            if len(block) != k or any(len(row) != self.n for row in block):
                raise ValueError(f"state {x}: trans block must be {k}x{self.n}")
            total = 0.0
            for row in block:
                for p in row:
                    if not (0.0 <= p <= 1.0 + STOCHASTICITY_TOL):
                        raise ValueError(f"state {x}: probability {p} out of [0,1]")
                    total += p
            if abs(total - 1.0) > STOCHASTICITY_TOL:
                raise ValueError(f"state {x}: outgoing mass {total} is not 1")
        if any(not (0 <= q < self.n) for q in self.accepting):
            raise ValueError("accepting state out of range")

    def prob(self, x: int, sym: str, y: int) -> float:
        return self.trans[x][self.alphabet.index(sym)][y]


def prob_automaton(alphabet, n, entries, accepting) -> ProbAutomaton:
    """Build a ProbAutomaton from a sparse mapping (x, symbol, y) ↦ mass."""
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
    k = len(alphabet)
    dense = [[[0.0] * n for _ in range(k)] for _ in range(n)]
    for (x, sym, y), p in entries.items():
        dense[x][alphabet.index(sym)][y] += float(p)
    trans = tuple(tuple(tuple(row) for row in block) for block in dense)
    return ProbAutomaton(alphabet, n, trans, frozenset(accepting))


@dataclass(frozen=True)
class TestLanguage:
    """A regular set of finite words presented as a complete DFA, used as the
    membership-indicator test of the query functions.  `sink` is the derived
    once-accepting-always-accepting variant that tracks whether some prefix
    of the input has already landed in the language (the tail-event view)."""

    __test__ = False  # not a test case, despite the name

    dfa: Dfa

    @cached_property
    def sink(self) -> Dfa:
        return self.dfa.sink_accepting()

    @classmethod
    def from_lang(cls, lang: WordLang) -> "TestLanguage":
        return cls(determinize(lang))

    @classmethod
    def from_regex(cls, text: str, alphabet: Alphabet) -> "TestLanguage":
        return cls.from_lang(parse_regex(text, alphabet))

    @classmethod
    def from_words(cls, alphabet: Alphabet, words) -> "TestLanguage":
        from .words import finite_lang

        return cls.from_lang(finite_lang(alphabet, [tuple(w) for w in words]))


@dataclass(frozen=True)
class ValueTable:
    """Fixpoint solution over pairs (model state, DFA state), with iteration
    metadata: number of rounds and the final sup-norm residual.  `direction`
    records the approach side ("ascending" for least fixpoints from 0,
    "descending" for greatest fixpoints from 1)."""

    values: tuple[tuple[float, ...], ...]
    rounds: int
    residual: float
    direction: str

    def value(self, x: int, q: int) -> float:
        return self.values[x][q]


# -- product-chain plumbing ---------------------------------------------------------


@lru_cache(maxsize=256)
def _product_matrix(auto: ProbAutomaton, dfa: Dfa) -> np.ndarray:
    """Transition matrix of the joint chain over (state, DFA state), flattened
    row-major: entry ((x,q),(y,q')) sums P(x,a,y) over symbols a that drive
    the DFA from q to q'."""
    n, m = auto.n, dfa.n
    mat = np.zeros((n * m, n * m))
    for x in range(n):
        for ai in range(len(auto.alphabet)):
            row = auto.trans[x][ai]
            for q in range(m):
                q2 = dfa.delta[q][ai]
                for y in range(n):
                    if row[y]:
                        mat[x * m + q, y * m + q2] += row[y]
    return mat


def _goal_mask(auto: ProbAutomaton, dfa: Dfa) -> np.ndarray:
    """Indicator over (state, DFA state) of being accepting in both."""
    n, m = auto.n, dfa.n
    g = np.zeros(n * m)
    for x in auto.accepting:
        for q in dfa.accepting:
            g[x * m + q] = 1.0
    return g


def _as_table(vec: np.ndarray, n: int, m: int, rounds: int, residual: float, direction: str) -> ValueTable:
    grid = vec.reshape(n, m)
    return ValueTable(
        tuple(tuple(float(v) for v in row) for row in grid), rounds, residual, direction
    )


def _check_tol(tol: float):
    if not (isinstance(tol, (int, float)) and math.isfinite(tol) and tol > 0):
        raise BadTolerance(f"tolerance must be a positive finite number, got {tol!r}")


def _lfp_reach(mat: np.ndarray, goal: np.ndarray, tol: float, max_iter: int,
               trace: Optional[list] = None):
    """Least fixpoint of V = max(goal, mat·V) by value iteration from 0.
    Ascending; returns (V, rounds, residual) or raises IterationBudgetExceeded
    with the best ascent so far attached."""
    v = np.zeros(len(goal))
    residual = math.inf
    for r in range(1, max_iter + 1):
        nxt = np.maximum(goal, mat @ v)
        residual = float(np.max(np.abs(nxt - v))) if len(v) else 0.0
        v = nxt
        if trace is not None:
            trace.append(v.copy())
        if residual < tol:
            return v, r, residual
    raise IterationBudgetExceeded(
        f"reachability iteration did not meet tolerance {tol} in {max_iter} rounds",
        best=v, residual=residual, rounds=max_iter,
    )


# -- queries ---------------------------------------------------------------------


def finite_table(auto: ProbAutomaton, lang: TestLanguage, tol: float = 1e-9,
                 max_iter: int = 10**6, trace: Optional[list] = None) -> ValueTable:
    """Solve V(y,q) = max{[y accepting ∧ q accepting], Σ P(y,a,z)·V(z,δ(q,a))}
    from below.  V(y,q) is the probability of some execution prefix from y
    landing in an accepting state exactly when the word read so far (starting
    from DFA state q) lies in the test language."""
    _check_tol(tol)
    mat = _product_matrix(auto, lang.dfa)
    goal = _goal_mask(auto, lang.dfa)
    try:
        v, rounds, residual = _lfp_reach(mat, goal, tol, max_iter, trace)
    except IterationBudgetExceeded as exc:
        exc.best = _as_table(exc.best, auto.n, lang.dfa.n, exc.rounds, exc.residual, "ascending")
        raise
    return _as_table(v, auto.n, lang.dfa.n, rounds, residual, "ascending")


def finite_query(auto: ProbAutomaton, x: int, lang: TestLanguage, tol: float = 1e-9,
                 max_iter: int = 10**6) -> float:
    """Probability that a run from x reaches an accepting state at a moment
    when its trace lies in the test language."""
    return finite_table(auto, lang, tol, max_iter).value(x, lang.dfa.initial)


def omega_table(auto: ProbAutomaton, lang: TestLanguage, tol: float = 1e-9,
                max_iter_outer: int = 10**4, inner_max_iter: int = 10**6,
                trace: Optional[list] = None) -> ValueTable:
    """Descending iteration for the limit acceptance value: G₀ ≡ 1 and
    G_{n+1}(x,q) = Σ P(x,a,y)·W(y,δ(q,a)) where W is the least solution of

        W(y,q) = max{[y accepting ∧ q flag-accepting]·G_n(y,q),
                     Σ P(y,a,z)·W(z,δ(q,a))}

    over the product with the sink-accepting DFA.  The joint accepting and
    flagged pairs are what a run must revisit forever: the flag is absorbing,
    so "trace eventually in the language and accepting states infinitely
    often" is the same event as "accepting-and-flagged pairs infinitely
    often".  The limit value at (x, initial) is the probability of that
    event.

    The inner fixpoint is solved three digits tighter than the outer
    criterion: its systematic error re-enters the outer chain every round,
    and at equal tolerances it puts a floor under the outer residual just
    above `tol`, so the outer loop would never meet its own test."""
    _check_tol(tol)
    dfa = lang.sink
    mat = _product_matrix(auto, dfa)
    mask = _goal_mask(auto, dfa)
    inner_tol = tol * 1e-3
    g = np.ones(auto.n * dfa.n)
    residual = math.inf
    for r in range(1, max_iter_outer + 1):
        w, _, _ = _lfp_reach(mat, mask * g, inner_tol, inner_max_iter)
        nxt = mat @ w
        residual = float(np.max(np.abs(nxt - g))) if len(g) else 0.0
        g = nxt
        if trace is not None:
            trace.append(g.copy())
        if residual < tol:
            return _as_table(g, auto.n, dfa.n, r, residual, "descending")
    raise IterationBudgetExceeded(
        f"limit iteration did not meet tolerance {tol} in {max_iter_outer} rounds",
        best=_as_table(g, auto.n, dfa.n, max_iter_outer, residual, "descending"),
        residual=residual, rounds=max_iter_outer,
    )


def omega_query(auto: ProbAutomaton, x: int, lang: TestLanguage, tol: float = 1e-9,
                max_iter_outer: int = 10**4) -> float:
    """Probability that a run from x has some prefix with trace in the test
    language and visits accepting states infinitely often."""
    return omega_table(auto, lang, tol, max_iter_outer).value(x, lang.sink.initial)


# -- exact and statistical oracles ---------------------------------------------------


def _absorption_classes(auto: ProbAutomaton, dfa: Dfa):
    """Bottom strongly connected classes of the product chain: returns
    (labels, is_bottom, class_accepts) where class_accepts marks classes
    containing a pair that is accepting in the automaton with the DFA flag
    set.  The flag is absorbing, hence constant on a class."""
    mat = _product_matrix(auto, dfa)
    n_comp, labels = connected_components(csr_matrix(mat > 0), connection="strong")
    is_bottom = [True] * n_comp
    src, dst = np.nonzero(mat)
    for s, t in zip(src, dst):
        if labels[s] != labels[t]:
            is_bottom[labels[s]] = False
    mask = _goal_mask(auto, dfa)
    class_accepts = [False] * n_comp
    for s in np.nonzero(mask)[0]:
        class_accepts[labels[s]] = True
    return labels, is_bottom, class_accepts


def bscc_exact(auto: ProbAutomaton, x: int, lang: TestLanguage) -> float:
    """Exact limit acceptance probability: a run is eventually trapped in a
    bottom strongly connected class of the product chain and then visits all
    of its pairs infinitely often, so the event reduces to reaching a class
    that contains an accepting-and-flagged pair.  The reach probabilities
    solve a linear system (LAPACK LU with partial pivoting)."""
    dfa = lang.sink
    mat = _product_matrix(auto, dfa)
    labels, is_bottom, class_accepts = _absorption_classes(auto, dfa)
    size = mat.shape[0]
    h = np.zeros(size)
    transient = []
    for s in range(size):
        if is_bottom[labels[s]]:
            h[s] = 1.0 if class_accepts[labels[s]] else 0.0
        else:
            transient.append(s)
    if transient:
        t = np.array(transient)
        a = np.eye(len(t)) - mat[np.ix_(t, t)]
        b = mat[t] @ h
        try:
            h[t] = np.linalg.solve(a, b)
        except np.linalg.LinAlgError as exc:
            raise ValueError(
                "singular absorption system; the transition function is not "
                "properly stochastic"
            ) from exc
    return float(h[x * dfa.n + dfa.initial])


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample mean with its binomial standard error."""

    mean: float
    stderr: float
    samples: int
    hits: int


def _cannot_reach(mat: np.ndarray, goal: np.ndarray) -> np.ndarray:
    """Mask of product states from which no goal state is reachable
    (reverse breadth-first search from the goal set)."""
    size = mat.shape[0]
    preds: list[list[int]] = [[] for _ in range(size)]
    src, dst = np.nonzero(mat)
    for s, t in zip(src, dst):
        preds[t].append(s)
    reach = goal > 0
    frontier = list(np.nonzero(reach)[0])
    while frontier:
        t = frontier.pop()
        for s in preds[t]:
            if not reach[s]:
                reach[s] = True
                frontier.append(s)
    return ~reach


def monte_carlo(auto: ProbAutomaton, x: int, lang: TestLanguage, samples: int,
                seed: int, finite: bool = False, workers: int = 1) -> MonteCarloEstimate:
    """Statistical estimate of omega_query (default) or finite_query
    (finite=True) by simulating the product chain.

    Limit mode stops a trajectory on entering a bottom strongly connected
    class, whose acceptance is then determined exactly.  Finite mode stops on
    the first accepting-and-accepted moment (success) or on entering the set
    from which no such moment is reachable (failure); one of the two happens
    with probability 1.

    Reproducibility: the seed is split into one child stream per worker
    (numpy SeedSequence.spawn over PCG64) and each worker simulates its fixed
    share, so results depend only on (seed, workers)."""
    if samples < 1:
        raise ValueError("need at least one sample")
    if workers < 1:
        raise ValueError("need at least one worker")
    dfa = lang.dfa if finite else lang.sink
    mat = _product_matrix(auto, dfa)
    cum = np.cumsum(mat, axis=1)
    start = x * dfa.n + dfa.initial
    if finite:
        goal = _goal_mask(auto, dfa)
        dead = _cannot_reach(mat, goal)
        success_at = goal > 0
        stop_at = success_at | dead
    else:
        labels, is_bottom, class_accepts = _absorption_classes(auto, dfa)
        stop_at = np.array([is_bottom[labels[s]] for s in range(mat.shape[0])])
        success_at = np.array(
            [is_bottom[labels[s]] and class_accepts[labels[s]] for s in range(mat.shape[0])]
        )
    shares = [samples // workers + (1 if i < samples % workers else 0) for i in range(workers)]
    seqs = np.random.SeedSequence(seed).spawn(workers)
    hits = 0
    for share, seq in zip(shares, seqs):
        if share == 0:
            continue
        rng = np.random.Generator(np.random.PCG64(seq))
        cur = np.full(share, start)
        done_hit = 0
        active = ~stop_at[cur]
        done_hit += int(np.count_nonzero(success_at[cur[~active]]))
        cur = cur[active]
        rounds = 0
        while len(cur):
            rounds += 1
            if rounds > 10**6:
                raise IterationBudgetExceeded(
                    "simulation failed to absorb within 10^6 steps", rounds=rounds
                )
            u = rng.random(len(cur))
            cur = np.minimum((cum[cur] < u[:, None]).sum(axis=1), mat.shape[0] - 1)
            stopped = stop_at[cur]
            done_hit += int(np.count_nonzero(success_at[cur[stopped]]))
            cur = cur[~stopped]
        hits += done_hit
    mean = hits / samples
    stderr = math.sqrt(mean * (1.0 - mean) / samples)
    return MonteCarloEstimate(mean, stderr, samples, hits)


# -- arrows -----------------------------------------------------------------------


@dataclass(frozen=True)
class ProbTest:
    """Test function with DFA-tracked word dependence: the reward of (word w,
    exit j) is rewards[q][j] where q is the DFA state reached from `root` by
    reading w.  delta rows are indexed by symbol position in the alphabet."""

    delta: tuple[tuple[int, ...], ...]
    rewards: tuple[tuple[float, ...], ...]
    root: int

    def at(self, q: int) -> "ProbTest":
        return ProbTest(self.delta, self.rewards, q)


def chi_test(dfa: Dfa) -> ProbTest:
    """Membership indicator of a DFA language as a single-exit test."""
    rewards = tuple((1.0 if q in dfa.accepting else 0.0,) for q in range(dfa.n))
    return ProbTest(dfa.delta, rewards, dfa.initial)


@dataclass(frozen=True)
class LinearArrow:
    """One-step weighted arrow: entry i pays eps[i][j] for stopping at exit j
    now and letters[a][i][j] for emitting symbol a into exit j.  Identities,
    index remaps, bottoms and loaded automata are all of this shape."""

    dom: int
    cod: int
    eps: tuple[tuple[float, ...], ...]
    letters: tuple[tuple[tuple[float, ...], ...], ...]


@dataclass(frozen=True)
class JoinArrow:
    dom: int
    cod: int
    items: tuple


@dataclass(frozen=True)
class ComposeArrow:
    dom: int
    cod: int
    after: object
    first: object


@dataclass(frozen=True)
class CotupleArrow:
    dom: int
    cod: int
    items: tuple
    offsets: tuple


@dataclass(frozen=True)
class StarArrow:
    dom: int
    cod: int
    body: object
    tol: float
    max_rounds: int


def _zeros(m, p):
    return tuple((0.0,) * p for _ in range(m))


def _matmul(a, b):
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in zip(*b)) for row in a
    )


def _eval(arrow, i: int, test: ProbTest, memo: dict) -> float:
    """Value of entry i of an arrow against a test, memoized on
    (arrow, entry, test)."""
    key = ("v", arrow, i, test)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(arrow, LinearArrow):
        q = test.root
        out = 0.0
        row = arrow.eps[i]
        rew = test.rewards[q]
        for j in range(arrow.cod):
            if row[j]:
                out += row[j] * rew[j]
        for ai, block in enumerate(arrow.letters):
            row = block[i]
            rew = test.rewards[test.delta[q][ai]]
            for j in range(arrow.cod):
                if row[j]:
                    out += row[j] * rew[j]
    elif isinstance(arrow, JoinArrow):
        out = max(_eval(item, i, test, memo) for item in arrow.items)
    elif isinstance(arrow, CotupleArrow):
        k = 0
        while k + 1 < len(arrow.offsets) and i >= arrow.offsets[k + 1]:
            k += 1
        out = _eval(arrow.items[k], i - arrow.offsets[k], test, memo)
    elif isinstance(arrow, ComposeArrow):
        tkey = ("t", arrow, test.delta, test.rewards)
        derived = memo.get(tkey)
        if derived is None:
            mid = arrow.after.dom
            derived = tuple(
                tuple(
                    _eval(arrow.after, y, ProbTest(test.delta, test.rewards, q), memo)
                    for y in range(mid)
                )
                for q in range(len(test.delta))
            )
            memo[tkey] = derived
        out = _eval(arrow.first, i, ProbTest(test.delta, derived, test.root), memo)
    elif isinstance(arrow, StarArrow):
        out = _star_table(arrow, test.delta, test.rewards)[i][test.root]
    else:
        raise TypeError(f"not a probabilistic arrow: {arrow!r}")
    memo[key] = out
    return out


def _linear_family(arrow):
    """Flatten an arrow into a list of one-step layers when it is a join of
    such (the common case for saturation bodies); None otherwise."""
    if isinstance(arrow, LinearArrow):
        return [arrow]
    if isinstance(arrow, JoinArrow):
        out = []
        for item in arrow.items:
            sub = _linear_family(item)
            if sub is None:
                return None
            out.extend(sub)
        return out
    return None


@lru_cache(maxsize=4096)
def _star_matrices(body_key, delta):
    """Dense step matrices over (entry, DFA state) for each one-step layer of
    a saturation body, used by the vectorized fixpoint."""
    family, m = body_key
    qn = len(delta)
    mats = []
    for lin in family:
        a = np.zeros((m * qn, m * qn))
        for i in range(m):
            for q in range(qn):
                for j in range(lin.cod):
                    if lin.eps[i][j]:
                        a[i * qn + q, j * qn + q] += lin.eps[i][j]
                for ai, block in enumerate(lin.letters):
                    q2 = delta[q][ai]
                    for j in range(lin.cod):
                        if block[i][j]:
                            a[i * qn + q, j * qn + q2] += block[i][j]
        mats.append(a)
    return mats


@lru_cache(maxsize=4096)
def _star_table(star: StarArrow, delta, rewards):
    """Least fixpoint table of a saturation against one reward family:
    V(i,q) = max{rewards[q][i], body-step of V at (i,q)}, iterated from 0.
    Joins of one-step layers run vectorized; arbitrary bodies fall back to
    the generic evaluator round by round."""
    m = star.dom
    qn = len(delta)
    family = _linear_family(star.body)
    if family is not None:
        mats = _star_matrices((tuple(family), m), delta)
        r = np.array([[rewards[q][i] for q in range(qn)] for i in range(m)]).reshape(-1)
        v = np.zeros(m * qn)
        residual = math.inf
        for _ in range(star.max_rounds):
            stepped = np.max([a @ v for a in mats], axis=0) if mats else np.zeros(m * qn)
            nxt = np.maximum(r, stepped)
            residual = float(np.max(np.abs(nxt - v))) if len(v) else 0.0
            v = nxt
            if residual < star.tol:
                grid = v.reshape(m, qn)
                return tuple(tuple(float(x) for x in row) for row in grid)
        raise IterationBudgetExceeded(
            f"saturation did not meet tolerance {star.tol} in {star.max_rounds} rounds",
            residual=residual, rounds=star.max_rounds,
        )
    v = tuple((0.0,) * m for _ in range(qn))
    residual = math.inf
    for _ in range(star.max_rounds):
        memo: dict = {}
        nxt = tuple(
            tuple(
                max(
                    rewards[q][i],
                    _eval(star.body, i, ProbTest(delta, v, q), memo),
                )
                for i in range(m)
            )
            for q in range(qn)
        )
        residual = max(
            (abs(a - b) for ra, rb in zip(nxt, v) for a, b in zip(ra, rb)), default=0.0
        )
        v = nxt
        if residual < star.tol:
            return tuple(tuple(v[q][i] for q in range(qn)) for i in range(m))
    raise IterationBudgetExceeded(
        f"saturation did not meet tolerance {star.tol} in {star.max_rounds} rounds",
        residual=residual, rounds=star.max_rounds,
    )


def _is_pure_eps(arrow) -> bool:
    """True when the arrow provably emits no symbols (stop rewards only)."""
    if isinstance(arrow, LinearArrow):
        return all(not w for block in arrow.letters for row in block for w in row)
    if isinstance(arrow, (JoinArrow, CotupleArrow)):
        return all(_is_pure_eps(item) for item in arrow.items)
    if isinstance(arrow, ComposeArrow):
        return _is_pure_eps(arrow.after) and _is_pure_eps(arrow.first)
    return False


def _one_step(arrow) -> bool:
    if isinstance(arrow, LinearArrow):
        return True
    if isinstance(arrow, (JoinArrow, CotupleArrow)):
        return all(_one_step(item) for item in arrow.items)
    if isinstance(arrow, ComposeArrow):
        return (_one_step(arrow.after) and _is_pure_eps(arrow.first)) or (
            _is_pure_eps(arrow.after) and _one_step(arrow.first)
        )
    return False


# -- the theory instance ---------------------------------------------------------


class ProbInstance(TheoryInstance):
    """Weighted arrows over an alphabet with pointwise-maximum joins.

    Composition feeds the second arrow's values in as the first arrow's
    rewards, join takes the better of two values, and saturation solves the
    optimal-stopping fixpoint per reward family.  Equality compares values on
    the probe battery described in the module docstring, within `cmp_tol`."""

    name = "prob"
    supports_omega = False

    def __init__(self, alphabet, cmp_tol: float = 1e-6, probe_depth: int = 2,
                 probe_count: int = 3, probe_seed: int = 0,
                 star_tol: float = 1e-9, star_max_rounds: int = 10**5):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
        self.cmp_tol = cmp_tol
        self.probe_depth = probe_depth
        self.probe_count = probe_count
        self.probe_seed = probe_seed
        self.star_tol = star_tol
        self.star_max_rounds = star_max_rounds
        self._probe_cache: dict[int, tuple] = {}

    # -- core ---------------------------------------------------------------

    def dims(self, f):
        return (f.dom, f.cod)

    def compose(self, g, f):
        if f.cod != g.dom:
            raise ValueError("compose needs matching middle dimension")
        if isinstance(f, LinearArrow) and isinstance(g, LinearArrow):
            if _is_pure_eps(g):
                return LinearArrow(
                    f.dom, g.cod, _matmul(f.eps, g.eps),
                    tuple(_matmul(block, g.eps) for block in f.letters),
                )
            if _is_pure_eps(f):
                return LinearArrow(
                    f.dom, g.cod, _matmul(f.eps, g.eps),
                    tuple(_matmul(f.eps, block) for block in g.letters),
                )
        return ComposeArrow(f.dom, g.cod, g, f)

    def join(self, f, g):
        if (f.dom, f.cod) != (g.dom, g.cod):
            raise ValueError("join needs equal dimensions")
        items = (f.items if isinstance(f, JoinArrow) else (f,)) + (
            g.items if isinstance(g, JoinArrow) else (g,)
        )
        return JoinArrow(f.dom, f.cod, items)

    def bottom(self, m, p):
        return LinearArrow(m, p, _zeros(m, p), tuple(_zeros(m, p) for _ in self.alphabet))

    def base_map(self, mapping, p):
        mapping = tuple(mapping)
        if any(not (0 <= j < p) for j in mapping):
            raise ValueError("base map target out of range")
        eps = tuple(
            tuple(1.0 if j == mapping[i] else 0.0 for j in range(p))
            for i in range(len(mapping))
        )
        return LinearArrow(len(mapping), p, eps, tuple(_zeros(len(mapping), p) for _ in self.alphabet))

    def cotuple(self, arrows):
        arrows = list(arrows)
        if not arrows:
            raise ValueError("cotuple needs at least one arrow")
        cod = arrows[0].cod
        if any(a.cod != cod for a in arrows):
            raise ValueError("cotuple needs a common codomain")
        if all(isinstance(a, LinearArrow) for a in arrows):
            eps = tuple(row for a in arrows for row in a.eps)
            letters = tuple(
                tuple(row for a in arrows for row in a.letters[ai])
                for ai in range(len(self.alphabet))
            )
            return LinearArrow(sum(a.dom for a in arrows), cod, eps, letters)
        offsets = []
        off = 0
        for a in arrows:
            offsets.append(off)
            off += a.dom
        return CotupleArrow(off, cod, tuple(arrows), tuple(offsets))

    def star(self, alpha):
        m, p = self.dims(alpha)
        if m != p:
            raise ValueError("saturation needs an endomorphism")
        return StarArrow(m, p, alpha, self.star_tol, self.star_max_rounds)

    def equal(self, f, g) -> bool:
        if (f.dom, f.cod) != (g.dom, g.cod):
            return False
        if f is g:
            return True
        memo: dict = {}
        for probe in self._probes(f.cod):
            for i in range(f.dom):
                if abs(_eval(f, i, probe, memo) - _eval(g, i, probe, memo)) > self.cmp_tol:
                    return False
        return True

    def is_one_step(self, f) -> bool:
        return _one_step(f)

    # -- evaluation ----------------------------------------------------------

    def value(self, arrow, i: int, test: ProbTest) -> float:
        """Entry i of an arrow applied to a test."""
        return _eval(arrow, i, test, {})

    def _probes(self, cod: int):
        cached = self._probe_cache.get(cod)
        if cached is not None:
            return cached
        k = len(self.alphabet)
        nodes: dict[tuple, int] = {(): 0}
        order = [()]
        for w in order:
            if len(w) < self.probe_depth:
                for a in range(k):
                    nodes[w + (a,)] = len(order)
                    order.append(w + (a,))
        delta = tuple(
            tuple(nodes[w + (a,)] if len(w) < self.probe_depth else nodes[w] for a in range(k))
            for w in order
        )
        qn = len(order)
        probes = []
        for q in range(qn):
            for j in range(cod):
                rewards = tuple(
                    tuple(1.0 if (qq == q and jj == j) else 0.0 for jj in range(cod))
                    for qq in range(qn)
                )
                probes.append(ProbTest(delta, rewards, 0))
        probes.append(ProbTest(delta, tuple((1.0,) * cod for _ in range(qn)), 0))
        rng = random.Random(f"{self.probe_seed}:{cod}")
        for _ in range(self.probe_count):
            rewards = tuple(
                tuple(rng.random() for _ in range(cod)) for _ in range(qn)
            )
            probes.append(ProbTest(delta, rewards, 0))
        out = tuple(probes)
        self._probe_cache[cod] = out
        return out


# -- behaviour arrows --------------------------------------------------------------


def nu_arrow(auto: ProbAutomaton) -> LinearArrow:
    """A loaded automaton as a one-step endomorphism: entry x pays P(x,a,y)
    for emitting a into exit y, and never stops."""
    eps = _zeros(auto.n, auto.n)
    letters = tuple(
        tuple(tuple(auto.trans[x][ai][y] for y in range(auto.n)) for x in range(auto.n))
        for ai in range(len(auto.alphabet))
    )
    return LinearArrow(auto.n, auto.n, eps, letters)


def f_F_prob(accepting, n: int, alphabet: Alphabet) -> LinearArrow:
    """Diagonal filter that keeps the value at accepting entries and zeroes
    the rest."""
    eps = tuple(
        tuple(1.0 if (i == j and i in accepting) else 0.0 for j in range(n))
        for i in range(n)
    )
    return LinearArrow(n, n, eps, tuple(_zeros(n, n) for _ in alphabet))


def prob_behaviour(auto: ProbAutomaton, accepting=None, instance: Optional[ProbInstance] = None):
    """The single-exit behaviour arrow: collapse after filtering after
    saturation of the loaded automaton."""
    inst = instance if instance is not None else ProbInstance(auto.alphabet)
    acc = auto.accepting if accepting is None else frozenset(accepting)
    bang = inst.base_map((0,) * auto.n, 1)
    filt = f_F_prob(acc, auto.n, auto.alphabet)
    return inst.compose(bang, inst.compose(filt, inst.star(nu_arrow(auto))))


def behaviour_value(auto: ProbAutomaton, x: int, lang: TestLanguage,
                    instance: Optional[ProbInstance] = None) -> float:
    """finite_query computed the long way around: evaluate the behaviour
    arrow against the membership-indicator test of the language."""
    inst = instance if instance is not None else ProbInstance(auto.alphabet)
    return inst.value(prob_behaviour(auto, instance=inst), x, chi_test(lang.dfa))


# -- samplers ---------------------------------------------------------------------


def _random_linear(rng: random.Random, m: int, p: int, alphabet: Alphabet) -> LinearArrow:
    k = len(alphabet)
    eps = [[0.0] * p for _ in range(m)]
    letters = [[[0.0] * p for _ in range(m)] for _ in range(k)]
    for i in range(m):
        total = rng.choice([0.0, rng.random(), 1.0])
        if total == 0.0:
            continue
        slots = rng.randrange(1, 4)
        weights = [rng.random() for _ in range(slots)]
        scale = total / sum(weights)
        for w in weights:
            j = rng.randrange(p)
            if rng.random() < 0.4:
                eps[i][j] += w * scale
            else:
                letters[rng.randrange(k)][i][j] += w * scale
    return LinearArrow(
        m, p,
        tuple(tuple(row) for row in eps),
        tuple(tuple(tuple(row) for row in block) for block in letters),
    )


def make_prob_sampler(alphabet, max_dim: int = 3) -> Sampler:
    """Random weighted arrows: one-step layers, their joins, short
    compositions, and occasional saturations."""
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
    inst = ProbInstance(alphabet)

    def draw(rng: random.Random, m: int, p: int):
        roll = rng.random()
        if roll < 0.2:
            return inst.join(
                _random_linear(rng, m, p, alphabet), _random_linear(rng, m, p, alphabet)
            )
        if roll < 0.3:
            t = rng.randrange(1, max_dim + 1)
            return inst.compose(
                _random_linear(rng, t, p, alphabet), _random_linear(rng, m, t, alphabet)
            )
        if roll < 0.4 and m == p:
            return inst.star(_random_linear(rng, m, m, alphabet))
        return _random_linear(rng, m, p, alphabet)

    def draw_one_step(rng: random.Random, m: int, p: int):
        return _random_linear(rng, m, p, alphabet)

    return Sampler(draw, draw_one_step, max_dim)


def sample_prob_automaton(rng: random.Random, n: int, alphabet) -> ProbAutomaton:
    """Random stochastic automaton with sparse rows."""
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
    k = len(alphabet)
    entries = {}
    for x in range(n):
        slots = rng.randrange(1, min(4, k * n) + 1)
        pairs = [(rng.randrange(k), rng.randrange(n)) for _ in range(slots)]
        weights = [rng.random() + 1e-3 for _ in pairs]
        total = sum(weights)
        for (ai, y), w in zip(pairs, weights):
            key = (x, alphabet.symbols[ai], y)
            entries[key] = entries.get(key, 0.0) + w / total
    accepting = frozenset(q for q in range(n) if rng.random() < 0.5)
    return prob_automaton(alphabet, n, entries, accepting)


def sample_test_language(rng: random.Random, alphabet, max_states: int = 4) -> TestLanguage:
    """Random complete DFA over the alphabet."""
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
    n = rng.randrange(1, max_states + 1)
    delta = tuple(
        tuple(rng.randrange(n) for _ in alphabet) for _ in range(n)
    )
    accepting = frozenset(q for q in range(n) if rng.random() < 0.5)
    return TestLanguage(Dfa(alphabet, n, delta, rng.randrange(n), accepting))


# -- file formats -----------------------------------------------------------------


def _body_lines(text: str):
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield num, line


def parse_pa(text: str) -> ProbAutomaton:
    """Parse the stochastic-automaton file format: header `pa`, then
    `alphabet`, `states`, `trans src sym dst prob` (prob as decimal or
    fraction) and `accept` directives."""
    lines = _body_lines(text)
    try:
        num, header = next(lines)
    except StopIteration:
        raise ValueError("empty input") from None
    if header != "pa":
        raise ValueError(f"line {num}: expected header 'pa', got {header!r}")
    alphabet = None
    n = None
    entries: dict = {}
    accepting = set()
    for num, line in lines:
        parts = line.split()
        kind, args = parts[0], parts[1:]
        if kind == "alphabet":
            alphabet = Alphabet(tuple(args))
        elif kind == "states":
            if len(args) != 1 or not args[0].isdigit():
                raise ValueError(f"line {num}: states needs one number")
            n = int(args[0])
        elif kind == "trans":
            if alphabet is None or n is None:
                raise ValueError(f"line {num}: trans before alphabet/states")
            if len(args) != 4:
                raise ValueError(f"line {num}: trans needs src sym dst prob")
            src, sym, dst, ptxt = args
            if not (src.isdigit() and dst.isdigit()):
                raise ValueError(f"line {num}: states must be numbers")
            if sym not in alphabet:
                raise ValueError(f"line {num}: unknown symbol {sym!r}")
            x, y = int(src), int(dst)
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"line {num}: state out of range")
            try:
                p = float(Fraction(ptxt))
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"line {num}: bad probability {ptxt!r}") from None
            entries[(x, sym, y)] = entries.get((x, sym, y), 0.0) + p
        elif kind == "accept":
            if n is None:
                raise ValueError(f"line {num}: accept before states")
            for a in args:
                if not a.isdigit() or not (0 <= int(a) < n):
                    raise ValueError(f"line {num}: bad accepting state {a!r}")
                accepting.add(int(a))
        else:
            raise ValueError(f"line {num}: unknown directive {kind!r}")
    if alphabet is None or n is None:
        raise ValueError("missing alphabet or states directive")
    try:
        return prob_automaton(alphabet, n, entries, accepting)
    except ValueError as exc:
        raise ValueError(f"invalid automaton: {exc}") from None


def format_pa(auto: ProbAutomaton) -> str:
    out = ["pa", "alphabet " + " ".join(auto.alphabet.symbols), f"states {auto.n}"]
    for x in range(auto.n):
        for ai, sym in enumerate(auto.alphabet):
            for y in range(auto.n):
                p = auto.trans[x][ai][y]
                if p:
                    out.append(f"trans {x} {sym} {y} {p!r}")
    if auto.accepting:
        out.append("accept " + " ".join(str(q) for q in sorted(auto.accepting)))
    return "\n".join(out) + "\n"


def parse_dfa(text: str) -> Dfa:
    """Parse the complete-DFA file format: header `dfa`, then `alphabet`,
    `states`, `trans src sym dst`, `initial` and `accept` directives; the
    transition table must be total."""
    lines = _body_lines(text)
    try:
        num, header = next(lines)
    except StopIteration:
        raise ValueError("empty input") from None
    if header != "dfa":
        raise ValueError(f"line {num}: expected header 'dfa', got {header!r}")
    alphabet = None
    n = None
    table: dict = {}
    initial = 0
    accepting = set()
    for num, line in lines:
        parts = line.split()
        kind, args = parts[0], parts[1:]
        if kind == "alphabet":
            alphabet = Alphabet(tuple(args))
        elif kind == "states":
            if len(args) != 1 or not args[0].isdigit():
                raise ValueError(f"line {num}: states needs one number")
            n = int(args[0])
        elif kind == "trans":
            if alphabet is None or n is None:
                raise ValueError(f"line {num}: trans before alphabet/states")
            if len(args) != 3:
                raise ValueError(f"line {num}: trans needs src sym dst")
            src, sym, dst = args
            if not (src.isdigit() and dst.isdigit()):
                raise ValueError(f"line {num}: states must be numbers")
            if sym not in alphabet:
                raise ValueError(f"line {num}: unknown symbol {sym!r}")
            x, y = int(src), int(dst)
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"line {num}: state out of range")
            if (x, sym) in table:
                raise ValueError(f"line {num}: duplicate transition on {x} {sym}")
            table[(x, sym)] = y
        elif kind == "initial":
            if len(args) != 1 or not args[0].isdigit():
                raise ValueError(f"line {num}: initial needs one state")
            initial = int(args[0])
        elif kind == "accept":
            if n is None:
                raise ValueError(f"line {num}: accept before states")
            for a in args:
                if not a.isdigit() or not (0 <= int(a) < n):
                    raise ValueError(f"line {num}: bad accepting state {a!r}")
                accepting.add(int(a))
        else:
            raise ValueError(f"line {num}: unknown directive {kind!r}")
    if alphabet is None or n is None:
        raise ValueError("missing alphabet or states directive")
    missing = [(q, sym) for q in range(n) for sym in alphabet if (q, sym) not in table]
    if missing:
        raise ValueError(f"transition table is not total: missing {missing[0]}")
    if not (0 <= initial < n):
        raise ValueError("initial state out of range")
    delta = tuple(
        tuple(table[(q, sym)] for sym in alphabet) for q in range(n)
    )
    return Dfa(alphabet, n, delta, initial, frozenset(accepting))


def format_dfa(dfa: Dfa) -> str:
    out = ["dfa", "alphabet " + " ".join(dfa.alphabet.symbols), f"states {dfa.n}"]
    for q in range(dfa.n):
        for ai, sym in enumerate(dfa.alphabet):
            out.append(f"trans {q} {sym} {dfa.delta[q][ai]}")
    out.append(f"initial {dfa.initial}")
    if dfa.accepting:
        out.append("accept " + " ".join(str(q) for q in sorted(dfa.accepting)))
    return "\n".join(out) + "\n"
