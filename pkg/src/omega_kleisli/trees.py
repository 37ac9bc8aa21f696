"""Binary trees over a ranked alphabet, with variable leaves.

Arrows n ⇸ m are nondeterministic top-down tree automata ("tree morphisms"):
a state set whose first n states are the entries, Σ-transitions
(q, σ, q_l, q_r) that emit an inner node and continue in both children,
ε-moves that change state silently, and variable-exits (q ↦ j < m) that stop
in the leaf-variable j.  The denotation of entry i is the set of finite
binary trees over Σ with leaves in {0..m-1} generated from state i.

Composition is leafwise substitution — every variable-exit of the first
automaton is rewired as an ε-move into the matching entry of the second —
and saturation is a constant-size ε-loop closure: each entry gains an exit
to its own index (the stop-here option) and every exit gains an ε-move back
to the entry it names (the iterate-again option).

Equality of arrows is decided on the height-bounded denotation (all trees up
to the instance bound), so the generic law harness runs on an honest, finite
comparator rather than on a syntactic one.

Acceptance of finite trees filters leaves through the accepting set; Büchi
acceptance of regular infinite trees is decided by solving a game between
Automaton (who picks transitions) and Pathfinder (who picks directions) with
the classical attractor-based fixpoint.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Iterable, Mapping, Sequence

from . import terms
from .kernel import Sampler, TheoryInstance
from .terms import Term
from .words import Alphabet


# -- finite trees --------------------------------------------------------------


@dataclass(frozen=True, eq=False, repr=False)
class FiniteTree:
    """A complete finite binary tree: inner nodes carry alphabet symbols and
    have exactly two children; leaves carry a variable index (the output
    marker of closed trees is variable 0)."""

    label: str | int
    left: "FiniteTree | None" = None
    right: "FiniteTree | None" = None

    def __post_init__(self) -> None:
        if (self.left is None) != (self.right is None):
            raise ValueError("a tree node has either two children or none")
        if self.left is None:
            if not isinstance(self.label, int) or self.label < 0:
                raise ValueError("leaves carry a non-negative variable index")
        elif not isinstance(self.label, str):
            raise ValueError("inner nodes carry an alphabet symbol")
        object.__setattr__(self, "_hash", hash((self.label, self.left, self.right)))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, FiniteTree):
            return NotImplemented
        return (
            self._hash == other._hash  # type: ignore[attr-defined]
            and self.label == other.label
            and self.left == other.left
            and self.right == other.right
        )

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def __repr__(self) -> str:
        return f"FiniteTree({format_finite_tree(self)!r})"


@lru_cache(maxsize=None)
def leaf(index: int) -> FiniteTree:
    """Interned leaf tree for variable `index`."""
    return FiniteTree(index)


@lru_cache(maxsize=None)
def tnode(sym: str, left: FiniteTree, right: FiniteTree) -> FiniteTree:
    """Interned inner node `sym(left, right)`."""
    return FiniteTree(sym, left, right)


def tree_height(t: FiniteTree) -> int:
    if t.left is None:
        return 0
    return 1 + max(tree_height(t.left), tree_height(t.right))


def _tree_tokens(text: str) -> list[str]:
    out: list[str] = []
    buf = ""
    for ch in text:
        if ch in "(),":
            if buf:
                out.append(buf)
                buf = ""
            out.append(ch)
        elif ch.isspace():
            if buf:
                out.append(buf)
                buf = ""
        else:
            buf += ch
    if buf:
        out.append(buf)
    return out


def parse_finite_tree(text: str) -> FiniteTree:
    """Parse the parenthesized form `sym(t, t)` with leaf token `_` for the
    output marker (variable 0) and `x<k>` for other variable leaves.  The
    leaf tokens always win: an alphabet symbol spelled `_` or `x1` cannot be
    written in this form."""
    toks = _tree_tokens(text)
    pos = 0

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(toks):
            raise ValueError("unexpected end of tree text")
        tok = toks[pos]
        pos += 1
        if expected is not None and tok != expected:
            raise ValueError(f"expected {expected!r}, found {tok!r}")
        return tok

    def tree() -> FiniteTree:
        tok = take()
        if tok == "_":
            return leaf(0)
        if len(tok) > 1 and tok[0] == "x" and tok[1:].isdigit():
            return leaf(int(tok[1:]))
        if tok in "(),":
            raise ValueError(f"expected a symbol or leaf, found {tok!r}")
        take("(")
        lt = tree()
        take(",")
        rt = tree()
        take(")")
        return tnode(tok, lt, rt)

    out = tree()
    if pos != len(toks):
        raise ValueError(f"trailing input after tree: {toks[pos]!r}")
    return out


def format_finite_tree(t: FiniteTree) -> str:
    if t.left is None:
        return "_" if t.label == 0 else f"x{t.label}"
    return f"{t.label}({format_finite_tree(t.left)},{format_finite_tree(t.right)})"


# -- tree morphisms ------------------------------------------------------------


@dataclass(frozen=True)
class TreeMorphism:
    """Arrow n ⇸ m: a top-down tree automaton whose first `dom` states are
    the entries.  `trans` holds Σ-transitions (q, σ, q_l, q_r), `eps` holds
    silent moves (q, q′), and `exits` holds variable-exits (q, j) with
    j < cod."""

    dom: int
    cod: int
    states: int
    trans: frozenset[tuple[int, str, int, int]]
    eps: frozenset[tuple[int, int]]
    exits: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.dom < 0 or self.cod < 0 or self.states < self.dom:
            raise ValueError("need 0 ≤ dom ≤ states and cod ≥ 0")
        for q, sym, ql, qr in self.trans:
            if not all(0 <= x < self.states for x in (q, ql, qr)):
                raise ValueError(f"transition state out of range: {(q, sym, ql, qr)}")
        for q, q2 in self.eps:
            if not (0 <= q < self.states and 0 <= q2 < self.states):
                raise ValueError(f"eps state out of range: {(q, q2)}")
        for q, j in self.exits:
            if not (0 <= q < self.states and 0 <= j < self.cod):
                raise ValueError(f"exit out of range: {(q, j)}")

    def __repr__(self) -> str:
        return (
            f"TreeMorphism({self.dom}⇸{self.cod}, states={self.states}, "
            f"trans={sorted(self.trans)}, eps={sorted(self.eps)}, "
            f"exits={sorted(self.exits)})"
        )


@lru_cache(maxsize=None)
def _eps_closure(m: TreeMorphism) -> tuple[frozenset[int], ...]:
    """Forward ε-closure per state (reflexive)."""
    adj: dict[int, list[int]] = defaultdict(list)
    for q, q2 in m.eps:
        adj[q].append(q2)
    out = []
    for q in range(m.states):
        seen = {q}
        work = [q]
        while work:
            u = work.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    work.append(v)
        out.append(frozenset(seen))
    return tuple(out)


@lru_cache(maxsize=None)
def _trans_by_src(m: TreeMorphism) -> tuple[tuple[tuple[str, int, int], ...], ...]:
    by: list[list[tuple[str, int, int]]] = [[] for _ in range(m.states)]
    for q, sym, ql, qr in m.trans:
        by[q].append((sym, ql, qr))
    return tuple(tuple(sorted(row)) for row in by)


@lru_cache(maxsize=None)
def _exits_by_src(m: TreeMorphism) -> tuple[tuple[int, ...], ...]:
    by: list[list[int]] = [[] for _ in range(m.states)]
    for q, j in m.exits:
        by[q].append(j)
    return tuple(tuple(sorted(row)) for row in by)


@lru_cache(maxsize=4096)
def denotation(m: TreeMorphism, height: int) -> tuple[frozenset[FiniteTree], ...]:
    """Per-state sets of all generated trees of height ≤ `height` (leaves are
    variables < cod)."""
    cl = _eps_closure(m)
    trans_by = _trans_by_src(m)
    exits_by = _exits_by_src(m)
    base = [
        frozenset(leaf(j) for q2 in cl[q] for j in exits_by[q2])
        for q in range(m.states)
    ]
    if height <= 0:
        return tuple(base)
    prev = denotation(m, height - 1)
    out = []
    for q in range(m.states):
        trees = set(base[q])
        for q2 in cl[q]:
            for sym, ql, qr in trans_by[q2]:
                for tl in prev[ql]:
                    for tr in prev[qr]:
                        trees.add(tnode(sym, tl, tr))
        out.append(frozenset(trees))
    return tuple(out)


def tree_compose(g: TreeMorphism, f: TreeMorphism) -> TreeMorphism:
    """g·f = g after f: leafwise substitution.  Every variable-exit (q ↦ j)
    of f becomes an ε-move into entry j of g."""
    if f.cod != g.dom:
        raise ValueError(f"shape mismatch: {f.cod} ≠ {g.dom}")
    off = f.states
    trans = set(f.trans)
    trans.update((q + off, sym, ql + off, qr + off) for q, sym, ql, qr in g.trans)
    eps = set(f.eps)
    eps.update((q + off, q2 + off) for q, q2 in g.eps)
    eps.update((q, off + j) for q, j in f.exits)
    exits = {(q + off, j) for q, j in g.exits}
    return TreeMorphism(
        f.dom, g.cod, f.states + g.states,
        frozenset(trans), frozenset(eps), frozenset(exits),
    )


def tree_star(alpha: TreeMorphism) -> TreeMorphism:
    """Saturation of an endo arrow by ε-loop closure.

    Fresh entry states are split off the body first, so that a stop is only
    possible at a substitution boundary: fresh entry i carries the exit to
    its own variable (the stop-immediately round) and an ε-move into the old
    entry (start one more α-round), and every old exit (q ↦ j) is rerouted
    as an ε-move back to fresh entry j.  Without the split, an arrow whose
    transitions re-enter its entry states internally could abandon a half
    -built α-tree through the new exits.  The denotation is the union of all
    finite iterates of (id ∨ α).
    """
    if alpha.dom != alpha.cod:
        raise ValueError("saturation needs an endomorphism")
    n = alpha.dom
    off = n
    trans = frozenset((q + off, sym, l + off, r + off) for q, sym, l, r in alpha.trans)
    eps = {(q + off, q2 + off) for q, q2 in alpha.eps}
    eps.update((i, off + i) for i in range(n))
    eps.update((q + off, j) for q, j in alpha.exits)
    exits = frozenset((i, i) for i in range(n))
    return TreeMorphism(n, n, n + alpha.states, trans, frozenset(eps), exits)


class TreeInstance(TheoryInstance):
    """Theory instance of tree-automata arrows.

    Equality (and hence every law checked by the generic harness) is the
    bounded comparator: denotations agree on all trees up to height `bound`.
    The instance has no ω-operation on arrows; infinite-tree acceptance is
    decided pointwise by the Büchi game below.
    """

    name = "tree"
    supports_omega = False

    def __init__(self, alphabet: Alphabet | Sequence[str], bound: int = 3):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
        self.bound = bound

    def dims(self, f: TreeMorphism) -> tuple[int, int]:
        return (f.dom, f.cod)

    def compose(self, g: TreeMorphism, f: TreeMorphism) -> TreeMorphism:
        return tree_compose(g, f)

    def join(self, f: TreeMorphism, g: TreeMorphism) -> TreeMorphism:
        if (f.dom, f.cod) != (g.dom, g.cod):
            raise ValueError("join needs equal shapes")
        n = f.dom
        off_f = n
        off_g = n + f.states
        trans = {(q + off_f, sym, l + off_f, r + off_f) for q, sym, l, r in f.trans}
        trans.update((q + off_g, sym, l + off_g, r + off_g) for q, sym, l, r in g.trans)
        eps = {(i, off_f + i) for i in range(n)} | {(i, off_g + i) for i in range(n)}
        eps.update((q + off_f, q2 + off_f) for q, q2 in f.eps)
        eps.update((q + off_g, q2 + off_g) for q, q2 in g.eps)
        exits = {(q + off_f, j) for q, j in f.exits}
        exits.update((q + off_g, j) for q, j in g.exits)
        return TreeMorphism(
            n, f.cod, n + f.states + g.states,
            frozenset(trans), frozenset(eps), frozenset(exits),
        )

    def bottom(self, m: int, p: int) -> TreeMorphism:
        return TreeMorphism(m, p, m, frozenset(), frozenset(), frozenset())

    def base_map(self, mapping: Sequence[int], p: int) -> TreeMorphism:
        exits = frozenset((i, j) for i, j in enumerate(mapping))
        return TreeMorphism(len(mapping), p, len(mapping), frozenset(), frozenset(), exits)

    def cotuple(self, arrows: Sequence[TreeMorphism]) -> TreeMorphism:
        if not arrows:
            return self.bottom(0, 0)
        p = arrows[0].cod
        if any(a.cod != p for a in arrows):
            raise ValueError("cotuple needs a common codomain")
        total = sum(a.dom for a in arrows)
        trans: set[tuple[int, str, int, int]] = set()
        eps: set[tuple[int, int]] = set()
        exits: set[tuple[int, int]] = set()
        entry_off = 0
        body_off = total
        for a in arrows:
            eps.update((entry_off + i, body_off + i) for i in range(a.dom))
            trans.update((q + body_off, sym, l + body_off, r + body_off) for q, sym, l, r in a.trans)
            eps.update((q + body_off, q2 + body_off) for q, q2 in a.eps)
            exits.update((q + body_off, j) for q, j in a.exits)
            entry_off += a.dom
            body_off += a.states
        return TreeMorphism(
            total, p, body_off, frozenset(trans), frozenset(eps), frozenset(exits)
        )

    def equal(self, f: TreeMorphism, g: TreeMorphism) -> bool:
        if (f.dom, f.cod) != (g.dom, g.cod):
            return False
        df = denotation(f, self.bound)
        dg = denotation(g, self.bound)
        return all(df[i] == dg[i] for i in range(f.dom))

    def leq(self, f: TreeMorphism, g: TreeMorphism) -> bool:
        if (f.dom, f.cod) != (g.dom, g.cod):
            return False
        df = denotation(f, self.bound)
        dg = denotation(g, self.bound)
        return all(df[i] <= dg[i] for i in range(f.dom))

    def is_one_step(self, f: TreeMorphism) -> bool:
        """True when every generated tree has height ≤ 1, i.e. the arrow is a
        generator n → 𝒫(Σ×cod×cod + cod): one inner node over variable
        leaves, or a bare variable."""
        cl = _eps_closure(f)
        trans_by = _trans_by_src(f)
        exits_by = _exits_by_src(f)
        productive: set[int] = set()
        changed = True
        while changed:
            changed = False
            for q in range(f.states):
                if q in productive:
                    continue
                for q2 in cl[q]:
                    if exits_by[q2] or any(
                        l in productive and r in productive for _, l, r in trans_by[q2]
                    ):
                        productive.add(q)
                        changed = True
                        break

        def emits(q: int) -> bool:
            return any(
                l in productive and r in productive
                for q2 in cl[q]
                for _, l, r in trans_by[q2]
            )

        for i in range(f.dom):
            for q2 in cl[i]:
                for _, l, r in trans_by[q2]:
                    if l in productive and r in productive and (emits(l) or emits(r)):
                        return False
        return True

    def star(self, alpha: TreeMorphism) -> TreeMorphism:
        return tree_star(alpha)


# -- tree automata and finite acceptance ----------------------------------------


@dataclass(frozen=True)
class TreeAutomaton:
    """Nondeterministic binary tree automaton: states 0..n-1, transitions
    δ ⊆ n×Σ×n×n, accepting set 𝔉 ⊆ n."""

    alphabet: Alphabet
    n: int
    trans: frozenset[tuple[int, str, int, int]]
    accepting: frozenset[int]

    def __post_init__(self) -> None:
        for q, sym, l, r in self.trans:
            if not all(0 <= x < self.n for x in (q, l, r)):
                raise ValueError(f"transition state out of range: {(q, sym, l, r)}")
            if sym not in self.alphabet:
                raise ValueError(f"symbol {sym!r} not in alphabet")
        if not all(0 <= q < self.n for q in self.accepting):
            raise ValueError("accept state out of range")

    @cached_property
    def morphism(self) -> TreeMorphism:
        """The one-step arrow n ⇸ n of the automaton: each transition emits
        one inner node whose children exit in the successor variables."""
        trans = frozenset((q, sym, self.n + l, self.n + r) for q, sym, l, r in self.trans)
        exits = frozenset((self.n + j, j) for j in range(self.n))
        return TreeMorphism(self.n, self.n, 2 * self.n, trans, frozenset(), exits)


def f_F_tree(accepting: Iterable[int], n: int) -> TreeMorphism:
    """Diagonal filter n ⇸ n: identity exit at accepting indices, bottom
    elsewhere."""
    exits = frozenset((i, i) for i in accepting)
    return TreeMorphism(n, n, n, frozenset(), frozenset(), exits)


def finite_member(auto: TreeAutomaton, state: int, tree: FiniteTree) -> bool:
    """Acceptance of a finite closed tree (all leaves the output marker).

    Decided bottom-up: a marker leaf is acceptable from exactly the accepting
    states (so the height-0 tree is accepted from s iff s ∈ 𝔉 — the run on a
    bare marker has an empty transition condition and we read the frontier
    condition at the marker itself), and an inner node σ(t_l, t_r) is
    acceptable from q iff some transition (q, σ, l, r) has both children
    acceptable.
    """
    if not (0 <= state < auto.n):
        raise ValueError("state out of range")
    by_sym: dict[str, list[tuple[int, int, int]]] = defaultdict(list)
    for q, sym, l, r in auto.trans:
        by_sym[sym].append((q, l, r))
    memo: dict[FiniteTree, frozenset[int]] = {}

    def ok(t: FiniteTree) -> frozenset[int]:
        got = memo.get(t)
        if got is not None:
            return got
        if t.left is None:
            if t.label != 0:
                raise ValueError("finite acceptance needs a closed tree (leaves = marker)")
            res = auto.accepting
        else:
            if t.label not in auto.alphabet:
                raise ValueError(f"symbol {t.label!r} not in alphabet")
            okl = ok(t.left)
            okr = ok(t.right)
            res = frozenset(q for q, l, r in by_sym[t.label] if l in okl and r in okr)
        memo[t] = res
        return res

    return state in ok(tree)


def tree_behaviour(
    auto: TreeAutomaton,
    accepting: Iterable[int] | None = None,
    instance: TreeInstance | None = None,
) -> TreeMorphism:
    """Finite behaviour !·f_𝔉·α* of the automaton's one-step arrow: the arrow
    n ⇸ 1 whose denotation at i is the set of accepted closed trees from i."""
    inst = instance if instance is not None else TreeInstance(auto.alphabet)
    acc = auto.accepting if accepting is None else frozenset(accepting)
    bang = inst.base_map((0,) * auto.n, 1)
    return inst.compose(bang, inst.compose(f_F_tree(acc, auto.n), inst.star(auto.morphism)))


# -- regular infinite trees and the Büchi game ----------------------------------


@dataclass(frozen=True)
class RegularInfTree:
    """Finite presentation of an infinite tree: nodes (sym, left, right)
    indexed by position in the tuple, unfolded from `root`."""

    nodes: tuple[tuple[str, int, int], ...]
    root: int

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("a regular tree needs at least one node")
        k = len(self.nodes)
        for sym, l, r in self.nodes:
            if not (0 <= l < k and 0 <= r < k):
                raise ValueError("successor id out of range")
        if not (0 <= self.root < k):
            raise ValueError("root id out of range")


class PositionBudgetExceeded(Exception):
    """The game graph grew past the position cap."""


def _attractor(
    player: int,
    target: set[Any],
    sub: set[Any],
    succ: Mapping[Any, tuple[Any, ...]],
    pred: Mapping[Any, tuple[Any, ...]],
    owner: Mapping[Any, int],
) -> tuple[set[Any], dict[Any, Any]]:
    """Positions in `sub` from which `player` can force reaching `target`;
    also returns the attracting move for positions the player owns."""
    inside = set(target)
    strat: dict[Any, Any] = {}
    cnt: dict[Any, int] = {}
    work = deque(target)
    while work:
        u = work.popleft()
        for v in pred.get(u, ()):
            if v not in sub or v in inside:
                continue
            if owner[v] == player:
                inside.add(v)
                strat[v] = u
                work.append(v)
            else:
                if v not in cnt:
                    cnt[v] = sum(1 for w in succ[v] if w in sub)
                cnt[v] -= 1
                if cnt[v] == 0:
                    inside.add(v)
                    work.append(v)
    return inside, strat


def _solve_buchi(
    succ: Mapping[Any, tuple[Any, ...]],
    owner: Mapping[Any, int],
    buchi: set[Any],
) -> tuple[set[Any], dict[Any, Any]]:
    """Winning region and strategy of player 0 for the objective "visit
    `buchi` infinitely often", by the classical iterated-attractor fixpoint.
    The arena must be total (every position has a successor)."""
    pred: dict[Any, list[Any]] = defaultdict(list)
    for u, vs in succ.items():
        for v in vs:
            pred[v].append(u)
    region = set(succ)
    while True:
        target = {u for u in buchi if u in region}
        attracted, strat = _attractor(0, target, region, succ, pred, owner)
        rest = region - attracted
        if not rest:
            for u in target:
                if owner[u] == 0:
                    strat[u] = next(v for v in succ[u] if v in region)
            return region, strat
        doomed, _ = _attractor(1, rest, region, succ, pred, owner)
        region -= doomed


_LOSE = ("lose",)


def _machine_game(
    states: int,
    trans: Iterable[tuple[int, str, int, int]],
    eps: Iterable[tuple[int, int]],
    buchi_states: Iterable[int],
    start_state: int,
    tree: RegularInfTree,
    cap: int,
) -> tuple[set[Any], dict[Any, Any], list[Any], Any]:
    """Build and solve the acceptance game of a machine against a regular
    tree.  Positions ('a', q, v) belong to Automaton, who either takes an
    ε-move (same node) or a transition matching the node label; positions
    ('p', l, r, v) belong to Pathfinder, who picks the direction.  A stuck
    Automaton loses.  Returns (win, strategy, positions, start)."""
    trans_by: dict[tuple[int, str], list[tuple[int, int]]] = defaultdict(list)
    for q, sym, l, r in trans:
        trans_by[(q, sym)].append((l, r))
    eps_by: dict[int, list[int]] = defaultdict(list)
    for q, q2 in eps:
        eps_by[q].append(q2)
    flagged = frozenset(buchi_states)

    start = ("a", start_state, tree.root)
    succ: dict[Any, tuple[Any, ...]] = {_LOSE: (_LOSE,)}
    owner: dict[Any, int] = {_LOSE: 0}
    buchi: set[Any] = set()
    work = deque([start])
    seen = {start, _LOSE}
    while work:
        u = work.popleft()
        if len(seen) > cap:
            raise PositionBudgetExceeded(f"more than {cap} game positions")
        if u[0] == "a":
            _, q, v = u
            owner[u] = 0
            if q in flagged:
                buchi.add(u)
            sym = tree.nodes[v][0]
            nexts: list[Any] = [("a", q2, v) for q2 in eps_by[q]]
            nexts.extend(("p", l, r, v) for l, r in trans_by[(q, sym)])
            if not nexts:
                nexts = [_LOSE]
        else:
            _, l, r, v = u
            owner[u] = 1
            nexts = [("a", l, tree.nodes[v][1]), ("a", r, tree.nodes[v][2])]
        uniq = tuple(sorted(set(nexts), key=repr))
        succ[u] = uniq
        for w in uniq:
            if w not in seen:
                seen.add(w)
                work.append(w)
    win, strat = _solve_buchi(succ, owner, buchi)
    return win, strat, list(succ), start


def buchi_tree_game(
    auto: TreeAutomaton,
    accepting: Iterable[int] | None,
    state: int,
    tree: RegularInfTree,
    cap: int = 100_000,
) -> tuple[set[Any], dict[Any, Any], list[Any], Any]:
    """The full solved acceptance game (winning region, Automaton strategy,
    all positions, start position) — exposed for strategy replay."""
    if not (0 <= state < auto.n):
        raise ValueError("state out of range")
    acc = auto.accepting if accepting is None else frozenset(accepting)
    return _machine_game(auto.n, auto.trans, (), acc, state, tree, cap)


def buchi_tree_member(
    auto: TreeAutomaton,
    accepting: Iterable[int] | None,
    state: int,
    tree: RegularInfTree,
    cap: int = 100_000,
) -> bool:
    """True iff the automaton has a run on the infinite unfolding of `tree`
    from `state` in which every path visits the accepting set infinitely
    often — i.e. Automaton wins the Büchi game from (state, root)."""
    win, _, _, start = buchi_tree_game(auto, accepting, state, tree, cap)
    return start in win


def omega_tree_member(
    loop: TreeMorphism,
    prefix: TreeMorphism,
    tree: RegularInfTree,
    cap: int = 100_000,
) -> bool:
    """Membership of the infinite tree in loop^ω·prefix (prefix: 1 ⇸ n once,
    then the endo loop forever).

    Every exit of the loop is rerouted through a flagged state back to the
    entry it names; acceptance asks each path to cross flags infinitely
    often.  A path that stalls on flagged ε-moves forever (an ε-cycle of
    exits) accepts its whole subtree, matching the greatest-fixpoint reading
    in which bare-variable rounds pad every finite stage.
    """
    if loop.dom != loop.cod:
        raise ValueError("omega needs an endomorphism")
    if prefix.dom != 1 or prefix.cod != loop.dom:
        raise ValueError("prefix must be 1 ⇸ dom(loop)")
    p_off = prefix.states
    flag_off = p_off + loop.states
    trans = set(prefix.trans)
    trans.update((q + p_off, sym, l + p_off, r + p_off) for q, sym, l, r in loop.trans)
    eps = set(prefix.eps)
    eps.update((q, p_off + j) for q, j in prefix.exits)
    eps.update((q + p_off, q2 + p_off) for q, q2 in loop.eps)
    for q, j in loop.exits:
        eps.add((q + p_off, flag_off + j))
        eps.add((flag_off + j, p_off + j))
    states = flag_off + loop.dom
    flags = range(flag_off, states)
    win, _, _, start = _machine_game(states, trans, eps, flags, 0, tree, cap)
    return start in win


def loop_buchi_automaton(loop: TreeMorphism, alphabet: Alphabet) -> TreeAutomaton:
    """Büchi tree automaton recognizing loop^ω at entry i from state 2i.

    Exits are rerouted to entries as marked ε-moves, then ε-moves are
    eliminated: states are (q, b) ↦ 2q+b where b records whether the silent
    phase leading into the node's transition crossed a mark, and accepting
    states are those with b = 1.  A state that can silently reach a marked
    ε-cycle accepts any subtree outright via the extra universal state (the
    stalling reading of the greatest fixpoint), numbered 2·states.
    """
    if loop.dom != loop.cod:
        raise ValueError("omega needs an endomorphism")
    k = loop.states
    # silent edges: (src, dst, marked)
    silent = [(q, q2, False) for q, q2 in loop.eps]
    silent.extend((q, j, True) for q, j in loop.exits)
    adj: dict[int, list[tuple[int, bool]]] = defaultdict(list)
    for q, q2, mark in silent:
        adj[q].append((q2, mark))

    reach: list[set[tuple[int, int]]] = []
    for q in range(k):
        seen = {(q, 0)}
        work = [(q, 0)]
        while work:
            u, b = work.pop()
            for v, mark in adj[u]:
                nb = 1 if (b or mark) else 0
                if (v, nb) not in seen:
                    seen.add((v, nb))
                    work.append((v, nb))
        reach.append(seen)

    # states that can silently reach a cycle containing a marked edge: a
    # marked edge inside one SCC of the silent graph closes such a cycle
    comp = _scc_of(adj, k)
    core_comps = {comp[q] for q, q2, mark in silent if mark and comp[q] == comp[q2]}
    stall = {
        q for q in range(k) if any(comp[v] in core_comps for v, _ in reach[q])
    }

    trans_by = defaultdict(list)
    for q, sym, l, r in loop.trans:
        trans_by[q].append((sym, l, r))
    universal = 2 * k
    trans: set[tuple[int, str, int, int]] = set()
    for sym in alphabet.symbols:
        trans.add((universal, sym, universal, universal))
    for q in range(k):
        for b in (0, 1):
            src = 2 * q + b
            for q2, beta in reach[q]:
                for sym, l, r in trans_by[q2]:
                    trans.add((src, sym, 2 * l + beta, 2 * r + beta))
            if q in stall:
                for sym in alphabet.symbols:
                    trans.add((src, sym, universal, universal))
    accepting = frozenset(2 * q + 1 for q in range(k)) | {universal}
    return TreeAutomaton(alphabet, 2 * k + 1, frozenset(trans), accepting)


def _scc_of(adj: Mapping[int, list[tuple[int, bool]]], n: int) -> dict[int, int]:
    """Tarjan SCC over the silent graph (labels ignored); iterative."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    comp: dict[int, int] = {}
    stack: list[int] = []
    on_stack: set[int] = set()
    counter = 0
    ncomp = 0
    for root in range(n):
        if root in index:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            targets = adj.get(node, [])
            while pi < len(targets):
                nxt = targets[pi][0]
                pi += 1
                if nxt not in index:
                    work[-1] = (node, pi)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = ncomp
                    if w == node:
                        break
                ncomp += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return comp


# -- rational tree expressions ---------------------------------------------------


def eval_tree_rational(
    t: Term, gens: Mapping[str, TreeMorphism], instance: TreeInstance
) -> TreeMorphism:
    """Evaluate a rational term over height-≤1 tree generators by folding
    with compose/join/star of the tree instance."""
    terms.typecheck(t, {name: (g.dom, g.cod) for name, g in gens.items()})
    for name, g in gens.items():
        if not instance.is_one_step(g):
            raise ValueError(f"generator {name!r} has height > 1")
    return terms.eval_term(t, gens, instance)


# -- file formats ----------------------------------------------------------------


def _body_lines(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            out.append((no, body.split()))
    return out


def parse_tree_automaton(text: str) -> TreeAutomaton:
    """Parse the line-based tree-automaton format (header `tree`)."""
    lines = _body_lines(text)
    if not lines or lines[0][1] != ["tree"]:
        raise ValueError("line 1: expected header 'tree'")
    alphabet: Alphabet | None = None
    n: int | None = None
    trans_lines: list[tuple[int, int, str, int, int]] = []
    accept_lines: list[tuple[int, int]] = []
    for no, toks in lines[1:]:
        kind, args = toks[0], toks[1:]
        if kind == "alphabet":
            alphabet = Alphabet(tuple(args))
        elif kind == "states":
            if len(args) != 1 or not args[0].isdigit():
                raise ValueError(f"line {no}: states wants one number")
            n = int(args[0])
        elif kind == "trans":
            if len(args) != 4:
                raise ValueError(f"line {no}: trans wants src sym left right")
            if not (args[0].isdigit() and args[2].isdigit() and args[3].isdigit()):
                raise ValueError(f"line {no}: bad state index")
            trans_lines.append((no, int(args[0]), args[1], int(args[2]), int(args[3])))
        elif kind == "accept":
            for a in args:
                if not a.isdigit():
                    raise ValueError(f"line {no}: bad accept state")
                accept_lines.append((no, int(a)))
        else:
            raise ValueError(f"line {no}: unknown directive {kind!r}")
    if alphabet is None or n is None:
        raise ValueError("missing alphabet or states directive")
    trans: set[tuple[int, str, int, int]] = set()
    for no, src, sym, l, r in trans_lines:
        if sym not in alphabet:
            raise ValueError(f"line {no}: symbol {sym!r} not in alphabet")
        if not all(0 <= x < n for x in (src, l, r)):
            raise ValueError(f"line {no}: state index out of range")
        trans.add((src, sym, l, r))
    accepting: set[int] = set()
    for no, q in accept_lines:
        if not 0 <= q < n:
            raise ValueError(f"line {no}: accept state out of range")
        accepting.add(q)
    return TreeAutomaton(alphabet, n, frozenset(trans), frozenset(accepting))


def format_tree_automaton(auto: TreeAutomaton) -> str:
    lines = ["tree", "alphabet " + " ".join(auto.alphabet.symbols), f"states {auto.n}"]
    for q, sym, l, r in sorted(auto.trans):
        lines.append(f"trans {q} {sym} {l} {r}")
    if auto.accepting:
        lines.append("accept " + " ".join(str(q) for q in sorted(auto.accepting)))
    return "\n".join(lines) + "\n"


def parse_rtree(text: str) -> RegularInfTree:
    """Parse the regular-infinite-tree format (header `rtree`)."""
    lines = _body_lines(text)
    if not lines or lines[0][1] != ["rtree"]:
        raise ValueError("line 1: expected header 'rtree'")
    nodes: dict[int, tuple[str, int, int]] = {}
    root: int | None = None
    for no, toks in lines[1:]:
        kind, args = toks[0], toks[1:]
        if kind == "node":
            if len(args) != 4 or not (args[0].isdigit() and args[2].isdigit() and args[3].isdigit()):
                raise ValueError(f"line {no}: node wants id sym leftId rightId")
            nid = int(args[0])
            if nid in nodes:
                raise ValueError(f"line {no}: node {nid} defined twice")
            nodes[nid] = (args[1], int(args[2]), int(args[3]))
        elif kind == "root":
            if len(args) != 1 or not args[0].isdigit():
                raise ValueError(f"line {no}: root wants one id")
            root = int(args[0])
        else:
            raise ValueError(f"line {no}: unknown directive {kind!r}")
    if root is None:
        raise ValueError("missing root directive")
    if not nodes:
        raise ValueError("a regular tree needs at least one node")
    if sorted(nodes) != list(range(len(nodes))):
        raise ValueError("node ids must be 0..k-1 with no gaps")
    return RegularInfTree(tuple(nodes[i] for i in range(len(nodes))), root)


def format_rtree(t: RegularInfTree) -> str:
    lines = ["rtree"]
    for i, (sym, l, r) in enumerate(t.nodes):
        lines.append(f"node {i} {sym} {l} {r}")
    lines.append(f"root {t.root}")
    return "\n".join(lines) + "\n"


# -- samplers --------------------------------------------------------------------


def sample_tree_one_step(rng, dom: int, cod: int, alphabet: Alphabet) -> TreeMorphism:
    """Random generator arrow: per entry a few height-≤1 options (one inner
    node over variable leaves, or a bare variable)."""
    trans: set[tuple[int, str, int, int]] = set()
    exits: set[tuple[int, int]] = set()
    for i in range(dom):
        for _ in range(2):
            roll = rng.random()
            if roll < 0.45 and cod:
                sym = rng.choice(alphabet.symbols)
                trans.add((i, sym, dom + rng.randrange(cod), dom + rng.randrange(cod)))
            elif roll < 0.75 and cod:
                exits.add((i, rng.randrange(cod)))
    var_exits = frozenset((dom + j, j) for j in range(cod))
    return TreeMorphism(
        dom, cod, dom + cod, frozenset(trans), frozenset(), frozenset(exits) | var_exits
    )


def sample_tree_morphism(rng, dom: int, cod: int, alphabet: Alphabet) -> TreeMorphism:
    """Random arrow with an inner state and sparse transitions."""
    states = dom + rng.randrange(0, 3)
    trans: set[tuple[int, str, int, int]] = set()
    eps: set[tuple[int, int]] = set()
    exits: set[tuple[int, int]] = set()
    for q in range(states):
        if rng.random() < 0.55 and cod:
            exits.add((q, rng.randrange(cod)))
        if rng.random() < 0.45 and states:
            sym = rng.choice(alphabet.symbols)
            trans.add((q, sym, rng.randrange(states), rng.randrange(states)))
        if rng.random() < 0.2 and states:
            eps.add((q, rng.randrange(states)))
    return TreeMorphism(
        dom, cod, states, frozenset(trans), frozenset(eps), frozenset(exits)
    )


def make_tree_sampler(alphabet: Alphabet, max_dim: int = 3) -> Sampler:
    return Sampler(
        arrow=lambda rng, m, p: sample_tree_morphism(rng, m, p, alphabet),
        one_step=lambda rng, m, p: sample_tree_one_step(rng, m, p, alphabet),
        max_dim=max_dim,
    )


def sample_tree_automaton(rng, n: int, alphabet: Alphabet) -> TreeAutomaton:
    trans: set[tuple[int, str, int, int]] = set()
    for q in range(n):
        for sym in alphabet.symbols:
            if rng.random() < 0.5:
                trans.add((q, sym, rng.randrange(n), rng.randrange(n)))
    k = rng.randrange(0, n + 1)
    accepting = frozenset(rng.sample(range(n), k))
    return TreeAutomaton(alphabet, n, frozenset(trans), accepting)


def sample_regular_tree(rng, size: int, alphabet: Alphabet) -> RegularInfTree:
    nodes = tuple(
        (rng.choice(alphabet.symbols), rng.randrange(size), rng.randrange(size))
        for _ in range(size)
    )
    return RegularInfTree(nodes, rng.randrange(size))


def sample_finite_tree(rng, height: int, alphabet: Alphabet) -> FiniteTree:
    """Random closed tree of height ≤ `height` (leaves = marker)."""
    if height == 0 or rng.random() < 0.3:
        return leaf(0)
    sym = rng.choice(alphabet.symbols)
    return tnode(
        sym,
        sample_finite_tree(rng, height - 1, alphabet),
        sample_finite_tree(rng, height - 1, alphabet),
    )


def sample_tree_rational(
    rng, dom: int, cod: int, depth: int, gens: dict[str, TreeMorphism], alphabet: Alphabet
) -> Term:
    """Random rational term dom ⇸ cod over fresh height-≤1 generators; new
    generators are added to `gens` in place."""
    if depth <= 0 or rng.random() < 0.25:
        kind = rng.randrange(3)
        if kind == 0:
            return terms.Empty(dom, cod)
        if kind == 1 and cod:
            return terms.Base(tuple(rng.randrange(cod) for _ in range(dom)), cod)
        name = f"g{len(gens)}"
        gens[name] = sample_tree_one_step(rng, dom, cod, alphabet)
        return terms.Gen(name)
    kind = rng.randrange(4)
    if kind == 0:
        mid = rng.randrange(1, 4)
        return terms.Compose(
            sample_tree_rational(rng, mid, cod, depth - 1, gens, alphabet),
            sample_tree_rational(rng, dom, mid, depth - 1, gens, alphabet),
        )
    if kind == 1:
        return terms.Join(
            sample_tree_rational(rng, dom, cod, depth - 1, gens, alphabet),
            sample_tree_rational(rng, dom, cod, depth - 1, gens, alphabet),
        )
    if kind == 2 and dom == cod:
        return terms.Star(sample_tree_rational(rng, dom, dom, depth - 1, gens, alphabet))
    if kind == 3 and dom >= 2:
        split = rng.randrange(1, dom)
        return terms.Cotuple(
            (
                sample_tree_rational(rng, split, cod, depth - 1, gens, alphabet),
                sample_tree_rational(rng, dom - split, cod, depth - 1, gens, alphabet),
            )
        )
    name = f"g{len(gens)}"
    gens[name] = sample_tree_one_step(rng, dom, cod, alphabet)
    return terms.Gen(name)
