"""Regular-language values over a finite alphabet.

Languages are carried by epsilon-NFAs.  Constructions (union, concatenation,
Kleene star) are Thompson-style and stay linear-size; determinization happens
lazily, only for the exact decision procedures (equivalence, inclusion,
disjointness) and for DFA views used elsewhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

Word = tuple[str, ...]


@dataclass(frozen=True)
class Alphabet:
    """Ordered collection of distinct printable symbols."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")
        for s in self.symbols:
            if not s or any(c.isspace() for c in s):
                raise ValueError(f"bad alphabet symbol {s!r}")

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    @cached_property
    def _symset(self) -> frozenset:
        return frozenset(self.symbols)

    def __contains__(self, sym):
        return sym in self._symset

    def index(self, sym: str) -> int:
        return self.symbols.index(sym)

    def parse_word(self, text: str) -> Word:
        """Read a word: one char per symbol when all symbols are single chars,
        whitespace-separated tokens otherwise.  Empty text is the empty word."""
        if text == "":
            return ()
        toks = tuple(text) if all(len(s) == 1 for s in self.symbols) else tuple(text.split())
        for t in toks:
            if t not in self:
                raise ValueError(f"symbol {t!r} not in alphabet")
        return toks

    def format_word(self, w: Word) -> str:
        if all(len(s) == 1 for s in self.symbols):
            return "".join(w)
        return " ".join(w)


def all_words(alphabet: Alphabet, maxlen: int):
    """Every word over the alphabet of length <= maxlen, shortest first."""
    for n in range(maxlen + 1):
        for tup in itertools.product(alphabet.symbols, repeat=n):
            yield tup


@dataclass(frozen=True)
class WordLang:
    """A regular language, represented as an epsilon-NFA.

    Transitions are (src, symbol, dst) triples, with symbol None standing for
    an epsilon move.  Initial/accepting are state sets, which keeps the
    constructions below purely structural (no fresh-start bookkeeping).
    """

    alphabet: Alphabet
    n: int
    transitions: frozenset[tuple[int, str | None, int]]
    initial: frozenset[int]
    accepting: frozenset[int]

    def __post_init__(self):
        tr = self.transitions
        if tr:
            states = {s for (s, _a, _t) in tr} | {t for (_s, _a, t) in tr}
            if min(states) < 0 or max(states) >= self.n:
                raise ValueError("transition state out of range")
            syms = {a for (_s, a, _t) in tr}
            syms.discard(None)
            bad = syms - self.alphabet._symset
            if bad:
                raise ValueError(f"transition symbol {next(iter(bad))!r} not in alphabet")
        marked = self.initial | self.accepting
        if marked and (min(marked) < 0 or max(marked) >= self.n):
            raise ValueError("state index out of range")

    # -- adjacency caches -------------------------------------------------

    @cached_property
    def _eps_adj(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {}
        for (s, a, t) in self.transitions:
            if a is None:
                adj.setdefault(s, []).append(t)
        return {s: tuple(ts) for s, ts in adj.items()}

    @cached_property
    def _sym_adj(self) -> dict[tuple[int, str], tuple[int, ...]]:
        adj: dict[tuple[int, str], list[int]] = {}
        for (s, a, t) in self.transitions:
            if a is not None:
                adj.setdefault((s, a), []).append(t)
        return {k: tuple(ts) for k, ts in adj.items()}

    @cached_property
    def _state_closures(self) -> tuple[frozenset[int], ...]:
        out = []
        for q in range(self.n):
            seen = {q}
            stack = [q]
            while stack:
                p = stack.pop()
                for t in self._eps_adj.get(p, ()):
                    if t not in seen:
                        seen.add(t)
                        stack.append(t)
            out.append(frozenset(seen))
        return tuple(out)

    def closure(self, states) -> frozenset[int]:
        """Epsilon-closure of a state set."""
        out: set[int] = set()
        for q in states:
            out |= self._state_closures[q]
        return frozenset(out)

    @cached_property
    def _move(self) -> tuple[dict[str, frozenset[int]], ...]:
        """Per state, per symbol: ε-closed one-letter successor set."""
        out = []
        for q in range(self.n):
            row: dict[str, frozenset[int]] = {}
            for a in self.alphabet.symbols:
                tgt: set[int] = set()
                for r in self._state_closures[q]:
                    tgt.update(self._sym_adj.get((r, a), ()))
                row[a] = self.closure(tgt)
            out.append(row)
        return tuple(out)

    def step(self, states, sym: str) -> frozenset[int]:
        """One-letter successor set (epsilon-closed on both sides)."""
        out: set[int] = set()
        for q in states:
            out |= self._move[q][sym]
        return frozenset(out)

    # -- basic queries -----------------------------------------------------

    @cached_property
    def accepts_epsilon(self) -> bool:
        return bool(self.closure(self.initial) & self.accepting)

    def member(self, w: Word) -> bool:
        """Decide w in L by epsilon-closure simulation."""
        for sym in w:
            if sym not in self.alphabet:
                raise ValueError(f"symbol {sym!r} not in alphabet")
        frontier = self.closure(self.initial)
        for sym in w:
            frontier = self.step(frontier, sym)
            if not frontier:
                return False
        return bool(frontier & self.accepting)

    @cached_property
    def _out_adj(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {}
        for (s, _a, t) in self.transitions:
            adj.setdefault(s, []).append(t)
        return {s: tuple(ts) for s, ts in adj.items()}

    @cached_property
    def is_empty(self) -> bool:
        seen = set(self.initial)
        stack = list(self.initial)
        while stack:
            q = stack.pop()
            if q in self.accepting:
                return False
            for t in self._out_adj.get(q, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return not (seen & self.accepting)

    def words(self, maxlen: int) -> list[Word]:
        """All accepted words of length <= maxlen (brute enumeration)."""
        return [w for w in all_words(self.alphabet, maxlen) if self.member(w)]

    # -- hygiene -----------------------------------------------------------

    def trimmed(self) -> "WordLang":
        """Drop states not on some initial-to-accepting path."""
        fwd = set(self.initial)
        stack = list(self.initial)
        in_adj: dict[int, list[int]] = {}
        for (s, _a, t) in self.transitions:
            in_adj.setdefault(t, []).append(s)
        while stack:
            q = stack.pop()
            for t in self._out_adj.get(q, ()):
                if t not in fwd:
                    fwd.add(t)
                    stack.append(t)
        bwd = set(self.accepting)
        stack = list(self.accepting)
        while stack:
            q = stack.pop()
            for s in in_adj.get(q, ()):
                if s not in bwd:
                    bwd.add(s)
                    stack.append(s)
        keep = sorted(fwd & bwd)
        if not keep or not (fwd & bwd & self.accepting) or not (fwd & bwd & self.initial):
            return empty(self.alphabet)
        if len(keep) == self.n:
            return self
        remap = {q: i for i, q in enumerate(keep)}
        return WordLang(
            self.alphabet,
            len(keep),
            frozenset(
                (remap[s], a, remap[t])
                for (s, a, t) in self.transitions
                if s in remap and t in remap
            ),
            frozenset(remap[q] for q in self.initial if q in remap),
            frozenset(remap[q] for q in self.accepting if q in remap),
        )

    def compacted(self) -> "WordLang":
        """Equivalent ε-free automaton, trimmed.  Keeps iterated algebraic
        constructions (matrix products, nested stars) from accumulating
        chains of ε-states."""
        if not self._eps_adj:
            return self.trimmed()
        trans = set()
        for p in range(self.n):
            for r in self._state_closures[p]:
                for (a, t) in self._letter_out.get(r, ()):
                    trans.add((p, a, t))
        accepting = frozenset(
            p for p in range(self.n) if self._state_closures[p] & self.accepting
        )
        return WordLang(self.alphabet, self.n, frozenset(trans), self.initial, accepting).trimmed()

    @cached_property
    def _letter_out(self) -> dict[int, tuple[tuple[str, int], ...]]:
        adj: dict[int, list[tuple[str, int]]] = {}
        for (s, a, t) in self.transitions:
            if a is not None:
                adj.setdefault(s, []).append((a, t))
        return {s: tuple(v) for s, v in adj.items()}

    # -- DFA view ----------------------------------------------------------

    @cached_property
    def dfa(self) -> "Dfa":
        return determinize(self)


@dataclass(frozen=True)
class Dfa:
    """Complete deterministic automaton; delta[q][i] indexes alphabet symbol i."""

    alphabet: Alphabet
    n: int
    delta: tuple[tuple[int, ...], ...]
    initial: int
    accepting: frozenset[int]

    def __post_init__(self):
        if len(self.delta) != self.n:
            raise ValueError("delta rows must match state count")
        for row in self.delta:
            if len(row) != len(self.alphabet) or not all(0 <= q < self.n for q in row):
                raise ValueError("delta must be total over the alphabet")

    def step(self, q: int, sym: str) -> int:
        return self.delta[q][self.alphabet.index(sym)]

    def run(self, w: Word) -> int:
        q = self.initial
        for sym in w:
            q = self.step(q, sym)
        return q

    def accepts(self, w: Word) -> bool:
        return self.run(w) in self.accepting

    def sink_accepting(self) -> "Dfa":
        """Once-accepting-always-accepting variant: recognizes the words with
        some prefix in this DFA's language (the prefix closure used for
        tail events W = Lambda . Sigma^omega)."""
        sink = self.n
        k = len(self.alphabet)
        delta = []
        for q in range(self.n):
            if q in self.accepting:
                delta.append(tuple(sink for _ in range(k)))
            else:
                delta.append(self.delta[q])
        delta.append(tuple(sink for _ in range(k)))
        acc = frozenset(self.accepting | {sink})
        return Dfa(self.alphabet, self.n + 1, tuple(delta), self.initial, acc)

    def to_lang(self) -> WordLang:
        trans = frozenset(
            (q, sym, row[i])
            for q, row in enumerate(self.delta)
            for i, sym in enumerate(self.alphabet)
        )
        return WordLang(self.alphabet, self.n, trans, frozenset({self.initial}), self.accepting)


def determinize(lang: WordLang) -> Dfa:
    """Subset construction over epsilon-closures; the empty subset is the sink."""
    start = lang.closure(lang.initial)
    index: dict[frozenset[int], int] = {start: 0}
    order = [start]
    delta_rows: list[tuple[int, ...]] = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for sym in lang.alphabet:
            nxt = lang.step(cur, sym)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        delta_rows.append(tuple(row))
        i += 1
    accepting = frozenset(i for s, i in index.items() if s & lang.accepting)
    return Dfa(lang.alphabet, len(order), tuple(delta_rows), 0, accepting)


# -- constructions ----------------------------------------------------------


@lru_cache(maxsize=None)
def empty(alphabet: Alphabet) -> WordLang:
    return WordLang(alphabet, 1, frozenset(), frozenset({0}), frozenset())


@lru_cache(maxsize=None)
def epsilon(alphabet: Alphabet) -> WordLang:
    return WordLang(alphabet, 1, frozenset(), frozenset({0}), frozenset({0}))


def _surely_empty(a: WordLang) -> bool:
    """No accepting states ⟹ empty language.  Exact on trimmed values (the
    algebra below only circulates trimmed/compacted machines), merely
    sufficient on raw ones — callers use it as a fast path, never a decision."""
    return not a.accepting


def _is_epsilon_machine(a: WordLang) -> bool:
    """Structurally the one-state {ε} machine (composition unit)."""
    return a.n == 1 and not a.transitions and a.initial == a.accepting == frozenset({0})


def symbol(alphabet: Alphabet, sym: str) -> WordLang:
    if sym not in alphabet:
        raise ValueError(f"symbol {sym!r} not in alphabet")
    return WordLang(alphabet, 2, frozenset({(0, sym, 1)}), frozenset({0}), frozenset({1}))


def word_lang(alphabet: Alphabet, w: Word) -> WordLang:
    """The singleton language {w}."""
    trans = frozenset((i, sym, i + 1) for i, sym in enumerate(w))
    return WordLang(alphabet, len(w) + 1, trans, frozenset({0}), frozenset({len(w)}))


def finite_lang(alphabet: Alphabet, ws) -> WordLang:
    return union_all(alphabet, [word_lang(alphabet, tuple(w)) for w in set(map(tuple, ws))]).trimmed()


def _check_same_alphabet(a: WordLang, b: WordLang):
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")


def union(a: WordLang, b: WordLang) -> WordLang:
    _check_same_alphabet(a, b)
    if _surely_empty(a):
        return b
    if _surely_empty(b):
        return a
    off = a.n
    trans = set(a.transitions)
    trans.update((s + off, x, t + off) for (s, x, t) in b.transitions)
    return WordLang(
        a.alphabet,
        a.n + b.n,
        frozenset(trans),
        a.initial | frozenset(q + off for q in b.initial),
        a.accepting | frozenset(q + off for q in b.accepting),
    )


def union_all(alphabet: Alphabet, langs) -> WordLang:
    """Disjoint-sum union of many languages in one pass (empties skipped)."""
    live = [x for x in langs if not _surely_empty(x)]
    if not live:
        return empty(alphabet)
    if len(live) == 1:
        return live[0]
    trans: set[tuple[int, str | None, int]] = set()
    initial: set[int] = set()
    accepting: set[int] = set()
    off = 0
    for x in live:
        _check_same_alphabet(live[0], x)
        trans.update((s + off, sym, t + off) for (s, sym, t) in x.transitions)
        initial.update(q + off for q in x.initial)
        accepting.update(q + off for q in x.accepting)
        off += x.n
    return WordLang(alphabet, off, frozenset(trans), frozenset(initial), frozenset(accepting))


def concat(a: WordLang, b: WordLang) -> WordLang:
    _check_same_alphabet(a, b)
    if _surely_empty(a) or _surely_empty(b):
        return empty(a.alphabet)
    if _is_epsilon_machine(a):
        return b
    if _is_epsilon_machine(b):
        return a
    off = a.n
    trans = set(a.transitions)
    trans.update((s + off, x, t + off) for (s, x, t) in b.transitions)
    trans.update((q, None, i + off) for q in a.accepting for i in b.initial)
    return WordLang(
        a.alphabet,
        a.n + b.n,
        frozenset(trans),
        a.initial,
        frozenset(q + off for q in b.accepting),
    )


def star(a: WordLang) -> WordLang:
    """Kleene star, with a hygiene trim to keep iterated algebra bounded."""
    if _surely_empty(a) or _is_epsilon_machine(a):
        return epsilon(a.alphabet)
    trans = {(s + 1, x, t + 1) for (s, x, t) in a.transitions}
    trans.update((0, None, i + 1) for i in a.initial)
    trans.update((q + 1, None, 0) for q in a.accepting)
    out = WordLang(a.alphabet, a.n + 1, frozenset(trans), frozenset({0}), frozenset({0}))
    return out.compacted()


def derivative(lang: WordLang, sym: str) -> WordLang:
    """Left quotient {tau | sym . tau in L}."""
    if sym not in lang.alphabet:
        raise ValueError(f"symbol {sym!r} not in alphabet")
    init = set()
    for q in lang.closure(lang.initial):
        init.update(lang._sym_adj.get((q, sym), ()))
    if not init:
        return empty(lang.alphabet)
    return WordLang(lang.alphabet, lang.n, lang.transitions, frozenset(init), lang.accepting).trimmed()


# -- exact decisions --------------------------------------------------------


def inequivalence_witness(a: WordLang, b: WordLang) -> Word | None:
    """Shortest word on which the two languages disagree, or None if equivalent.

    Product-DFA breadth-first search after subset-construction determinization.
    """
    _check_same_alphabet(a, b)
    if a is b:
        return None
    if _surely_empty(a) and _surely_empty(b):
        return None
    da, db = a.dfa, b.dfa
    start = (da.initial, db.initial)
    seen = {start}
    queue: list[tuple[tuple[int, int], Word]] = [(start, ())]
    i = 0
    while i < len(queue):
        (qa, qb), w = queue[i]
        i += 1
        if (qa in da.accepting) != (qb in db.accepting):
            return w
        for sym in a.alphabet:
            nxt = (da.step(qa, sym), db.step(qb, sym))
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, w + (sym,)))
    return None


def equivalent(a: WordLang, b: WordLang) -> bool:
    return inequivalence_witness(a, b) is None


def minimal(a: WordLang) -> WordLang:
    """Canonical smallest machine for the language: determinize, merge
    indistinguishable states, drop states that cannot reach acceptance.

    The matrix algebra minimizes every entry it produces so that machine
    sizes cannot compound across recursive constructions; each minimization
    runs on a machine whose parts were already minimized, which keeps the
    subset construction itself small."""
    d = a.dfa
    k = len(a.alphabet)
    part = [1 if q in d.accepting else 0 for q in range(d.n)]
    while True:
        sig: dict = {}
        new = [0] * d.n
        for q in range(d.n):
            key = (part[q], tuple(part[t] for t in d.delta[q]))
            if key not in sig:
                sig[key] = len(sig)
            new[q] = sig[key]
        if new == part:
            break
        part = new
    nclasses = max(part) + 1 if part else 0
    cls_delta = [None] * nclasses
    cls_accepting = set()
    for q in range(d.n):
        c = part[q]
        if cls_delta[c] is None:
            cls_delta[c] = tuple(part[t] for t in d.delta[q])
        if q in d.accepting:
            cls_accepting.add(c)
    # co-accessible classes: those with a path into an accepting class
    alive = set(cls_accepting)
    changed = True
    while changed:
        changed = False
        for c in range(nclasses):
            if c not in alive and any(t in alive for t in cls_delta[c]):
                alive.add(c)
                changed = True
    if part and part[d.initial] not in alive:
        return empty(a.alphabet)
    order = sorted(alive)
    remap = {c: i for i, c in enumerate(order)}
    trans = frozenset(
        (remap[c], a.alphabet.symbols[i], remap[cls_delta[c][i]])
        for c in order
        for i in range(k)
        if cls_delta[c][i] in alive
    )
    return WordLang(
        a.alphabet,
        len(order),
        trans,
        frozenset({remap[part[d.initial]]}),
        frozenset(remap[c] for c in cls_accepting),
    )


def is_subset(a: WordLang, b: WordLang) -> bool:
    """Exact inclusion L(a) <= L(b) by product reachability."""
    _check_same_alphabet(a, b)
    da, db = a.dfa, b.dfa
    start = (da.initial, db.initial)
    seen = {start}
    stack = [start]
    while stack:
        qa, qb = stack.pop()
        if qa in da.accepting and qb not in db.accepting:
            return False
        for sym in a.alphabet:
            nxt = (da.step(qa, sym), db.step(qb, sym))
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True


def disjoint(a: WordLang, b: WordLang) -> bool:
    """Exact emptiness of the intersection."""
    _check_same_alphabet(a, b)
    da, db = a.dfa, b.dfa
    start = (da.initial, db.initial)
    seen = {start}
    stack = [start]
    while stack:
        qa, qb = stack.pop()
        if qa in da.accepting and qb in db.accepting:
            return False
        for sym in a.alphabet:
            nxt = (da.step(qa, sym), db.step(qb, sym))
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True


def subset_of_letters(lang: WordLang) -> bool:
    """Exact test that every accepted word has length <= 1 (one-step arrows)."""
    ab = lang.alphabet
    # 3-state counter DFA for Sigma ... of length >= 2
    two_or_more = WordLang(
        ab,
        3,
        frozenset(
            {(0, s, 1) for s in ab} | {(1, s, 2) for s in ab} | {(2, s, 2) for s in ab}
        ),
        frozenset({0}),
        frozenset({2}),
    )
    return disjoint(lang, two_or_more)


# -- textual regular expressions --------------------------------------------


def parse_regex(text: str, alphabet: Alphabet) -> WordLang:
    """Parse the toolkit's regex syntax into a language.

    Grammar: union `+`, concatenation `.` (juxtaposition works for single-char
    symbols), star `*`, parentheses.  The literal `0` denotes the empty
    language and `e` the empty word -- unless that character is itself an
    alphabet symbol, in which case the symbol reading wins (as in alphabets
    like {0,1}).
    """
    toks = [c for c in text if not c.isspace()]
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        t = toks[pos]
        pos += 1
        return t

    def parse_union() -> WordLang:
        out = parse_cat()
        while peek() == "+":
            take()
            out = union(out, parse_cat())
        return out

    def parse_cat() -> WordLang:
        out = parse_starred()
        while True:
            c = peek()
            if c == ".":
                take()
                out = concat(out, parse_starred())
            elif c is not None and c not in ")+*":
                out = concat(out, parse_starred())
            else:
                return out

    def parse_starred() -> WordLang:
        out = parse_atom()
        while peek() == "*":
            take()
            out = star(out)
        return out

    def parse_atom() -> WordLang:
        c = peek()
        if c is None:
            raise ValueError("unexpected end of regex")
        if c == "(":
            take()
            out = parse_union()
            if peek() != ")":
                raise ValueError("unbalanced parenthesis in regex")
            take()
            return out
        take()
        if c in alphabet:
            return symbol(alphabet, c)
        if c == "0":
            return empty(alphabet)
        if c == "e":
            return epsilon(alphabet)
        raise ValueError(f"regex symbol {c!r} not in alphabet")

    if not toks:
        return epsilon(alphabet)
    out = parse_union()
    if pos != len(toks):
        raise ValueError(f"trailing regex input at {''.join(toks[pos:])!r}")
    return out
