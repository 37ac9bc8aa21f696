"""Omega-regular language values with decidable lasso membership.

A value denotes L(buchi) ∪ U·Σ^ω where `buchi` is a transition-marked Büchi
automaton (acceptance sits on transitions, which survives ε-elimination
cleanly) and `tail` is a regular language U of finite prefixes after which
every continuation is accepted.  The split representation keeps the
"universal tail" clause of the matrix-omega formula auditable; it is a
representation choice of this toolkit, not a canonical one.

Equality is deliberately bounded: languages are compared on all lasso words
u·v^ω with |u|,|v| ≤ B.  Ultimately periodic words separate omega-regular
languages, so raising B strictly increases discrimination; full equivalence
(complementation) is out of scope.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

from .words import Alphabet, Word, WordLang, concat, empty, minimal, star, union as lang_union, union_all

Lasso = tuple[Word, Word]


@dataclass(frozen=True)
class LassoWord:
    """Ultimately periodic word u·v^ω with non-empty period v."""

    prefix: Word
    period: Word

    def __post_init__(self):
        if not self.period:
            raise ValueError("lasso period must be non-empty")

    def canonical(self) -> "LassoWord":
        """Unique representative: primitive period, loop letters absorbed out
        of the prefix.  Two lassos denote the same word iff canonical forms
        are equal."""
        v = self.period
        for d in range(1, len(v) + 1):
            if len(v) % d == 0 and v == v[:d] * (len(v) // d):
                v = v[:d]
                break
        u = self.prefix
        while u and u[-1] == v[-1]:
            v = (v[-1],) + v[:-1]
            u = u[:-1]
        return LassoWord(u, v)

    def letter(self, i: int) -> str:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def __str__(self):
        return f"{''.join(self.prefix)}:{''.join(self.period)}"


@dataclass(frozen=True)
class OmegaLang:
    """Büchi part (no ε-moves, per-transition accepting marks) plus tail U.

    Transitions are (src, symbol, dst, mark); a run is accepting when it
    uses marked transitions infinitely often.  The denotation additionally
    contains every w with some finite prefix in `tail`.
    """

    alphabet: Alphabet
    n: int
    trans: frozenset[tuple[int, str, int, bool]]
    initial: frozenset[int]
    tail: WordLang

    def __post_init__(self):
        for (s, a, t, _m) in self.trans:
            if not (0 <= s < self.n and 0 <= t < self.n):
                raise ValueError("transition state out of range")
            if a not in self.alphabet:
                raise ValueError(f"transition symbol {a!r} not in alphabet")
        if not all(0 <= q < self.n for q in self.initial):
            raise ValueError("initial state out of range")
        if self.tail.alphabet != self.alphabet:
            raise ValueError("tail alphabet mismatch")

    @cached_property
    def _adj(self) -> dict[tuple[int, str], tuple[tuple[int, bool], ...]]:
        adj: dict[tuple[int, str], list[tuple[int, bool]]] = {}
        for (s, a, t, m) in self.trans:
            adj.setdefault((s, a), []).append((t, m))
        return {k: tuple(v) for k, v in adj.items()}


def eliminate_epsilon(
    alphabet: Alphabet,
    n: int,
    raw: set[tuple[int, str | None, int, bool]],
    initial: frozenset[int],
    tail: WordLang,
) -> OmegaLang:
    """Fold ε-moves (symbol None) into the sources of letter transitions,
    tracking whether a marked edge occurred on the folded ε-path.  Marks can
    only help transition-based acceptance, so per (src, letter, dst) the
    maximal achievable mark is kept.  Infinite all-ε suffixes read no ω-word
    and vanish here; their contribution belongs in `tail`."""
    eps_adj: dict[int, list[tuple[int, bool]]] = {}
    letter_edges: dict[int, list[tuple[str, int, bool]]] = {}
    for (s, a, t, m) in raw:
        if a is None:
            eps_adj.setdefault(s, []).append((t, m))
        else:
            letter_edges.setdefault(s, []).append((a, t, m))

    def closure(p: int) -> dict[int, bool]:
        # best achievable mark on an ε-path p -> r, per target r
        best = {p: False}
        stack = [(p, False)]
        while stack:
            q, f = stack.pop()
            for (t, m) in eps_adj.get(q, ()):
                nf = f or m
                if t not in best or (nf and not best[t]):
                    best[t] = nf if t not in best else (best[t] or nf)
                    stack.append((t, best[t]))
        return best

    out: dict[tuple[int, str, int], bool] = {}
    for p in range(n):
        for r, f in closure(p).items():
            for (a, q, m) in letter_edges.get(r, ()):
                key = (p, a, q)
                out[key] = out.get(key, False) or f or m
    trans = frozenset((s, a, t, m) for (s, a, t), m in out.items())

    # reachability trim, then liveness trim: a state contributes to the Büchi
    # language only if it reaches a strongly connected component containing a
    # marked internal edge (an accepting run's infinite suffix lives in one).
    seen = set(initial)
    stack = list(initial)
    adj: dict[int, list[int]] = {}
    for (s, _a, t, _m) in trans:
        adj.setdefault(s, []).append(t)
    while stack:
        q = stack.pop()
        for t in adj.get(q, ()):
            if t not in seen:
                seen.add(t)
                stack.append(t)

    comp = _scc({q: [t for t in adj.get(q, ()) if t in seen] for q in seen})
    good = {
        comp[s]
        for (s, _a, t, m) in trans
        if m and s in seen and t in seen and comp[s] == comp[t]
    }
    live = {q for q in seen if comp[q] in good}
    rev: dict[int, list[int]] = {}
    for (s, _a, t, _m) in trans:
        if s in seen and t in seen:
            rev.setdefault(t, []).append(s)
    stack = list(live)
    while stack:
        q = stack.pop()
        for s in rev.get(q, ()):
            if s not in live:
                live.add(s)
                stack.append(s)

    keep = sorted(live)
    remap = {q: i for i, q in enumerate(keep)}
    return OmegaLang(
        alphabet,
        len(keep),
        frozenset(
            (remap[s], a, remap[t], m)
            for (s, a, t, m) in trans
            if s in remap and t in remap
        ),
        frozenset(remap[q] for q in initial if q in remap),
        tail.compacted(),
    )


def empty_omega(alphabet: Alphabet) -> OmegaLang:
    return OmegaLang(alphabet, 0, frozenset(), frozenset(), empty(alphabet))


def sigma_omega(alphabet: Alphabet) -> OmegaLang:
    """All infinite words: tail U = {ε}."""
    from .words import epsilon

    return OmegaLang(alphabet, 0, frozenset(), frozenset(), epsilon(alphabet))


def _surely_empty_omega(w: OmegaLang) -> bool:
    """Fast structural emptiness: no Büchi states and no tail words.  Exact on
    values produced by eliminate_epsilon (which liveness-trims); sufficient
    in general."""
    return w.n == 0 and not w.tail.accepting


def omega_union(a: OmegaLang, b: OmegaLang) -> OmegaLang:
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")
    if _surely_empty_omega(a):
        return b
    if _surely_empty_omega(b):
        return a
    off = a.n
    trans = set(a.trans)
    trans.update((s + off, x, t + off, m) for (s, x, t, m) in b.trans)
    return OmegaLang(
        a.alphabet,
        a.n + b.n,
        frozenset(trans),
        a.initial | frozenset(q + off for q in b.initial),
        lang_union(a.tail, b.tail).compacted(),
    )


def omega_union_all(ws, alphabet: Alphabet) -> OmegaLang:
    out = empty_omega(alphabet)
    for w in ws:
        out = omega_union(out, w)
    return out


def concat_tail(lang: WordLang, w: OmegaLang) -> OmegaLang:
    """L·W: prefix the Büchi part with an ε-NFA for L; the universal-tail
    prefixes become L·U."""
    from .words import _is_epsilon_machine, _surely_empty

    if lang.alphabet != w.alphabet:
        raise ValueError("alphabet mismatch")
    if _surely_empty(lang) or _surely_empty_omega(w):
        return empty_omega(w.alphabet)
    if _is_epsilon_machine(lang):
        return w
    off = lang.n
    raw: set[tuple[int, str | None, int, bool]] = {
        (s, a, t, False) for (s, a, t) in lang.transitions
    }
    raw.update((s + off, a, t + off, m) for (s, a, t, m) in w.trans)
    raw.update((q, None, i + off, False) for q in lang.accepting for i in w.initial)
    return eliminate_epsilon(
        w.alphabet,
        off + w.n,
        raw,
        frozenset(lang.initial),
        concat(lang, w.tail),
    )


def omega_is_empty(w: OmegaLang) -> bool:
    """True iff the denotation contains no word at all.

    The Büchi part is nonempty iff some strongly connected component that is
    reachable from an initial state has an internal marked edge; the tail part
    is nonempty iff U is (any prefix extends to an ω-word).
    """
    if not w.tail.is_empty:
        return False
    adj: dict[int, list[int]] = {}
    for (s, _a, t, _m) in w.trans:
        adj.setdefault(s, []).append(t)
    seen = set(w.initial)
    stack = list(w.initial)
    while stack:
        q = stack.pop()
        for t in adj.get(q, ()):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    if not seen:
        return True
    comp = _scc({q: [t for t in adj.get(q, ()) if t in seen] for q in seen})
    return not any(
        m and s in seen and t in seen and comp[s] == comp[t]
        for (s, a, t, m) in w.trans
    )


def rational_pairs(w: OmegaLang) -> list[tuple[WordLang, WordLang]]:
    """Decompose the denotation as a finite union ⋃ᵢ Lᵢ·Rᵢ^ω.

    One pair per usable marked edge e = (p,a,q): L = (words init→p)·a and
    R = (words q→p)·a.  A run accepts iff it crosses some marked edge
    infinitely often, and cutting the run at each crossing of e yields exactly
    such a factorization, so the union over marked edges is the whole Büchi
    part.  The tail clause U·Σ^ω contributes the pair (U, Σ).
    """
    from .words import finite_lang

    pairs: list[tuple[WordLang, WordLang]] = []
    triples = frozenset((s, a, t) for (s, a, t, _m) in w.trans)

    def between(src: frozenset[int], dst: int) -> WordLang:
        return WordLang(w.alphabet, w.n, triples, src, frozenset({dst})).trimmed()

    adj: dict[int, set[int]] = {}
    for (s, _a, t, _m) in w.trans:
        adj.setdefault(s, set()).add(t)
    seen = set(w.initial)
    stack = list(w.initial)
    while stack:
        q = stack.pop()
        for t in adj.get(q, ()):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    reach: dict[int, set[int]] = {}

    def reaches(src: int, dst: int) -> bool:
        if src not in reach:
            fr = {src}
            todo = [src]
            while todo:
                q = todo.pop()
                for t in adj.get(q, ()):
                    if t not in fr:
                        fr.add(t)
                        todo.append(t)
            reach[src] = fr
        return dst in reach[src]

    for (p, a, q, m) in sorted(w.trans):
        if not m or p not in seen or not reaches(q, p):
            continue
        letter = finite_lang(w.alphabet, [(a,)])
        pairs.append(
            (concat(between(w.initial, p), letter), concat(between(frozenset({q}), p), letter))
        )
    if not w.tail.is_empty:
        sigma = finite_lang(w.alphabet, [(a,) for a in w.alphabet.symbols])
        pairs.append((w.tail, sigma))
    return pairs


def omega_from_pairs(
    pairs: list[tuple[WordLang, WordLang]], alphabet: Alphabet
) -> OmegaLang:
    """Assemble ⋃ᵢ Lᵢ·Rᵢ^ω as an OmegaLang value (for round-trip checks)."""
    parts = []
    for (lang, rep) in pairs:
        parts.append(concat_tail(lang, omega_of_matrix([[rep]], alphabet)[0]))
    return omega_union_all(parts, alphabet)


# -- lasso membership ---------------------------------------------------------


def lasso_member(w: OmegaLang, lasso: LassoWord) -> bool:
    """Decide u·v^ω ∈ denotation.

    Tail clause: walk U's DFA along the eventually periodic stream until a
    (DFA state, period position) pair repeats, accepting on any visit to an
    accepting state.  Büchi clause: compute the one-period step relation
    annotated with best achievable mark, then look for a reachable strongly
    connected component containing an internal marked edge.
    """
    for i in range(len(lasso.prefix) + len(lasso.period)):
        if lasso.letter(i) not in w.alphabet:
            raise ValueError(f"symbol {lasso.letter(i)!r} not in alphabet")

    if not w.tail.is_empty:
        dfa = w.tail.dfa
        q = dfa.initial
        if q in dfa.accepting:
            return True
        for sym in lasso.prefix:
            q = dfa.step(q, sym)
            if q in dfa.accepting:
                return True
        v = lasso.period
        seen = set()
        pos = 0
        while (q, pos) not in seen:
            seen.add((q, pos))
            q = dfa.step(q, v[pos])
            pos = (pos + 1) % len(v)
            if q in dfa.accepting:
                return True

    if w.n == 0:
        return False
    adj = w._adj
    frontier = set(w.initial)
    for sym in lasso.prefix:
        frontier = {t for s in frontier for (t, _m) in adj.get((s, sym), ())}
        if not frontier:
            return False

    # one-period relation p -> {(q, best mark)}
    def period_step(p: int) -> dict[int, bool]:
        cur = {p: False}
        for sym in lasso.period:
            nxt: dict[int, bool] = {}
            for s, f in cur.items():
                for (t, m) in adj.get((s, sym), ()):
                    nf = f or m
                    nxt[t] = nxt.get(t, False) or nf
            cur = nxt
            if not cur:
                break
        return cur

    rel: dict[int, dict[int, bool]] = {}
    stack = list(frontier)
    while stack:
        p = stack.pop()
        if p in rel:
            continue
        rel[p] = period_step(p)
        stack.extend(q for q in rel[p] if q not in rel)

    comp = _scc({p: list(targets.keys()) for p, targets in rel.items()})
    for p, targets in rel.items():
        for q, m in targets.items():
            if m and comp[p] == comp[q]:
                return True
    return False


def _scc(adj: dict[int, list[int]]) -> dict[int, int]:
    """Tarjan strongly connected components (iterative); returns node → id."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on: set[int] = set()
    stack: list[int] = []
    comp: dict[int, int] = {}
    counter = itertools.count()
    cid = itertools.count()
    for root in adj:
        if root in index:
            continue
        work = [(root, iter(adj.get(root, ())))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for u in it:
                if u not in adj:
                    continue
                if u not in index:
                    index[u] = low[u] = next(counter)
                    stack.append(u)
                    on.add(u)
                    work.append((u, iter(adj.get(u, ()))))
                    advanced = True
                    break
                elif u in on:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                c = next(cid)
                while True:
                    u = stack.pop()
                    on.discard(u)
                    comp[u] = c
                    if u == v:
                        break
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
    return comp


# -- bounded equality ---------------------------------------------------------


@lru_cache(maxsize=None)
def lassos_up_to(alphabet: Alphabet, bound: int) -> tuple[LassoWord, ...]:
    """Canonical lassos with |u| ≤ B, 1 ≤ |v| ≤ B, in deterministic order
    (total length, then prefix length, then lexicographic)."""
    seen = set()
    out = []
    syms = alphabet.symbols
    for total in range(1, 2 * bound + 1):
        for ulen in range(0, bound + 1):
            vlen = total - ulen
            if not (1 <= vlen <= bound):
                continue
            for u in itertools.product(syms, repeat=ulen):
                for v in itertools.product(syms, repeat=vlen):
                    c = LassoWord(u, v).canonical()
                    if c not in seen:
                        seen.add(c)
                        out.append(c)
    return tuple(out)


@lru_cache(maxsize=8192)
def _signature(w: OmegaLang, bound: int) -> tuple[bool, ...]:
    return tuple(lasso_member(w, l) for l in lassos_up_to(w.alphabet, bound))


def bounded_equal(a: OmegaLang, b: OmegaLang, bound: int) -> tuple[bool, LassoWord | None]:
    """Compare on every canonical lasso within the bound; on disagreement
    return the first offending lasso.  Sound difference detection, bounded
    equality only."""
    if a is b:
        return (True, None)
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")
    sa, sb = _signature(a, bound), _signature(b, bound)
    if sa == sb:
        return True, None
    for lasso, x, y in zip(lassos_up_to(a.alphabet, bound), sa, sb):
        if x != y:
            return False, lasso
    return True, None


# -- matrices of regular languages -------------------------------------------

Matrix = list[list[WordLang]]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    """(a·b)_{ik} = ⋃_j a_{ij}·b_{jk}."""
    if not a or not b:
        return []
    if len(a[0]) != len(b):
        raise ValueError("matrix shape mismatch")
    ab = a[0][0].alphabet if a and a[0] else (b[0][0].alphabet if b and b[0] else None)
    out = []
    for i in range(len(a)):
        row = []
        for k in range(len(b[0])):
            row.append(
                minimal(
                    union_all(ab, [concat(a[i][j], b[j][k]) for j in range(len(b))])
                )
            )
        out.append(row)
    return out


def mat_join(a: Matrix, b: Matrix) -> Matrix:
    return [
        [lang_union(x, y).compacted() for x, y in zip(ra, rb)] for ra, rb in zip(a, b)
    ]


def mat_star(m: Matrix) -> Matrix:
    """Matrix Kleene star by 1/(n-1) block decomposition."""
    n = len(m)
    if n == 0:
        return []
    ab = m[0][0].alphabet
    if n == 1:
        return [[minimal(star(m[0][0]))]]
    a = m[0][0]
    brow = m[0][1:]
    ccol = [m[i][0] for i in range(1, n)]
    d = [row[1:] for row in m[1:]]
    f = minimal(star(a))
    inner = [
        [
            minimal(lang_union(d[j][k], concat(concat(ccol[j], f), brow[k])))
            for k in range(n - 1)
        ]
        for j in range(n - 1)
    ]
    g = mat_star(inner)
    # s12_k = f · ⋃_j b_j · g_{jk}
    s12 = []
    for k in range(n - 1):
        acc = union_all(ab, [concat(brow[j], g[j][k]) for j in range(n - 1)])
        s12.append(minimal(concat(f, acc)))
    # s21_j = (⋃_k g_{jk} · c_k) · f
    s21 = []
    for j in range(n - 1):
        acc = union_all(ab, [concat(g[j][k], ccol[k]) for k in range(n - 1)])
        s21.append(minimal(concat(acc, f)))
    # s11 = f ∨ ⋃_k s12_k · c_k · f
    s11 = minimal(
        union_all(ab, [f] + [concat(concat(s12[k], ccol[k]), f) for k in range(n - 1)])
    )
    out = [[s11] + s12]
    for j in range(n - 1):
        out.append([s21[j]] + list(g[j]))
    return out


def mat_plus(m: Matrix) -> Matrix:
    return mat_mul(mat_star(m), m)


def omega_of_matrix(m: Matrix, alphabet: Alphabet) -> list[OmegaLang]:
    """Greatest-fixpoint vector of the step matrix: component i holds every
    infinite product σ₁σ₂… along infinite index paths from i, where a product
    that is eventually all-ε contributes its finite part followed by Σ^ω.

    Built on M⁺ (saturation first, which the ω-of-plus identity licenses):
    universal tails come from reaching an index on an ε-cycle of M⁺; the
    genuinely infinite products come from gluing entry automata between index
    hubs, marking hub-entry moves as accepting, and eliminating ε.
    """
    n = len(m)
    for row in m:
        if len(row) != n:
            raise ValueError("matrix must be square")
    if n == 0:
        return []
    mp = mat_plus(m)

    eps_edge = [[mp[j][k].accepts_epsilon for k in range(n)] for j in range(n)]
    for t in range(n):  # transitive closure (already transitive; cheap guard)
        for j in range(n):
            for k in range(n):
                if eps_edge[j][t] and eps_edge[t][k]:
                    eps_edge[j][k] = True
    on_cycle = [eps_edge[j][j] for j in range(n)]

    tails = [
        union_all(alphabet, [mp[i][j] for j in range(n) if on_cycle[j]]).compacted()
        for i in range(n)
    ]

    # glue: index hubs 0..n-1, then entry copies (empty entries add nothing)
    raw: set[tuple[int, str | None, int, bool]] = set()
    off = n
    for i in range(n):
        for j in range(n):
            entry = mp[i][j]
            if not entry.accepting:
                continue
            raw.update((s + off, x, t + off, False) for (s, x, t) in entry.transitions)
            raw.update((i, None, s + off, False) for s in entry.initial)
            raw.update((s + off, None, j, True) for s in entry.accepting)
            off += entry.n

    return [
        eliminate_epsilon(alphabet, off, raw, frozenset({i}), tails[i])
        for i in range(n)
    ]
