"""Labelled transition systems with finite and infinite behaviour.

Arrows m ⇸ p are m×p matrices of regular languages (finite runs that exit
through a codomain port) together with a length-m vector of ω-regular
languages (runs that never exit).  Composition threads finite runs and
collects the infinite ones:

    fin(g·f)[i][k] = ⋃_j fin(f)[i][j] · fin(g)[j][k]
    inf(g·f)[i]    = inf(f)[i] ∪ ⋃_j fin(f)[i][j] · inf(g)[j]

Saturation and ω-iteration admit closed forms over this representation —
fin* is the matrix Kleene star, inf(α*) = fin(α)*·inf(α), and
ω(β) = fin(β)^ω ∨ fin(β)*·inf(β) — which the tests cross-validate against
the generic iterative engines and independent path/run oracles rather than
assume.

Nondeterministic automata with ε-moves live inside the one-step fragment
(every matrix entry a subset of Σ ∪ {ε}, empty inf); their finite and
ω-behaviours are !·f_F·α* and (f_F·α⁺)^ω.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

from . import kernel, terms
from .kernel import Sampler, TheoryInstance, doubled_loop
from .omega import (
    OmegaLang,
    bounded_equal,
    concat_tail,
    empty_omega,
    mat_star,
    omega_is_empty,
    omega_of_matrix,
    omega_union,
    omega_union_all,
    sigma_omega,
)
from .terms import Base, Compose, Cotuple, Empty, Gen, Star, Term
from .words import (
    Alphabet,
    WordLang,
    concat,
    empty,
    epsilon,
    equivalent,
    finite_lang,
    subset_of_letters,
    union as lang_union,
    union_all,
)


def _summary(lang: WordLang) -> str:
    if lang.is_empty:
        return "0"
    ws = list(itertools.islice(lang.words(2), 4))
    body = ",".join("e" if not w else "".join(w) for w in ws)
    return "{" + body + (",.." if len(ws) == 4 else "") + "}"


@dataclass(frozen=True)
class LtsMorphism:
    """An arrow dom ⇸ cod: language matrix `fin` plus ω-language vector `inf`."""

    dom: int
    cod: int
    fin: tuple[tuple[WordLang, ...], ...]
    inf: tuple[OmegaLang, ...]
    alphabet: Alphabet

    def __post_init__(self):
        if len(self.fin) != self.dom or len(self.inf) != self.dom:
            raise ValueError("row count mismatch")
        for row in self.fin:
            if len(row) != self.cod:
                raise ValueError("column count mismatch")
            for entry in row:
                if entry.alphabet != self.alphabet:
                    raise ValueError("alphabet mismatch in fin entry")
        for w in self.inf:
            if w.alphabet != self.alphabet:
                raise ValueError("alphabet mismatch in inf entry")

    def __repr__(self):
        rows = []
        for i in range(self.dom):
            cells = " ".join(_summary(self.fin[i][k]) for k in range(self.cod))
            tag = "" if omega_is_empty(self.inf[i]) else " +inf"
            rows.append(f"[{cells}{tag}]")
        return f"<lts {self.dom}x{self.cod} {' '.join(rows)}>"


def lts_arrow(
    fin: Sequence[Sequence[WordLang]],
    inf: Sequence[OmegaLang] | None,
    cod: int,
    alphabet: Alphabet,
) -> LtsMorphism:
    """Convenience constructor; `inf = None` means all-empty."""
    dom = len(fin)
    if inf is None:
        inf = [empty_omega(alphabet)] * dom
    return LtsMorphism(
        dom, cod, tuple(tuple(row) for row in fin), tuple(inf), alphabet
    )


class LtsInstance(TheoryInstance):
    """Theory instance over a fixed alphabet.

    Finite parts are compared by exact language equivalence; ω-parts by
    `bounded_equal` on all lasso words with |u|,|v| ≤ bound.
    """

    name = "lts"
    supports_omega = True

    def __init__(self, alphabet: Alphabet, bound: int = 3):
        self.alphabet = alphabet
        self.bound = bound

    # -- structure -------------------------------------------------------

    def dims(self, f: LtsMorphism) -> tuple[int, int]:
        return (f.dom, f.cod)

    def compose(self, g: LtsMorphism, f: LtsMorphism) -> LtsMorphism:
        if f.cod != g.dom or f.alphabet != g.alphabet:
            raise ValueError("composition mismatch")
        fin = []
        inf = []
        for i in range(f.dom):
            row = []
            for k in range(g.cod):
                row.append(
                    union_all(
                        f.alphabet,
                        [concat(f.fin[i][j], g.fin[j][k]) for j in range(f.cod)],
                    ).compacted()
                )
            fin.append(tuple(row))
            w = f.inf[i]
            for j in range(f.cod):
                w = omega_union(w, concat_tail(f.fin[i][j], g.inf[j]))
            inf.append(w)
        return LtsMorphism(f.dom, g.cod, tuple(fin), tuple(inf), f.alphabet)

    def join(self, f: LtsMorphism, g: LtsMorphism) -> LtsMorphism:
        if (f.dom, f.cod) != (g.dom, g.cod) or f.alphabet != g.alphabet:
            raise ValueError("join mismatch")
        fin = tuple(
            tuple(lang_union(x, y).compacted() for x, y in zip(rf, rg))
            for rf, rg in zip(f.fin, g.fin)
        )
        inf = tuple(omega_union(x, y) for x, y in zip(f.inf, g.inf))
        return LtsMorphism(f.dom, f.cod, fin, inf, f.alphabet)

    def bottom(self, m: int, p: int) -> LtsMorphism:
        e = empty(self.alphabet)
        return LtsMorphism(
            m,
            p,
            tuple((e,) * p for _ in range(m)),
            (empty_omega(self.alphabet),) * m,
            self.alphabet,
        )

    def base_map(self, mapping: Sequence[int], p: int) -> LtsMorphism:
        e = empty(self.alphabet)
        eps = epsilon(self.alphabet)
        fin = tuple(
            tuple(eps if k == j else e for k in range(p)) for j in mapping
        )
        return LtsMorphism(
            len(mapping), p, fin, (empty_omega(self.alphabet),) * len(mapping), self.alphabet
        )

    def cotuple(self, arrows: Sequence[LtsMorphism]) -> LtsMorphism:
        if not arrows:
            raise ValueError("empty cotuple")
        cod = arrows[0].cod
        if any(a.cod != cod or a.alphabet != self.alphabet for a in arrows):
            raise ValueError("cotuple mismatch")
        fin = tuple(row for a in arrows for row in a.fin)
        inf = tuple(w for a in arrows for w in a.inf)
        return LtsMorphism(sum(a.dom for a in arrows), cod, fin, inf, self.alphabet)

    def equal(self, f: LtsMorphism, g: LtsMorphism) -> bool:
        if (f.dom, f.cod) != (g.dom, g.cod):
            return False
        for rf, rg in zip(f.fin, g.fin):
            for x, y in zip(rf, rg):
                if not equivalent(x, y):
                    return False
        for x, y in zip(f.inf, g.inf):
            if not bounded_equal(x, y, self.bound)[0]:
                return False
        return True

    def is_one_step(self, f: LtsMorphism) -> bool:
        return all(
            subset_of_letters(entry) for row in f.fin for entry in row
        ) and all(omega_is_empty(w) for w in f.inf)

    # -- fixpoints (closed forms) -----------------------------------------

    def star(self, alpha: LtsMorphism) -> LtsMorphism:
        if alpha.dom != alpha.cod:
            raise ValueError("star needs a square arrow")
        n = alpha.dom
        fs = mat_star([list(row) for row in alpha.fin])
        inf = []
        for i in range(n):
            w = empty_omega(self.alphabet)
            for j in range(n):
                w = omega_union(w, concat_tail(fs[i][j], alpha.inf[j]))
            inf.append(w)
        return LtsMorphism(
            n, n, tuple(tuple(row) for row in fs), tuple(inf), self.alphabet
        )

    def omega(self, beta: LtsMorphism) -> LtsMorphism:
        if beta.dom != beta.cod:
            raise ValueError("omega needs a square arrow")
        n = beta.dom
        pure = omega_of_matrix([list(row) for row in beta.fin], self.alphabet)
        carried = self.star(beta).inf
        inf = tuple(omega_union(p, c) for p, c in zip(pure, carried))
        return LtsMorphism(n, 0, tuple(() for _ in range(n)), inf, self.alphabet)

    def top_omega(self, n: int) -> LtsMorphism:
        return LtsMorphism(
            n, 0, tuple(() for _ in range(n)), (sigma_omega(self.alphabet),) * n, self.alphabet
        )


# -- automata ------------------------------------------------------------


@dataclass(frozen=True)
class NdAutomaton:
    """Nondeterministic automaton with ε-moves and accepting set F.

    Transitions are (src, symbol, dst) with symbol None for ε.  The derived
    one-step arrow has fin[i][j] = the set of labels carrying i to j.
    """

    alphabet: Alphabet
    n: int
    transitions: frozenset[tuple[int, str | None, int]]
    accepting: frozenset[int]

    def __post_init__(self):
        for (s, a, t) in self.transitions:
            if not (0 <= s < self.n and 0 <= t < self.n):
                raise ValueError("transition state out of range")
            if a is not None and a not in self.alphabet:
                raise ValueError(f"symbol {a!r} not in alphabet")
        if not all(0 <= q < self.n for q in self.accepting):
            raise ValueError("accepting state out of range")

    @cached_property
    def morphism(self) -> LtsMorphism:
        words_at: dict[tuple[int, int], list[tuple[str, ...]]] = {}
        for (s, a, t) in self.transitions:
            words_at.setdefault((s, t), []).append(() if a is None else (a,))
        fin = tuple(
            tuple(
                finite_lang(self.alphabet, words_at.get((i, j), []))
                for j in range(self.n)
            )
            for i in range(self.n)
        )
        return LtsMorphism(
            self.n, self.n, fin, (empty_omega(self.alphabet),) * self.n, self.alphabet
        )


def f_F(accepting: frozenset[int] | set[int], n: int, alphabet: Alphabet) -> LtsMorphism:
    """Diagonal partial identity: {ε} at accepting states, ∅ elsewhere."""
    if not all(0 <= q < n for q in accepting):
        raise ValueError("accepting state out of range")
    e = empty(alphabet)
    eps = epsilon(alphabet)
    fin = tuple(
        tuple(eps if (i == j and i in accepting) else e for j in range(n))
        for i in range(n)
    )
    return LtsMorphism(n, n, fin, (empty_omega(alphabet),) * n, alphabet)


def behaviour(auto: NdAutomaton, instance: LtsInstance | None = None) -> LtsMorphism:
    """!·f_F·α* : n ⇸ 1 — component i is the language accepted from state i."""
    inst = instance or LtsInstance(auto.alphabet)
    bang = inst.base_map((0,) * auto.n, 1)
    ff = f_F(auto.accepting, auto.n, auto.alphabet)
    return inst.compose(bang, inst.compose(ff, inst.star(auto.morphism)))


def behaviour_lang(auto: NdAutomaton, state: int) -> WordLang:
    return behaviour(auto).fin[state][0]


def omega_behaviour(auto: NdAutomaton, instance: LtsInstance | None = None) -> LtsMorphism:
    """(f_F·α⁺)^ω : n ⇸ 0 — component i is the Büchi language of state i."""
    inst = instance or LtsInstance(auto.alphabet)
    ff = f_F(auto.accepting, auto.n, auto.alphabet)
    return inst.omega(inst.compose(ff, inst.plus(auto.morphism)))


def omega_behaviour_lang(auto: NdAutomaton, state: int) -> OmegaLang:
    return omega_behaviour(auto).inf[state]


# -- rational terms over the instance -------------------------------------


def to_rational(auto: NdAutomaton, state: int) -> tuple[Term, dict[str, LtsMorphism]]:
    """Express behaviour(auto) at `state` as a 1 ⇸ 1 rational term.

    The term is !·f_F·(gen α)*·in_state with f_F written as a cotuple of
    base/empty rows; the generator table binds 'alpha' to the one-step arrow.
    """
    if not (0 <= state < auto.n):
        raise ValueError("state out of range")
    n = auto.n
    rows: list[Term] = [
        Base((j,), n) if j in auto.accepting else Empty(1, n) for j in range(n)
    ]
    ff_term: Term = Cotuple(tuple(rows))
    bang: Term = Base((0,) * n, 1)
    term = Compose(bang, Compose(ff_term, Compose(Star(Gen("alpha")), Base((state,), n))))
    return term, {"alpha": auto.morphism}


def check_generators(gens: Mapping[str, LtsMorphism], instance: LtsInstance):
    """Generators must be one-step (entries ⊆ Σ ∪ {ε}, no infinite part)."""
    for name, arrow in gens.items():
        if not instance.is_one_step(arrow):
            raise ValueError(f"generator {name!r} is not a one-step arrow")


def omega_rational_eval(
    rs: Sequence[Term],
    r: Term,
    gens: Mapping[str, LtsMorphism],
    instance: LtsInstance,
) -> OmegaLang:
    """[r₁..r_m]^ω · r for rational rᵢ: 1 ⇸ m and r: 1 ⇸ m."""
    m = len(rs)
    gen_dims = {k: instance.dims(v) for k, v in gens.items()}
    for t in list(rs) + [r]:
        if terms.typecheck(t, gen_dims) != (1, m):
            raise ValueError("each component must have type 1 ⇸ m")
    s = instance.cotuple([terms.eval_term(t, gens, instance) for t in rs])
    r_arrow = terms.eval_term(r, gens, instance)
    return instance.compose(instance.omega(s), r_arrow).inf[0]


def omega_doubled_arrows(
    rs_arrows: Sequence[LtsMorphism],
    r_arrow: LtsMorphism,
    instance: LtsInstance,
) -> OmegaLang:
    """γ^ω at the first coordinate, for the doubled arrow

        γ = [in₂·[r,⊥,…,⊥], in₂·[r₁..r_m]] : m+m ⇸ m+m.

    The second block simulates [r₁..r_m] on coordinates m..2m-1; the first
    coordinate fires r once and hands over, so γ^ω·in₀ = [r₁..r_m]^ω·r.
    """
    m = len(rs_arrows)
    gamma = doubled_loop(rs_arrows, r_arrow, instance)
    return instance.compose(instance.omega(gamma), instance.base_map((0,), 2 * m)).inf[0]


def omega_kleene_roundtrip(
    rs: Sequence[Term],
    r: Term,
    gens: Mapping[str, LtsMorphism],
    instance: LtsInstance,
    bound: int = 3,
):
    """Compare [r₁..r_m]^ω·r with the doubled-arrow evaluation γ^ω·in₀.

    Returns (equal, witness, direct, doubled); witness is a lasso word the
    two sides disagree on (None when bounded-equal)."""
    direct = omega_rational_eval(rs, r, gens, instance)
    rs_arrows = [terms.eval_term(t, gens, instance) for t in rs]
    r_arrow = terms.eval_term(r, gens, instance)
    doubled = omega_doubled_arrows(rs_arrows, r_arrow, instance)
    ok, witness = bounded_equal(direct, doubled, bound)
    return ok, witness, direct, doubled


# -- file formats ----------------------------------------------------------


def _body_lines(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            out.append((no, body.split()))
    return out


def parse_lts(text: str) -> NdAutomaton:
    """Parse the line-based automaton format (header `lts`)."""
    lines = _body_lines(text)
    if not lines or lines[0][1] != ["lts"]:
        raise ValueError("line 1: expected header 'lts'")
    alphabet: Alphabet | None = None
    n: int | None = None
    trans_lines: list[tuple[int, int, str | None, int]] = []
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
            if len(args) != 3:
                raise ValueError(f"line {no}: trans wants src symbol dst")
            if not (args[0].isdigit() and args[2].isdigit()):
                raise ValueError(f"line {no}: bad state index")
            sym = None if args[1] == "eps" else args[1]
            trans_lines.append((no, int(args[0]), sym, int(args[2])))
        elif kind == "accept":
            for a in args:
                if not a.isdigit():
                    raise ValueError(f"line {no}: bad accept state")
                accept_lines.append((no, int(a)))
        else:
            raise ValueError(f"line {no}: unknown directive {kind!r}")
    if alphabet is None or n is None:
        raise ValueError("missing alphabet or states directive")
    trans: set[tuple[int, str | None, int]] = set()
    for no, src, sym, dst in trans_lines:
        if sym is not None and sym not in alphabet:
            raise ValueError(f"line {no}: symbol {sym!r} not in alphabet")
        if not (0 <= src < n and 0 <= dst < n):
            raise ValueError(f"line {no}: state index out of range")
        trans.add((src, sym, dst))
    accepting: set[int] = set()
    for no, q in accept_lines:
        if not 0 <= q < n:
            raise ValueError(f"line {no}: accept state out of range")
        accepting.add(q)
    try:
        return NdAutomaton(alphabet, n, frozenset(trans), frozenset(accepting))
    except ValueError as exc:
        raise ValueError(f"invalid automaton: {exc}") from exc


def format_lts(auto: NdAutomaton) -> str:
    lines = ["lts", "alphabet " + " ".join(auto.alphabet.symbols), f"states {auto.n}"]
    for (s, a, t) in sorted(auto.transitions, key=lambda e: (e[0], e[1] or "", e[2])):
        lines.append(f"trans {s} {'eps' if a is None else a} {t}")
    if auto.accepting:
        lines.append("accept " + " ".join(str(q) for q in sorted(auto.accepting)))
    return "\n".join(lines) + "\n"


def parse_ratterm(text: str) -> tuple[Term, dict[str, LtsMorphism], Alphabet]:
    """Parse a rational-term file (header `ratterm`).

    Directives: `alphabet ...`; `gen name : m->p` opening a generator whose
    entries follow as `entry i j symbols...` (symbol `eps` for ε); finally
    one `expr TERM` line in the concrete term syntax.
    """
    lines = _body_lines(text)
    if not lines or lines[0][1] != ["ratterm"]:
        raise ValueError("line 1: expected header 'ratterm'")
    alphabet: Alphabet | None = None
    gen_shapes: dict[str, tuple[int, int]] = {}
    gen_entries: dict[str, dict[tuple[int, int], set[str | None]]] = {}
    current: str | None = None
    term: Term | None = None
    for no, toks in lines[1:]:
        kind, args = toks[0], toks[1:]
        if kind == "alphabet":
            alphabet = Alphabet(tuple(args))
        elif kind == "gen":
            # accept both `gen g : 2->2` and `gen g:2->2`
            decl = " ".join(args).replace(" ", "")
            if ":" not in decl or "->" not in decl:
                raise ValueError(f"line {no}: expected gen name : m->p")
            name, shape = decl.split(":", 1)
            mm, pp = shape.split("->", 1)
            if not (name and mm.isdigit() and pp.isdigit()):
                raise ValueError(f"line {no}: expected gen name : m->p")
            gen_shapes[name] = (int(mm), int(pp))
            gen_entries[name] = {}
            current = name
        elif kind == "entry":
            if current is None:
                raise ValueError(f"line {no}: entry before any gen")
            if len(args) < 2 or not (args[0].isdigit() and args[1].isdigit()):
                raise ValueError(f"line {no}: entry wants i j symbols...")
            i, j = int(args[0]), int(args[1])
            cell = gen_entries[current].setdefault((i, j), set())
            cell.update(None if a == "eps" else a for a in args[2:])
        elif kind == "expr":
            term = terms.parse_term(" ".join(args))
        else:
            raise ValueError(f"line {no}: unknown directive {kind!r}")
    if alphabet is None:
        raise ValueError("missing alphabet directive")
    if term is None:
        raise ValueError("missing expr directive")
    gens: dict[str, LtsMorphism] = {}
    for name, (m, p) in gen_shapes.items():
        e = empty(alphabet)
        fin = []
        for i in range(m):
            row = []
            for j in range(p):
                labels = gen_entries[name].get((i, j))
                if labels is None:
                    row.append(e)
                else:
                    for a in labels:
                        if a is not None and a not in alphabet:
                            raise ValueError(f"generator {name!r}: symbol {a!r} not in alphabet")
                    row.append(
                        finite_lang(
                            alphabet, [() if a is None else (a,) for a in labels]
                        )
                    )
            fin.append(row)
        gens[name] = lts_arrow(fin, None, p, alphabet)
    terms.typecheck(term, {k: (v.dom, v.cod) for k, v in gens.items()})
    return term, gens, alphabet


def format_ratterm(term: Term, gens: Mapping[str, LtsMorphism], alphabet: Alphabet) -> str:
    lines = ["ratterm", "alphabet " + " ".join(alphabet.symbols)]
    for name in sorted(gens):
        arrow = gens[name]
        lines.append(f"gen {name} : {arrow.dom}->{arrow.cod}")
        for i in range(arrow.dom):
            for j in range(arrow.cod):
                entry = arrow.fin[i][j]
                labels = sorted(
                    ("eps" if not w else w[0]) for w in entry.words(1)
                )
                if labels:
                    lines.append(f"entry {i} {j} " + " ".join(labels))
    lines.append("expr " + terms.format_term(term))
    return "\n".join(lines) + "\n"


# -- samplers ----------------------------------------------------------------


@lru_cache(maxsize=None)
def fin_pool(alphabet: Alphabet) -> tuple[WordLang, ...]:
    """Small shared stock of finite languages for randomized suites."""
    from .words import parse_regex, star as lang_star, symbol

    syms = alphabet.symbols
    pool = [empty(alphabet), epsilon(alphabet)]
    for a in syms[:2]:
        pool.append(symbol(alphabet, a))
        pool.append(lang_star(symbol(alphabet, a)))
    if len(syms) >= 2:
        a, b = syms[0], syms[1]
        pool.append(finite_lang(alphabet, [(a,), (b,)]))
        pool.append(finite_lang(alphabet, [(a, b)]))
        pool.append(parse_regex(f"({a}.{b})*", alphabet))
        pool.append(finite_lang(alphabet, [(), (a,)]))
    return tuple(pool)


@lru_cache(maxsize=None)
def inf_pool(alphabet: Alphabet) -> tuple[OmegaLang, ...]:
    """Small shared stock of ω-languages (shared values keep the bounded
    signature cache hot across law rounds)."""
    syms = alphabet.symbols
    pool = [empty_omega(alphabet), sigma_omega(alphabet)]
    for a in syms[:2]:
        loop = finite_lang(alphabet, [(a,)])
        pool.append(omega_of_matrix([[loop]], alphabet)[0])
        pool.append(concat_tail(loop, sigma_omega(alphabet)))
    if len(syms) >= 2:
        ab = finite_lang(alphabet, [(syms[0], syms[1])])
        pool.append(omega_of_matrix([[ab]], alphabet)[0])
    return tuple(pool)


def sample_arrow(rng, dom: int, cod: int, alphabet: Alphabet) -> LtsMorphism:
    fins = fin_pool(alphabet)
    infs = inf_pool(alphabet)
    e = empty(alphabet)
    fin = [
        [fins[rng.randrange(len(fins))] if rng.random() < 0.55 else e for _ in range(cod)]
        for _ in range(dom)
    ]
    inf = [
        infs[rng.randrange(len(infs))] if rng.random() < 0.4 else empty_omega(alphabet)
        for _ in range(dom)
    ]
    return lts_arrow(fin, inf, cod, alphabet)


def sample_one_step(rng, dom: int, cod: int, alphabet: Alphabet) -> LtsMorphism:
    fin = []
    for _ in range(dom):
        row = []
        for _ in range(cod):
            labels: list[tuple[str, ...]] = [
                (a,) for a in alphabet.symbols if rng.random() < 0.25
            ]
            if rng.random() < 0.15:
                labels.append(())
            row.append(finite_lang(alphabet, labels))
        fin.append(row)
    return lts_arrow(fin, None, cod, alphabet)


def make_sampler(alphabet: Alphabet, max_dim: int = 3) -> Sampler:
    return Sampler(
        arrow=lambda rng, m, p: sample_arrow(rng, m, p, alphabet),
        one_step=lambda rng, m, p: sample_one_step(rng, m, p, alphabet),
        max_dim=max_dim,
    )


def sample_automaton(rng, n: int, alphabet: Alphabet, eps_rate: float = 0.1) -> NdAutomaton:
    trans: set[tuple[int, str | None, int]] = set()
    for i in range(n):
        for j in range(n):
            for a in alphabet.symbols:
                if rng.random() < 0.3:
                    trans.add((i, a, j))
            if rng.random() < eps_rate and i != j:
                trans.add((i, None, j))
    accepting = frozenset(q for q in range(n) if rng.random() < 0.4)
    return NdAutomaton(alphabet, n, frozenset(trans), accepting)


def sample_rational(
    rng, dom: int, cod: int, depth: int, gens: dict[str, LtsMorphism], alphabet: Alphabet
) -> Term:
    """Random well-typed term of the requested shape; extends `gens` in place
    with fresh one-step generators."""

    def fresh_gen(m: int, p: int) -> Term:
        name = f"g{len(gens)}"
        gens[name] = sample_one_step(rng, m, p, alphabet)
        return Gen(name)

    def build(m: int, p: int, d: int) -> Term:
        if d <= 0:
            roll = rng.random()
            if roll < 0.5:
                return fresh_gen(m, p)
            if roll < 0.65:
                return Empty(m, p)
            return Base(tuple(rng.randrange(p) for _ in range(m)), p)
        kind = rng.randrange(6)
        if kind == 0:
            mid = rng.randrange(1, 4)
            return Compose(build(mid, p, d - 1), build(m, mid, d - 1))
        if kind == 1:
            return terms.Join(build(m, p, d - 1), build(m, p, d - 1))
        if kind == 2 and m == p:
            return Star(build(m, m, d - 1))
        if kind == 3 and m >= 2:
            cut = rng.randrange(1, m)
            return Cotuple((build(cut, p, d - 1), build(m - cut, p, d - 1)))
        if kind == 4:
            return Compose(Star(build(p, p, d - 1)), build(m, p, d - 1))
        return fresh_gen(m, p)

    return build(dom, cod, depth)
