"""Typed rational terms over a theory instance.

The AST is instance-agnostic: generators are free names bound to arrows at
evaluation time.  Two evaluators are provided — direct semantic folding, and
a normal-form pipeline that stays inside the one-step fragment and only takes
saturations of one-step generators.  Their agreement is the constructive core
of the finite Kleene theorem and is enforced by tests, never assumed.

Concrete syntax (parse_term / format_term):

    empty(m,p)  id(n)  b(i1,..,ik ; n)  inj(i; n1,..,nk)  g
    t . t   (composition, left of '.' applied after the right)
    t + t   (join)
    t*      (saturation, endomorphisms only)
    [t, t]  (cotupling)

Star binds tightest, then '.', then '+'.  All indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping

from . import kernel
from .kernel import NormalForm, TheoryInstance


class Term:
    """Base class of rational-term AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Empty(Term):
    dom: int
    cod: int


@dataclass(frozen=True)
class Ident(Term):
    n: int


@dataclass(frozen=True)
class Gen(Term):
    name: str


@dataclass(frozen=True)
class Base(Term):
    mapping: tuple[int, ...]
    cod: int


@dataclass(frozen=True)
class Inj(Term):
    index: int
    blocks: tuple[int, ...]


@dataclass(frozen=True)
class Compose(Term):
    """after · first — the left factor is applied second."""

    after: Term
    first: Term


@dataclass(frozen=True)
class Join(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Star(Term):
    body: Term


@dataclass(frozen=True)
class Cotuple(Term):
    items: tuple[Term, ...]


def typecheck(t: Term, gen_dims: Mapping[str, tuple[int, int]]) -> tuple[int, int]:
    """Infer the unique (dom, cod) of a term; raise ValueError on mismatch."""
    if isinstance(t, Empty):
        return (t.dom, t.cod)
    if isinstance(t, Ident):
        return (t.n, t.n)
    if isinstance(t, Gen):
        if t.name not in gen_dims:
            raise ValueError(f"unknown generator {t.name!r}")
        return gen_dims[t.name]
    if isinstance(t, Base):
        if any(i < 0 or i >= t.cod for i in t.mapping):
            raise ValueError(f"base map index out of range in {t}")
        return (len(t.mapping), t.cod)
    if isinstance(t, Inj):
        if not (0 <= t.index < len(t.blocks)):
            raise ValueError(f"injection block out of range in {t}")
        return (t.blocks[t.index], sum(t.blocks))
    if isinstance(t, Compose):
        da, ca = typecheck(t.after, gen_dims)
        df, cf = typecheck(t.first, gen_dims)
        if cf != da:
            raise ValueError(f"composition mismatch: {cf} vs {da}")
        return (df, ca)
    if isinstance(t, Join):
        dl = typecheck(t.left, gen_dims)
        dr = typecheck(t.right, gen_dims)
        if dl != dr:
            raise ValueError(f"join shape mismatch: {dl} vs {dr}")
        return dl
    if isinstance(t, Star):
        d, c = typecheck(t.body, gen_dims)
        if d != c:
            raise ValueError("star needs an endomorphism")
        return (d, c)
    if isinstance(t, Cotuple):
        if not t.items:
            raise ValueError("empty cotuple")
        dims = [typecheck(x, gen_dims) for x in t.items]
        cod = dims[0][1]
        if any(c != cod for _d, c in dims):
            raise ValueError("cotuple codomain mismatch")
        return (sum(d for d, _c in dims), cod)
    raise TypeError(f"not a term: {t!r}")


def eval_term(t: Term, gens: Mapping[str, Any], instance: TheoryInstance) -> Any:
    """Direct semantic folding into instance arrows."""
    if isinstance(t, Empty):
        return instance.bottom(t.dom, t.cod)
    if isinstance(t, Ident):
        return instance.identity(t.n)
    if isinstance(t, Gen):
        return gens[t.name]
    if isinstance(t, Base):
        return instance.base_map(t.mapping, t.cod)
    if isinstance(t, Inj):
        return instance.injection(t.index, t.blocks)
    if isinstance(t, Compose):
        return instance.compose(
            eval_term(t.after, gens, instance), eval_term(t.first, gens, instance)
        )
    if isinstance(t, Join):
        return instance.join(
            eval_term(t.left, gens, instance), eval_term(t.right, gens, instance)
        )
    if isinstance(t, Star):
        return instance.star(eval_term(t.body, gens, instance))
    if isinstance(t, Cotuple):
        return instance.cotuple([eval_term(x, gens, instance) for x in t.items])
    raise TypeError(f"not a term: {t!r}")


def eval_term_nf(t: Term, gens: Mapping[str, Any], instance: TheoryInstance) -> NormalForm:
    """Normal-form evaluator: one-step atoms, then the closure constructions."""
    if isinstance(t, Empty):
        return kernel.nf_bottom(t.dom, t.cod, instance)
    if isinstance(t, Ident):
        return kernel.nf_identity(t.n, instance)
    if isinstance(t, Gen):
        return kernel.nf_of_one_step(gens[t.name], instance)
    if isinstance(t, Base):
        return kernel.nf_base(t.mapping, t.cod, instance)
    if isinstance(t, Inj):
        off = sum(t.blocks[: t.index])
        return kernel.nf_base(
            tuple(off + j for j in range(t.blocks[t.index])), sum(t.blocks), instance
        )
    if isinstance(t, Compose):
        return kernel.nf_compose(
            eval_term_nf(t.first, gens, instance),
            eval_term_nf(t.after, gens, instance),
            instance,
        )
    if isinstance(t, Join):
        return kernel.nf_join(
            eval_term_nf(t.left, gens, instance),
            eval_term_nf(t.right, gens, instance),
            instance,
        )
    if isinstance(t, Star):
        return kernel.nf_star(eval_term_nf(t.body, gens, instance), instance)
    if isinstance(t, Cotuple):
        return kernel.nf_cotuple(
            [eval_term_nf(x, gens, instance) for x in t.items], instance
        )
    raise TypeError(f"not a term: {t!r}")


# -- concrete syntax ----------------------------------------------------------

_PUNCT = ["->", "(", ")", "[", "]", ",", ";", ".", "+", "*", ":"]


def tokenize(text: str) -> list[str]:
    toks = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if text.startswith("->", i):
            toks.append("->")
            i += 2
            continue
        if c in "()[],;.+*:":
            toks.append(c)
            i += 1
            continue
        if c.isalnum() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(text[i:j])
            i = j
            continue
        raise ValueError(f"bad character {c!r} in term")
    return toks


class _Parser:
    def __init__(self, toks: list[str]):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        if self.pos >= len(self.toks):
            raise ValueError(f"unexpected end of term (wanted {expect or 'more input'})")
        tok = self.toks[self.pos]
        if expect is not None and tok != expect:
            raise ValueError(f"expected {expect!r}, got {tok!r}")
        self.pos += 1
        return tok

    def int_(self) -> int:
        tok = self.take()
        if not tok.isdigit():
            raise ValueError(f"expected a number, got {tok!r}")
        return int(tok)

    def int_list(self, closer: str) -> list[int]:
        out = [self.int_()]
        while self.peek() == ",":
            self.take()
            out.append(self.int_())
        self.take(closer)
        return out

    def expr(self) -> Term:
        out = self.cat()
        while self.peek() == "+":
            self.take()
            out = Join(out, self.cat())
        return out

    def cat(self) -> Term:
        out = self.starred()
        while self.peek() == ".":
            self.take()
            out = Compose(out, self.starred())
        return out

    def starred(self) -> Term:
        out = self.atom()
        while self.peek() == "*":
            self.take()
            out = Star(out)
        return out

    def atom(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of term")
        if tok == "(":
            self.take()
            out = self.expr()
            self.take(")")
            return out
        if tok == "[":
            self.take()
            items = [self.expr()]
            while self.peek() == ",":
                self.take()
                items.append(self.expr())
            self.take("]")
            return Cotuple(tuple(items))
        self.take()
        if tok == "empty":
            self.take("(")
            m = self.int_()
            self.take(",")
            p = self.int_()
            self.take(")")
            return Empty(m, p)
        if tok == "id":
            self.take("(")
            n = self.int_()
            self.take(")")
            return Ident(n)
        if tok == "b":
            self.take("(")
            mapping = [self.int_()]
            while self.peek() == ",":
                self.take()
                mapping.append(self.int_())
            self.take(";")
            cod = self.int_()
            self.take(")")
            return Base(tuple(mapping), cod)
        if tok == "inj":
            self.take("(")
            idx = self.int_()
            self.take(";")
            blocks = self.int_list(")")
            return Inj(idx, tuple(blocks))
        if tok.isdigit():
            raise ValueError(f"unexpected number {tok!r} in term")
        return Gen(tok)


def parse_term(text: str) -> Term:
    p = _Parser(tokenize(text))
    out = p.expr()
    if p.peek() is not None:
        raise ValueError(f"trailing input at {p.peek()!r}")
    return out


def format_term(t: Term) -> str:
    """Serialize back to the concrete syntax (re-parses to an equal AST)."""

    def prec(t: Term) -> int:
        if isinstance(t, Join):
            return 0
        if isinstance(t, Compose):
            return 1
        return 2

    def wrap(child: Term, minimum: int) -> str:
        s = fmt(child)
        return f"({s})" if prec(child) < minimum else s

    def fmt(t: Term) -> str:
        if isinstance(t, Empty):
            return f"empty({t.dom},{t.cod})"
        if isinstance(t, Ident):
            return f"id({t.n})"
        if isinstance(t, Gen):
            return t.name
        if isinstance(t, Base):
            if not t.mapping:
                return f"empty(0,{t.cod})"
            return f"b({','.join(map(str, t.mapping))};{t.cod})"
        if isinstance(t, Inj):
            return f"inj({t.index};{','.join(map(str, t.blocks))})"
        if isinstance(t, Compose):
            return f"{wrap(t.after, 1)} . {wrap(t.first, 2)}"
        if isinstance(t, Join):
            return f"{wrap(t.left, 0)} + {wrap(t.right, 1)}"
        if isinstance(t, Star):
            return f"{wrap(t.body, 2)}*"
        if isinstance(t, Cotuple):
            return "[" + ", ".join(fmt(x) for x in t.items) + "]"
        raise TypeError(f"not a term: {t!r}")

    return fmt(t)
