"""Generic machinery for order-enriched theories of typed arrows m ⇸ p.

An instance supplies composition (g·f = g after f), binary join with bottom,
base maps (arrows induced by functions between finite index sets), cotupling
over coproducts, and an equality test (exact or bounded).  On top of that this
module provides the iterative saturation and omega-iteration engines, extended
saturation for arrows n ⇸ n+p, the generalized star pairing identity's
right-hand side, a normal-form calculus closed under compose/join/star, and a
randomized law-checking harness.

All coproduct bookkeeping (injections, cotuples, block permutations) is plain
index arithmetic on block offsets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

Arrow = Any


class NonStabilizing(Exception):
    """An iterative fixpoint chain did not settle within its round budget."""

    def __init__(self, rounds: int):
        super().__init__(f"fixpoint chain did not stabilize within {rounds} rounds")
        self.rounds = rounds


class TheoryInstance:
    """Capability record of one order-enriched theory.

    Subclasses implement the abstract core; `identity` and `injection` are
    derived from base maps, and the fixpoint engines are inherited unless the
    instance has a closed form (the word/Büchi instance overrides `star`
    because chains of language unions never stabilize syntactically).
    """

    name = "instance"
    supports_omega = False

    # -- abstract core ------------------------------------------------------

    def dims(self, f: Arrow) -> tuple[int, int]:
        """(domain, codomain) of an arrow."""
        raise NotImplementedError

    def compose(self, g: Arrow, f: Arrow) -> Arrow:
        """g·f = g after f."""
        raise NotImplementedError

    def join(self, f: Arrow, g: Arrow) -> Arrow:
        raise NotImplementedError

    def bottom(self, m: int, p: int) -> Arrow:
        raise NotImplementedError

    def base_map(self, mapping: Sequence[int], p: int) -> Arrow:
        """The arrow len(mapping) ⇸ p induced by i ↦ mapping[i]."""
        raise NotImplementedError

    def cotuple(self, arrows: Sequence[Arrow]) -> Arrow:
        """[f₁,…,f_k]: Σmᵢ ⇸ p for arrows with a common codomain."""
        raise NotImplementedError

    def equal(self, f: Arrow, g: Arrow) -> bool:
        raise NotImplementedError

    def is_one_step(self, f: Arrow) -> bool:
        raise NotImplementedError

    # -- derived ------------------------------------------------------------

    def identity(self, n: int) -> Arrow:
        return self.base_map(tuple(range(n)), n)

    def injection(self, i: int, blocks: Sequence[int]) -> Arrow:
        """Coproduct injection of block i into Σ blocks."""
        off = sum(blocks[:i])
        total = sum(blocks)
        return self.base_map(tuple(off + j for j in range(blocks[i])), total)

    def leq(self, f: Arrow, g: Arrow) -> bool:
        return self.equal(self.join(f, g), g)

    def join_all(self, arrows: Sequence[Arrow], m: int, p: int) -> Arrow:
        out = self.bottom(m, p)
        for a in arrows:
            out = self.join(out, a)
        return out

    # -- fixpoints (instances may override with closed forms) ---------------

    def star(self, alpha: Arrow) -> Arrow:
        return star_iterative(alpha, self)

    def plus(self, alpha: Arrow) -> Arrow:
        return self.compose(self.star(alpha), alpha)

    def omega(self, beta: Arrow) -> Arrow:
        n, n2 = self.dims(beta)
        if n != n2:
            raise ValueError("omega needs an endomorphism")
        return omega_iterative(beta, self.top_omega(n), self)

    def top_omega(self, n: int) -> Arrow:
        """Greatest element of hom(n, 0); required for the iterative omega."""
        raise NotImplementedError


def star_iterative(alpha: Arrow, instance: TheoryInstance, max_rounds: int = 64) -> Arrow:
    """Least fixpoint of x ↦ id ∨ x·α as the join of the powers (id ∨ α)^k,
    accumulated until the instance reports stabilization."""
    m, p = instance.dims(alpha)
    if m != p:
        raise ValueError("saturation needs an endomorphism")
    base = instance.join(instance.identity(m), alpha)
    power = instance.identity(m)
    acc = instance.identity(m)
    for _ in range(max_rounds):
        power = instance.compose(base, power)
        nxt = instance.join(acc, power)
        if instance.equal(nxt, acc):
            return acc
        acc = nxt
    raise NonStabilizing(max_rounds)


def omega_iterative(
    beta: Arrow,
    top: Arrow,
    instance: TheoryInstance,
    max_rounds: int = 64,
    equal: Optional[Callable[[Arrow, Arrow], bool]] = None,
) -> Arrow:
    """Greatest fixpoint of x ↦ x·β as the limit of the descending chain
    top, top·β, top·β², …; detection uses the instance comparator unless a
    tolerance-aware one is supplied."""
    n, n2 = instance.dims(beta)
    if n != n2:
        raise ValueError("omega-iteration needs an endomorphism")
    if instance.dims(top) != (n, 0):
        raise ValueError("top must live in hom(n, 0)")
    eq = equal or instance.equal
    cur = top
    for _ in range(max_rounds):
        nxt = instance.compose(cur, beta)
        if eq(nxt, cur):
            return nxt
        cur = nxt
    raise NonStabilizing(max_rounds)


def extended_star(alpha: Arrow, instance: TheoryInstance) -> Arrow:
    """Saturation of a one-step-shaped arrow α: n ⇸ n+p, defined as
    [α, in]*·in; satisfies [result, in] = [α, in]*."""
    n, q = instance.dims(alpha)
    p = q - n
    if p < 0:
        raise ValueError("codomain must extend the domain")
    inj_n = instance.injection(0, (n, p))
    inj_p = instance.injection(1, (n, p))
    gamma = instance.cotuple([alpha, inj_p])
    return instance.compose(instance.star(gamma), inj_n)


def _block_swap(instance: TheoryInstance, a: int, b: int, rest: int) -> Arrow:
    """Base map a+b+rest → b+a+rest exchanging the first two blocks."""
    mapping = [b + i for i in range(a)] + [i for i in range(b)] + [
        a + b + i for i in range(rest)
    ]
    return instance.base_map(tuple(mapping), a + b + rest)


def gspi_rhs(f: Arrow, g: Arrow, instance: TheoryInstance) -> Arrow:
    """Right-hand side of the generalized star pairing identity: the
    saturation [f,g]* of a paired arrow, rebuilt from the saturations of the
    two halves.  f: n ⇸ n+m+p and g: m ⇸ n+m+p; the result has the same type
    as extended_star(cotuple([f,g])): n+m ⇸ n+m+p."""
    n, qf = instance.dims(f)
    m, qg = instance.dims(g)
    if qf != qg:
        raise ValueError("f and g need a common codomain")
    p = qf - n - m
    if p < 0:
        raise ValueError("codomain must split as n+m+p")

    f_star = extended_star(f, instance)  # n ⇸ n+(m+p)
    pi = _block_swap(instance, n, m, p)  # n+m+p → m+n+p
    inj_m = instance.injection(0, (m, n, p))
    inj_p = instance.injection(2, (m, n, p))
    k = instance.compose(
        instance.cotuple([instance.compose(pi, f_star), instance.cotuple([inj_m, inj_p])]),
        g,
    )  # m ⇸ m+(n+p)

    k_star = extended_star(k, instance)  # m ⇸ m+n+p
    pi_inv = _block_swap(instance, m, n, p)  # m+n+p → n+m+p
    swapped_k = instance.compose(pi_inv, k_star)  # m ⇸ n+m+p

    inj_n2 = instance.injection(0, (n, m, p))
    inj_p2 = instance.injection(2, (n, m, p))
    first = instance.compose(instance.cotuple([inj_n2, swapped_k, inj_p2]), f_star)
    return instance.cotuple([first, swapped_k])


def doubled_loop(rs_arrows: Sequence[Arrow], r_arrow: Arrow, instance: TheoryInstance) -> Arrow:
    """Doubled arrow γ = [in₂·[r,⊥,…,⊥], in₂·[r₁..r_m]] : m+m ⇸ m+m.

    The second block simulates the loop body [r₁..r_m] on coordinates
    m..2m-1; the first coordinate fires the prefix r once and hands over, so
    γ^ω·in₀ = [r₁..r_m]^ω·r.  The rs_arrows are the rows rᵢ: 1 ⇸ m of the
    loop body and r_arrow is the prefix r: 1 ⇸ m.
    """
    m = len(rs_arrows)
    s = instance.cotuple(list(rs_arrows))
    s_prime = instance.cotuple([r_arrow] + [instance.bottom(1, m)] * (m - 1)) if m > 1 else r_arrow
    in2 = instance.injection(1, (m, m))
    return instance.cotuple([instance.compose(in2, s_prime), instance.compose(in2, s)])


# -- normal forms -------------------------------------------------------------


@dataclass(frozen=True)
class NormalForm:
    """An arrow source_dim ⇸ out_dim presented as [⊥, id]·generator*·in,
    where the generator is a one-step arrow inner_dim ⇸ inner_dim+out_dim and
    `in` picks the first source_dim inner coordinates."""

    generator: Arrow
    inner_dim: int
    out_dim: int
    source_dim: int

    def __post_init__(self):
        if not (0 <= self.source_dim <= self.inner_dim):
            raise ValueError("need source_dim ≤ inner_dim")

    def validate(self, instance: TheoryInstance):
        if instance.dims(self.generator) != (self.inner_dim, self.inner_dim + self.out_dim):
            raise ValueError("generator shape mismatch")
        if not instance.is_one_step(self.generator):
            raise ValueError("generator is not one-step")

    def denote(self, instance: TheoryInstance) -> Arrow:
        n, p, m = self.inner_dim, self.out_dim, self.source_dim
        ext = extended_star(self.generator, instance)  # n ⇸ n+p
        collapse = instance.cotuple([instance.bottom(n, p), instance.identity(p)])
        enter = instance.base_map(tuple(range(m)), n)
        return instance.compose(instance.compose(collapse, ext), enter)


def nf_of_one_step(alpha: Arrow, instance: TheoryInstance) -> NormalForm:
    """A one-step arrow m ⇸ p as a normal form: every step exits."""
    m, p = instance.dims(alpha)
    if not instance.is_one_step(alpha):
        raise ValueError("arrow is not one-step")
    shift = instance.base_map(tuple(m + j for j in range(p)), m + p)
    return NormalForm(instance.compose(shift, alpha), m, p, m)


def nf_identity(n: int, instance: TheoryInstance) -> NormalForm:
    return nf_of_one_step(instance.identity(n), instance)


def nf_bottom(m: int, p: int, instance: TheoryInstance) -> NormalForm:
    return nf_of_one_step(instance.bottom(m, p), instance)


def nf_base(mapping: Sequence[int], p: int, instance: TheoryInstance) -> NormalForm:
    return nf_of_one_step(instance.base_map(tuple(mapping), p), instance)


def _conjugate(nf_gen: Arrow, rho: Sequence[int], out_dim: int, instance: TheoryInstance) -> Arrow:
    """Relabel the inner block of a generator N ⇸ N+p along the bijection
    old ↦ rho[old] (outputs untouched)."""
    n = len(rho)
    rho_inv = [0] * n
    for old, new in enumerate(rho):
        rho_inv[new] = old
    post = instance.base_map(
        tuple(list(rho) + [n + j for j in range(out_dim)]), n + out_dim
    )
    pre = instance.base_map(tuple(rho_inv), n)
    return instance.compose(post, instance.compose(nf_gen, pre))


def _embed_generator(
    gen: Arrow,
    inner_off: int,
    total_inner: int,
    exit_of: Sequence[int],
    total_out: int,
    instance: TheoryInstance,
) -> Arrow:
    """Reindex a generator n ⇸ n+p into a larger state space: inner coords
    shift by inner_off, exit j goes to exit_of[j] (an index into
    total_inner+total_out)."""
    n, q = instance.dims(gen)
    p = q - n
    mapping = [inner_off + c for c in range(n)] + [exit_of[j] for j in range(p)]
    return instance.compose(
        instance.base_map(tuple(mapping), total_inner + total_out), gen
    )


def nf_compose(r1: NormalForm, r2: NormalForm, instance: TheoryInstance) -> NormalForm:
    """Normal form of r2·r1: route r1's exits into r2's entry coordinates."""
    if r1.out_dim != r2.source_dim:
        raise ValueError("middle dimension mismatch")
    n1, n2 = r1.inner_dim, r2.inner_dim
    total = n1 + n2
    out = r2.out_dim
    f = _embed_generator(
        r1.generator, 0, total, [n1 + j for j in range(r1.out_dim)], out, instance
    )
    g = _embed_generator(
        r2.generator, n1, total, [total + j for j in range(out)], out, instance
    )
    return NormalForm(instance.cotuple([f, g]), total, out, r1.source_dim)


def nf_join(r1: NormalForm, r2: NormalForm, instance: TheoryInstance) -> NormalForm:
    """Normal form of r1 ∨ r2: a fresh source block steps by ε into the entry
    coordinates of both copies."""
    if (r1.source_dim, r1.out_dim) != (r2.source_dim, r2.out_dim):
        raise ValueError("shape mismatch")
    m, out = r1.source_dim, r1.out_dim
    n1, n2 = r1.inner_dim, r2.inner_dim
    total = m + n1 + n2
    h = instance.join(
        instance.base_map(tuple(m + i for i in range(m)), total + out),
        instance.base_map(tuple(m + n1 + i for i in range(m)), total + out),
    )
    f = _embed_generator(
        r1.generator, m, total, [total + j for j in range(out)], out, instance
    )
    g = _embed_generator(
        r2.generator, m + n1, total, [total + j for j in range(out)], out, instance
    )
    return NormalForm(instance.cotuple([h, f, g]), total, out, m)


def _star_gamma(r: NormalForm, instance: TheoryInstance):
    """Shared feedback construction for saturation: add one port per output;
    a port exits for real and re-enters at the matching source coordinate,
    while the original exits are rerouted to the ports."""
    if r.source_dim != r.out_dim:
        raise ValueError("saturation needs an endo normal form")
    n, m = r.inner_dim, r.out_dim
    total = n + m
    alpha_rerouted = _embed_generator(
        r.generator, 0, total, [n + j for j in range(m)], m, instance
    )
    port = instance.join(
        instance.base_map(tuple(range(m)), total + m),  # re-enter at sources
        instance.base_map(tuple(total + j for j in range(m)), total + m),  # exit
    )
    return instance.cotuple([alpha_rerouted, port]), n, m, total


def nf_star(r: NormalForm, instance: TheoryInstance) -> NormalForm:
    """Normal form of denote(r)*: start at the ports (so the empty run exits
    immediately); the inner block is relabeled to put the ports first, since
    a normal form must enter at its first coordinates."""
    gamma, n, m, total = _star_gamma(r, instance)
    rho = [m + c for c in range(n)] + [j for j in range(m)]
    return NormalForm(_conjugate(gamma, rho, m, instance), total, m, m)


def nf_plus(r: NormalForm, instance: TheoryInstance) -> NormalForm:
    """Companion plus-form over the same feedback generator: entering at the
    original sources instead of the ports forces at least one traversal."""
    gamma, n, m, total = _star_gamma(r, instance)
    return NormalForm(gamma, total, m, m)


def nf_cotuple(rs: Sequence[NormalForm], instance: TheoryInstance) -> NormalForm:
    """Normal form of [r₁,…,r_k]: block-diagonal generators, inner blocks
    relabeled so that all source coordinates come first."""
    if not rs:
        raise ValueError("empty cotuple")
    out = rs[0].out_dim
    if any(r.out_dim != out for r in rs):
        raise ValueError("codomain mismatch")
    total = sum(r.inner_dim for r in rs)
    parts = []
    off = 0
    for r in rs:
        parts.append(
            _embed_generator(
                r.generator, off, total, [total + j for j in range(out)], out, instance
            )
        )
        off += r.inner_dim
    gamma = instance.cotuple(parts)
    src_total = sum(r.source_dim for r in rs)
    rho = []
    src_off = 0
    rest_off = src_total
    for r in rs:
        rho.extend(range(src_off, src_off + r.source_dim))
        rho.extend(range(rest_off, rest_off + r.inner_dim - r.source_dim))
        src_off += r.source_dim
        rest_off += r.inner_dim - r.source_dim
    return NormalForm(_conjugate(gamma, rho, out, instance), total, out, src_total)


# -- law harness --------------------------------------------------------------


@dataclass
class LawResult:
    law: str
    checked: int = 0
    failures: int = 0
    counterexample: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, ok: bool, describe: Callable[[], str]):
        self.checked += 1
        if not ok:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = describe()


@dataclass
class Sampler:
    """Arrow sources for the law harness.

    arrow(rng, dom, cod) must return an arbitrary arrow; one_step may be None
    when the instance has no one-step fragment worth testing (normal-form laws
    are skipped then); dims bounds the sampled object sizes.
    """

    arrow: Callable[[Any, int, int], Arrow]
    one_step: Optional[Callable[[Any, int, int], Arrow]] = None
    max_dim: int = 3
    arrows_drawn: int = field(default=0, repr=False)

    def draw(self, rng, dom: int, cod: int) -> Arrow:
        self.arrows_drawn += 1
        return self.arrow(rng, dom, cod)

    def draw_one_step(self, rng, dom: int, cod: int) -> Arrow:
        self.arrows_drawn += 1
        return self.one_step(rng, dom, cod)

    def dim(self, rng) -> int:
        return rng.randrange(1, self.max_dim + 1)


def check_theory_laws(instance: TheoryInstance, sampler: Sampler, budget: int, rng) -> list[LawResult]:
    """Run the randomized law suite for `budget` rounds; every failure is
    reported with the first concrete counterexample, never raised."""
    laws = {
        name: LawResult(name)
        for name in [
            "compose-associative",
            "compose-unit",
            "join-idempotent",
            "join-commutative",
            "join-associative",
            "join-bottom-unit",
            "left-distributive",
            "right-distributive-over-base",
            "compose-bottom-absorbing",
            "star-of-identity",
            "star-above-identity",
            "star-idempotent-compose",
            "star-fixpoint-unfolding",
            "extended-star-pairing",
            "gspi",
        ]
    }
    if instance.supports_omega:
        for name in [
            "omega-rolling",
            "omega-of-power",
            "omega-of-plus",
            "omega-uniformity",
        ]:
            laws[name] = LawResult(name)
    if sampler.one_step is not None:
        for name in ["nf-compose", "nf-join", "nf-star", "nf-plus", "nf-cotuple"]:
            laws[name] = LawResult(name)

    def show(*arrows):
        return " ; ".join(repr(a) for a in arrows)

    for _ in range(budget):
        a, b, c = sampler.dim(rng), sampler.dim(rng), sampler.dim(rng)
        f = sampler.draw(rng, a, b)
        g = sampler.draw(rng, b, c)
        h = sampler.draw(rng, c, sampler.dim(rng))

        laws["compose-associative"].record(
            instance.equal(
                instance.compose(h, instance.compose(g, f)),
                instance.compose(instance.compose(h, g), f),
            ),
            lambda: show(f, g, h),
        )
        laws["compose-unit"].record(
            instance.equal(instance.compose(f, instance.identity(a)), f)
            and instance.equal(instance.compose(instance.identity(b), f), f),
            lambda: show(f),
        )

        f2 = sampler.draw(rng, a, b)
        f3 = sampler.draw(rng, a, b)
        laws["join-idempotent"].record(
            instance.equal(instance.join(f, f), f), lambda: show(f)
        )
        laws["join-commutative"].record(
            instance.equal(instance.join(f, f2), instance.join(f2, f)),
            lambda: show(f, f2),
        )
        laws["join-associative"].record(
            instance.equal(
                instance.join(instance.join(f, f2), f3),
                instance.join(f, instance.join(f2, f3)),
            ),
            lambda: show(f, f2, f3),
        )
        laws["join-bottom-unit"].record(
            instance.equal(instance.join(f, instance.bottom(a, b)), f),
            lambda: show(f),
        )
        laws["left-distributive"].record(
            instance.equal(
                instance.compose(g, instance.join(f, f2)),
                instance.join(instance.compose(g, f), instance.compose(g, f2)),
            ),
            lambda: show(f, f2, g),
        )
        base = instance.base_map(tuple(rng.randrange(a) for _ in range(sampler.dim(rng))), a)
        laws["right-distributive-over-base"].record(
            instance.equal(
                instance.compose(instance.join(f, f2), base),
                instance.join(instance.compose(f, base), instance.compose(f2, base)),
            ),
            lambda: show(f, f2, base),
        )
        laws["compose-bottom-absorbing"].record(
            instance.equal(
                instance.compose(f, instance.bottom(c, a)), instance.bottom(c, b)
            ),
            lambda: show(f),
        )

        alpha = sampler.draw(rng, a, a)
        alpha_star = instance.star(alpha)
        laws["star-of-identity"].record(
            instance.equal(instance.star(instance.identity(a)), instance.identity(a)),
            lambda: show(instance.identity(a)),
        )
        laws["star-above-identity"].record(
            instance.leq(instance.identity(a), alpha_star), lambda: show(alpha)
        )
        laws["star-idempotent-compose"].record(
            instance.equal(instance.compose(alpha_star, alpha_star), alpha_star),
            lambda: show(alpha),
        )
        # Only the unfolding α* = id ∨ α*·α is a theorem here: these theories
        # are left distributive only, and the mirrored id ∨ α·α* genuinely
        # fails in the tree instance (an early-stopped branch of a tiling
        # cannot absorb the extra tile the mirror image would force on it).
        laws["star-fixpoint-unfolding"].record(
            instance.equal(
                alpha_star,
                instance.join(
                    instance.identity(a), instance.compose(alpha_star, alpha)
                ),
            ),
            lambda: show(alpha),
        )

        p_ext = sampler.dim(rng)
        ext_arg = sampler.draw(rng, a, a + p_ext)
        ext = extended_star(ext_arg, instance)
        inj_p = instance.injection(1, (a, p_ext))
        laws["extended-star-pairing"].record(
            instance.equal(
                instance.cotuple([ext, inj_p]),
                instance.star(instance.cotuple([ext_arg, inj_p])),
            ),
            lambda: show(ext_arg),
        )

        gn, gm, gp = sampler.dim(rng), sampler.dim(rng), sampler.dim(rng)
        gf = sampler.draw(rng, gn, gn + gm + gp)
        gg = sampler.draw(rng, gm, gn + gm + gp)
        laws["gspi"].record(
            instance.equal(
                extended_star(instance.cotuple([gf, gg]), instance),
                gspi_rhs(gf, gg, instance),
            ),
            lambda: show(gf, gg),
        )

        if instance.supports_omega:
            beta = sampler.draw(rng, a, b)
            alpha_ba = sampler.draw(rng, b, a)
            laws["omega-rolling"].record(
                instance.equal(
                    instance.omega(instance.compose(alpha_ba, beta)),
                    instance.compose(
                        instance.omega(instance.compose(beta, alpha_ba)), beta
                    ),
                ),
                lambda: show(beta, alpha_ba),
            )
            omega_alpha = instance.omega(alpha)
            power = instance.compose(alpha, alpha)
            for _k in range(rng.randrange(0, 2)):
                power = instance.compose(power, alpha)
            laws["omega-of-power"].record(
                instance.equal(instance.omega(power), omega_alpha),
                lambda: show(alpha),
            )
            laws["omega-of-plus"].record(
                instance.equal(instance.omega(instance.plus(alpha)), omega_alpha),
                lambda: show(alpha),
            )
            # uniformity along an injective base map j: a → big
            big = a + rng.randrange(0, 2)
            image = list(range(big))
            rng.shuffle(image)
            image = image[:a]
            j_arrow = instance.base_map(tuple(image), big)
            rows = []
            for q in range(big):
                if q in image:
                    i = image.index(q)
                    col = instance.compose(
                        alpha, instance.injection(i, (1,) * a)
                    )  # 1 ⇸ a
                    rows.append(instance.compose(j_arrow, col))
                else:
                    rows.append(sampler.draw(rng, 1, big))
            beta_big = instance.cotuple(rows)
            laws["omega-uniformity"].record(
                instance.equal(
                    instance.omega(alpha),
                    instance.compose(instance.omega(beta_big), j_arrow),
                ),
                lambda: show(alpha, j_arrow),
            )

        if sampler.one_step is not None:
            m1, m2, m3 = sampler.dim(rng), sampler.dim(rng), sampler.dim(rng)
            s1 = nf_of_one_step(sampler.draw_one_step(rng, m1, m2), instance)
            s2 = nf_of_one_step(sampler.draw_one_step(rng, m2, m3), instance)
            s3 = nf_of_one_step(sampler.draw_one_step(rng, m1, m2), instance)
            d1, d2, d3 = (s.denote(instance) for s in (s1, s2, s3))
            laws["nf-compose"].record(
                instance.equal(
                    nf_compose(s1, s2, instance).denote(instance),
                    instance.compose(d2, d1),
                ),
                lambda: show(s1.generator, s2.generator),
            )
            laws["nf-join"].record(
                instance.equal(
                    nf_join(s1, s3, instance).denote(instance), instance.join(d1, d3)
                ),
                lambda: show(s1.generator, s3.generator),
            )
            endo = nf_of_one_step(sampler.draw_one_step(rng, m1, m1), instance)
            de = endo.denote(instance)
            laws["nf-star"].record(
                instance.equal(
                    nf_star(endo, instance).denote(instance), instance.star(de)
                ),
                lambda: show(endo.generator),
            )
            laws["nf-plus"].record(
                instance.equal(
                    nf_plus(endo, instance).denote(instance),
                    instance.compose(instance.star(de), de),
                ),
                lambda: show(endo.generator),
            )
            s4 = nf_of_one_step(sampler.draw_one_step(rng, m3, m2), instance)
            laws["nf-cotuple"].record(
                instance.equal(
                    nf_cotuple([s1, s4], instance).denote(instance),
                    instance.cotuple([d1, s4.denote(instance)]),
                ),
                lambda: show(s1.generator, s4.generator),
            )

    return list(laws.values())


def format_report(results: Sequence[LawResult]) -> str:
    lines = []
    for r in results:
        status = "pass" if r.passed else "FAIL"
        line = f"{status}  {r.law}  ({r.checked - r.failures}/{r.checked})"
        if r.counterexample is not None:
            line += f"\n      counterexample: {r.counterexample}"
        lines.append(line)
    return "\n".join(lines)
