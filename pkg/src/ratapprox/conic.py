"""Quadratic-irrational machinery: minimal polynomials, Pell-type conic
orbits under the fundamental automorph, the exact Laurent expansion of the
numerator as a function of the denominator, the periodic-expansion route to
second-order coefficients, and conic detection from raw pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from .approx import ApproxSet, DecayReport, verify_order
from .cf import CFContext, cf_expand, complete_quotient
from .errors import InsufficientPairs, NotPeriodic, OrbitLeavesQuadrant
from .exactnum import QuadIrr, enclose, qi_normalize, qi_pair, squarefree_decompose


@dataclass(frozen=True)
class ConicForm:
    """Primitive integer form a*r^2 + b*r*s + c*s^2 at level d.

    gcd(a, b, c) = 1, a > 0, and the discriminant b^2 - 4ac is positive and
    not a perfect square, so the form has an irrational quadratic root.
    """

    a: int
    b: int
    c: int
    d: int = 0

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("leading coefficient must be positive")
        if gcd(gcd(self.a, abs(self.b)), abs(self.c)) != 1:
            raise ValueError("form must be primitive")
        disc = self.disc
        if disc <= 0 or isqrt(disc) ** 2 == disc:
            raise ValueError("discriminant must be positive and non-square")

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def value(self, r: int, s: int) -> int:
        return self.a * r * r + self.b * r * s + self.c * s * s

    def root(self) -> QuadIrr:
        """alpha = (-b + sqrt(disc)) / (2a), the orbit's limit slope."""
        return qi_normalize(-self.b, 1, self.disc, 2 * self.a)

    def at_level(self, d: int) -> "ConicForm":
        return ConicForm(self.a, self.b, self.c, d)

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "c": str(self.c), "d": str(self.d)}


@dataclass(frozen=True)
class Automorph:
    """Unimodular integer substitution (r, s) -> (t11 r + t12 s, t21 r + t22 s)
    preserving a binary quadratic form."""

    t11: int
    t12: int
    t21: int
    t22: int

    def det(self) -> int:
        return self.t11 * self.t22 - self.t12 * self.t21

    def apply(self, pair: tuple[int, int]) -> tuple[int, int]:
        r, s = pair
        return self.t11 * r + self.t12 * s, self.t21 * r + self.t22 * s

    def preserves(self, form: ConicForm) -> bool:
        a, b, c = form.a, form.b, form.c
        a2 = a * self.t11**2 + b * self.t11 * self.t21 + c * self.t21**2
        b2 = (
            2 * a * self.t11 * self.t12
            + b * (self.t11 * self.t22 + self.t12 * self.t21)
            + 2 * c * self.t21 * self.t22
        )
        c2 = a * self.t12**2 + b * self.t12 * self.t22 + c * self.t22**2
        return (a2, b2, c2) == (a, b, c) and self.det() == 1


def minimal_polynomial(x: QuadIrr) -> tuple[int, int, int]:
    """Primitive (a, b, c), a > 0, with a*x^2 + b*x + c = 0 exactly."""
    a = x.Q * x.Q
    b = -2 * x.P * x.Q
    c = x.P * x.P - x.e * x.e * x.D
    g = gcd(gcd(a, abs(b)), abs(c))
    triple = (a // g, b // g, c // g)
    check = triple[0] * x * x + triple[1] * x + triple[2]
    assert check == Fraction(0)
    return triple


def pell4(delta: int) -> tuple[int, int]:
    """Fundamental solution (t, u) of t^2 - delta*u^2 = 4 with minimal u > 0.

    Small u by direct search; beyond that, every solution comes from a
    convergent of sqrt(delta) with norm in {1, -1, 4, -4}.
    """
    if delta <= 0 or isqrt(delta) ** 2 == delta:
        raise ValueError("delta must be positive and non-square")
    for u in range(1, 41):
        t2 = 4 + delta * u * u
        t = isqrt(t2)
        if t * t == t2:
            return t, u
    cf = cf_expand(qi_normalize(0, 1, delta, 1), depth=4)
    k_pre, ell = cf.period
    best: tuple[int, int] | None = None
    h_prev, k_prev = 1, 0
    h, k = cf.digit(0), 1
    for n in range(1, 2 * (k_pre + ell) + 6):
        norm = h * h - delta * k * k
        cand = None
        if norm == 1:
            cand = (2 * h, 2 * k)
        elif norm == -1:
            cand = (2 * (h * h + delta * k * k), 4 * h * k)
        elif norm == 4:
            cand = (h, k)
        elif norm == -4 and (h * h + delta * k * k) % 2 == 0:
            cand = ((h * h + delta * k * k) // 2, h * k)
        if (
            cand
            and cand[0] > 0
            and cand[1] > 0
            and cand[0] ** 2 - delta * cand[1] ** 2 == 4
            and (best is None or cand[1] < best[1])
        ):
            best = cand
        a_n = cf.digit(n)
        h, h_prev = a_n * h + h_prev, h
        k, k_prev = a_n * k + k_prev, k
    if best is None:
        raise AssertionError(f"no Pell-4 solution located for delta={delta}")
    return best


def fundamental_automorph(form: ConicForm) -> Automorph:
    """Automorph ((t-bu)/2, -cu; au, (t+bu)/2) from the minimal (t, u)."""
    t, u = pell4(form.disc)
    assert (t - form.b * u) % 2 == 0
    m = Automorph(
        (t - form.b * u) // 2,
        -form.c * u,
        form.a * u,
        (t + form.b * u) // 2,
    )
    assert m.preserves(form)
    return m


def find_seed(form: ConicForm, bound: int) -> tuple[int, int] | None:
    """Smallest (by s, then r) pair in N^2 with form value d, s <= bound."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    delta = form.disc
    for s in range(1, bound + 1):
        disc = delta * s * s + 4 * form.a * form.d
        if disc < 0:
            continue
        t = isqrt(disc)
        if t * t != disc:
            continue
        rs = sorted(
            (-form.b * s + sign * t) // (2 * form.a)
            for sign in (1, -1)
            if (-form.b * s + sign * t) % (2 * form.a) == 0
        )
        for r in rs:
            if r >= 1 and form.value(r, s) == form.d:
                return r, s
    return None


def conic_orbit(form: ConicForm, seed: tuple[int, int], count: int) -> ApproxSet:
    """`count` pairs from `seed` under the fundamental automorph (squared
    when a single step would leave N^2 or fail to grow the denominator)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    r0, s0 = seed
    if form.value(r0, s0) != form.d:
        raise ValueError(f"seed {seed} does not satisfy the form at level {form.d}")
    m = fundamental_automorph(form)
    pairs = [(r0, s0)]
    while len(pairs) < count:
        cur = pairs[-1]
        nxt = m.apply(cur)
        if not (nxt[0] >= 1 and nxt[1] > cur[1]):
            nxt = m.apply(nxt)
        if not (nxt[0] >= 1 and nxt[1] > cur[1]):
            raise OrbitLeavesQuadrant(f"iteration left N^2 at {nxt}")
        assert form.value(*nxt) == form.d
        pairs.append(nxt)
    return ApproxSet(alpha=form.root(), pairs=pairs, order=0, gamma=[])


@dataclass
class LaurentExpansion:
    """Exact coefficients of r/s = alpha + sum_j gamma_j s^-j on the conic.

    Only even j contribute: gamma_{2k} = (sqrt(disc)/(2a)) * C(1/2, k) *
    (4ad/disc)^k.  For s >= threshold_s the series terms shrink at least
    geometrically (ratio 1/2), giving tail_bound its validity.
    """

    form: ConicForm
    alpha: QuadIrr
    gamma: list
    threshold_s: int
    next_term_j: int
    next_term_upper: Fraction

    def tail_bound(self, s: int) -> Fraction:
        if s < self.threshold_s:
            raise ValueError(f"tail bound valid only for s >= {self.threshold_s}")
        return 2 * self.next_term_upper * Fraction(1, s) ** self.next_term_j


def laurent_expansion(form: ConicForm, terms: int) -> LaurentExpansion:
    """gamma_1..gamma_terms of the orbit's Laurent series, exact in the field."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    delta = form.disc
    kappa = Fraction(4 * form.a * form.d, delta)
    nxt_j = terms + 1 if (terms + 1) % 2 == 0 else terms + 2
    binom = Fraction(1)  # C(1/2, k), updated multiplicatively
    kpow = Fraction(1)
    coeffs = {}
    for k in range(1, nxt_j // 2 + 1):
        binom *= Fraction(3 - 2 * k, 2 * k)
        kpow *= kappa
        coeffs[2 * k] = binom * kpow
    half_sqrt = Fraction(1, 2 * form.a)
    gamma = []
    for j in range(1, terms + 1):
        if j % 2 == 1:
            gamma.append(Fraction(0))
        else:
            gamma.append(qi_pair(Fraction(0), coeffs[j] * half_sqrt, delta))
    # smallest s with |kappa|/s^2 <= 1/2
    s_min = 1
    while delta * s_min * s_min < 8 * abs(form.a * form.d):
        s_min += 1
    nxt = coeffs[nxt_j]
    if nxt == 0:
        nxt_upper = Fraction(0)
    else:
        val = qi_pair(Fraction(0), abs(nxt) * half_sqrt, delta)
        nxt_upper = (
            Fraction(val)
            if isinstance(val, Fraction)
            else enclose(val, Fraction(1, 10**20)).hi
        )
    return LaurentExpansion(
        form=form,
        alpha=form.root(),
        gamma=gamma,
        threshold_s=s_min,
        next_term_j=nxt_j,
        next_term_upper=nxt_upper,
    )


@dataclass
class PeriodicConstruction:
    """Even-period convergent subsequence with its exact second-order term."""

    aset: ApproxSet
    gamma2: QuadIrr | Fraction
    preperiod: int  # K in the [0; a_1..a_K, periodic] convention
    period: int
    report: DecayReport


def _purely_periodic_value(word: list[int], field_d: int) -> QuadIrr:
    """Exact value of [0; overline(word)] from its fixed-point equation."""
    m00, m01, m10, m11 = 1, 0, 0, 1
    for w in word:
        m00, m01, m10, m11 = m00 * w + m01, m00, m10 * w + m11, m10
    # Z = [overline(word)] solves m10 Z^2 + (m11 - m00) Z - m01 = 0, Z > 1
    disc = (m11 - m00) ** 2 + 4 * m10 * m01
    z = qi_normalize(m00 - m11, 1, disc, 2 * m10)
    assert z > 1
    _, core = squarefree_decompose(disc)
    assert core == field_d, "reversed-period value left the field"
    inv = z.inverse()
    return inv


def periodic_construction(
    alpha: QuadIrr, count: int, ctx: CFContext | None = None
) -> PeriodicConstruction:
    """Pairs (p_{K+2kL}, q_{K+2kL}) for k = 1..count, with the exact
    gamma_2 = (-1)^{K+1} / (zeta_{K+1} + [0; overline(reversed period)]).
    """
    if not isinstance(alpha, QuadIrr):
        raise NotPeriodic("periodic construction needs a quadratic irrational")
    if not (Fraction(0) < alpha < Fraction(1)):
        raise ValueError("alpha must lie in (0, 1)")
    if count < 1:
        raise ValueError("count must be >= 1")
    cf = cf_expand(alpha, depth=4)
    k_word, ell = cf.period
    k_pre = k_word - 1  # a_0 = 0 does not count toward the preperiod here
    ctx = ctx or CFContext(alpha)
    zeta = complete_quotient(cf, k_word)
    period_word = [cf.digit(k_word + i) for i in range(ell)]
    rev_value = _purely_periodic_value(period_word[::-1], alpha.D)
    gamma2 = (-1) ** (k_pre + 1) / (zeta + rev_value)
    pairs = [
        (ctx.p(k_pre + 2 * k * ell), ctx.q(k_pre + 2 * k * ell))
        for k in range(1, count + 1)
    ]
    aset = ApproxSet(alpha=alpha, pairs=pairs, order=2, gamma=[Fraction(0), gamma2])
    report = verify_order(aset)
    return PeriodicConstruction(
        aset=aset, gamma2=gamma2, preperiod=k_pre, period=ell, report=report
    )


def quad_detect(pairs, max_prefix_exceptions: int = 2) -> ConicForm | None:
    """Recover a primitive (a, b, c, d), a > 0, with a r^2 + b rs + c s^2 = d
    on a trailing run of the pairs; None when the exact rank-3 solve fails,
    the discriminant degenerates, or too many pairs disagree."""
    pairs = sorted(pairs, key=lambda p: p[1])
    if len(pairs) < 5:
        raise InsufficientPairs("need at least 5 pairs")
    rows = [
        [Fraction(r * r), Fraction(r * s), Fraction(s * s), Fraction(-1)]
        for r, s in pairs[-3:]
    ]
    vec = _kernel_vector(rows)
    if vec is None:
        return None
    lcm = 1
    for x in vec:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    ints = [x // g for x in ints]
    if ints[0] < 0 or (ints[0] == 0 and ints[2] < 0):
        ints = [-x for x in ints]
    a, b, c, d = ints
    if a <= 0 or gcd(gcd(a, abs(b)), abs(c)) != 1:
        return None
    disc = b * b - 4 * a * c
    if disc <= 0 or isqrt(disc) ** 2 == disc:
        return None
    form = ConicForm(a, b, c, d)
    bad = [i for i, (r, s) in enumerate(pairs) if form.value(r, s) != d]
    if any(i >= max_prefix_exceptions for i in bad):
        return None
    return form


def _kernel_vector(rows) -> list[Fraction] | None:
    """One-dimensional kernel of a 3x4 rational matrix, or None."""
    m = [row[:] for row in rows]
    pivots: list[int] = []
    rank = 0
    for col in range(4):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        m[rank] = [x / m[rank][col] for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        pivots.append(col)
        rank += 1
    if rank != 3:
        return None
    free = next(c for c in range(4) if c not in pivots)
    vec = [Fraction(0)] * 4
    vec[free] = Fraction(1)
    for row, pcol in zip(m[:rank], pivots):
        vec[pcol] = -row[free]
    return vec
