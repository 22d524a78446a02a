"""Continued fractions: expansion, convergents, complete quotients, and the
derived quantities xi_n = q_{n-1}/q_n and D_n = q_n*alpha - p_n.

Rational targets expand by the Euclidean algorithm (canonical: the last
partial quotient is >= 2 whenever the expansion has length > 1).  Quadratic
targets use the integer (P, Q) complete-quotient recurrence with period
detection by exact state repetition.  Certified targets extract digits from
the stored enclosure and refuse (PrecisionExhausted) rather than guess when
an interval straddles an integer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import NamedTuple

from .errors import (
    InsufficientDepth,
    PrecisionExhausted,
    RationalTarget,
)
from .exactnum import (
    Certified,
    QuadIrr,
    RatInterval,
    RealTarget,
    floor_of,
    qi_normalize,
)


class Convergent(NamedTuple):
    n: int
    p: int
    q: int


@dataclass
class CFExpansion:
    """Materialized prefix of a simple continued fraction.

    `period` is the minimal (K, L) of the digit word a_0, a_1, ...: digits
    repeat with period L from index K onward.  Present exactly for quadratic
    sources.  `finite` marks a complete rational expansion.
    """

    source: RealTarget
    a: list[int]
    period: tuple[int, int] | None = None
    finite: bool = False
    _states: list[tuple[int, int]] = field(default_factory=list, repr=False)
    _state_period: tuple[int, int] | None = field(default=None, repr=False)
    _surd: int = field(default=0, repr=False)  # E in zeta_n = (P_n + sqrt(E))/Q_n

    def digit(self, n: int) -> int:
        if n < 0:
            raise IndexError("digit index must be >= 0")
        if n < len(self.a):
            return self.a[n]
        if self.period is not None:
            k, ell = self.period
            return self.a[k + (n - k) % ell]
        if self.finite:
            raise InsufficientDepth(f"finite expansion has {len(self.a)} digits")
        raise PrecisionExhausted(f"only {len(self.a)} certified digits available")

    def __len__(self) -> int:
        return len(self.a)

    def state(self, n: int) -> tuple[int, int]:
        """(P_n, Q_n) with zeta_n = (P_n + sqrt(E))/Q_n; quadratic only."""
        if self.period is None:
            raise RationalTarget("complete-quotient states exist only for quadratic targets")
        if n < len(self._states):
            return self._states[n]
        ks, ls = self._state_period
        return self._states[ks + (n - ks) % ls]

    def to_json(self) -> dict:
        k, ell = self.period if self.period else (None, None)
        return {"a": list(self.a), "K": k, "L": ell}


def _floor_surd(P: int, E: int, r: int, Q: int) -> int:
    # exact floor((P + sqrt(E))/Q) given r = isqrt(E), E non-square
    if Q > 0:
        return (P + r) // Q
    return (P + r + 1) // Q


def _expand_rational(x: Fraction) -> list[int]:
    p, q = x.numerator, x.denominator
    out = []
    while q:
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    return out


def _expand_quadratic(x: QuadIrr, depth: int) -> CFExpansion:
    # bring (P + e sqrt(D))/Q to the form (P0 + sqrt(E))/Q0 with Q0 | E - P0^2
    P0, Q0 = x.P, x.Q
    if x.e < 0:
        P0, Q0 = -P0, -Q0
    E = x.e * x.e * x.D
    if (E - P0 * P0) % Q0:
        P0 *= abs(Q0)
        E *= Q0 * Q0
        Q0 *= abs(Q0)
    r = isqrt(E)

    digits: list[int] = []
    states: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    P, Q = P0, Q0
    while (P, Q) not in seen:
        seen[(P, Q)] = len(states)
        states.append((P, Q))
        a = _floor_surd(P, E, r, Q)
        digits.append(a)
        P = a * Q - P
        Q = (E - P * P) // Q
    ks = seen[(P, Q)]
    ls = len(states) - ks

    # minimal digit period divides the state period
    ell = next(
        d
        for d in range(1, ls + 1)
        if ls % d == 0
        and all(digits[i] == digits[ks + (i - ks) % d] for i in range(ks, ks + ls))
    )
    k = ks
    while k > 0 and digits[k - 1] == digits[k - 1 + ell]:
        k -= 1

    cf = CFExpansion(
        source=x,
        a=digits,
        period=(k, ell),
        _states=states,
        _state_period=(ks, ls),
        _surd=E,
    )
    while len(cf.a) < depth:
        cf.a.append(cf.digit(len(cf.a)))
    return cf


def _expand_certified(x: Certified, depth: int) -> CFExpansion:
    iv = x.enclosure
    digits: list[int] = []
    for _ in range(depth):
        lo_f = floor_of(iv.lo)
        hi_f = floor_of(iv.hi)
        if lo_f != hi_f:
            raise PrecisionExhausted(
                f"enclosure straddles an integer after {len(digits)} digits"
            )
        digits.append(lo_f)
        if len(digits) == depth:
            break
        frac = iv - lo_f
        if frac.lo <= 0:
            raise PrecisionExhausted(
                f"fractional part undecidable after {len(digits)} digits"
            )
        iv = frac.reciprocal()
    return CFExpansion(source=x, a=digits)


def cf_expand(x: RealTarget, depth: int) -> CFExpansion:
    """Expand x as a simple continued fraction to at least `depth` digits.

    Rational targets always get their full finite expansion; quadratic
    targets also get exact minimal period metadata (K, L).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(x, (int, Fraction)):
        return CFExpansion(source=Fraction(x), a=_expand_rational(Fraction(x)), finite=True)
    if isinstance(x, QuadIrr):
        return _expand_quadratic(x, depth)
    if isinstance(x, Certified):
        return _expand_certified(x, depth)
    raise TypeError(f"not a real target: {x!r}")


def convergents(cf: CFExpansion, n_max: int) -> list[Convergent]:
    """Principal convergents p_n/q_n for n = 0..n_max via the three-term
    recurrence with seeds (p_-1, q_-1) = (1, 0), (p_0, q_0) = (a_0, 1)."""
    p_prev, q_prev = 1, 0
    p, q = cf.digit(0), 1
    out = [Convergent(0, p, q)]
    for n in range(1, n_max + 1):
        a = cf.digit(n)
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append(Convergent(n, p, q))
    return out


def complete_quotient(cf: CFExpansion, n: int):
    """zeta_n = [a_n; a_{n+1}, ...]: exact QuadIrr for quadratic sources,
    a certified RatInterval for certified sources, an exact Fraction for
    in-range tails of finite expansions (RationalTarget beyond them)."""
    if n < 0:
        raise IndexError("complete quotient index must be >= 0")
    if cf.period is not None:
        P, Q = cf.state(n)
        return qi_normalize(P, 1, cf._surd, Q)
    if cf.finite:
        if n >= len(cf.a):
            raise RationalTarget(f"finite expansion has no zeta_{n}")
        v = Fraction(cf.a[-1])
        for a in reversed(cf.a[n:-1]):
            v = a + 1 / v
        return v
    # certified: bracket the tail value by its last two partial convergents
    tail = cf.a[n:]
    if len(tail) < 3:
        raise PrecisionExhausted("need at least three tail digits to bracket zeta_n")
    p_prev, q_prev = 1, 0
    p, q = tail[0], 1
    second_last = Fraction(p, q)
    for a in tail[1:]:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        second_last = Fraction(p_prev, q_prev)
    last = Fraction(p, q)
    return RatInterval(min(last, second_last), max(last, second_last))


def xi(convs: list[Convergent], n: int) -> Fraction:
    """xi_n = q_{n-1}/q_n, already in lowest terms."""
    if n < 1:
        raise IndexError("xi is defined for n >= 1")
    return Fraction(convs[n - 1].q, convs[n].q)


def d_value(x: RealTarget, conv: Convergent):
    """D_n = q_n*alpha - p_n: exact in Q(sqrt(D)) for quadratic targets,
    a certified interval for certified targets."""
    if isinstance(x, (int, Fraction)):
        raise RationalTarget("D_n requires an irrational target")
    if isinstance(x, QuadIrr):
        v = x * conv.q - conv.p
        assert isinstance(v, QuadIrr)
        return v
    return x.enclosure * conv.q - conv.p


class CFContext:
    """Shared workspace for one target: expansion, convergents, and D_n.

    Everything is grown on demand and cached; the context itself is
    read-only from the caller's perspective.
    """

    def __init__(self, alpha: RealTarget, depth: int = 64):
        self.alpha = alpha
        self.cf = cf_expand(alpha, depth)
        self._p = [1, self.cf.digit(0)]
        self._q = [0, 1]
        self._d_cache: dict[int, object] = {}

    @property
    def exact(self) -> bool:
        return isinstance(self.alpha, QuadIrr)

    def _ensure(self, n: int) -> None:
        while len(self._p) < n + 2:
            m = len(self._p) - 1  # next convergent index
            a = self.cf.digit(m)
            self._p.append(a * self._p[-1] + self._p[-2])
            self._q.append(a * self._q[-1] + self._q[-2])

    def a(self, n: int) -> int:
        return self.cf.digit(n)

    def p(self, n: int) -> int:
        self._ensure(n)
        return self._p[n + 1]

    def q(self, n: int) -> int:
        self._ensure(n)
        return self._q[n + 1]

    def convergent(self, n: int) -> Convergent:
        return Convergent(n, self.p(n), self.q(n))

    def D(self, n: int):
        """Exact (or certified-interval) D_n, including D_-1 = -1 and D_0."""
        if n == -1:
            return Fraction(-1) if self.exact else RatInterval.point(Fraction(-1))
        if n not in self._d_cache:
            if isinstance(self.alpha, QuadIrr):
                v = self.alpha * self.q(n) - self.p(n)
            elif isinstance(self.alpha, Certified):
                v = self.alpha.enclosure * self.q(n) - self.p(n)
            else:
                raise RationalTarget("D_n requires an irrational target")
            self._d_cache[n] = v
        return self._d_cache[n]

    def d_abs_upper(self, n: int) -> Fraction:
        """Rational upper bound |D_n| <= 1/q_{n+1}."""
        return Fraction(1, self.q(n + 1))

    def zeta(self, n: int):
        return complete_quotient(self.cf, n)

    def xi(self, n: int) -> Fraction:
        if n < 1:
            raise IndexError("xi is defined for n >= 1")
        return Fraction(self.q(n - 1), self.q(n))
