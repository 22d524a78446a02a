"""Exact arithmetic kernel: rationals, rational-endpoint intervals, and
quadratic irrationals in canonical form (P + e*sqrt(D))/Q.

All values are immutable and all operations are pure functions, so anything
built here can be shared freely.  No floating point is used anywhere; every
comparison is decided exactly or raises PrecisionExhausted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from .errors import DegenerateRational, MixedField, PrecisionExhausted

# BigRat is the package-wide arbitrary-precision rational: fractions.Fraction
# already guarantees den > 0 and gcd(num, den) == 1.
BigRat = Fraction

SQUAREFREE_TRIAL_BOUND = 10**6

# Certified bounds on ln(10), verified against exp_bounds in the test suite.
LN10_LO = Fraction(23025850929940456, 10**16)
LN10_HI = Fraction(23025850929940458, 10**16)


@lru_cache(maxsize=None)
def squarefree_decompose(n: int, bound: int = SQUAREFREE_TRIAL_BOUND) -> tuple[int, int]:
    """Write n = f*f * core with core squarefree; returns (f, core).

    Trial division up to `bound`, then a perfect-square check on the cofactor.
    A cofactor that is neither 1 nor a perfect square has no square divisor
    below bound**2, so it is left in core unchanged.
    """
    if n <= 0:
        raise ValueError("squarefree_decompose expects n > 0")
    f, core, m = 1, 1, n
    p = 2
    while p <= bound and p * p <= m:
        if m % p == 0:
            k = 0
            while m % p == 0:
                m //= p
                k += 1
            f *= p ** (k // 2)
            if k % 2:
                core *= p
        p = 3 if p == 2 else p + 2
    if m > 1:
        r = isqrt(m)
        if r * r == m:
            f *= r
        else:
            core *= m
    return f, core


def _norm_sign(x: int) -> int:
    return 1 if x > 0 else (-1 if x < 0 else 0)


class QuadIrr:
    """Canonical element (P + e*sqrt(D))/Q of a real quadratic field.

    Invariants: D squarefree > 1, e != 0, Q > 0, gcd(P, e, Q) == 1.
    Construct via qi_normalize(); the raw constructor trusts its arguments.
    """

    __slots__ = ("P", "e", "D", "Q")

    def __init__(self, P: int, e: int, D: int, Q: int):
        self.P = P
        self.e = e
        self.D = D
        self.Q = Q

    # -- construction -----------------------------------------------------

    @staticmethod
    def make(P: int, e: int, D: int, Q: int) -> "QuadIrr | Fraction":
        """Normalize, returning a Fraction when the value degenerates."""
        try:
            return qi_normalize(P, e, D, Q)
        except DegenerateRational as exc:
            return exc.value

    def __repr__(self) -> str:
        return f"QuadIrr({self.P}, {self.e}, {self.D}, {self.Q})"

    def __str__(self) -> str:
        return f"({self.P}{self.e:+}*sqrt({self.D}))/{self.Q}"

    def __hash__(self):
        return hash((self.P, self.e, self.D, self.Q))

    def __eq__(self, other) -> bool:
        if isinstance(other, QuadIrr):
            return (self.P, self.e, self.D, self.Q) == (other.P, other.e, other.D, other.Q)
        # a canonical QuadIrr is irrational, never equal to a rational
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    # -- field arithmetic -------------------------------------------------

    def _check_field(self, other: "QuadIrr") -> None:
        if self.D != other.D:
            raise MixedField(f"sqrt({self.D}) vs sqrt({other.D})")

    def __add__(self, other):
        if isinstance(other, QuadIrr):
            self._check_field(other)
            return QuadIrr.make(
                self.P * other.Q + other.P * self.Q,
                self.e * other.Q + other.e * self.Q,
                self.D,
                self.Q * other.Q,
            )
        if isinstance(other, (int, Fraction)):
            r = Fraction(other)
            return QuadIrr.make(
                self.P * r.denominator + r.numerator * self.Q,
                self.e * r.denominator,
                self.D,
                self.Q * r.denominator,
            )
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return QuadIrr(-self.P, -self.e, self.D, self.Q)

    def __sub__(self, other):
        res = self + (-other if isinstance(other, QuadIrr) else -Fraction(other))
        return res

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QuadIrr):
            self._check_field(other)
            return QuadIrr.make(
                self.P * other.P + self.e * other.e * self.D,
                self.P * other.e + self.e * other.P,
                self.D,
                self.Q * other.Q,
            )
        if isinstance(other, (int, Fraction)):
            r = Fraction(other)
            if r == 0:
                return Fraction(0)
            return QuadIrr.make(
                self.P * r.numerator, self.e * r.numerator, self.D, self.Q * r.denominator
            )
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "QuadIrr":
        # 1/x = Q(P - e sqrt(D)) / (P^2 - e^2 D); the norm is never 0 because
        # D is squarefree > 1 and e != 0.
        norm = self.P * self.P - self.e * self.e * self.D
        res = QuadIrr.make(self.Q * self.P, -self.Q * self.e, self.D, norm)
        assert isinstance(res, QuadIrr)
        return res

    def __truediv__(self, other):
        if isinstance(other, QuadIrr):
            self._check_field(other)
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            r = Fraction(other)
            if r == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / r)
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result: QuadIrr | Fraction = Fraction(1)
        base: QuadIrr | Fraction = self
        while n > 0:
            if n & 1:
                result = base * result if isinstance(base, QuadIrr) else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def conjugate(self) -> "QuadIrr":
        return QuadIrr(self.P, -self.e, self.D, self.Q)

    # -- order ------------------------------------------------------------

    def sign(self) -> int:
        """Exact sign of the value (never 0: the value is irrational)."""
        P, e = self.P, self.e  # Q > 0 by canonical form
        if e > 0:
            if P >= 0:
                return 1
            return 1 if e * e * self.D > P * P else -1
        if P <= 0:
            return -1
        return 1 if P * P > e * e * self.D else -1

    def _cmp(self, other) -> int:
        diff = self - other
        if isinstance(diff, Fraction):  # only when other is an equal-field QuadIrr
            return _norm_sign(diff)
        return diff.sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    # -- integer parts ----------------------------------------------------

    def floor(self) -> int:
        t = isqrt(self.e * self.e * self.D)
        if self.e < 0:
            t = -t - 1  # e*sqrt(D) is irrational, so floor is exact
        g = (self.P + t) // self.Q
        if self >= g + 1:
            g += 1
        return g

    def nearest_int(self) -> int:
        # x + 1/2 is irrational, so there is never a tie
        return qi_shift_half(self).floor()

    # -- representation helpers -------------------------------------------

    def as_pair(self) -> tuple[Fraction, Fraction]:
        """Value written as u + v*sqrt(D) with exact rationals (u, v)."""
        return Fraction(self.P, self.Q), Fraction(self.e, self.Q)

    def to_json(self) -> dict:
        return {"P": str(self.P), "e": str(self.e), "D": str(self.D), "Q": str(self.Q)}


def qi_shift_half(x: QuadIrr) -> QuadIrr:
    res = x + Fraction(1, 2)
    assert isinstance(res, QuadIrr)
    return res


def qi_normalize(P: int, e: int, D: int, Q: int) -> QuadIrr:
    """Canonicalize (P + e*sqrt(D))/Q.

    Extracts square factors of D into e, reduces gcd(P, e, Q), and makes
    Q positive.  Raises DegenerateRational when the value is rational
    (e == 0 or D reduces to a perfect square).
    """
    if D <= 0:
        raise ValueError("D must be positive")
    if Q == 0:
        raise ValueError("Q must be nonzero")
    if e == 0:
        raise DegenerateRational(Fraction(P, Q))
    f, core = squarefree_decompose(D)
    e *= f
    D = core
    if D == 1:
        raise DegenerateRational(Fraction(P + e, Q))
    g = gcd(gcd(abs(P), abs(e)), abs(Q))
    P, e, Q = P // g, e // g, Q // g
    if Q < 0:
        P, e, Q = -P, -e, -Q
    return QuadIrr(P, e, D, Q)


def qi_pair(rat: Fraction, coef: Fraction, D: int) -> QuadIrr | Fraction:
    """Build the field element rat + coef*sqrt(D) from exact rationals."""
    if coef == 0:
        return rat
    q = rat.denominator * coef.denominator // gcd(rat.denominator, coef.denominator)
    return QuadIrr.make(
        rat.numerator * (q // rat.denominator),
        coef.numerator * (q // coef.denominator),
        D,
        q,
    )


# ---------------------------------------------------------------------------
# generic helpers over Fraction | QuadIrr


def sign_of(x) -> int:
    if isinstance(x, QuadIrr):
        return x.sign()
    return _norm_sign(Fraction(x))


def floor_of(x) -> int:
    if isinstance(x, QuadIrr):
        return x.floor()
    f = Fraction(x)
    return f.numerator // f.denominator


def ceil_of(x) -> int:
    if isinstance(x, QuadIrr):
        return x.floor() + 1  # irrational: never an integer
    f = Fraction(x)
    return -((-f.numerator) // f.denominator)


def as_pair(x, D: int) -> tuple[Fraction, Fraction]:
    """Coordinates of x in the basis (1, sqrt(D)); MixedField if impossible."""
    if isinstance(x, QuadIrr):
        if x.D != D:
            raise MixedField(f"sqrt({x.D}) vs sqrt({D})")
        return x.as_pair()
    return Fraction(x), Fraction(0)


# ---------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class RatInterval:
    """Closed interval with exact rational endpoints, lo <= hi."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("interval endpoints out of order")

    @staticmethod
    def point(x) -> "RatInterval":
        f = Fraction(x)
        return RatInterval(f, f)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        f = Fraction(x)
        return self.lo <= f <= self.hi

    def overlaps(self, other: "RatInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other):
        if isinstance(other, RatInterval):
            return RatInterval(self.lo + other.lo, self.hi + other.hi)
        f = Fraction(other)
        return RatInterval(self.lo + f, self.hi + f)

    __radd__ = __add__

    def __neg__(self):
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other if isinstance(other, RatInterval) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RatInterval):
            prods = [
                self.lo * other.lo,
                self.lo * other.hi,
                self.hi * other.lo,
                self.hi * other.hi,
            ]
            return RatInterval(min(prods), max(prods))
        f = Fraction(other)
        if f >= 0:
            return RatInterval(self.lo * f, self.hi * f)
        return RatInterval(self.hi * f, self.lo * f)

    __rmul__ = __mul__

    def reciprocal(self) -> "RatInterval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval straddles zero")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        if isinstance(other, RatInterval):
            return self * other.reciprocal()
        f = Fraction(other)
        if f == 0:
            raise ZeroDivisionError("division by zero")
        return self * (1 / f)

    def abs(self) -> "RatInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RatInterval(Fraction(0), max(-self.lo, self.hi))

    def dist_to_nearest_int(self) -> "RatInterval":
        """Image of the interval under distance-to-nearest-integer."""
        if self.width >= 1:
            return RatInterval(Fraction(0), Fraction(1, 2))
        lo_d, hi_d = _frac_dist(self.lo), _frac_dist(self.hi)
        has_int = floor_of(self.hi) >= ceil_of_frac(self.lo)
        mn = Fraction(0) if has_int else min(lo_d, hi_d)
        # a half-integer inside pushes the max to 1/2
        mx = Fraction(1, 2) if _contains_half(self) else max(lo_d, hi_d)
        return RatInterval(mn, mx)

    def to_json(self) -> dict:
        return {"lo": str(self.lo), "hi": str(self.hi)}


def ceil_of_frac(f: Fraction) -> int:
    return -((-f.numerator) // f.denominator)


def _frac_dist(x: Fraction) -> Fraction:
    f = x - (x.numerator // x.denominator)
    return min(f, 1 - f)


def _contains_half(iv: RatInterval) -> bool:
    lo2, hi2 = 2 * iv.lo, 2 * iv.hi
    k = floor_of(hi2)
    while k >= ceil_of_frac(lo2):
        if k % 2 != 0:
            return True
        k -= 1
    return False


# ---------------------------------------------------------------------------
# real targets


@dataclass(frozen=True)
class Certified:
    """Real number known only through a decimal string and an enclosure."""

    digits: str
    enclosure: RatInterval

    def __post_init__(self):
        if self.enclosure.width <= 0:
            raise ValueError("certified enclosure must have positive width")

    @staticmethod
    def parse(text: str) -> "Certified":
        """Parse 'digits±err' (also accepts 'digits+-err')."""
        body = text.replace("+-", "±")
        if "±" not in body:
            raise ValueError("certified literal must look like '1.41±0.005'")
        digits, err = body.split("±", 1)
        center = Fraction(digits)
        radius = Fraction(err)
        if radius <= 0:
            raise ValueError("certified radius must be positive")
        return Certified(digits, RatInterval(center - radius, center + radius))

    def to_json(self) -> dict:
        return {"digits": self.digits, "enclosure": self.enclosure.to_json()}


RealTarget = Fraction | QuadIrr | Certified


def sqrt_bounds(n: int, scale_digits: int) -> RatInterval:
    """Certified enclosure of sqrt(n) of width 10**-scale_digits."""
    m = 10**scale_digits
    r = isqrt(n * m * m)
    if r * r == n * m * m:
        return RatInterval.point(Fraction(r, m))
    return RatInterval(Fraction(r, m), Fraction(r + 1, m))


def enclose(x: RealTarget, width: Fraction) -> RatInterval:
    """Interval of width <= `width` provably containing x.

    Quadratic values are bracketed by certified digit extraction of sqrt(D);
    Certified targets refuse (PrecisionExhausted) when the stored enclosure
    is wider than requested.
    """
    width = Fraction(width)
    if width <= 0:
        raise ValueError("width must be positive")
    if isinstance(x, (int, Fraction)):
        return RatInterval.point(Fraction(x))
    if isinstance(x, Certified):
        if x.enclosure.width <= width:
            return x.enclosure
        raise PrecisionExhausted(
            f"stored enclosure width {x.enclosure.width} exceeds requested {width}"
        )
    # quadratic: (P + e sqrt(D))/Q with exact outward rounding of sqrt(D)
    k = 1
    need = Fraction(abs(x.e), x.Q) / width
    while 10**k < need:
        k += 8
    while True:
        scaled = sqrt_bounds(x.D, k) * Fraction(x.e)
        iv = RatInterval((x.P + scaled.lo) / x.Q, (x.P + scaled.hi) / x.Q)
        if iv.width <= width:
            return iv
        k += 8


# ---------------------------------------------------------------------------
# certified exponentials (needed for Psi = exp(-c s) comparisons)


def _exp_taylor_bounds(f: Fraction, terms: int) -> tuple[Fraction, Fraction]:
    # 0 <= f <= 1: partial sum plus a doubled first-omitted-term tail bound
    s = Fraction(0)
    t = Fraction(1)
    for i in range(1, terms + 1):
        s += t
        t = t * f / i
    return s, s + 2 * t


def exp_bounds(x: Fraction, digits: int) -> RatInterval:
    """Certified enclosure of exp(x) with relative width about 10**-digits.

    x may be any exact rational; negative arguments go through reciprocals.
    """
    x = Fraction(x)
    if x < 0:
        pos = exp_bounds(-x, digits)
        return RatInterval(1 / pos.hi, 1 / pos.lo)
    n = x.numerator // x.denominator
    f = x - n
    # enough Taylor terms for the target digits plus amplification by n
    guard = digits + len(str(n + 1)) + 8
    terms = _terms_for_guard(guard)
    e_lo, e_hi = _exp_taylor_bounds(Fraction(1), terms)
    f_lo, f_hi = _exp_taylor_bounds(f, terms) if f else (Fraction(1), Fraction(1))
    return RatInterval(e_lo**n * f_lo, e_hi**n * f_hi)


@lru_cache(maxsize=None)
def _terms_for_guard(guard: int) -> int:
    # smallest count with digits(terms!) comfortably past the guard
    terms, fact = 8, 40320
    while len(str(fact)) < guard + 2:
        terms += 1
        fact *= terms
    return terms


def exp_le(x: Fraction, bound: Fraction, start_digits: int = 30) -> bool:
    """Decide exp(x) <= bound exactly (terminates: exp(x) is irrational)."""
    if bound <= 0:
        return False
    digits = start_digits
    while True:
        iv = exp_bounds(x, digits)
        if iv.hi <= bound:
            return True
        if iv.lo > bound:
            return False
        digits *= 2


def exp_exceeds_pow10(x: Fraction, b: int) -> bool:
    """Sound one-sided check: True guarantees exp(x) >= 10**b."""
    return x >= b * LN10_HI


def pow10_exponent_below_exp(x: Fraction) -> int:
    """Largest integer b (>= 0) with 10**-b >= exp(-x), for x > 0."""
    if x <= 0:
        return 0
    return int(x / LN10_HI)
