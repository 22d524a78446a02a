"""Order-N rational approximation sets.

An approximation set is a finite prefix of pairs (r, s) whose ratios r/s
approach alpha with a Laurent-type correction sum_{j<=N} gamma_j s^-j.
This module fits the coefficients exactly, verifies the decay claim on a
trailing window, runs the Psi-driven existence construction (indices n_1=4,
n_{k+1} minimal above n_k+1 with 3/q_{n_{k+1}} <= Psi(q_{n_k+1})), handles
the rational-line case exactly, and classifies denominator growth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .cf import CFContext
from .errors import (
    BlowUp,
    InsufficientPairs,
    PrecisionExhausted,
    RationalTarget,
    SingularSystem,
)
from .exactnum import (
    Certified,
    QuadIrr,
    RatInterval,
    RealTarget,
    enclose,
    exp_bounds,
    exp_exceeds_pow10,
    exp_le,
    pow10_exponent_below_exp,
)
from .ostrowski import RealDigits

DEFAULT_WINDOW = 5
DEFAULT_REL_TOLERANCE = Fraction(1, 1000)
DEFAULT_DIGIT_BUDGET = 100_000
_TIGHT = Fraction(1, 10**40)


# ---------------------------------------------------------------------------
# data types


@dataclass
class ApproxSet:
    """Pairs sorted by strictly increasing positive denominator, plus the
    claimed order N and expansion coefficients gamma_1..gamma_N."""

    alpha: RealTarget
    pairs: list[tuple[int, int]]
    order: int
    gamma: list

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("pairs must be nonempty")
        if self.order < 0 or len(self.gamma) != self.order:
            raise ValueError("gamma must list exactly `order` coefficients")
        last = 0
        for _, s in self.pairs:
            if s <= last:
                raise ValueError("denominators must be strictly increasing and positive")
            last = s

    @property
    def denominators(self) -> list[int]:
        return [s for _, s in self.pairs]


@dataclass(frozen=True)
class PsiSpec:
    """Decreasing Psi restricted to families with exact comparability.

    exp_decay(c): Psi(s) = exp(-c*s); power(k): Psi(s) = s**-k;
    rational_table: explicit (s, Psi(s)) pairs read as a step function.
    """

    kind: str
    c: Fraction | None = None
    k: int | None = None
    table: tuple[tuple[int, Fraction], ...] | None = None

    @staticmethod
    def exp_decay(c) -> "PsiSpec":
        c = Fraction(c)
        if c <= 0:
            raise ValueError("exp_decay rate must be positive")
        return PsiSpec(kind="exp_decay", c=c)

    @staticmethod
    def power(k: int) -> "PsiSpec":
        if k < 1:
            raise ValueError("power exponent must be >= 1")
        return PsiSpec(kind="power", k=k)

    @staticmethod
    def rational_table(rows) -> "PsiSpec":
        rows = tuple(sorted(((int(s), Fraction(v)) for s, v in rows)))
        if not rows:
            raise ValueError("table must be nonempty")
        prev = None
        for s, v in rows:
            if v <= 0:
                raise ValueError("table values must be positive")
            if prev is not None and v > prev:
                raise ValueError("table must be non-increasing")
            prev = v
        return PsiSpec(kind="rational_table", table=rows)

    def _table_value(self, t: int) -> Fraction:
        best = None
        for s, v in self.table:
            if s <= t:
                best = v
            else:
                break
        if best is None:
            raise ValueError(f"table does not cover s = {t}")
        return best

    def exact_value(self, t: int) -> Fraction | None:
        """Psi(t) when it is an exact rational (power/table families)."""
        if self.kind == "power":
            return Fraction(1, t**self.k)
        if self.kind == "rational_table":
            return self._table_value(t)
        return None

    def le_psi(self, v: Fraction, t: int) -> bool:
        """Decide v <= Psi(t) exactly."""
        exact = self.exact_value(t)
        if exact is not None:
            return v <= exact
        return exp_le(self.c * t, 1 / Fraction(v))

    def numeric_feasible(self, t: int) -> bool:
        """Whether le_psi at argument t is computationally reasonable."""
        if self.kind != "exp_decay":
            return True
        return self.c * t <= 2 * 10**6

    def q_reaches(self, q: int, t: int) -> bool:
        """Decide 3/q <= Psi(t)."""
        exact = self.exact_value(t)
        if exact is not None:
            return 3 * exact.denominator <= q * exact.numerator
        return exp_le(self.c * t, Fraction(q, 3))

    def threshold_int_bracket(self, t: int, digits: int) -> tuple[int, int]:
        """Integers lo <= 3/Psi(t) <= hi; q >= hi accepts, q < lo rejects,
        anything between is decided exactly by q_reaches."""
        exact = self.exact_value(t)
        if exact is not None:
            x = 3 / exact
            lo = x.numerator // x.denominator
            return lo, lo + (0 if x.denominator == 1 else 1)
        iv = exp_bounds(self.c * t, digits) * 3
        lo = iv.lo.numerator // iv.lo.denominator
        hi = -((-iv.hi.numerator) // iv.hi.denominator)
        return lo, hi

    def threshold_exceeds_digits(self, t: int, budget: int) -> bool:
        """Sound check: True guarantees 3/Psi(t) has more than `budget` digits."""
        exact = self.exact_value(t)
        if exact is not None:
            num = 3 * exact.denominator
            den = exact.numerator
            return (num.bit_length() - den.bit_length() - 1) * 30103 > budget * 100000
        return exp_exceeds_pow10(self.c * t, budget + 1)

    def tail_cap_exponent(self, t: int, cap: int) -> int:
        """Exponent B <= cap with 10**-B >= Psi(t); exp family only."""
        return max(0, min(cap, pow10_exponent_below_exp(self.c * t)))

    def to_json(self) -> dict:
        if self.kind == "exp_decay":
            return {"family": "exp_decay", "c": str(self.c)}
        if self.kind == "power":
            return {"family": "power", "k": self.k}
        return {
            "family": "rational_table",
            "rows": [[str(s), str(v)] for s, v in self.table],
        }


@dataclass
class ReportRow:
    r: int
    s: int
    residual: object  # Fraction | QuadIrr | RatInterval
    scaled: object


@dataclass
class DecayReport:
    """Per-pair scaled residuals |rho|*(|r|+|s|)^N and the window verdict.

    PASS means the trailing `window` scaled values are non-increasing and
    the final one falls below the tolerance, which is `rel_tolerance` times
    the first scaled residual of the report; an all-zero trailing window
    passes outright.
    """

    order: int
    rows: list[ReportRow]
    window: int
    rel_tolerance: Fraction
    verdict: bool
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict


def _upper_of(x) -> Fraction:
    if isinstance(x, RatInterval):
        return x.hi
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return enclose(x, _TIGHT).hi


def _window_verdict(values: list, window: int, rel_tol: Fraction) -> tuple[bool, str]:
    if not values:
        return False, "no verification pairs"
    w = values[-min(window, len(values)):]
    uppers = [_upper_of(v) for v in w]
    if all(u == 0 for u in uppers):
        return True, "scaled residuals identically zero on the window"
    for a, b in zip(uppers, uppers[1:]):
        if b > a:
            return False, "scaled residuals stop decreasing inside the window"
    if uppers[-1] == 0:
        return True, "scaled residuals reach exact zero"
    # the threshold is relative to the first scaled residual of the report
    tol = rel_tol * _upper_of(values[0])
    if uppers[-1] < tol:
        return True, f"final scaled residual below {rel_tol} of the first"
    return False, "final scaled residual above tolerance"


def _as_interval(x) -> RatInterval:
    if isinstance(x, RatInterval):
        return x
    if isinstance(x, Certified):
        return x.enclosure
    if isinstance(x, (int, Fraction)):
        return RatInterval.point(Fraction(x))
    return enclose(x, _TIGHT)


def _residual_rows(pairs, alpha, gamma, order: int) -> list[ReportRow]:
    interval_mode = isinstance(alpha, Certified) or any(
        isinstance(g, RatInterval) for g in gamma
    )
    rows = []
    for r, s in pairs:
        weight = (abs(r) + abs(s)) ** order
        if interval_mode:
            rho = -_as_interval(alpha) + Fraction(r, s)
            for j, g in enumerate(gamma, start=1):
                rho = rho - _as_interval(g) * Fraction(1, s**j)
            scaled = rho.abs() * weight
        else:
            rho = Fraction(r, s) - alpha
            for j, g in enumerate(gamma, start=1):
                rho = rho - g * Fraction(1, s**j)
            scaled = abs(rho) * weight
        rows.append(ReportRow(r=r, s=s, residual=rho, scaled=scaled))
    return rows


# ---------------------------------------------------------------------------
# fitting and verification


def _solve_vandermonde(fit_pairs, alpha, order: int):
    """Exact solve of sum_j gamma_j s^{1-j} = r - s*alpha on `order` pairs.

    The matrix is rational, so elimination keeps all irrationality in the
    right-hand side; coefficients come out exact for exact alpha and as
    intervals for certified alpha.
    """
    a_val = alpha.enclosure if isinstance(alpha, Certified) else alpha
    mat = [
        [Fraction(s) ** (1 - j) for j in range(1, order + 1)] for _, s in fit_pairs
    ]
    if isinstance(a_val, RatInterval):
        rhs = [(-a_val * s) + r for r, s in fit_pairs]
    else:
        rhs = [r - a_val * s for r, s in fit_pairs]
    n = order
    for col in range(n):
        piv = next((i for i in range(col, n) if mat[i][col] != 0), None)
        if piv is None:
            raise SingularSystem("fit system is singular")
        mat[col], mat[piv] = mat[piv], mat[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        for i in range(col + 1, n):
            f = mat[i][col] / mat[col][col]
            if f == 0:
                continue
            mat[i] = [x - f * y for x, y in zip(mat[i], mat[col])]
            rhs[i] = rhs[i] - rhs[col] * f
    gamma = [None] * n
    for i in range(n - 1, -1, -1):
        acc = rhs[i]
        for j in range(i + 1, n):
            acc = acc - gamma[j] * mat[i][j]
        gamma[i] = acc * (1 / mat[i][i])
    return gamma


def fit_coefficients(
    pairs,
    alpha: RealTarget,
    order: int,
    window: int = DEFAULT_WINDOW,
    rel_tolerance: Fraction = DEFAULT_REL_TOLERANCE,
):
    """Fit gamma_1..gamma_N on the N largest denominators; report residual
    decay on the remaining pairs."""
    pairs = sorted(pairs, key=lambda p: p[1])
    if len({s for _, s in pairs}) != len(pairs):
        raise SingularSystem("duplicate denominators")
    if len(pairs) < order + 2:
        raise InsufficientPairs(f"need at least {order + 2} pairs for order {order}")
    if order == 0:
        rows = _residual_rows(pairs, alpha, [], 0)
        verdict, note = _window_verdict([r.scaled for r in rows], window, rel_tolerance)
        return [], DecayReport(0, rows, window, rel_tolerance, verdict, note)
    fit_part = pairs[-order:]
    rest = pairs[:-order]
    gamma = _solve_vandermonde(fit_part, alpha, order)
    rows = _residual_rows(rest, alpha, gamma, order)
    verdict, note = _window_verdict([r.scaled for r in rows], window, rel_tolerance)
    return gamma, DecayReport(order, rows, window, rel_tolerance, verdict, note)


def verify_order(
    aset: ApproxSet,
    window: int = DEFAULT_WINDOW,
    rel_tolerance: Fraction = DEFAULT_REL_TOLERANCE,
) -> DecayReport:
    """Evaluate the o((|r|+|s|)^-N) claim on every pair of the set."""
    rows = _residual_rows(aset.pairs, aset.alpha, aset.gamma, aset.order)
    verdict, note = _window_verdict([r.scaled for r in rows], window, rel_tolerance)
    return DecayReport(aset.order, rows, window, rel_tolerance, verdict, note)


# ---------------------------------------------------------------------------
# the Psi-driven existence construction


@dataclass
class CertLine:
    k: int
    s: int
    route: str  # "numeric" or "monotone"
    bound: Fraction | None
    ok: bool
    detail: str = ""


@dataclass
class PsiConstruction:
    alpha: RealTarget
    psi: PsiSpec
    indices: list[int]  # n_1..n_K
    n_next: int | None
    s: list[int]
    gamma_partial: object  # exact field element (or RatInterval when certified)
    tail: Fraction
    digits: RealDigits
    certificate: list[CertLine]

    @property
    def certified(self) -> bool:
        return all(line.ok for line in self.certificate)

    def gamma_interval(self) -> RatInterval:
        base = (
            self.gamma_partial
            if isinstance(self.gamma_partial, RatInterval)
            else enclose(self.gamma_partial, _TIGHT)
        )
        return RatInterval(base.lo - self.tail, base.hi + self.tail)


def _digits10_lower(x: int) -> int:
    return (x.bit_length() * 30103) // 100000


def construct_psi(
    alpha: RealTarget,
    psi: PsiSpec,
    count: int,
    digit_budget: int = DEFAULT_DIGIT_BUDGET,
    ctx: CFContext | None = None,
) -> PsiConstruction:
    """Indices n_1 = 4, n_{k+1} = least n > n_k + 1 with 3/q_n <= Psi(q_{n_k+1});
    gamma = sum_k D_{n_k}; s_k = sum_{m<=k} q_{n_m}; certified per-pair bounds.

    Raises BlowUp (carrying the partial construction) when the next index
    forces denominators past `digit_budget` decimal digits.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if isinstance(alpha, (int, Fraction)):
        raise RationalTarget("the construction needs an irrational alpha")
    ctx = ctx or CFContext(alpha, depth=16)
    if ctx.a(0) != 0:
        raise ValueError("alpha must lie in (0, 1)")

    def find_next(prev_n: int) -> int:
        t = ctx.q(prev_n + 1)
        if psi.threshold_exceeds_digits(t, digit_budget):
            raise BlowUp(
                f"next index after n={prev_n} needs more than {digit_budget} digits"
            )
        lo_i, hi_i = psi.threshold_int_bracket(t, 30)
        m = prev_n + 2
        while True:
            qm = ctx.q(m)
            if _digits10_lower(qm) > digit_budget:
                raise BlowUp(f"q_{m} exceeds the digit budget")
            if qm >= hi_i or (qm >= lo_i and psi.q_reaches(qm, t)):
                return m
            m += 1

    indices = [4]
    ctx.q(5)
    try:
        for _ in range(1, count):
            indices.append(find_next(indices[-1]))
    except BlowUp as exc:
        raise BlowUp(
            str(exc), partial=_package(alpha, psi, ctx, indices, None, digit_budget)
        ) from None
    try:
        n_next = find_next(indices[-1])
    except BlowUp:
        n_next = None
    return _package(alpha, psi, ctx, indices, n_next, digit_budget)


def _package(
    alpha,
    psi: PsiSpec,
    ctx: CFContext,
    indices: list[int],
    n_next: int | None,
    digit_budget: int = DEFAULT_DIGIT_BUDGET,
) -> PsiConstruction | None:
    if not indices:
        return None
    exact = isinstance(alpha, QuadIrr)
    s_list = []
    total = 0
    for n in indices:
        total += ctx.q(n)
        s_list.append(total)
    if exact:
        gamma_partial = Fraction(0)
        for n in indices:
            gamma_partial = ctx.D(n) + gamma_partial
    else:
        gamma_partial = RatInterval.point(Fraction(0))
        for n in indices:
            gamma_partial = gamma_partial + ctx.D(n)

    t_last = ctx.q(indices[-1] + 1)
    if n_next is not None:
        tail = 2 * ctx.d_abs_upper(n_next)
    else:
        exact_psi = psi.exact_value(t_last)
        if exact_psi is not None:
            tail = Fraction(2, 3) * exact_psi
        else:
            b0 = psi.tail_cap_exponent(t_last, digit_budget)
            tail = Fraction(1, 10**b0)

    depth = indices[-1] + 1
    b = [0] * depth
    for n in indices:
        b[n] = 1
    digits = RealDigits(
        b=b, depth=depth, tail_bound=RatInterval(-tail, tail), exact_remainder=None
    )

    certificate = []
    K = len(indices)
    for k in range(1, K + 1):
        s_k = s_list[k - 1]
        # structural check: s_k * alpha - partial_k is an exact integer
        detail = ""
        if exact:
            partial_k = Fraction(0)
            for n in indices[:k]:
                partial_k = ctx.D(n) + partial_k
            drift = alpha * s_k - partial_k
            is_int = isinstance(drift, Fraction) and drift.denominator == 1
            detail = "s_k*alpha - partial_k integral; " if is_int else "DRIFT NOT INTEGRAL; "
        next_idx = indices[k] if k < K else n_next
        if next_idx is not None:
            remainder_up = _remainder_upper(ctx, indices, k, tail)
            bound = min(Fraction(3, ctx.q(next_idx + 1)), remainder_up)
            if psi.numeric_feasible(s_k):
                ok = psi.le_psi(bound, s_k)
                certificate.append(
                    CertLine(k, s_k, "numeric", bound, ok, detail + "bound <= Psi(s_k)")
                )
                continue
        # monotone route: ||s_k alpha - gamma|| <= 3/q_{n_{k+1}} <= Psi(q_{n_k+1})
        # by the defining inequality of n_{k+1}; verified fact: s_k <= q_{n_k+1}
        t_k = ctx.q(indices[k - 1] + 1)
        ok = s_k <= t_k
        certificate.append(
            CertLine(
                k,
                s_k,
                "monotone",
                None,
                ok,
                detail + "s_k <= q_{n_k+1} and Psi decreasing",
            )
        )

    return PsiConstruction(
        alpha=alpha,
        psi=psi,
        indices=list(indices),
        n_next=n_next,
        s=s_list,
        gamma_partial=gamma_partial,
        tail=tail,
        digits=digits,
        certificate=certificate,
    )


def _remainder_upper(ctx, indices, k, tail) -> Fraction:
    """Upper bound on |sum_{m>k} D_{n_m}| including the tail beyond K."""
    total = tail
    for n in indices[k:]:
        total += ctx.d_abs_upper(n)
    return total


def nearest_numerators(alpha: RealTarget, s_list, gamma1=None) -> ApproxSet:
    """Pairs (round(alpha*s), s); PrecisionExhausted on rounding ties."""
    pairs = []
    for s in s_list:
        s = int(s)
        if isinstance(alpha, QuadIrr):
            r = (alpha * s).nearest_int()
        elif isinstance(alpha, (int, Fraction)):
            t = Fraction(alpha) * s
            double = 2 * t
            if double.denominator == 1 and double.numerator % 2 == 1:
                raise PrecisionExhausted(f"alpha*{s} is a half-integer: rounding tie")
            r = (t.numerator * 2 + t.denominator) // (2 * t.denominator)
        else:
            iv = alpha.enclosure * s
            r = (2 * iv.mid.numerator + iv.mid.denominator) // (2 * iv.mid.denominator)
            if not (Fraction(2 * r - 1, 2) < iv.lo and iv.hi < Fraction(2 * r + 1, 2)):
                raise PrecisionExhausted(f"cannot round alpha*{s} unambiguously")
        pairs.append((r, s))
    gamma = [gamma1] if gamma1 is not None else []
    return ApproxSet(alpha=alpha, pairs=pairs, order=len(gamma), gamma=gamma)


# ---------------------------------------------------------------------------
# the rational-line case


@dataclass
class LineFit:
    a: int
    b: int
    d: int
    exceptions: int


def line_set(a: int, b: int, d: int, count: int) -> ApproxSet:
    """The `count` smallest positive denominators with b | a*s + d, paired
    with r = (a*s + d)/b; an exact infinite-order set with gamma_1 = d/b."""
    if b < 1:
        raise ValueError("b must be >= 1")
    if gcd(a, b) != 1:
        raise ValueError("a and b must be coprime")
    if count < 1:
        raise ValueError("count must be >= 1")
    inv = pow(a % b, -1, b) if b > 1 else 0
    s0 = (-d * inv) % b if b > 1 else 1
    if s0 == 0:
        s0 = b
    pairs = []
    for i in range(count):
        s = s0 + i * b
        pairs.append(((a * s + d) // b, s))
    return ApproxSet(
        alpha=Fraction(a, b), pairs=pairs, order=1, gamma=[Fraction(d, b)]
    )


def detect_line(pairs, max_prefix_exceptions: int = 2) -> LineFit | None:
    """Find integers (a, b, d), b > 0, gcd(a, b) = 1, with b*r = a*s + d on
    a trailing run of the pairs; violations are tolerated only among the
    first `max_prefix_exceptions` pairs."""
    pairs = sorted(pairs, key=lambda p: p[1])
    if len(pairs) < 3:
        raise InsufficientPairs("need at least 3 pairs")
    (r1, s1), (r2, s2) = pairs[-2], pairs[-1]
    ds, dr = s2 - s1, r2 - r1
    g = gcd(abs(dr), ds)
    if g == 0 or ds == 0:
        return None
    a, b = dr // g, ds // g
    d = b * r2 - a * s2
    bad = [i for i, (r, s) in enumerate(pairs) if b * r != a * s + d]
    if any(i >= max_prefix_exceptions for i in bad):
        return None
    return LineFit(a=a, b=b, d=d, exceptions=len(bad))


# ---------------------------------------------------------------------------
# growth profiling


@dataclass
class GrowthProfile:
    classification: str  # linear | polynomial | exponential | super_exponential
    ratios: list[Fraction]
    differences: list[int]


def growth_profile(s_list) -> GrowthProfile:
    """Classify denominator growth by exact successive-ratio comparisons.

    Ratios that at least double across the window (ending above 4) mean
    super-exponential growth; ratios bounded above 5/4 mean exponential;
    otherwise constant differences mean linear and growing differences
    polynomial.
    """
    s = [int(v) for v in s_list]
    if len(s) < 3:
        raise ValueError("need at least 3 denominators")
    if any(x <= 0 for x in s) or any(y <= x for x, y in zip(s, s[1:])):
        raise ValueError("denominators must be positive and strictly increasing")
    ratios = [Fraction(y, x) for x, y in zip(s, s[1:])]
    diffs = [y - x for x, y in zip(s, s[1:])]
    if ratios[-1] >= 2 * ratios[0] and ratios[-1] > 4:
        cls = "super_exponential"
    elif min(ratios) >= Fraction(5, 4) and ratios[-1] * ratios[-1] >= ratios[0]:
        cls = "exponential"
    elif all(d == diffs[0] for d in diffs):
        cls = "linear"
    elif all(y >= x for x, y in zip(diffs, diffs[1:])):
        cls = "polynomial"
    else:
        cls = "linear"
    return GrowthProfile(classification=cls, ratios=ratios, differences=diffs)
