"""Command-line front end.

Every subcommand prints exactly one JSON document (or CSV with --csv for
residual tables) and exits 0 on success, 1 on a domain error (the typed
error name appears in the JSON), 2 on usage errors.  All unbounded integers
are serialized as decimal strings; structural counts and digit values stay
plain JSON numbers.  Output is byte-identical across runs for identical
inputs: no timestamps, no environment echoes, insertion-ordered keys.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction

from .approx import (
    ApproxSet,
    DecayReport,
    PsiSpec,
    construct_psi,
    detect_line,
    fit_coefficients,
    growth_profile,
    line_set,
    nearest_numerators,
    verify_order,
)
from .cf import CFContext, cf_expand, convergents
from .conic import (
    ConicForm,
    conic_orbit,
    find_seed,
    laurent_expansion,
    periodic_construction,
    quad_detect,
)
from .errors import RatApproxError
from .exactnum import Certified, QuadIrr, RatInterval, enclose, qi_normalize
from .ostrowski import delta_profile, dist_bound, dist_direct, dist_formula, ostrowski_int, ostrowski_real

CONFIG_ENV_VAR = "RATAPPROX_CONFIG"

# schema file (under ratapprox/schemas/) describing each subcommand's JSON
SCHEMA_BY_COMMAND = {
    "cf": "cf",
    "convergents": "convergents",
    "ostrowski-int": "ostrowski_int",
    "ostrowski-real": "ostrowski_real",
    "dist": "dist",
    "approx-fit": "approx_report",
    "approx-verify": "approx_report",
    "build-psi": "build_psi",
    "line": "approx_set",
    "detect-line": "detect_line",
    "conic-orbit": "conic_orbit",
    "laurent": "laurent",
    "build-periodic": "build_periodic",
    "detect-quad": "detect_quad",
    "growth": "growth",
}


def schema_path(name: str) -> str:
    """Filesystem path of a shipped schema ('cf', 'error', a command name...)."""
    base = SCHEMA_BY_COMMAND.get(name, name)
    return os.path.join(os.path.dirname(__file__), "schemas", f"{base}.schema.json")


@dataclass
class Config:
    """Runtime knobs; file values (key=value lines) are overridden by flags."""

    precision_digits: int = 200
    decay_window: int = 5
    decay_tolerance: Fraction = Fraction(1, 1000)
    digit_budget: int = 100_000
    seed_bound: int = 10_000
    orbit_bound: int = 1_000_000
    prefix_exceptions: int = 2

    def validate(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"config {f.name} must be positive")

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in fields(self))

    @staticmethod
    def from_text(text: str) -> "Config":
        cfg = Config()
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in {f.name for f in fields(Config)}:
                raise ValueError(f"unknown config key: {key}")
            if key == "decay_tolerance":
                setattr(cfg, key, Fraction(value))
            else:
                setattr(cfg, key, int(value))
        cfg.validate()
        return cfg


# ---------------------------------------------------------------------------
# parsing and serialization


def parse_target(text: str):
    kind, _, body = text.partition(":")
    if kind == "rat" and body:
        return Fraction(body)
    if kind == "quad" and body:
        parts = [int(x) for x in body.split(",")]
        if len(parts) != 4:
            raise ValueError("quad target needs P,e,D,Q")
        return qi_normalize(*parts)
    if kind == "dec" and body:
        return Certified.parse(body)
    raise ValueError(f"cannot parse target {text!r}; use rat:p/q, quad:P,e,D,Q or dec:digits±err")


def parse_psi(text: str) -> PsiSpec:
    kind, _, body = text.partition(":")
    if kind == "exp" and body:
        return PsiSpec.exp_decay(Fraction(body))
    if kind == "power" and body:
        return PsiSpec.power(int(body))
    if kind == "table" and body:
        with open(body, encoding="utf-8") as fh:
            rows = json.load(fh)
        return PsiSpec.rational_table([(int(s), Fraction(v)) for s, v in rows])
    raise ValueError(f"cannot parse psi {text!r}; use exp:c, power:k or table:FILE")


def rat_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def sci_str(x: Fraction, sig: int = 17) -> str:
    """Deterministic scientific-notation rendering of an exact rational."""
    x = Fraction(x)
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    ax = abs(x)
    exp = len(str(ax.numerator)) - len(str(ax.denominator))
    ten = Fraction(10)
    while ten**exp > ax:
        exp -= 1
    while ten ** (exp + 1) <= ax:
        exp += 1
    mant = ax * Fraction(10) ** (sig - 1 - exp)
    digits = str((mant.numerator + mant.denominator // 2) // mant.denominator)
    if len(digits) > sig:  # rounding overflow, e.g. 9.99 -> 10.0
        digits = digits[:sig]
        exp += 1
    return f"{sign}{digits[0]}.{digits[1:]}e{exp:+03d}"


def target_json(x) -> dict:
    if isinstance(x, QuadIrr):
        return {"kind": "quad", "value": x.to_json()}
    if isinstance(x, Certified):
        return {"kind": "dec", "value": x.to_json()}
    return {"kind": "rat", "value": rat_str(Fraction(x))}


def gamma_json(g) -> dict:
    if isinstance(g, QuadIrr):
        return {"kind": "quad", "value": g.to_json()}
    if isinstance(g, RatInterval):
        return {"kind": "interval", "value": g.to_json()}
    return {"kind": "rat", "value": rat_str(Fraction(g))}


def approx_set_json(aset: ApproxSet) -> dict:
    return {
        "alpha": target_json(aset.alpha),
        "N": aset.order,
        "gamma": [gamma_json(g) for g in aset.gamma],
        "pairs": [[str(r), str(s)] for r, s in aset.pairs],
    }


def report_json(rep: DecayReport) -> dict:
    return {
        "order": rep.order,
        "window": rep.window,
        "rel_tolerance": rat_str(rep.rel_tolerance),
        "verdict": "PASS" if rep.verdict else "FAIL",
        "note": rep.note,
        "rows": [
            {
                "r": str(row.r),
                "s": str(row.s),
                "residual": _approx_str(row.residual),
                "scaled_residual": _approx_str(row.scaled),
            }
            for row in rep.rows
        ],
    }


def _approx_str(v) -> str:
    if isinstance(v, RatInterval):
        return sci_str(v.mid)
    if isinstance(v, (int, Fraction)):
        return sci_str(Fraction(v))
    return sci_str(enclose(v, Fraction(1, 10**40)).mid)


def report_csv(rep: DecayReport) -> str:
    lines = ["s,r,residual,scaled_residual"]
    for row in rep.rows:
        lines.append(
            f"{row.s},{row.r},{_approx_str(row.residual)},{_approx_str(row.scaled)}"
        )
    return "\n".join(lines) + "\n"


def load_pairs(path: str) -> list[tuple[int, int]]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    raw = doc["pairs"] if isinstance(doc, dict) else doc
    return [(int(r), int(s)) for r, s in raw]


def load_approx_set(path: str) -> ApproxSet:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    alpha = _target_from_json(doc["alpha"])
    gamma = [_gamma_from_json(g) for g in doc.get("gamma", [])]
    pairs = [(int(r), int(s)) for r, s in doc["pairs"]]
    return ApproxSet(alpha=alpha, pairs=pairs, order=int(doc["N"]), gamma=gamma)


def _target_from_json(doc: dict):
    kind = doc["kind"]
    if kind == "rat":
        return Fraction(doc["value"])
    if kind == "quad":
        v = doc["value"]
        return qi_normalize(int(v["P"]), int(v["e"]), int(v["D"]), int(v["Q"]))
    if kind == "dec":
        v = doc["value"]
        return Certified(
            digits=v["digits"],
            enclosure=RatInterval(
                Fraction(v["enclosure"]["lo"]), Fraction(v["enclosure"]["hi"])
            ),
        )
    raise ValueError(f"unknown target kind {kind!r}")


def _gamma_from_json(doc: dict):
    kind = doc["kind"]
    if kind == "rat":
        return Fraction(doc["value"])
    if kind == "quad":
        v = doc["value"]
        return qi_normalize(int(v["P"]), int(v["e"]), int(v["D"]), int(v["Q"]))
    if kind == "interval":
        v = doc["value"]
        return RatInterval(Fraction(v["lo"]), Fraction(v["hi"]))
    raise ValueError(f"unknown gamma kind {kind!r}")


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_cf(args, cfg: Config) -> dict:
    cf = cf_expand(parse_target(args.alpha), args.depth)
    doc = cf.to_json()
    doc["a"] = doc["a"][: args.depth] if not cf.finite else doc["a"]
    return doc


def _cmd_convergents(args, cfg: Config) -> dict:
    cf = cf_expand(parse_target(args.alpha), args.n + 1)
    cv = convergents(cf, args.n)
    return {"convergents": [[str(c.p), str(c.q)] for c in cv]}


def _cmd_ostrowski_int(args, cfg: Config) -> dict:
    ctx = CFContext(parse_target(args.alpha), depth=args.depth)
    d = ostrowski_int(args.s, ctx)
    return {"s": str(d.s), "M": d.M, "digits": list(d.c)}


def _cmd_ostrowski_real(args, cfg: Config) -> dict:
    ctx = CFContext(parse_target(args.alpha), depth=args.depth + 2)
    d = ostrowski_real(
        parse_target(args.gamma),
        ctx,
        args.depth,
        allow_orbit=args.allow_orbit,
        precision_digits=cfg.precision_digits,
        orbit_search_bound=cfg.orbit_bound,
    )
    return {
        "depth": d.depth,
        "digits": list(d.b),
        "tail_bound": d.tail_bound.to_json(),
    }


def _cmd_dist(args, cfg: Config) -> dict:
    alpha = parse_target(args.alpha)
    gamma = parse_target(args.gamma)
    ctx = CFContext(alpha, depth=args.depth + 2)
    width = Fraction(1, 10**args.width_digits)
    direct = dist_direct(args.s, gamma, alpha, width)
    prof = delta_profile(args.s, gamma, ctx, args.depth, allow_orbit=args.allow_orbit)
    doc = {
        "s": str(args.s),
        "m": prof.m,
        "regime": "series" if prof.m is not None and prof.m >= 4 else "direct-only",
        "direct": direct.to_json(),
        "formula": None,
        "bound": None,
    }
    if doc["regime"] == "series":
        val = dist_formula(prof, ctx)
        iv = val if isinstance(val, RatInterval) else enclose(val, width)
        doc["formula"] = iv.to_json()
        doc["bound"] = rat_str(dist_bound(prof, ctx))
    return doc


def _cmd_approx_fit(args, cfg: Config):
    pairs = load_pairs(args.pairs)
    alpha = parse_target(args.alpha)
    gamma, report = fit_coefficients(
        pairs,
        alpha,
        args.order,
        window=cfg.decay_window,
        rel_tolerance=cfg.decay_tolerance,
    )
    aset = ApproxSet(alpha=alpha, pairs=sorted(pairs, key=lambda p: p[1]),
                     order=args.order, gamma=gamma)
    if args.csv:
        return report_csv(report)
    return {"set": approx_set_json(aset), "report": report_json(report)}


def _cmd_approx_verify(args, cfg: Config):
    aset = load_approx_set(args.set)
    report = verify_order(
        aset, window=cfg.decay_window, rel_tolerance=cfg.decay_tolerance
    )
    if args.csv:
        return report_csv(report)
    return {"set": approx_set_json(aset), "report": report_json(report)}


def _cmd_build_psi(args, cfg: Config) -> dict:
    alpha = parse_target(args.alpha)
    cons = construct_psi(
        alpha, parse_psi(args.psi), args.count, digit_budget=cfg.digit_budget
    )
    iv = cons.gamma_interval()
    doc = {
        "psi": cons.psi.to_json(),
        "alpha": target_json(alpha),
        "indices": cons.indices,
        "n_next": cons.n_next,
        "s": [str(v) for v in cons.s],
        "gamma": {
            "partial": gamma_json(cons.gamma_partial),
            "tail_bound": rat_str(cons.tail),
            "interval": iv.to_json(),
        },
        "digit_support": cons.digits.support(),
        "certified": cons.certified,
        "certificate": [
            {
                "k": line.k,
                "s": str(line.s),
                "route": line.route,
                "bound": None if line.bound is None else rat_str(line.bound),
                "ok": line.ok,
                "detail": line.detail,
            }
            for line in cons.certificate
        ],
    }
    if args.pairs_out or args.with_pairs:
        gamma1 = RatInterval(-iv.hi, -iv.lo)
        aset = nearest_numerators(alpha, cons.s, gamma1=gamma1)
        doc["set"] = approx_set_json(aset)
        if args.pairs_out:
            with open(args.pairs_out, "w", encoding="utf-8") as fh:
                json.dump(doc["set"], fh, indent=2)
                fh.write("\n")
    return doc


def _cmd_line(args, cfg: Config) -> dict:
    return approx_set_json(line_set(args.a, args.b, args.d, args.count))


def _cmd_detect_line(args, cfg: Config) -> dict:
    fit = detect_line(load_pairs(args.pairs), max_prefix_exceptions=cfg.prefix_exceptions)
    if fit is None:
        return {"line": None}
    return {
        "line": {
            "a": str(fit.a),
            "b": str(fit.b),
            "d": str(fit.d),
            "exceptions": fit.exceptions,
        }
    }


def _cmd_conic_orbit(args, cfg: Config) -> dict:
    a, b, c = (int(x) for x in args.form.split(","))
    form = ConicForm(a, b, c, args.d)
    if args.seed:
        seed = tuple(int(x) for x in args.seed.split(","))
    else:
        seed = find_seed(form, cfg.seed_bound)
        if seed is None:
            raise RatApproxError(
                f"no seed with s <= {cfg.seed_bound} represents {args.d}"
            )
    aset = conic_orbit(form, seed, args.count)
    doc = approx_set_json(aset)
    doc["form"] = form.to_json()
    return doc


def _cmd_laurent(args, cfg: Config) -> dict:
    a, b, c = (int(x) for x in args.form.split(","))
    lx = laurent_expansion(ConicForm(a, b, c, args.d), args.terms)
    return {
        "form": lx.form.to_json(),
        "alpha": target_json(lx.alpha),
        "gamma": [gamma_json(g) for g in lx.gamma],
        "threshold_s": str(lx.threshold_s),
        "next_term_j": lx.next_term_j,
        "next_term_upper": rat_str(lx.next_term_upper),
    }


def _cmd_build_periodic(args, cfg: Config):
    alpha = parse_target(args.alpha)
    pc = periodic_construction(alpha, args.count)
    if args.csv:
        return report_csv(pc.report)
    doc = approx_set_json(pc.aset)
    doc["gamma2"] = gamma_json(pc.gamma2)
    doc["K"] = pc.preperiod
    doc["L"] = pc.period
    doc["report"] = report_json(pc.report)
    return doc


def _cmd_detect_quad(args, cfg: Config) -> dict:
    form = quad_detect(load_pairs(args.pairs), max_prefix_exceptions=cfg.prefix_exceptions)
    return {"form": None if form is None else form.to_json()}


def _cmd_growth(args, cfg: Config) -> dict:
    if args.s:
        s_list = [int(x) for x in args.s.split(",")]
    elif args.pairs:
        s_list = [s for _, s in load_pairs(args.pairs)]
    else:
        raise ValueError("growth needs --s or --pairs")
    prof = growth_profile(s_list)
    return {
        "classification": prof.classification,
        "ratios": [rat_str(r) for r in prof.ratios],
        "differences": [str(d) for d in prof.differences],
    }


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ratapprox",
        description="order-N rational approximation toolkit",
        allow_abbrev=False,
    )
    top.add_argument("--config", help="path to key=value config file")
    for name, default in (
        ("--precision-digits", None),
        ("--decay-window", None),
        ("--digit-budget", None),
        ("--seed-bound", None),
        ("--orbit-bound", None),
        ("--prefix-exceptions", None),
    ):
        top.add_argument(name, type=int, default=default)
    top.add_argument("--decay-tolerance", type=Fraction, default=None)
    sub = top.add_subparsers(dest="command", required=True)

    def cmd(name, handler, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(handler=handler)
        return p

    p = cmd("cf", _cmd_cf, help="continued-fraction expansion")
    p.add_argument("--alpha", required=True)
    p.add_argument("--depth", type=int, default=32)

    p = cmd("convergents", _cmd_convergents, help="principal convergents")
    p.add_argument("--alpha", required=True)
    p.add_argument("--n", type=int, default=10)

    p = cmd("ostrowski-int", _cmd_ostrowski_int, help="integer Ostrowski digits")
    p.add_argument("--alpha", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--depth", type=int, default=64)

    p = cmd("ostrowski-real", _cmd_ostrowski_real, help="real Ostrowski digits")
    p.add_argument("--alpha", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--depth", type=int, default=24)
    p.add_argument("--allow-orbit", action="store_true")

    p = cmd("dist", _cmd_dist, help="distance ||s*alpha - gamma||")
    p.add_argument("--alpha", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--depth", type=int, default=24)
    p.add_argument("--width-digits", type=int, default=30)
    p.add_argument("--allow-orbit", action="store_true")

    p = cmd("approx-fit", _cmd_approx_fit, help="fit expansion coefficients")
    p.add_argument("--alpha", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--csv", action="store_true")

    p = cmd("approx-verify", _cmd_approx_verify, help="verify an ApproxSet file")
    p.add_argument("--set", required=True)
    p.add_argument("--csv", action="store_true")

    p = cmd("build-psi", _cmd_build_psi, help="Psi-driven existence construction")
    p.add_argument("--alpha", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--with-pairs", action="store_true")
    p.add_argument("--pairs-out")

    p = cmd("line", _cmd_line, help="rational line set b*r = a*s + d")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--count", type=int, required=True)

    p = cmd("detect-line", _cmd_detect_line, help="detect a rational line")
    p.add_argument("--pairs", required=True)

    p = cmd("conic-orbit", _cmd_conic_orbit, help="Pell-type conic orbit")
    p.add_argument("--form", required=True, help="a,b,c")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", help="r,s")

    p = cmd("laurent", _cmd_laurent, help="exact Laurent coefficients of a conic")
    p.add_argument("--form", required=True, help="a,b,c")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--terms", type=int, default=4)

    p = cmd("build-periodic", _cmd_build_periodic, help="periodic-expansion construction")
    p.add_argument("--alpha", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--csv", action="store_true")

    p = cmd("detect-quad", _cmd_detect_quad, help="detect a conic form")
    p.add_argument("--pairs", required=True)

    p = cmd("growth", _cmd_growth, help="denominator growth classification")
    p.add_argument("--s", help="comma-separated denominators")
    p.add_argument("--pairs", help="pairs file")

    return top


def load_config(args) -> Config:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if path:
        with open(path, encoding="utf-8") as fh:
            cfg = Config.from_text(fh.read())
    else:
        cfg = Config()
    overrides = {
        "precision_digits": args.precision_digits,
        "decay_window": args.decay_window,
        "decay_tolerance": args.decay_tolerance,
        "digit_budget": args.digit_budget,
        "seed_bound": args.seed_bound,
        "orbit_bound": args.orbit_bound,
        "prefix_exceptions": args.prefix_exceptions,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    # denominators legitimately reach thousands of digits; decimal-string
    # output is part of the contract
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        doc = args.handler(args, cfg)
    except (RatApproxError, ValueError, ZeroDivisionError, OSError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
        return 1
    if isinstance(doc, str):
        sys.stdout.write(doc)
    else:
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
