"""Command line entry point.  Every subcommand prints a JSON report with
the configuration, seed and package versions; exit status is 0 on
success, 2 when an invariant check fails and 1 on usage errors."""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy

from . import __version__

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------- parsing helpers


def int_arg(text) -> int:
    """Integers written as 1000000, 1e6 or 10**6."""
    text = str(text).strip()
    if "**" in text:
        base, exp = text.split("**")
        return int(base) ** int(exp)
    try:
        return int(text)
    except ValueError:
        v = float(text)
        if not v.is_integer():
            raise argparse.ArgumentTypeError(f"{text} is not an integer")
        return int(v)


def int_list(text) -> list[int]:
    return [int_arg(t) for t in str(text).split(",") if t.strip()]


def prime_set(text) -> list[int]:
    if str(text).strip().lower() in ("all", "*", "inf", "infinite"):
        raise argparse.ArgumentTypeError("S must be a finite set of primes")
    ps = int_list(text)
    bad = [p for p in ps if not sympy.isprime(p)]
    if bad:
        raise argparse.ArgumentTypeError(f"not prime: {bad}")
    return ps


_GROUP_RE = re.compile(r"^(?P<body>C\d+(?:xC\d+)*)(?:[:\-]?(?P<minus>minus))?$", re.IGNORECASE)


def parse_group(text):
    """'C4', 'C2xC6', 'C2minus' -> (group, selection, involution)."""
    from .groups import build_group, cyclic_involution

    m = _GROUP_RE.match(str(text).strip())
    if not m:
        raise UsageError(f"cannot parse group {text!r}; use e.g. C4, C2xC6, C2minus")
    orders = [int(c) for c in re.findall(r"\d+", m.group("body"))]
    G = build_group(orders)
    if m.group("minus"):
        try:
            inv = cyclic_involution(G)
        except ValueError as e:
            raise UsageError(str(e)) from None
        return G, "minus", inv
    return G, "all", None


def cache_dir() -> Path:
    return Path(os.environ.get("CLM_LAB_CACHE_DIR") or Path.home() / ".cache" / "clm-lab")


def default_cache() -> Path:
    return cache_dir() / "forms.csv"


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, Path):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _versions() -> dict:
    return {"clm_lab": __version__, "python": platform.python_version(), "numpy": np.__version__, "sympy": sympy.__version__}


# ---------------------------------------------------------------- subcommands


def cmd_measure(args) -> tuple[dict, bool]:
    from .measure import (
        expectation_bracket,
        local_normalizer,
        make_measure,
        normalizer_partition_sum,
        sample_shapes,
        surjection_moment_check,
    )
    from .modules import ModuleShape

    if args.action == "normalizer":
        z = local_normalizer(args.q, args.u)
        s, tail = normalizer_partition_sum(args.q, args.u, args.N)
        ok = float(s) <= float(z.upper) and float(z.lower) <= float(s) + tail
        return {
            "closed_form": {"lower": float(z.lower), "upper": float(z.upper)},
            "partition_sum": {"value": float(s), "tail_bound": tail, "N": args.N},
            "agree": ok,
        }, ok

    if args.group is None or args.S is None:
        raise UsageError("measure sample/expect/moment need --group and --S")
    G, selection, inv = parse_group(args.group)
    bad = [p for p in args.S if G.order % p == 0]
    if bad:
        raise UsageError(f"primes {bad} divide #G = {G.order}")
    meas = make_measure(G, args.S, args.u, selection, inv)
    base = {"measure": meas.to_json()}

    if args.action == "sample":
        shapes = sample_shapes(meas, args.n, args.seed)
        orders = [M.order for M in shapes]
        return {**base, "n": args.n, "shapes": [M.to_json() for M in shapes[: args.show]],
                "mean_log_order": float(np.mean(np.log(orders))) if orders else 0.0,
                "trivial_fraction": orders.count(1) / len(orders) if orders else 0.0}, True

    if args.action == "expect":
        if args.f not in FUNCTIONS:
            raise UsageError(f"unknown function {args.f}; choose from {sorted(FUNCTIONS)}")
        f = FUNCTIONS[args.f]
        br = expectation_bracket(f, meas, args.N)
        out = {**base, "f": args.f, "bracket": br.to_json()}
        if args.f == "indicator-3-coprime":
            closed = _prob_three_coprime(meas)
            out["closed_form"] = closed
            ok = br.lower <= closed["upper"] and closed["lower"] <= br.upper
            out["consistent_with_closed_form"] = ok
            return out, ok
        return out, True

    if args.action == "moment":
        if not args.A:
            raise UsageError("moment needs --A (JSON module shape)")
        A = ModuleShape.from_json(args.A, meas.ideals)
        br = surjection_moment_check(A, meas)
        expected = Fraction(1, math.prod(m.norm ** (meas.rank_at(m) * lam.size) for m, lam in A.torsion))
        ok = expected in br
        return {**base, "A": A.to_json(), "bracket": br.to_json(), "expected": float(expected), "contains_expected": ok}, ok
    raise UsageError(f"unknown measure action {args.action}")


def _prob_three_coprime(meas) -> dict:
    """P(3 does not divide #M) = prod over ideals above 3 of 1/Z_m."""
    lo, hi = Fraction(1), Fraction(1)
    for m, z in zip(meas.ideals, meas.normalizers):
        if m.p == 3:
            lo /= z.upper
            hi /= z.lower
    return {"lower": float(lo), "upper": float(hi)}


def _fns():
    from .measure import indicator

    return {
        "indicator-3-coprime": indicator(lambda M: M.order % 3 != 0, "indicator-3-coprime"),
        "indicator-trivial": indicator(lambda M: M.order == 1, "indicator-trivial"),
        "indicator-cyclic": indicator(lambda M: all(lam.length <= 1 for _, lam in M.torsion), "indicator-cyclic"),
    }


class _Lazy(dict):
    def __missing__(self, key):
        self.update(_fns())
        if key not in self:
            raise KeyError(key)
        return self[key]

    def __contains__(self, key):
        if not dict.__len__(self):
            self.update(_fns())
        return dict.__contains__(self, key)

    def __iter__(self):
        if not dict.__len__(self):
            self.update(_fns())
        return dict.__iter__(self)


FUNCTIONS = _Lazy()


def cmd_lseries(args) -> tuple[dict, bool]:
    from .arith import primes_up_to
    from .lseries import synthetic_class_datum, verify_analytic_identity, verify_rank_additivity
    from .measure import make_measure

    G, selection, inv = parse_group(args.group)
    if args.B > 10**5:
        raise UsageError("B above 10^5 is not supported")
    S = [int(p) for p in primes_up_to(args.B) if G.order % int(p)]
    if args.component:
        selection = args.component.split(",")
    meas = make_measure(G, S, args.u, selection, inv)
    datum = synthetic_class_datum(meas.ideals, tuple(args.class_group), args.seed)
    phi = tuple(args.phi) if args.phi else tuple(0 for _ in args.class_group)
    if len(phi) != len(args.class_group):
        raise UsageError("--phi needs one exponent per cyclic factor of --class-group")
    rep = verify_analytic_identity(meas, datum, phi, args.B)
    out = {"identity": rep.identity, "B": rep.B, "max_norm_checked": rep.max_norm_checked,
           "terms": rep.terms, "max_deviation": rep.max_deviation,
           "components": list(meas.component_ids), "phi": list(phi), "class_group": list(args.class_group),
           "synthetic_class_datum": True}
    ok = rep.identity
    if args.v:
        add = verify_rank_additivity(meas, datum, phi, args.B, args.u, args.v)
        out["rank_additivity"] = {"u": args.u, "v": args.v, **add.to_json()}
        ok = ok and add.identity
    return out, ok


def _load_table(path, ds, build: bool):
    from .quadforms import FormClassTable, build_table

    path = Path(path)
    table = FormClassTable.read_csv(path)
    missing = table.covers(ds)
    if missing:
        if not build:
            raise UsageError(f"cache {path} lacks {len(missing)} class numbers (e.g. {missing[:3]}); rerun with --build")
        print(f"computing {len(missing)} class numbers into {path}", file=sys.stderr)
        table = build_table(ds, path=path)
    return table


def cmd_quartic(args) -> tuple[dict, bool]:
    from .quartic import count_by_subfield, density_bracket, empirical_density, p_k_limit, t_constant

    if args.action == "count":
        counts = count_by_subfield(args.x)
        total = sum(counts.values())
        out = {"x": args.x, "count": total}
        if args.d is not None:
            out["d"] = args.d
            out["count_with_subfield"] = counts.get(args.d, 0)
            t = t_constant(args.tP)
            pk = p_k_limit(args.d, t)
            out["ratio"] = counts.get(args.d, 0) / total if total else 0.0
            out["p_k_limit"] = {"lower": pk.lower, "upper": pk.upper}
        return out, True

    from .quartic import admissible_subfield_discriminants, subfields_needed

    t = t_constant(args.tP)
    ds = sorted(set(admissible_subfield_discriminants(args.D)) | set(subfields_needed(args.x)))
    table = _load_table(args.cache or default_cache(), ds, args.build)
    br = density_bracket(args.D, t, table)
    emp = empirical_density(args.x, table)
    out = {**br.to_json(), "x": args.x, "empirical_density": float(emp), "empirical_exact": str(emp)}
    ok = br.lower <= br.upper and br.mass_accounted <= 1
    return out, ok


def cmd_disprove(args) -> tuple[dict, bool]:
    from .measure import local_normalizer
    from .quartic import (
        OBSERVED_VALUE,
        admissible_subfield_discriminants,
        density_bracket,
        empirical_density,
        subfields_needed,
        t_constant,
    )

    t0 = time.time()
    t = t_constant(args.tP)
    ds = sorted(set(admissible_subfield_discriminants(args.D)) | set(subfields_needed(args.x)))
    table = _load_table(args.cache or default_cache(), ds, args.build)
    br = density_bracket(args.D, t, table)
    emp = empirical_density(args.x, table)
    # heuristic prediction: P(3 does not divide #M) for one ideal of norm 3 and rank 1
    z = local_normalizer(3, 1)
    heur_lo, heur_hi = float(1 / z.upper), float(1 / z.lower)
    contains = OBSERVED_VALUE in br
    out = {
        "bracket": br.to_json(),
        "observed_value": OBSERVED_VALUE,
        "bracket_contains_observed_value": contains,
        "width_below_0.01": br.width < 0.01,
        "heuristic_value": round((heur_lo + heur_hi) / 2, 4),
        "heuristic_bracket": {"lower": heur_lo, "upper": heur_hi},
        "heuristic_excluded_by_bracket": not (br.lower <= heur_hi and heur_lo <= br.upper),
        "empirical_density": {"x": args.x, "value": float(emp), "exact": str(emp)},
        "seconds": round(time.time() - t0, 2),
    }
    return out, contains and br.width < 0.01


def cmd_stickelberger(args) -> tuple[dict, bool]:
    from .bernoulli import stickelberger_valuation_test, teichmuller_unit_check
    from .quadforms import is_fundamental_discriminant

    rows = []
    for d in range(-3, -args.dmax - 1, -1):
        if not is_fundamental_discriminant(d):
            continue
        for p in args.primes:
            if (d, p) == (-3, 3) or (2 * d) % p:
                rows.append(stickelberger_valuation_test(d, p).to_json())
    failures = [r for r in rows if not r["pass"]]
    qs = [q for q in range(3, args.qmax + 1) if sympy.isprime(q)]
    teich = [teichmuller_unit_check(q, args.precision) for q in qs]
    tfail = [c.q for c in teich if not c.ok]
    out = {"rows_checked": len(rows), "failures": failures, "exception_rows": [r for r in rows if r["exception"]],
           "teichmuller": {"q_max": args.qmax, "precision": args.precision, "checked": len(qs), "failures": tfail}}
    if args.rows:
        out["rows"] = rows
    return out, not failures and not tfail


def cmd_quadforms(args) -> tuple[dict, bool]:
    from .quadforms import build_table, fundamental_discriminants

    ds = fundamental_discriminants(args.min, args.max)
    path = args.cache or default_cache()
    table = build_table(ds, path=path, workers=args.workers)
    rep = table.verify(0.0 if args.no_verify else 0.01, args.seed)
    sel = [table[d] for d in ds]
    return {"cache": str(path), "discriminants": len(ds), "rows_in_cache": len(table),
            "three_divides_h": sum(1 for r in sel if r.h_narrow % 3 == 0), "verify": rep}, rep["ok"]


def cmd_lln(args) -> tuple[dict, bool]:
    from .lln import (
        adversarial_function,
        bounded_suite,
        early_hitters,
        expected_early_hitters,
        parse_dist,
        running_average_profile,
        sample_stream,
    )

    try:
        dist = parse_dist(args.dist)
    except ValueError as e:
        raise UsageError(str(e)) from None
    stream = sample_stream(dist, args.n, args.seed)
    hitters = {}
    for eps in args.eps:
        h = early_hitters(stream, Fraction(eps))
        hitters[str(eps)] = {"count": len(h), "expected": expected_early_hitters(dist, eps, args.n),
                             "first": [[x, i] for x, i in h[:10]]}
    f = adversarial_function(stream)
    profile, spikes = running_average_profile(f, stream)
    suite = bounded_suite(dist, args.n, args.seed)
    cert = f.certificate()
    worst = max(r["deviation"] for r in suite)
    ok = cert["ok"] and all(s.ok for s in spikes)
    return {
        "dist": dist.name,
        "n": args.n,
        "hitters": hitters,
        "adversarial_points": [{"n": p.n, "x": p.x, "first_index": p.first_index, "p": str(p.p), "f": str(p.f_value)} for p in f.points],
        "certificate": cert,
        "spikes": [{"n": s.n, "index": s.index, "average": float(s.average), "average_exact": str(s.average), "ok": s.ok} for s in spikes],
        "profile": profile,
        "bounded_suite": {"max_deviation": worst, "tolerance": 5e-3, "within_tolerance": worst < 5e-3, "rows": suite},
    }, ok


def cmd_demo_c58(args) -> tuple[dict, bool]:
    import itertools

    from .lseries import c58_equidistribution_demo

    chars = [tuple(args.phi)] if args.phi else list(itertools.product((0, 1), repeat=3))
    out, ok = {"note": "synthetic class datum: seeded uniform classes in (Z/2)^3, qualitative only", "characters": []}, True
    for phi in chars:
        seq = c58_equidistribution_demo(args.N, phi, args.seed)
        if any(phi):
            good = all(b["upper"] < a["lower"] for a, b in zip(seq, seq[1:])) and all(0 < r["lower"] and r["upper"] <= 1 for r in seq)
        else:
            good = all(r["ratio"] == 1.0 for r in seq)
        ok = ok and good
        out["characters"].append({"phi": list(phi), "sequence": seq, "as_expected": good})
    return out, ok


def cmd_cache(args) -> tuple[dict, bool]:
    from .quadforms import FormClassTable, build_table, fundamental_discriminants
    from .quartic import admissible_subfield_discriminants

    if args.action == "build":
        path = args.path or default_cache()
        if args.quartic_D:
            ds = admissible_subfield_discriminants(args.quartic_D)
        else:
            if args.min is None or args.max is None:
                raise UsageError("cache build needs --min/--max or --quartic-D")
            ds = fundamental_discriminants(args.min, args.max)
        table = build_table(ds, path=path, workers=args.workers)
        return {"path": str(path), "requested": len(ds), "rows": len(table)}, True
    if args.action == "verify":
        path = args.path or default_cache()
        if not Path(path).exists():
            raise UsageError(f"no cache at {path}")
        rep = FormClassTable.read_csv(path).verify(args.fraction, args.seed)
        return {"path": str(path), **rep}, rep["ok"]
    if args.action == "merge":
        if len(args.inputs) < 2 or not args.output:
            raise UsageError("merge needs at least two --inputs and --output")
        tables = [FormClassTable.read_csv(p) for p in args.inputs]
        merged = tables[0]
        try:
            for t in tables[1:]:
                merged = merged.merge(t)
        except ValueError as e:
            return {"error": str(e)}, False
        merged.write_csv(args.output)
        return {"output": args.output, "rows": len(merged), "inputs": {p: len(t) for p, t in zip(args.inputs, tables)}}, True
    raise UsageError(f"unknown cache action {args.action}")


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="clm-lab", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="JSON file whose keys set default flag values")
    p.add_argument("--out", help="also write the report to this file")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("measure", help="normalizers, sampling, expectations and moments")
    m.add_argument("action", choices=["normalizer", "sample", "expect", "moment"])
    m.add_argument("--q", type=int_arg, default=3)
    m.add_argument("--u", type=int_arg, default=0)
    m.add_argument("--N", type=int_arg, default=12, help="length cutoff for exact sums")
    m.add_argument("--group")
    m.add_argument("--S", type=prime_set)
    m.add_argument("--f", default="indicator-3-coprime")
    m.add_argument("--A", help="module shape as JSON")
    m.add_argument("--n", type=int_arg, default=1000)
    m.add_argument("--show", type=int_arg, default=10)
    m.add_argument("--seed", type=int_arg, default=0)
    m.set_defaults(func=cmd_measure)

    ls = sub.add_parser("lseries", help="exact Dirichlet-series identities")
    ls.add_argument("action", choices=["verify"])
    ls.add_argument("--group", default="C4")
    ls.add_argument("--component", help="comma separated component ids (default: all)")
    ls.add_argument("--u", type=int_arg, default=1)
    ls.add_argument("--v", type=int_arg, default=0, help="also check Z_{u+v} = Z_u Z_v(u+s)")
    ls.add_argument("--B", type=int_arg, default=10**4)
    ls.add_argument("--class-group", type=int_list, default=[2])
    ls.add_argument("--phi", type=int_list)
    ls.add_argument("--seed", type=int_arg, default=0)
    ls.set_defaults(func=cmd_lseries)

    q = sub.add_parser("quartic", help="cyclic quartic field counts and densities")
    q.add_argument("action", choices=["density", "count"])
    q.add_argument("--D", type=int_arg, default=10**6)
    q.add_argument("--x", type=int_arg, default=10**8)
    q.add_argument("--d", type=int_arg)
    q.add_argument("--tP", type=int_arg, default=10**8)
    q.add_argument("--cache")
    q.add_argument("--build", action="store_true", help="compute missing class numbers")
    q.set_defaults(func=cmd_quartic)

    st = sub.add_parser("stickelberger", help="v_p(h) = v_p(beta) for imaginary quadratic fields")
    st.add_argument("--dmax", type=int_arg, default=10**4)
    st.add_argument("--primes", type=int_list, default=[3, 5, 7, 11, 13])
    st.add_argument("--qmax", type=int_arg, default=101)
    st.add_argument("--precision", type=int_arg, default=4)
    st.add_argument("--rows", action="store_true", help="include every row in the report")
    st.set_defaults(func=cmd_stickelberger)

    qf = sub.add_parser("quadforms", help="class numbers of quadratic fields into the CSV cache")
    qf.add_argument("--min", type=int_arg, required=True)
    qf.add_argument("--max", type=int_arg, required=True)
    qf.add_argument("--cache")
    qf.add_argument("--workers", type=int_arg, default=1)
    qf.add_argument("--no-verify", action="store_true")
    qf.add_argument("--seed", type=int_arg, default=0)
    qf.set_defaults(func=cmd_quadforms)

    ll = sub.add_parser("lln", help="early hitters and the adversarial function")
    ll.add_argument("--dist", default="geometric:0.5")
    ll.add_argument("--n", type=int_arg, default=10**6)
    ll.add_argument("--seed", type=int_arg, default=7)
    ll.add_argument("--eps", type=lambda s: [float(t) for t in s.split(",")], default=[1, 0.5, 0.1, 0.01])
    ll.set_defaults(func=cmd_lln)

    dq = sub.add_parser("disprove-quartic", help="bracket for the share of cyclic quartic fields with 3 not dividing h")
    dq.add_argument("--D", type=int_arg, default=10**6)
    dq.add_argument("--tP", type=int_arg, default=10**8)
    dq.add_argument("--x", type=int_arg, default=10**8)
    dq.add_argument("--cache")
    dq.add_argument("--no-build", dest="build", action="store_false", help="fail instead of computing missing class numbers")
    dq.set_defaults(func=cmd_disprove, build=True)

    c58 = sub.add_parser("demo-c58", help="L-ratio sequence on the order-58 component (synthetic classes)")
    c58.add_argument("--N", type=int_list, default=[100, 1000, 10000])
    c58.add_argument("--phi", type=int_list)
    c58.add_argument("--seed", type=int_arg, default=0)
    c58.set_defaults(func=cmd_demo_c58)

    ca = sub.add_parser("cache", help="build, verify or merge class-number caches")
    ca.add_argument("action", choices=["build", "verify", "merge"])
    ca.add_argument("--path")
    ca.add_argument("--min", type=int_arg)
    ca.add_argument("--max", type=int_arg)
    ca.add_argument("--quartic-D", type=int_arg, help="build exactly the d needed for the quartic bracket")
    ca.add_argument("--workers", type=int_arg, default=1)
    ca.add_argument("--fraction", type=float, default=0.01)
    ca.add_argument("--seed", type=int_arg, default=0)
    ca.add_argument("--inputs", nargs="*", default=[])
    ca.add_argument("--output")
    ca.set_defaults(func=cmd_cache)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    try:
        conf = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {known.config}: {e}") from None
    args = parser.parse_args(argv)
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    actions = {a.dest: a for a in parser._actions}
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            actions.update({b.dest: b for b in a.choices[args.command]._actions})
    for key, value in conf.items():
        key = key.replace("-", "_")
        if key in ("command", "action", "func"):
            continue
        if key not in actions:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if key in explicit:
            continue
        kind = actions[key].type
        if isinstance(value, (str, int)) and kind is not None and not isinstance(value, bool):
            try:
                value = kind(str(value))
            except (ValueError, argparse.ArgumentTypeError) as e:
                raise UsageError(f"config key {key}: {e}") from None
        setattr(args, key, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        config = {k: v for k, v in vars(args).items() if k not in ("func",)}
        result, ok = args.func(args)
    except UsageError as e:
        print(f"clm-lab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    report = {
        "command": args.command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "versions": _versions(),
        "status": "ok" if ok else "invariant-failure",
        "result": result,
    }
    text = json.dumps(_jsonable(report), indent=2, sort_keys=False)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return EXIT_OK if ok else EXIT_INVARIANT


if __name__ == "__main__":
    raise SystemExit(main())
