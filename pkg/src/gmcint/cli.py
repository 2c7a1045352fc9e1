"""Command-line front end.

Computes the closed-form quantities, runs simulations and the verification
suites, and emits deterministic JSON or CSV tables.  Numbers are printed
as 17-significant-digit decimal strings so output round-trips exactly and
identical runs (including across worker counts) are byte-identical.

Exit codes: 0 success, 1 domain or bounds error, 2 verification failures,
64 malformed usage.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import verify as verify_mod
from .errors import GmcError
from .exactlaw import (
    GmcParams,
    ObservableKind,
    ShiftKind,
    derivative_martingale_moment,
    exact_moment,
    log_exact_moment,
    law_decomposition_log_moment,
    predict_observable,
    reflection_boundary_1d,
    reflection_bulk_2d,
    selberg_product,
    shift_ratio,
)
from .montecarlo import config_for, mc_moment, mc_small_deviation, mc_tail_fit
from .specfun import barnes_g, double_gamma_evaluator
from .verify import IdentityGridSpec

_KINDS = {k.value: k for k in ObservableKind}


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage errors with exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return value


def _emit(args, command: str, parameters: dict, rows: list[dict]) -> None:
    parameters = {k: _fmt(v) for k, v in parameters.items()}
    rows = [{**parameters, **{k: _fmt(v) for k, v in row.items()}} for row in rows]
    if args.format == "json":
        import json

        text = json.dumps({"command": command, "parameters": parameters,
                           "results": rows}, indent=2) + "\n"
    else:
        columns = list(rows[0].keys()) if rows else list(parameters.keys())
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(str(row[c]) for c in columns))
        text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("GMC_THREADS")
    return int(env) if env else None


def _add_output_opts(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default=None, help="write to a file instead of stdout")


def _add_gmc_params(p, integer_p=False):
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--p", type=int if integer_p else float, required=True)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.0)


def _add_mc_opts(p, replicates, n_modes):
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--replicates", type=int, default=replicates)
    p.add_argument("--n-modes", type=int, default=n_modes)
    p.add_argument("--batches", type=int, default=50)
    p.add_argument("--cells-per-mode", type=int, default=8)
    p.add_argument("--threads", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="gmcint", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", help="exact fractional moment with factor breakdown")
    _add_gmc_params(p)
    _add_output_opts(p)

    p = sub.add_parser("selberg", help="integer moment as the finite Gamma product")
    _add_gmc_params(p, integer_p=True)
    _add_output_opts(p)

    p = sub.add_parser("shift", help="all three shift-equation ratios")
    _add_gmc_params(p)
    _add_output_opts(p)

    p = sub.add_parser("reflection", help="tail reflection coefficients")
    p.add_argument("--dim", type=int, choices=(1, 2), required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    _add_output_opts(p)

    p = sub.add_parser("law-decomp", help="product-of-laws log moment vs exact")
    _add_gmc_params(p)
    _add_output_opts(p)

    p = sub.add_parser("dgamma", help="double gamma table")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--x-min", type=float, default=0.1)
    p.add_argument("--x-max", type=float, default=5.0)
    p.add_argument("--count", type=int, default=50)
    _add_output_opts(p)

    p = sub.add_parser("barnes", help="Barnes G table")
    p.add_argument("--x-min", type=float, default=0.5)
    p.add_argument("--x-max", type=float, default=4.0)
    p.add_argument("--count", type=int, default=50)
    _add_output_opts(p)

    p = sub.add_parser("martingale-moment", help="derivative martingale moment")
    p.add_argument("--p", type=float, required=True)
    _add_output_opts(p)

    p = sub.add_parser("mc-moment", help="Monte Carlo moment vs closed form")
    _add_gmc_params(p)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--chi", type=float, default=0.0)
    _add_mc_opts(p, replicates=10_000, n_modes=4096)
    _add_output_opts(p)

    p = sub.add_parser("tail", help="empirical tail exponent vs closed form")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--u-min", type=float, default=18.0)
    p.add_argument("--u-max", type=float, default=52.0)
    p.add_argument("--u-count", type=int, default=8)
    _add_mc_opts(p, replicates=100_000, n_modes=1024)
    _add_output_opts(p)

    p = sub.add_parser("small-dev", help="small-deviation probabilities")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--eps", type=float, action="append", default=None,
                   help="repeatable; default grid 0.25..2")
    _add_mc_opts(p, replicates=100_000, n_modes=1024)
    _add_output_opts(p)

    p = sub.add_parser("predict-u", help="hypergeometric-basis observable prediction")
    _add_gmc_params(p)
    p.add_argument("--kind", choices=sorted(_KINDS), required=True)
    p.add_argument("--t", type=float, action="append", required=True)
    _add_output_opts(p)

    p = sub.add_parser("verify", help="cross-verification suites")
    p.add_argument("--suite", choices=("identities", "quadrature", "observable", "all"),
                   default="identities")
    p.add_argument("--seed", type=int, default=None,
                   help="required for the observable suite")
    p.add_argument("--replicates", type=int, default=4000)
    p.add_argument("--n-modes", type=int, default=4096)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--grid-seed", type=int, default=IdentityGridSpec.seed)
    _add_output_opts(p)

    return parser


def _cmd_exact(args) -> int:
    params = GmcParams(args.gamma, args.p, args.a, args.b)
    g, p, a, b = args.gamma, args.p, args.a, args.b
    m, n = g / 2.0, 2.0 / g
    dg = double_gamma_evaluator(g).log_value
    row = {
        "value": exact_moment(params),
        "log_value": log_exact_moment(params),
        "log_prefactor": p * math.log(2.0 * math.pi)
        - p * (g * g / 4.0) * math.log(m) - p * math.lgamma(1.0 - g * g / 4.0),
        "log_dg_num_a": dg(n * (a + 1.0) - (p - 1.0) * m),
        "log_dg_num_b": dg(n * (b + 1.0) - (p - 1.0) * m),
        "log_dg_num_ab": dg(n * (a + b + 2.0) - (p - 2.0) * m),
        "log_dg_num_p": dg(n - p * m),
        "log_dg_den_base": dg(n),
        "log_dg_den_a": dg(n * (a + 1.0) + m),
        "log_dg_den_b": dg(n * (b + 1.0) + m),
        "log_dg_den_ab": dg(n * (a + b + 2.0) - (2.0 * p - 2.0) * m),
    }
    _emit(args, "exact", {"gamma": g, "p": p, "a": a, "b": b}, [row])
    return 0


def _cmd_selberg(args) -> int:
    value = selberg_product(args.gamma, args.p, args.a, args.b)
    _emit(args, "selberg", {"gamma": args.gamma, "p": args.p, "a": args.a, "b": args.b},
          [{"value": value}])
    return 0


def _cmd_shift(args) -> int:
    params = GmcParams(args.gamma, args.p, args.a, args.b)
    rows = []
    for kind in ShiftKind:
        rows.append({"kind": kind.value, "ratio": shift_ratio(params, kind)})
    _emit(args, "shift", {"gamma": args.gamma, "p": args.p, "a": args.a, "b": args.b},
          rows)
    return 0


def _cmd_reflection(args) -> int:
    fn = reflection_boundary_1d if args.dim == 1 else reflection_bulk_2d
    value = fn(args.gamma, args.alpha)
    _emit(args, "reflection",
          {"dim": args.dim, "gamma": args.gamma, "alpha": args.alpha},
          [{"value": value, "log_value": math.log(value)}])
    return 0


def _cmd_law_decomp(args) -> int:
    params = GmcParams(args.gamma, args.p, args.a, args.b)
    lhs = law_decomposition_log_moment(params)
    rhs = log_exact_moment(params)
    _emit(args, "law-decomp", {"gamma": args.gamma, "p": args.p, "a": args.a, "b": args.b},
          [{"log_moment_decomposition": lhs, "log_moment_exact": rhs,
            "abs_diff": abs(lhs - rhs)}])
    return 0


def _cmd_dgamma(args) -> int:
    ev = double_gamma_evaluator(args.gamma)
    rows = []
    for x in np.linspace(args.x_min, args.x_max, args.count):
        lv = ev.log_value(float(x))
        rows.append({"x": float(x), "log_value": lv, "value": math.exp(lv)})
    _emit(args, "dgamma", {"gamma": args.gamma}, rows)
    return 0


def _cmd_barnes(args) -> int:
    rows = []
    for x in np.linspace(args.x_min, args.x_max, args.count):
        rows.append({"x": float(x), "value": barnes_g(float(x))})
    _emit(args, "barnes", {}, rows)
    return 0


def _cmd_martingale(args) -> int:
    value = derivative_martingale_moment(args.p)
    g_form = (barnes_g(4.0 - 2.0 * args.p)
              / (barnes_g(1.0 - args.p) * barnes_g(2.0 - args.p) ** 2
                 * barnes_g(4.0 - args.p)))
    _emit(args, "martingale-moment", {"p": args.p},
          [{"value": value, "barnes_form": g_form}])
    return 0


def _cmd_mc_moment(args) -> int:
    params = GmcParams(args.gamma, args.p, args.a, args.b)
    cfg = config_for(args.replicates, args.n_modes, args.seed, args.a, args.b,
                     args.batches, args.cells_per_mode)
    est = mc_moment(params, args.t, args.chi, cfg, _threads(args))
    closed = None
    if args.chi == 0.0:
        closed = exact_moment(params)  # the moving weight is identically 1
    else:
        for kind in ObservableKind:
            if math.isclose(args.chi, kind.chi(args.gamma), rel_tol=0.0, abs_tol=1e-12):
                try:
                    closed = predict_observable(params, kind, args.t)
                except GmcError:
                    closed = None  # estimate still stands without a reference
                break
    row = {"mean": est.mean, "stderr": est.stderr,
           "degraded_ci": str(est.degraded_ci).lower()}
    row["closed_form"] = closed if closed is not None else "n/a"
    _emit(args, "mc-moment",
          {"gamma": args.gamma, "p": args.p, "a": args.a, "b": args.b,
           "t": args.t, "chi": args.chi, "seed": args.seed,
           "replicates": args.replicates, "n_modes": args.n_modes}, [row])
    return 0


def _cmd_tail(args) -> int:
    cfg = config_for(args.replicates, args.n_modes, args.seed,
                     batches=args.batches, cells_per_mode=args.cells_per_mode)
    u_grid = np.geomspace(args.u_min, args.u_max, args.u_count)
    fit = mc_tail_fit(args.gamma, args.alpha, args.eta, u_grid, cfg, _threads(args))
    q = args.gamma / 2.0 + 2.0 / args.gamma
    slope_closed = -2.0 * (q - args.alpha) / args.gamma
    ln_refl = math.log(reflection_boundary_1d(args.gamma, args.alpha))
    rows = []
    for i, u in enumerate(fit.u_grid):
        rows.append({
            "u": float(u),
            "log_survival": float(fit.log_survival[i]),
            "count": int(fit.counts[i]),
            "wilson_low": float(fit.wilson_low[i]),
            "wilson_high": float(fit.wilson_high[i]),
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "slope_closed_form": slope_closed,
            "ln_reflection_1d": ln_refl,
        })
    _emit(args, "tail",
          {"gamma": args.gamma, "alpha": args.alpha, "eta": args.eta,
           "seed": args.seed, "replicates": args.replicates,
           "n_modes": args.n_modes}, rows)
    return 0


def _cmd_small_dev(args) -> int:
    eps = args.eps if args.eps else [0.25, 0.3, 0.45, 0.5, 0.75, 1.0, 1.5, 2.0]
    cfg = config_for(args.replicates, args.n_modes, args.seed,
                     batches=args.batches, cells_per_mode=args.cells_per_mode)
    result = mc_small_deviation(args.gamma, np.asarray(eps), cfg, _threads(args))
    rows = []
    for pt in result.points:
        rows.append({
            "eps": pt.eps,
            "log_prob": pt.log_prob if math.isfinite(pt.log_prob) else "-inf",
            "count": pt.count,
            "envelope_c": result.envelope_c if result.envelope_c is not None else "n/a",
            "envelope_exponent": -4.0 / (args.gamma * args.gamma),
        })
    _emit(args, "small-dev",
          {"gamma": args.gamma, "seed": args.seed, "replicates": args.replicates,
           "n_modes": args.n_modes}, rows)
    return 0


def _cmd_predict_u(args) -> int:
    params = GmcParams(args.gamma, args.p, args.a, args.b)
    kind = _KINDS[args.kind]
    rows = [{"t": t, "predicted": predict_observable(params, kind, t)}
            for t in args.t]
    _emit(args, "predict-u",
          {"gamma": args.gamma, "p": args.p, "a": args.a, "b": args.b,
           "kind": args.kind}, rows)
    return 0


def _cmd_verify(args) -> int:
    reports = []
    if args.suite in ("identities", "all"):
        reports.extend(verify_mod.run_identity_suite(IdentityGridSpec(seed=args.grid_seed)))
    if args.suite in ("quadrature", "all"):
        for a, p in ((0.5, -1.0), (0.3, -0.5), (0.7, -2.0)):
            reports.append(verify_mod.quadrature_identity_check(a, p))
    if args.suite in ("observable", "all"):
        if args.seed is None:
            raise GmcError("the observable suite is stochastic: --seed is required")
        params = GmcParams(1.0, -0.5, 0.2, 0.1)
        cfg = config_for(args.replicates, args.n_modes, args.seed, 0.2, 0.1,
                         batches=max(10, min(50, args.replicates // 10)))
        for kind in ObservableKind:
            reports.extend(verify_mod.verify_observable_prediction(
                params, kind, (-1e-6, -0.5, -2.0), cfg, _threads(args)))
    text = (verify_mod.reports_to_json(reports) if args.format == "json"
            else verify_mod.reports_to_csv(reports))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failures = verify_mod.failure_count(reports)
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
        return 2
    return 0


_COMMANDS = {
    "exact": _cmd_exact,
    "selberg": _cmd_selberg,
    "shift": _cmd_shift,
    "reflection": _cmd_reflection,
    "law-decomp": _cmd_law_decomp,
    "dgamma": _cmd_dgamma,
    "barnes": _cmd_barnes,
    "martingale-moment": _cmd_martingale,
    "mc-moment": _cmd_mc_moment,
    "tail": _cmd_tail,
    "small-dev": _cmd_small_dev,
    "predict-u": _cmd_predict_u,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except GmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
