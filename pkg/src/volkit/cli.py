"""Command-line interface.

JSON results go to stdout, human diagnostics and the run manifest to stderr
(or to ``--manifest FILE``).  Exit codes: 0 success, 1 input error,
2 non-convergence (partial result still printed).  All randomness flows
through ``--seed``; ``simulate`` and bootstrap runs refuse to start without
one.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bootstrap import BootstrapConfig, bootstrap_pvalue, export_null_csv
from .data import CsvSchema, ReturnSeries, diagnostics, load_csv, log_returns
from .distributions import Gaussian, Ged, var_es
from .errors import NonConvergence, VolkitError
from .estimation import FitResult, fit
from .garch import (
    GarchSpec,
    filter_volatility,
    forecast_sigma_sq,
    params_from_dict,
    params_to_dict,
    simulate,
)
from .gof import test_gaussian_innovations, test_ged_innovations_edf
from .numerics import rng_stream


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors, matching the CLI contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _emit_manifest(args, command, started, inputs):
    manifest = {
        "command": command,
        "argv": list(getattr(args, "effective_argv", sys.argv[1:])),
        "inputs": [{"path": p, "sha256": _sha256(p)} for p in inputs if p and os.path.exists(p)],
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_clock_utc": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": round(time.monotonic() - started, 6),
    }
    text = json.dumps(manifest, indent=2)
    if getattr(args, "manifest", None):
        with open(args.manifest, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=sys.stderr)


def _print_json(obj):
    print(json.dumps(obj, indent=2))


def _add_input_flags(p):
    p.add_argument("--csv", required=False, help="input CSV path")
    p.add_argument("--date-column", default="date")
    p.add_argument("--price-column", default="price")
    p.add_argument("--date-format", default="%Y-%m-%d")
    p.add_argument("--returns-column", default=None,
                   help="read log returns directly from this column instead of prices")
    p.add_argument("--manifest", default=None, help="write the run manifest to this file")


def _add_spec_flags(p):
    p.add_argument("--family", default="garch",
                   choices=["garch", "egarch", "ngarch", "ngarch-abs", "gjr", "augmented"])
    p.add_argument("--p", type=int, default=1, help="variance lags (beta terms)")
    p.add_argument("--q", type=int, default=1, help="shock lags (alpha terms)")
    p.add_argument("--innovation", default="gaussian", choices=["gaussian", "ged"])
    p.add_argument("--nu", type=float, default=1.5,
                   help="initial GED shape for the joint estimate")


def _load_returns(args) -> ReturnSeries:
    if not args.csv:
        raise VolkitError("--csv is required")
    if args.returns_column:
        # returns may be negative, so the price loader's positivity check
        # does not apply; parse the column directly
        schema = CsvSchema(date_column=args.date_column,
                           price_column=args.returns_column,
                           date_format=args.date_format)
        rows = _load_numeric_rows(args.csv, schema)
        stamps = np.array([r[0] for r in rows], dtype="datetime64[D]")
        vals = np.array([r[1] for r in rows], dtype=float)
        return ReturnSeries(timestamps=stamps, returns=vals, source=args.csv)
    schema = CsvSchema(date_column=args.date_column, price_column=args.price_column,
                       date_format=args.date_format)
    prices = load_csv(args.csv, schema, symbol=os.path.basename(args.csv))
    return log_returns(prices)


def _load_numeric_rows(path, schema: CsvSchema):
    from .errors import ParseError

    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or schema.date_column not in reader.fieldnames \
                or schema.price_column not in reader.fieldnames:
            raise ParseError(1, schema.price_column, "column missing from header")
        for lineno, row in enumerate(reader, start=2):
            try:
                stamp = datetime.strptime(row[schema.date_column].strip(),
                                          schema.date_format).date()
                val = float(row[schema.price_column])
            except (ValueError, AttributeError, TypeError) as exc:
                raise ParseError(lineno, schema.price_column, str(exc)) from None
            rows.append((stamp, val))
    rows.sort(key=lambda r: r[0])
    return rows


def _spec_from_args(args) -> GarchSpec:
    innovation = Gaussian() if args.innovation == "gaussian" else Ged(args.nu)
    return GarchSpec(family=args.family, p=args.p, q=args.q, innovation=innovation)


def _fit_from_args(args, returns) -> FitResult:
    if getattr(args, "fit", None):
        with open(args.fit) as fh:
            doc = json.load(fh)
        spec, params = params_from_dict(doc["params"])
        return FitResult(
            spec=spec, params=params, nu_hat=doc.get("nu_hat"),
            loglik=doc["loglik"], criteria=None, converged=doc["converged"],
            iterations=doc["iterations"],
            std_errors=doc.get("std_errors", {}))
    spec = _spec_from_args(args)
    return fit(spec, returns)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_fit(args):
    started = time.monotonic()
    series = _load_returns(args)
    spec = _spec_from_args(args)
    result = fit(spec, series.returns)
    _print_json(result.to_dict())
    _emit_manifest(args, "fit", started, [args.csv])
    if not result.converged:
        print("warning: optimizer did not certify convergence", file=sys.stderr)
        return 2
    return 0


def cmd_gof(args):
    started = time.monotonic()
    series = _load_returns(args)
    if args.null == "ged":
        args.innovation = "ged"
    else:
        args.innovation = "gaussian"
    fit_result = _fit_from_args(args, series.returns)
    exit_code = 0 if fit_result.converged else 2

    if args.null == "gaussian":
        report = test_gaussian_innovations(
            fit_result.spec, fit_result.params, series.returns,
            s_max=args.s_max, method=args.gof_method, shifted=args.shifted_score)
        if args.emit_process:
            from .gof import khmaladze_transform, pseudo_observations
            from . import _kernels
            out = filter_volatility(fit_result.spec, fit_result.params, series.returns)
            u = pseudo_observations(_kernels.norm_cdf_array(out.residuals))
            proc = khmaladze_transform(u, s_max=args.s_max, method=args.gof_method,
                                       shifted=args.shifted_score)
            with open(args.emit_process, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["v", "w"])
                for vj, wj in zip(proc.v, proc.w):
                    writer.writerow([repr(float(vj)), repr(float(wj))])
        doc = report.to_dict()
    else:
        report = test_ged_innovations_edf(fit_result.spec, series.returns, fit_result)
        doc = report.to_dict()
        if args.bootstrap:
            if args.seed is None:
                print("error: bootstrap requires --seed", file=sys.stderr)
                return 1
            cfg = BootstrapConfig(replicates=args.bootstrap, seed=args.seed,
                                  refit=args.refit, parallelism=args.jobs)
            boot = bootstrap_pvalue(fit_result, series.returns, cfg, observed=report)
            doc["ks_pvalue"] = boot.ks_pvalue
            doc["cvm_pvalue"] = boot.cvm_pvalue
            doc["critical_values"] = [
                {"level": lv, "ks_crit": k, "cvm_crit": c}
                for (lv, k, c) in boot.critical_values()
            ]
            doc["bootstrap"] = {"replicates": args.bootstrap, "seed": args.seed,
                                "refit": args.refit, "failed": boot.n_failed}
            if args.emit_null:
                export_null_csv(boot, args.emit_null)
    _print_json(doc)
    _emit_manifest(args, "gof", started, [args.csv, getattr(args, "fit", None)])
    return exit_code


def cmd_risk(args):
    started = time.monotonic()
    series = _load_returns(args)
    fit_result = _fit_from_args(args, series.returns)
    try:
        levels = [float(tok) for tok in args.p_levels.split(",") if tok]
    except ValueError:
        print(f"error: bad --p-levels {args.p_levels!r}", file=sys.stderr)
        return 1
    if not levels or any(not 0.0 < p < 1.0 for p in levels):
        print("error: tail levels must lie in (0, 1)", file=sys.stderr)
        return 1
    sigma_next_sq = forecast_sigma_sq(fit_result.spec, fit_result.params,
                                      series.returns)
    sigma_next = float(np.sqrt(sigma_next_sq))
    mean = fit_result.params.mean
    rows = []
    for p in sorted(levels):
        v, e = var_es(fit_result.spec.innovation, p)
        rows.append({"p": p,
                     "var": mean + sigma_next * v,
                     "es": mean * p + sigma_next * e})
    _print_json({"sigma_next_sq": sigma_next_sq, "mean": mean,
                 "horizon": 1, "levels": rows})
    _emit_manifest(args, "risk", started, [args.csv, getattr(args, "fit", None)])
    return 0 if fit_result.converged else 2


def cmd_simulate(args):
    started = time.monotonic()
    if args.seed is None:
        print("error: simulate requires --seed (no hidden entropy)", file=sys.stderr)
        return 1
    with open(args.params) as fh:
        spec, params = params_from_dict(json.load(fh))
    rng = rng_stream(args.seed, 0)
    sim = simulate(spec, params, args.n, rng)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "return", "sigma_sq", "innovation"])
        for t in range(args.n):
            writer.writerow([t, repr(float(sim.returns[t])),
                             repr(float(sim.sigma_sq[t])),
                             repr(float(sim.innovations[t]))])
    _print_json({"n": args.n, "seed": args.seed, "out": args.out,
                 "params": params_to_dict(spec, params)})
    _emit_manifest(args, "simulate", started, [args.params])
    return 0


def cmd_diagnostics(args):
    started = time.monotonic()
    series = _load_returns(args)
    diag = diagnostics(series, max_lag=args.max_lag)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lag", "acf", "pacf"])
            for lag in range(args.max_lag + 1):
                writer.writerow([lag, repr(float(diag.acf[lag])),
                                 repr(float(diag.pacf[lag]))])
    _print_json({"n": int(series.returns.shape[0]), "mean": diag.mean,
                 "variance": diag.variance, "skewness": diag.skewness,
                 "kurtosis": diag.kurtosis, "max_lag": args.max_lag,
                 "out": args.out})
    _emit_manifest(args, "diagnostics", started, [args.csv])
    return 0


def cmd_rerun(args):
    with open(args.from_manifest) as fh:
        manifest = json.load(fh)
    argv = [a for a in manifest["argv"]]
    return main(argv)


def build_parser():
    parser = _Parser(prog="volkit",
                     description="GARCH volatility modelling, innovation "
                                 "goodness-of-fit testing and risk figures")
    parser.add_argument("--version", action="version", version=f"volkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="maximum-likelihood fit", parents=[])
    _add_input_flags(p_fit)
    _add_spec_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_gof = sub.add_parser("gof", help="innovation goodness-of-fit test")
    _add_input_flags(p_gof)
    _add_spec_flags(p_gof)
    p_gof.add_argument("--null", required=True, choices=["gaussian", "ged"])
    p_gof.add_argument("--fit", default=None, help="reuse a fit-result JSON file")
    p_gof.add_argument("--s-max", type=float, default=0.99)
    p_gof.add_argument("--gof-method", default="gk", choices=["gk", "midpoint", "bai"])
    p_gof.add_argument("--shifted-score", action="store_true",
                       help="use the -1-shifted third score component")
    p_gof.add_argument("--bootstrap", type=int, default=0,
                       help="bootstrap replicates for GED p-values")
    p_gof.add_argument("--seed", type=int, default=None)
    p_gof.add_argument("--refit", dest="refit", action="store_true", default=True)
    p_gof.add_argument("--no-refit", dest="refit", action="store_false",
                       help="skip per-replicate refitting (fast, ignores the "
                            "estimation effect)")
    p_gof.add_argument("--jobs", type=int,
                       default=int(os.environ.get("VOLKIT_JOBS", "1")))
    p_gof.add_argument("--emit-process", default=None,
                       help="write (v_j, W_n(v_j)) rows for plotting")
    p_gof.add_argument("--emit-null", default=None,
                       help="write the bootstrap null distribution as CSV")
    p_gof.set_defaults(func=cmd_gof)

    p_risk = sub.add_parser("risk", help="one-step-ahead VaR and ES")
    _add_input_flags(p_risk)
    _add_spec_flags(p_risk)
    p_risk.add_argument("--fit", default=None, help="reuse a fit-result JSON file")
    p_risk.add_argument("--p-levels", default="0.01,0.05",
                        help="comma-separated tail levels")
    p_risk.set_defaults(func=cmd_risk)

    p_sim = sub.add_parser("simulate", help="simulate a model path to CSV")
    p_sim.add_argument("--params", required=True, help="model-parameter JSON file")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--manifest", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_diag = sub.add_parser("diagnostics", help="ACF/PACF and moment summaries")
    _add_input_flags(p_diag)
    p_diag.add_argument("--max-lag", type=int, default=20)
    p_diag.add_argument("--out", default=None, help="write (lag, acf, pacf) CSV")
    p_diag.set_defaults(func=cmd_diagnostics)

    p_rerun = sub.add_parser("rerun", help="re-execute a run from its manifest")
    p_rerun.add_argument("--manifest", dest="from_manifest", required=True)
    p_rerun.set_defaults(func=cmd_rerun)
    return parser


def main(argv=None):
    parser = build_parser()
    effective = list(sys.argv[1:]) if argv is None else list(argv)
    args = parser.parse_args(effective)
    args.effective_argv = effective
    try:
        return args.func(args)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (VolkitError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
