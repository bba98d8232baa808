"""Command-line interface.

Exit codes: 0 success, 1 numerical failure (non-convergence, singular design,
too many failed replications), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, NumericalError
from .estimators import fit as fit_estimator
from .estimators import t_stats
from .misspec import OmittedVarSpec, summary
from .model import TailSide, add_intercept, tail_subsample
from .montecarlo import McConfig, reproduce_table, run_experiment
from .panel import read_panel, write_dataset_csv
from .samplers import DgpSpec, SeedSpec, generate_dataset
from .threshold import select_threshold

log = logging.getLogger("tailreg")

SCHEMA_VERSION = 1
THREADS_ENV = "TAILREG_THREADS"


class ConfigError(InputError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# --------------------------------------------------------------------------- fit / scan


def _load_working_series(args):
    panel = read_panel(args.csv, args.response, args.covariates, args.index)
    y = -panel.response if args.tail == "left" else panel.response
    return panel, y, add_intercept(panel.covariates)


def cmd_fit(args) -> int:
    panel, y, X = _load_working_series(args)
    out = Path(args.out)
    scan = None
    if args.threshold == "scan":
        scan = select_threshold(y, X, args.estimator, args.grid, args.tail)
        w = scan.w_star
        _write(out / "scan.csv", scan.to_csv())
    else:
        try:
            w = float(args.threshold)
        except ValueError:
            raise InputError(f"--threshold must be a number or 'scan', got {args.threshold!r}") from None
    sample = tail_subsample(y, X, w, args.tail)
    if args.estimator == "mle" and args.cov != "iid":
        raise InputError("--cov applies to the OLS estimator only")
    res = fit_estimator(sample, args.estimator, args.cov, args.bandwidth)
    t, p = t_stats(res)
    doc = {
        "schema_version": SCHEMA_VERSION,
        **res.to_dict(),
        "t_stats": t.tolist(),
        "p_values": p.tolist(),
        "covariate_names": ["const", *panel.covariate_names],
        "response": panel.response_name,
        "tail_side": TailSide(args.tail).value,
        "threshold": sample.threshold,
        "threshold_mode": "scan" if scan is not None else "fixed",
        "kappa_star": None if scan is None else scan.kappa_star,
        "parent_size": sample.parent_size,
        "rows_dropped": panel.dropped,
    }
    _write(out / "fit.json", json.dumps(doc, indent=2) + "\n")

    keep = y > w
    alpha = np.exp(sample.covariates @ res.beta_hat)
    keys = [k for k, m in zip(panel.index, keep) if m]
    lines = [f"{panel.index_name or 'row'},{panel.response_name},tail_index"]
    lines += [f"{k},{repr(float(r))},{repr(float(a))}" for k, r, a in zip(keys, panel.response[keep], alpha)]
    _write(out / "tail_index.csv", "\n".join(lines) + "\n")

    print(f"{res.method.upper()} fit on {sample.n0} of {sample.parent_size} observations, {args.tail} tail, w={w:.6g}")
    names = doc["covariate_names"]
    for name, b, se, ti, pi in zip(names, res.beta_hat, res.std_errors, t, p):
        print(f"  {name:<16}{b:>11.4f}{se:>11.4f}{ti:>9.2f}{pi:>9.4f}")
    return 0


def cmd_threshold_scan(args) -> int:
    _, y, X = _load_working_series(args)
    scan = select_threshold(y, X, args.estimator, args.grid, args.tail)
    _write(Path(args.out), scan.to_csv())
    print(f"kappa*={scan.kappa_star:.4g} w*={scan.w_star:.6g} D={scan.discrepancy[scan.best]:.6g}")
    return 0


# --------------------------------------------------------------------------- simulate


def _dgp_from_args(args) -> DgpSpec:
    k = len(args.beta)
    laws = args.laws
    if laws is None:
        laws = ("uniform01", "std_normal") if k == 3 else ("std_normal",) * (k - 1)
    return DgpSpec(beta=args.beta, covariate_laws=laws, family=args.family, rho=args.rho, threshold=args.threshold)


def cmd_simulate(args) -> int:
    spec = _dgp_from_args(args)
    data = generate_dataset(spec, args.n, SeedSpec(args.seed, args.stream))
    write_dataset_csv(args.out, data.responses, data.covariates[:, 1:])
    print(f"wrote {args.n} rows to {args.out}")
    return 0


# --------------------------------------------------------------------------- mc

_CONFIG_KEYS = {
    "family", "rho", "beta", "covariate_laws", "threshold", "n", "reps", "master_seed",
    "estimators", "fit_columns", "threshold_mode", "fixed_threshold", "grid",
}


def load_mc_config(path) -> McConfig:
    """Read an ``[experiment]`` section of ``key = value`` lines."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: expected an [experiment] section header") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"{path}: line {lineno}: cannot parse {line.strip()!r}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}".replace("\n", " ")) from None
    if not parser.has_section("experiment"):
        raise ConfigError(f"{path}: missing [experiment] section")
    sec = parser["experiment"]
    unknown = set(sec) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(sorted(unknown))}")

    def get(key, conv, default=None):
        if key not in sec:
            return default
        try:
            return conv(sec[key])
        except (ValueError, argparse.ArgumentTypeError):
            raise ConfigError(f"{path}: field {key!r}: cannot parse {sec[key]!r}") from None

    beta = get("beta", _floats, (0.1, 1.0, 1.0))
    laws = get("covariate_laws", _names)
    if laws is None:
        laws = ("uniform01", "std_normal") if len(beta) == 3 else ("std_normal",) * (len(beta) - 1)
    try:
        dgp = DgpSpec(
            beta=beta,
            covariate_laws=laws,
            family=get("family", str.strip, "pareto"),
            rho=get("rho", float, -1.0),
            threshold=get("threshold", float, 1.0),
        )
        return McConfig(
            dgp=dgp,
            n=get("n", int, 5000),
            reps=get("reps", int, 1000),
            master_seed=get("master_seed", int, 0),
            estimators=get("estimators", _names, ("mle", "ols")),
            fit_columns=get("fit_columns", lambda s: tuple(int(v) for v in _names(s))),
            threshold_mode=get("threshold_mode", str.strip, "fixed"),
            fixed_threshold=get("fixed_threshold", float),
            grid=get("grid", _floats),
        )
    except ConfigError:
        raise
    except InputError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def cmd_mc(args) -> int:
    threads = args.threads if args.threads is not None else _default_threads()
    if (args.table is None) == (args.config is None):
        raise InputError("give exactly one of --table or --config")
    if args.table is not None:
        report = reproduce_table(
            args.table, args.reps, sizes=args.sizes, master_seed=args.seed, workers=threads,
        )
    else:
        report = run_experiment(load_mc_config(args.config), workers=threads)
    text = report.to_text()
    if args.out:
        out = Path(args.out)
        _write(out / "report.txt", text)
        _write(out / "report.json", report.to_json())
        _write(out / "report.csv", report.to_csv())
    sys.stdout.write(text)
    return 0


# --------------------------------------------------------------------------- predict-bias


def cmd_predict_bias(args) -> int:
    res = summary(OmittedVarSpec(args.theta, args.mu, args.sigma))
    if args.json:
        print(json.dumps(res, indent=2))
        return 0
    print(f"omitted covariate N({args.mu:g}, {args.sigma:g}^2), slope theta={args.theta:g}")
    print(f"  MLE intercept shift      {res['intercept_shift']:.6f}")
    print(f"  (first-order expansion)  {res['intercept_shift_first_order']:.6f}")
    print(f"  M (MLE variance factor)  {res['M']:.6f}")
    print(f"  A (OLS variance factor)  {res['A']:.6f}")
    print(f"  rmse ratio OLS/MLE       {res['ratio']:.6f}")
    return 0


# --------------------------------------------------------------------------- parser


def _add_series_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--csv", required=True, help="input CSV (comma separated, header row)")
    p.add_argument("--response", required=True, help="response column")
    p.add_argument("--covariates", type=_names, default=(), help="comma-separated covariate columns")
    p.add_argument("--index", help="optional ordering/date column copied to outputs")
    p.add_argument("--tail", choices=("right", "left"), default="right")
    p.add_argument("--estimator", choices=("ols", "mle"), default="ols")
    p.add_argument("--grid", type=_floats, help="tail fractions to scan (default 0.02..0.50 by 0.01)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailreg", description="Conditional tail-index regression")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate tail-index coefficients from a CSV panel")
    _add_series_args(p)
    p.add_argument("--threshold", default="scan", help="fixed threshold on the working scale, or 'scan'")
    p.add_argument("--cov", choices=("iid", "hac"), default="iid")
    p.add_argument("--bandwidth", type=int, help="HAC lag truncation (default floor(4(n0/100)^(2/9)))")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("threshold-scan", help="discrepancy scan only; writes kappa,w,discrepancy CSV")
    _add_series_args(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_threshold_scan)

    p = sub.add_parser("simulate", help="draw a synthetic dataset")
    p.add_argument("--family", choices=("pareto", "burr"), default="pareto")
    p.add_argument("--rho", type=float, default=-1.0)
    p.add_argument("--beta", type=_floats, default=(0.1, 1.0, 1.0))
    p.add_argument("--laws", type=_names, help="law of each non-intercept column: uniform01,std_normal")
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("-n", "--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc", help="Monte Carlo tables")
    p.add_argument("--table", choices=("T1", "T2", "T3"))
    p.add_argument("--config", help="experiment file with an [experiment] section")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--sizes", type=lambda s: tuple(int(v) for v in _names(s)), help="sample sizes, e.g. 500,5000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, help=f"worker processes (default ${THREADS_ENV} or 1)")
    p.add_argument("--out", help="directory for report.txt/json/csv")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("predict-bias", help="omitted-variable analytics")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_predict_bias)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"tailreg: numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"tailreg: input error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"tailreg: input error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
