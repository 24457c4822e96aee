"""Command-line interface: ``fidres <subcommand> ...``.

Every run prints a single JSON object tagged ``"schema": "fidres/1"`` to
stdout (or ``--out``). Exit status is 0 on success, 2 on usage errors and 1 on
numeric or data errors, in which case a JSON error object goes to stderr.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import corrfid, gamma_scale, linpred, scaled_uniform
from .coverage import coverage
from .csvio import read_table, write_table
from .decision import LOSS_KINDS, LossSpec, risk_table, risk_identity_check
from .exceptions import FidresError, UnsupportedModelError
from .families import CorrelationFamily, GammaScaleFamily, LinearFamily, ScaledUniformFamily
from .stochastics import RngStream

SCHEMA = "fidres/1"
QUANTILE_LEVELS = (0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975)
MODELS = ("gamma-scale", "scaled-uniform", "correlation", "linear")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump(obj):
    return json.dumps(_clean(obj), indent=2) + "\n"


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _at_least(minimum):
    def parse(text):
        value = int(text)
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value}")
        return value
    return parse


def _quantiles(dist):
    return {f"{p:g}": float(dist.ppf(p)) for p in QUANTILE_LEVELS}


def _column(path):
    header, rows = read_table(path)
    return np.array([row[0] for row in rows])


def _matrix(path):
    _, rows = read_table(path)
    return np.array(rows)


def cmd_corr(args):
    header, rows = read_table(args.data, min_columns=2)
    sample = corrfid.Sample2D(np.array(rows)[:, :2])
    r = corrfid.empirical_correlation(sample)
    fid = corrfid.CorrelationFiducial(r, sample.n - 1)
    out = {
        "n": sample.n,
        "r": r,
        "nu": fid.nu,
        "median": fid.median(),
        "mean": fid.mean(),
        "quantiles": _quantiles(fid),
        "ci": {f"{lvl:g}": list(fid.interval(lvl)) for lvl in args.levels},
    }
    if args.grid_out:
        grid = np.linspace(-1.0, 1.0, args.grid_points + 2)[1:-1]
        write_table(args.grid_out, ["rho", "density"],
                    [[float(t), float(d)] for t, d in zip(grid, fid.pdf(grid))])
        out["grid_out"] = args.grid_out
    if args.line_out:
        slope, intercept = np.polyfit(sample.x, sample.y, 1)
        xs = np.linspace(sample.x.min(), sample.x.max(), 50)
        write_table(args.line_out, ["x", "y_fit"],
                    [[float(x), float(intercept + slope * x)] for x in xs])
        out["line"] = {"slope": float(slope), "intercept": float(intercept)}
    return out


def cmd_gamma_scale(args):
    model = gamma_scale.GammaScaleModel(args.n, args.alpha, args.mean)
    estimates = {
        "mle": model.y,
        "geometric": gamma_scale.estimate_geometric(model),
        "invariant_sq": gamma_scale.estimate_invariant_sq(model),
        "median": model.median(),
        "mean": gamma_scale.estimate_mean(model) if model.shape > 1 else None,
    }
    return {"n": model.n, "alpha": model.alpha, "y": model.y, "shape": model.shape,
            "estimators": estimates, "quantiles": _quantiles(model)}


def cmd_scaled_uniform(args):
    data = scaled_uniform.ScaledUniformData.from_observations(_column(args.data), args.k)
    fid = scaled_uniform.fiducial(data)
    return {
        "n": data.n, "k": data.k, "max": data.y1, "min": data.y2,
        "theta_ml": data.theta_ml, "theta_mu": data.theta_mu,
        "estimators": {
            "invariant_sq": scaled_uniform.estimate_invariant_sq(data),
            "log_sq": scaled_uniform.estimate_log_sq(data),
            "median": fid.median(),
        },
        "quantiles": _quantiles(fid),
    }


def cmd_predict(args):
    model = linpred.LinearModel(_matrix(args.design), _column(args.obs))
    x_star = _matrix(args.xstar)
    prediction = linpred.predict(x_star, model)
    return {"rank": model.rank, "fit": model.fit, "coefficients": model.coefficients(),
            "prediction": prediction,
            "xstar_in_row_space": [bool(v) for v in linpred.in_row_space(x_star, model)]}


def _family(args, conditional=False):
    if args.model == "gamma-scale":
        return GammaScaleFamily(args.n, args.alpha)
    if args.model == "scaled-uniform":
        ancillary = None
        if conditional:
            ancillary = args.ancillary or ScaledUniformFamily.default_ancillary(args.k)
        return ScaledUniformFamily(args.n, args.k, ancillary)
    if args.model == "correlation":
        return CorrelationFamily(args.n, getattr(args, "nu_offset", 0))
    if args.design is None:
        raise UnsupportedModelError("the linear model needs --design")
    return LinearFamily(_matrix(args.design))


def cmd_risk(args):
    spec = LossSpec(args.loss)
    rng = RngStream(args.seed)
    family = _family(args)
    estimators = args.estimators or list(family.estimators)
    thetas = args.theta_grid
    rows = risk_table(family, estimators, spec, thetas, args.reps, rng.substream(0))
    header = ["estimator", "theta", "risk", "std_error", "n"]
    table = [[name, float(theta), r.mean, r.std_error, r.n] for name, theta, r in rows]
    if args.table_out:
        write_table(args.table_out, header, table)
    out = {"model": family.name, "loss": spec.kind,
           "table": [dict(zip(header, row)) for row in table]}
    try:
        cond_family = _family(args, conditional=True)
        chosen = cond_family.optimal_estimator(spec.kind)
        candidates = [c for c in ("mean", "invariant_sq")
                      if args.model == "gamma-scale" and spec.kind == "scale_invariant_sq"]
        report = risk_identity_check(cond_family, chosen, spec, rng.substream(1),
                                thetas=thetas if len(thetas) >= 3 else None,
                                n_reps=args.reps, candidates=candidates)
        out["risk_identity"] = report.to_dict()
        if getattr(cond_family, "ancillary", None) is not None:
            out["risk_identity"]["ancillary"] = cond_family.ancillary
    except UnsupportedModelError as exc:
        out["risk_identity"] = {"applicable": False, "reason": str(exc)}
    return out


def cmd_coverage(args):
    if args.model == "linear":
        raise UnsupportedModelError("the linear model has no scalar fiducial CDF")
    family = _family(args)
    return coverage(family, args.theta, args.reps, RngStream(args.seed)).to_dict()


def build_parser():
    env_seed = os.environ.get("FIDRES_SEED")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=_seed(env_seed) if env_seed else 0,
                        help="random seed (default: $FIDRES_SEED or 0)")
    common.add_argument("--out", help="write the JSON result here instead of stdout")

    parser = argparse.ArgumentParser(prog="fidres", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corr", parents=[common], help="fiducial for a correlation")
    p.add_argument("--data", required=True, help="CSV with x,y columns")
    p.add_argument("--levels", type=_float_list, default=[0.9, 0.95])
    p.add_argument("--grid-out", help="write a rho,density grid CSV here")
    p.add_argument("--grid-points", type=_at_least(2), default=199)
    p.add_argument("--line-out", help="write the least-squares line as an x,y_fit CSV")
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("gamma-scale", parents=[common], help="gamma scale model")
    p.add_argument("--n", type=_at_least(1), required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--mean", type=float, required=True, help="observed sample mean")
    p.set_defaults(func=cmd_gamma_scale)

    p = sub.add_parser("scaled-uniform", parents=[common], help="scaled uniform model")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--data", required=True, help="CSV with one column of observations")
    p.set_defaults(func=cmd_scaled_uniform)

    p = sub.add_parser("predict", parents=[common], help="optimal linear prediction")
    p.add_argument("--design", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--xstar", required=True)
    p.set_defaults(func=cmd_predict)

    def model_options(p, min_reps, default_reps):
        p.add_argument("--model", choices=MODELS, required=True)
        p.add_argument("--reps", type=_at_least(min_reps), default=default_reps)
        p.add_argument("--n", type=_at_least(2), default=10)
        p.add_argument("--alpha", type=float, default=1.0)
        p.add_argument("--k", type=float, default=0.3)
        p.add_argument("--design", help="design CSV for the linear model")

    p = sub.add_parser("risk", parents=[common], help="risk table and equivariance report")
    model_options(p, 100, 20_000)
    p.add_argument("--loss", choices=LOSS_KINDS, required=True)
    p.add_argument("--theta-grid", type=_float_list, default=[0.5, 1.0, 5.0])
    p.add_argument("--estimators", type=lambda s: [v for v in s.split(",") if v])
    p.add_argument("--ancillary", type=float,
                   help="scaled-uniform: condition on this min/max ratio")
    p.add_argument("--table-out", help="write the risk table CSV here")
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("coverage", parents=[common], help="coverage of one-sided fiducial sets")
    model_options(p, 500, 2000)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--nu-offset", type=int, default=0,
                   help="correlation: shift the degrees of freedom (negative control)")
    p.set_defaults(func=cmd_coverage)
    return parser


def run(argv=None):
    try:
        parser = build_parser()
    except (ValueError, argparse.ArgumentTypeError) as exc:
        sys.stderr.write(_dump({"schema": SCHEMA, "error": {"type": "UsageError",
                                                             "message": f"FIDRES_SEED: {exc}"}}))
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = args.func(args)
    except (FidresError, ValueError, ArithmeticError) as exc:
        sys.stderr.write(_dump({"schema": SCHEMA, "command": args.command,
                                "error": {"type": type(exc).__name__, "message": str(exc)}}))
        return 1
    text = _dump({"schema": SCHEMA, "command": args.command, "seed": args.seed, **result})
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
