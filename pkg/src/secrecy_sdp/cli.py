"""Command line front end.

Exit codes: 0 success, 1 usage or input error, 2 infeasible, 3 the solver
stopped without converging.
"""

import argparse
import json
import sys

import numpy as np

from . import perfect, robust, sdp
from .channel import ChannelInstance, InstanceParseError, UncertaintySpec, load_instance, make_rng
from .oracle import brute_force_srm, sample_worst_case
from .sim import ConfigError, ExperimentAborted, load_config, rows_to_csv, run_experiment

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_SLOW = 3


class _UsageError(Exception):
    pass


def _exit_code(status):
    if status == sdp.OPTIMAL:
        return EXIT_OK
    if status in (sdp.PRIMAL_INFEASIBLE, sdp.DUAL_INFEASIBLE):
        return EXIT_INFEASIBLE
    return EXIT_SLOW


def _cvec(v):
    return None if v is None else [[float(z.real), float(z.imag)] for z in np.ravel(v)]


def _design_dict(design):
    out = {
        "status": design.status,
        "rate": design.rate,
        "power_used": design.power_used,
        "rank_ratio": design.rank_ratio,
        "beamformer": _cvec(design.beamformer),
        "W": [_cvec(row) for row in design.W],
    }
    if isinstance(design, robust.RobustDesign):
        out["worst_case_rate"] = design.worst_case_rate
        out["lambda_b"] = design.lambda_b
        out["lambda_e"] = list(design.lambda_e)
        for key in ("theta", "xi", "tau"):
            value = getattr(design, key)
            if np.isfinite(value):
                out[key] = value
    if "iterations" in design.info:
        out["iterations"] = design.info["iterations"]
    return out


def _json_safe(obj):
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    return obj


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(_json_safe(payload), sort_keys=True))
    else:
        print(text)


def _design_text(d):
    lines = [f"status      {d['status']}", f"rate        {d['rate']:.9g} bits/s/Hz", f"power used  {d['power_used']:.9g}"]
    lines.append(f"rank ratio  {d['rank_ratio']:.3e}")
    if "worst_case_rate" in d:
        lines.append(f"worst case  {d['worst_case_rate']:.9g} bits/s/Hz")
    return "\n".join(lines)


def _load(path, want):
    if path is None:
        raise _UsageError("--instance is required")
    obj = load_instance(path)
    if not isinstance(obj, want):
        kind = "channel instance" if want is ChannelInstance else "uncertainty spec"
        raise _UsageError(f"{path}: expected a {kind}")
    return obj


def _rate_arg(args):
    if args.rate is None:
        raise _UsageError("--rate is required")
    if not np.isfinite(args.rate) or args.rate < 0:
        raise _UsageError("--rate must be a finite nonnegative number")
    return args.rate


def cmd_solve_srm(args):
    design = perfect.solve_srm(_load(args.instance, ChannelInstance), tol=args.tol)
    d = _design_dict(design)
    _emit(args, d, _design_text(d))
    return _exit_code(design.status)


def cmd_solve_src(args):
    design = perfect.solve_src(_load(args.instance, ChannelInstance), _rate_arg(args), tol=args.tol)
    d = _design_dict(design)
    _emit(args, d, _design_text(d))
    return _exit_code(design.status)


def cmd_solve_robust_srm(args):
    design = robust.solve_robust_srm(_load(args.instance, UncertaintySpec), tol=args.tol)
    d = _design_dict(design)
    _emit(args, d, _design_text(d))
    return _exit_code(design.status)


def cmd_solve_robust_src(args):
    R = _rate_arg(args)
    if R <= 0:
        raise _UsageError("--rate must be positive for the robust design")
    design = robust.solve_robust_src(_load(args.instance, UncertaintySpec), R, tol=args.tol)
    d = _design_dict(design)
    _emit(args, d, _design_text(d))
    return _exit_code(design.status)


def cmd_eval_worst_case(args):
    spec = _load(args.instance, UncertaintySpec)
    nominal = spec.nominal()
    design = perfect.solve_srm(nominal, tol=args.tol)
    if design.status != sdp.OPTIMAL:
        _emit(args, {"status": design.status}, f"status      {design.status}")
        return _exit_code(design.status)
    psi = robust.worst_case_secrecy_rate(design.W, spec, tol=args.tol)
    payload = {
        "status": sdp.OPTIMAL,
        "design": "non-robust sdp at the channel means",
        "nominal_rate": design.rate,
        "worst_case_rate": psi,
    }
    _emit(args, payload, f"nominal rate     {design.rate:.9g}\nworst-case rate  {psi:.9g}")
    return EXIT_OK


def cmd_simulate(args):
    if args.config is None:
        raise _UsageError("--config is required")
    config = load_config(args.config)
    if args.seed is not None:
        config = type(config).from_dict({**config.to_dict(), "seed": args.seed})
    result = run_experiment(config, out=args.out, workers=args.workers)
    if args.json:
        _emit(args, {"rows": [r.__dict__ for r in result.rows]}, "")
    elif args.out is None:
        sys.stdout.write(rows_to_csv(result.rows))
    else:
        print(f"wrote {len(result.rows)} rows to {args.out}")
    return EXIT_OK


def cmd_oracle(args):
    obj = _load(args.instance, (ChannelInstance, UncertaintySpec))
    if isinstance(obj, ChannelInstance):
        best = brute_force_srm(obj, n_dir=args.n_dir, n_pow=args.n_pow)
        _emit(args, {"brute_force_rate": best}, f"brute-force rate  {best:.9g}")
        return EXIT_OK
    design = perfect.solve_srm(obj.nominal(), tol=args.tol)
    if design.status != sdp.OPTIMAL:
        return _exit_code(design.status)
    rng = make_rng(args.seed if args.seed is not None else 0)
    value = sample_worst_case(design.W, obj, args.samples, rng)
    _emit(args, {"sampled_worst_case_rate": value}, f"sampled worst-case rate  {value:.9g}")
    return EXIT_OK


COMMANDS = {
    "solve-srm": (cmd_solve_srm, "maximise the secrecy rate with perfect CSI"),
    "solve-src": (cmd_solve_src, "least power for a secrecy-rate target with perfect CSI"),
    "solve-robust-srm": (cmd_solve_robust_srm, "maximise the worst-case secrecy rate"),
    "solve-robust-src": (cmd_solve_robust_src, "least power for a worst-case rate target"),
    "eval-worst-case": (cmd_eval_worst_case, "worst-case rate of the non-robust design"),
    "simulate": (cmd_simulate, "run a Monte Carlo experiment from a JSON config"),
    "oracle": (cmd_oracle, "brute-force (2 antennas) or sampled worst-case check"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="secrecy-sdp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--instance", help="channel instance or uncertainty spec (JSON)")
        p.add_argument("--config", help="experiment config (JSON)")
        p.add_argument("--rate", type=float, help="secrecy-rate target in bits/s/Hz")
        p.add_argument("--out", help="CSV output path")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--tol", type=float, default=perfect.DEFAULT_TOL, help="solver tolerance")
        p.add_argument("--json", action="store_true", help="print one JSON object")
        p.add_argument("--workers", type=int, default=1, help="processes for simulate")
        p.add_argument("--n-dir", type=int, default=200, help="direction grid for oracle")
        p.add_argument("--n-pow", type=int, default=20, help="power grid for oracle")
        p.add_argument("--samples", type=int, default=10000, help="ball samples for oracle")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.seed is not None and not (0 <= args.seed < 2**64):
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    if not (1e-10 <= args.tol <= 1e-4):
        print("error: --tol must lie in [1e-10, 1e-4]", file=sys.stderr)
        return EXIT_USAGE
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except (_UsageError, InstanceParseError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExperimentAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SLOW


if __name__ == "__main__":
    sys.exit(main())
