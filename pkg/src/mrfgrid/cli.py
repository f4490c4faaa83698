"""Command-line interface: precompute, simulate, run, oracle, diagnose.

Every subcommand is fully determined by its flags and --seed; all
randomness flows from that seed through named sub-streams (grid=0,
chain=1, aux=2, test-points=3, simulate=4). Primary outputs are
accompanied by a JSON manifest recording the flags, seed, and wall time.

Exit codes: 0 success, 2 usage error, 3 model/data mismatch,
4 infeasible computation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import diagnostics, exact, mcmc, models, samplers, surrogate
from .errors import GridMismatchError, InfeasibleError, MrfGridError

STREAM_NAMES = {
    "grid": samplers.STREAM_GRID,
    "chain": samplers.STREAM_CHAIN,
    "aux": samplers.STREAM_AUX,
    "test-points": samplers.STREAM_TEST,
    "simulate": samplers.STREAM_SIM,
}


def _parse_size(text):
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"size must look like 100x100, got {text!r}") from err


def _parse_bounds(text):
    out = []
    for part in text.split(","):
        lo, hi = part.split(":")
        out.append((float(lo), float(hi)))
    return tuple(out)


def _parse_floats(text):
    return tuple(float(x) for x in text.split(","))


def _model_from_args(args) -> models.ModelSpec:
    h, w = args.size
    bounds = args.bounds
    if args.model == models.POTTS:
        return models.potts_model(h, w, args.k, bounds)
    return models.autologistic_model(h, w, bounds)


def _add_model_flags(p):
    p.add_argument("--model", choices=(models.POTTS, models.AUTOLOGISTIC), required=True)
    p.add_argument("--k", type=int, default=2, help="label count (Potts)")
    p.add_argument("--size", type=_parse_size, required=True, metavar="HxW")
    p.add_argument("--bounds", type=_parse_bounds, default=None,
                   metavar="LO:HI[,LO:HI]",
                   help="parameter box; defaults to 0:2.5 (Potts) or "
                        "-0.05:0.05,0.5:1.2 (autologistic)")


def _write_manifest(path, command, args, started, extra=None):
    payload = {
        "command": command,
        "flags": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "seed": args.seed,
        "streams": STREAM_NAMES,
        "wall_time_s": time.perf_counter() - started,
    }
    payload["flags"] = {k: (list(v) if isinstance(v, tuple) else v)
                        for k, v in payload["flags"].items()}
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def cmd_precompute(args) -> int:
    started = time.perf_counter()
    model = _model_from_args(args)
    chosen = [x is not None for x in (args.points, args.kappa, args.target_points)]
    if sum(chosen) != 1:
        raise UsageError("give exactly one of --points, --kappa, --target-points")
    estimator = surrogate.mc_estimator(
        model, seed=args.seed, n_samples=args.samples, burn_in=args.burnin, thin=args.thin
    )
    if args.grid == "equidistant":
        if args.points is None:
            raise UsageError("equidistant grids need --points")
        grid = surrogate.build_equidistant_grid(model, args.points, estimator,
                                                threads=args.threads)
    else:
        beta_crit = np.asarray(args.beta_crit) if args.beta_crit else None
        if args.kappa is not None:
            grid = surrogate.build_gradient_grid(model, args.kappa, estimator, beta_crit)
        elif args.target_points is not None:
            grid = surrogate.build_gradient_grid_for_target(
                model, args.target_points, estimator, beta_crit
            )
        else:
            raise UsageError("gradient grids need --kappa or --target-points")
    grid.save(args.out)
    knots = grid.knot_count()
    steps = knots * (args.burnin + args.samples * args.thin)
    print(f"wrote {args.out}: {knots} knots, {steps} total sampler steps")
    _write_manifest(args.out + ".manifest.json", "precompute", args, started,
                    {"knots": knots, "total_sampler_steps": steps})
    return 0


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    model = _model_from_args(args)
    beta = model.beta_array(args.beta)
    if not model.contains(beta):
        raise UsageError(f"beta {args.beta} outside the parameter box {model.bounds}")
    rng = samplers.stream_rng(args.seed, samplers.STREAM_SIM)
    field = samplers.simulate_field(model, beta, rng, sweeps=args.sweeps)
    models.save_label_field(args.out, field)
    stat = models.sufficient_stat(field).value
    print(f"wrote {args.out}: S(z) = {stat.tolist()}")
    extra = {"stat": stat.tolist()}
    if args.noisy_out:
        if args.noise_means is None:
            raise UsageError("--noisy-out needs --noise-means")
        y = samplers.add_gaussian_noise(field, args.noise_means, args.noise_sd, rng)
        models.save_matrix(args.noisy_out, y)
        print(f"wrote {args.noisy_out}")
        extra["noisy_out"] = args.noisy_out
    _write_manifest(args.out + ".manifest.json", "simulate", args, started, extra)
    return 0


def cmd_run(args) -> int:
    started = time.perf_counter()
    model = _model_from_args(args)
    if args.iters <= 0:
        raise UsageError("--iters must be positive")
    config = mcmc.RunConfig(
        iterations=args.iters,
        burn_in=args.burnin,
        seed=args.seed,
        aux_sweeps=args.aux_sweeps,
    )
    grid = None
    if args.algorithm == "surrogate":
        if not args.grid:
            raise UsageError("surrogate runs need --grid")
        grid = surrogate.load_grid(args.grid)
        surrogate.check_grid_model(grid, model)
    if args.image:
        y = models.load_matrix(args.image)
        if y.shape != (model.height, model.width):
            raise GridMismatchError(
                f"image shape {y.shape} does not match model {model.height}x{model.width}"
            )
        chain = mcmc.run_hidden_potts(y, model, config, grid=grid, scheme=args.scheme)
    else:
        if not args.data:
            raise UsageError("give --data (observed labels) or --image (hidden model)")
        data = models.load_label_field(args.data, model)
        if grid is not None:
            chain = mcmc.run_surrogate(model, data, grid, args.scheme, config)
        else:
            chain = mcmc.run_aea(model, data, config)
    chain.to_csv(args.out)
    rate = chain.acceptance_rate(args.burnin)
    print(f"wrote {args.out}: {len(chain)} iterations, acceptance {rate:.3f}")
    _write_manifest(args.out + ".manifest.json", "run", args, started,
                    {"acceptance_rate": rate, "iterations": len(chain)})
    return 0


def cmd_oracle(args) -> int:
    started = time.perf_counter()
    model = _model_from_args(args)
    beta = model.beta_array(args.beta)
    log_c = exact.exact_log_normalizer(model, beta)
    stat = exact.exact_expected_stat(model, beta)
    print(f"log C(beta) = {log_c:.10g}")
    if log_c < 700:
        print(f"C(beta) = {np.exp(log_c):.10g}")
    print(f"E[S] = {stat.mean.tolist()}")
    print(f"Cov[S] = {stat.cov.tolist()}")
    extra = {"log_normalizer": log_c, "expected_stat": stat.mean.tolist(),
             "cov_stat": stat.cov.tolist()}
    if args.data:
        field = models.load_label_field(args.data, model)
        lo, hi = model.bounds_array().T
        if model.dim == 1:
            grid_axes = np.linspace(lo[0], hi[0], args.post_points)
        else:
            grid_axes = tuple(np.linspace(l, h, args.post_points) for l, h in zip(lo, hi))
        table = exact.exact_posterior_density(model, field, grid_axes)
        if args.out:
            table.to_csv(args.out)
            print(f"wrote {args.out}")
            extra["posterior_table"] = args.out
    if args.out:
        _write_manifest(args.out + ".manifest.json", "oracle", args, started, extra)
    return 0


def cmd_diagnose(args) -> int:
    started = time.perf_counter()
    if args.mode == "kl":
        a = mcmc.chain_from_csv(args.chain_a).beta[args.burnin:]
        b = mcmc.chain_from_csv(args.chain_b).beta[args.burnin:]
        if a.shape[1] != b.shape[1]:
            raise GridMismatchError("chains have different parameter dimensions")
        est = diagnostics.kl_divergence(a, b, bins=args.bins)
        report = {"metric": "kl_divergence", "value": est.value,
                  "parameters": {"bins": list(est.bins),
                                 "support": est.support.tolist(),
                                 "epsilon": est.epsilon,
                                 "burn_in": args.burnin},
                  "seeds": {"seed": args.seed}}
    elif args.mode == "rmse":
        grid = surrogate.load_grid(args.grid)
        rep = diagnostics.interpolation_rmse(
            grid, args.scheme, grid.model, n_test=args.n_test, seed=args.seed,
            exact=args.exact, n_samples=args.samples, burn_in=args.burnin_est,
        )
        report = {"metric": "interpolation_rmse", "value": rep.rmse.tolist(),
                  "parameters": {"scheme": args.scheme, "n_test": rep.n_test,
                                 "exact": args.exact},
                  "seeds": {"seed": args.seed}}
    else:
        chain = mcmc.chain_from_csv(args.chain)
        summ = diagnostics.summarize(chain.beta, burn_in=args.burnin)
        report = {"metric": "summary",
                  "value": {"mean": summ.mean.tolist(), "mode": summ.mode.tolist(),
                            "ci95": [summ.ci_low.tolist(), summ.ci_high.tolist()]},
                  "parameters": {"burn_in": args.burnin},
                  "seeds": {"seed": args.seed}}
    text = json.dumps(report, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        _write_manifest(args.out + ".manifest.json", "diagnose", args, started)
    print(text)
    return 0


class UsageError(MrfGridError):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrfgrid",
        description="Amortized Bayesian inference for lattice MRF couplings",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("precompute", help="build and save a statistic grid")
    _add_model_flags(p)
    p.add_argument("--grid", choices=("equidistant", "gradient"), required=True)
    p.add_argument("--points", type=_parse_size_or_int, default=None,
                   metavar="N|N1xN2", help="points per dimension (equidistant)")
    p.add_argument("--kappa", type=float, default=None, help="gradient step-scale strength")
    p.add_argument("--target-points", type=int, default=None,
                   help="bisect kappa to hit this knot count")
    p.add_argument("--beta-crit", type=_parse_floats, default=None,
                   help="gradient-grid starting point (default: analytic critical value)")
    p.add_argument("--burnin", type=int, default=500)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("simulate", help="forward-simulate a label field")
    _add_model_flags(p)
    p.add_argument("--beta", type=_parse_floats, required=True)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--noisy-out", default=None, help="also write a noisy pixel image")
    p.add_argument("--noise-means", type=_parse_floats, default=None)
    p.add_argument("--noise-sd", type=float, default=1.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="run a posterior sampler")
    _add_model_flags(p)
    p.add_argument("--algorithm", choices=("aea", "surrogate"), required=True)
    p.add_argument("--scheme", choices=surrogate.SCHEMES, default="hermite")
    p.add_argument("--grid", default=None, help="grid JSON (surrogate runs)")
    p.add_argument("--data", default=None, help="observed label file")
    p.add_argument("--image", default=None, help="noisy pixel image (hidden model)")
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--burnin", type=int, default=0)
    p.add_argument("--aux-sweeps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="exact enumeration reference values")
    _add_model_flags(p)
    p.add_argument("--beta", type=_parse_floats, required=True)
    p.add_argument("--data", default=None, help="labels for an exact posterior table")
    p.add_argument("--post-points", type=int, default=201)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("diagnose", help="KL / RMSE / summary reports")
    p.add_argument("--mode", choices=("kl", "rmse", "summary"), required=True)
    p.add_argument("--chain-a", default=None)
    p.add_argument("--chain-b", default=None)
    p.add_argument("--chain", default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--scheme", choices=surrogate.SCHEMES, default="hermite")
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--exact", action="store_true",
                   help="use exhaustive enumeration for direct estimates")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--burnin-est", type=int, default=500)
    p.add_argument("--burnin", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_diagnose)
    return parser


def _parse_size_or_int(text):
    if "x" in text.lower():
        return _parse_size(text)
    return int(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except GridMismatchError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except InfeasibleError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except (MrfGridError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
