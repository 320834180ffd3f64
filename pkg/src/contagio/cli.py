"""Command-line front end.

Subcommands: ``dist`` (loss PMF and summary statistics), ``price`` (tranche
upfronts and index spread), ``calibrate`` (fit parameters to quotes),
``validate`` (recursion-vs-enumeration and Monte Carlo convergence report),
``sweep-eta`` (calibration error across infectivity rescalings).

Outputs are deterministic given identical inputs; every JSON document embeds
the resolved options, package version and SHA-256 of each input file.  The
environment variable ``CONTAGIO_SEED`` overrides any configured seed.

Exit codes: 0 success, 2 validation failure, 3 numerical infeasibility,
4 I/O error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

import contagio
from contagio.analytics import kl_divergence, risk_summary
from contagio.calibration import PricingSetup, calibrate
from contagio.contagion import ContagionParams, contagion_loss_distribution
from contagio.factor import (
    cond_contagion_distribution,
    mixture_distribution,
    ofg_loss_distribution,
)
from contagio.mapping import InfeasibleMappingError, assign_mu, map_parameters
from contagio.market import load_curve, load_portfolio, load_quotes
from contagio.mc import SimulationConfig, enumerate_losses, simulate_losses
from contagio.pricing import build_loss_surface, price_tranche_set, quarterly_schedule

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

DEFAULT_SWEEP_ETAS = (0.5, 0.75, 1.0, 1.25, 1.5)
VALIDATE_SIMS = (1000, 2500, 5000, 10000, 20000, 50000)


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _seed_from(args) -> int:
    env = os.environ.get("CONTAGIO_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _split_variant(token: str):
    """'mix-bnk' -> ('mix', 'bnk'); bare variants default to the flat scheme."""
    parts = token.lower().split("-", 1)
    variant = parts[0]
    scheme = parts[1] if len(parts) > 1 else "flat"
    if variant not in ("con", "ofg", "cond", "mix"):
        raise ValueError(f"unknown model {token!r}")
    if scheme not in ("flat", "bnk", "fin"):
        raise ValueError(f"unknown mu scheme in {token!r}")
    return variant, scheme


def _metadata(args, command: str, input_paths: dict) -> dict:
    options = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in ("func",) and value is not None
    }
    return {
        "command": command,
        "version": contagio.__version__,
        "options": {k: (list(v) if isinstance(v, tuple) else v) for k, v in options.items()},
        "inputs": {name: f"sha256:{_sha256(path)}" for name, path in input_paths.items()},
    }


def _write_json(document: dict, path) -> None:
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _marginals_fn(portfolio, recovery: float):
    hazards = portfolio.hazards(recovery)

    def marginals_at(t: float) -> np.ndarray:
        return 1.0 - np.exp(-hazards * t)

    return marginals_at


def _homogeneous_params(args) -> dict:
    return {"omega": args.omega, "rho": args.rho, "pi": args.pi}


def cmd_dist(args) -> int:
    variant, scheme = _split_variant(args.model)
    inputs = {}
    if args.portfolio:
        portfolio = load_portfolio(args.portfolio)
        inputs["portfolio"] = args.portfolio
        sectors = portfolio.sectors
        p_tilde = np.clip(
            portfolio.default_probabilities(args.horizon, args.recovery),
            1e-14,
            1.0 - 1e-14,
        )
        unit_fraction = (1.0 - args.recovery) / portfolio.n
    else:
        if args.p_tilde is None:
            raise ValueError("either --portfolio or --p-tilde is required")
        sectors = ("generic",) * args.n
        p_tilde = np.full(args.n, args.p_tilde)
        unit_fraction = args.lgd / args.n
    n = len(p_tilde)
    units = np.ones(n, dtype=np.int64)
    mu_star = assign_mu(sectors, scheme, args.eta)

    needs = {"con": ("omega",), "ofg": ("rho",), "cond": ("omega", "rho"), "mix": ("omega", "rho", "pi")}
    for name in needs[variant]:
        if getattr(args, name) is None:
            raise ValueError(f"--{name} is required for model {variant}")
    p_avg = p_tilde if args.ofg_heterogeneous else np.full_like(p_tilde, p_tilde.mean())
    if variant == "con":
        params = map_parameters(p_tilde, args.omega, mu_star)
        dist = contagion_loss_distribution(params, units, unit_fraction)
    elif variant == "ofg":
        dist = ofg_loss_distribution(p_avg, args.rho, args.m, units, unit_fraction)
    elif variant == "cond":
        dist = cond_contagion_distribution(
            p_tilde, args.omega, mu_star, args.rho, args.m, units, unit_fraction
        )
    else:
        params = map_parameters(p_tilde, args.omega, mu_star)
        dist_con = contagion_loss_distribution(params, units, unit_fraction)
        dist_ofg = ofg_loss_distribution(p_avg, args.rho, args.m, units, unit_fraction)
        dist = mixture_distribution(dist_con, dist_ofg, args.pi)

    summary = risk_summary(dist, args.confidence)
    document = _metadata(args, "dist", inputs)
    document["summary"] = {
        "expected_loss": summary.expected_loss,
        "unexpected_loss": summary.unexpected_loss,
        "credit_var": summary.credit_var,
        "confidence": summary.confidence,
        "n_names": n,
        "unit_loss_fraction": unit_fraction,
    }
    if args.output:
        csv_path = args.output + ".csv"
        with open(csv_path, "w", encoding="utf-8") as handle:
            handle.write("defaults,loss_fraction,probability\n")
            for h, (frac, prob) in enumerate(zip(dist.loss_fractions, dist.pmf)):
                handle.write(f"{h},{frac:.12g},{prob:.17g}\n")
        document["pmf_file"] = os.path.basename(csv_path)
        _write_json(document, args.output + ".json")
    else:
        document["pmf"] = [float(p) for p in dist.pmf]
        _write_json(document, None)
    return EXIT_OK


def _setup_from_files(args, scheme: str) -> tuple:
    portfolio = load_portfolio(args.portfolio)
    curve = load_curve(args.curve)
    mu_star = assign_mu(portfolio.sectors, scheme, args.eta)
    dates = quarterly_schedule(args.maturity)
    setup = PricingSetup(
        marginals_at=_marginals_fn(portfolio, args.recovery),
        loss_units=np.ones(portfolio.n, dtype=np.int64),
        unit_loss_fraction=(1.0 - args.recovery) / portfolio.n,
        curve=curve,
        dates=dates,
        mu_star=mu_star,
        m=args.m,
        running_coupon=args.running_coupon / 10_000.0,
        day_count=args.day_count,
        ofg_average=not args.ofg_heterogeneous,
    )
    return portfolio, setup


def cmd_price(args) -> int:
    variant, scheme = _split_variant(args.model)
    _, setup = _setup_from_files(args, scheme)
    surface = build_loss_surface(
        variant,
        setup.marginals_at,
        setup.dates,
        setup.loss_units,
        setup.unit_loss_fraction,
        omega=args.omega,
        rho=args.rho,
        pi=args.pi,
        mu_star=setup.mu_star,
        m=setup.m,
        ofg_average=setup.ofg_average,
    )
    quotes = price_tranche_set(
        surface, setup.curve, setup.tranches, setup.running_coupon, setup.day_count
    )
    document = _metadata(args, "price", {"portfolio": args.portfolio, "curve": args.curve})
    document["model"] = args.model.lower()
    document["parameters"] = {
        k: v for k, v in _homogeneous_params(args).items() if v is not None
    }
    document["quotes"] = {k: float(v) for k, v in quotes.items()}
    _write_json(document, args.output)
    return EXIT_OK


def _calibrate_one(model_token: str, args):
    variant, scheme = _split_variant(model_token)
    _, setup = _setup_from_files(args, scheme)
    quotes = load_quotes(args.quotes)
    result = calibrate(
        variant,
        setup,
        quotes,
        bounds=(args.lower_bound, args.upper_bound),
        multi_start=args.multi_start,
    )
    record = result.to_dict()
    record["model_variant"] = model_token.lower()
    return record


def cmd_calibrate(args) -> int:
    inputs = {
        "portfolio": args.portfolio,
        "curve": args.curve,
        "quotes": args.quotes,
    }
    models = args.model
    if args.jobs > 1 and len(models) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(lambda mt: _calibrate_one(mt, args), models))
    else:
        records = [_calibrate_one(mt, args) for mt in models]
    document = _metadata(args, "calibrate", inputs)
    document["results"] = records
    _write_json(document, args.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    seed = _seed_from(args)
    rng = np.random.default_rng(seed)
    report = {"oracle": {}, "monte_carlo": [], "runtime": {}}

    # exact-path check: recursion against full enumeration
    n = args.oracle_n
    params = ContagionParams(
        p=rng.uniform(0.01, 0.6, n), u=rng.random(n), v=rng.random(n)
    )
    units = np.ones(n, dtype=np.int64)
    dist = contagion_loss_distribution(params, units)
    oracle = enumerate_losses(params, units)
    max_diff = float(np.abs(dist.pmf - oracle.distribution.pmf).max())
    report["oracle"]["n"] = n
    report["oracle"]["max_abs_diff"] = max_diff
    report["oracle"]["tolerance"] = 1e-12
    report["oracle"]["passed"] = bool(max_diff < 1e-12)

    # Monte Carlo convergence: KL against the exact distribution
    n_names = args.n_names
    p_tilde = np.full(n_names, 0.05)
    mc_params = map_parameters(p_tilde, 0.5, 0.1)
    mc_units = np.ones(n_names, dtype=np.int64)
    began = time.perf_counter()
    exact = contagion_loss_distribution(mc_params, mc_units)
    recursion_seconds = time.perf_counter() - began
    for n_sims in args.sims:
        began = time.perf_counter()
        approx = simulate_losses(
            SimulationConfig(n_sims=n_sims, seed=seed, params=mc_params, loss_units=mc_units)
        )
        elapsed = time.perf_counter() - began
        report["monte_carlo"].append(
            {
                "n_sims": n_sims,
                "kl_divergence": kl_divergence(exact.pmf, approx.pmf),
                "seconds": elapsed,
            }
        )
    report["runtime"]["recursion_seconds"] = recursion_seconds
    report["runtime"]["n_names"] = n_names
    report["runtime"]["note"] = "informational only; hardware dependent"

    document = _metadata(args, "validate", {})
    document["report"] = report
    _write_json(document, args.output)

    sys.stderr.write(f"oracle n={n}: max |recursion - enumeration| = {max_diff:.3e}\n")
    sys.stderr.write("   n_sims    KL divergence\n")
    for row in report["monte_carlo"]:
        sys.stderr.write(f"{row['n_sims']:9d}    {row['kl_divergence']:.6f}\n")
    return EXIT_OK if report["oracle"]["passed"] else EXIT_VALIDATION


def cmd_sweep_eta(args) -> int:
    inputs = {
        "portfolio": args.portfolio,
        "curve": args.curve,
        "quotes": args.quotes,
    }
    grid = []
    tasks = [(model, eta) for model in args.model for eta in args.etas]

    def run(task):
        model_token, eta = task
        local = argparse.Namespace(**vars(args))
        local.eta = eta
        record = _calibrate_one(model_token, local)
        return {
            "model_variant": model_token.lower(),
            "eta": eta,
            "mae": record["mae"],
            "objective_value": record["objective_value"],
            "parameters": record["parameters"],
        }

    if args.jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            grid = list(pool.map(run, tasks))
    else:
        grid = [run(task) for task in tasks]

    document = _metadata(args, "sweep-eta", inputs)
    document["grid"] = grid
    _write_json(document, args.output)

    etas = list(args.etas)
    header = "model      " + "".join(f"  eta={eta:<6g}" for eta in etas)
    sys.stderr.write(header + "\n")
    for model in args.model:
        cells = []
        for eta in etas:
            entry = next(
                g for g in grid if g["model_variant"] == model.lower() and g["eta"] == eta
            )
            cells.append(f"  {entry['mae']:<10.4f}")
        sys.stderr.write(f"{model.lower():<11s}" + "".join(cells) + "\n")
    return EXIT_OK


def _add_model_options(parser, require_model=True):
    parser.add_argument("--model", required=require_model, help="variant, e.g. con-flat, ofg, cond-bnk, mix-fin")
    parser.add_argument("--omega", type=float, help="contagion share of the marginal")
    parser.add_argument("--rho", type=float, help="latent factor correlation")
    parser.add_argument("--pi", type=float, help="mixture weight of the contagion state")
    parser.add_argument("--eta", type=float, default=1.0, help="infectivity scale factor")
    parser.add_argument("--m", type=int, default=10, help="quadrature node count")
    parser.add_argument(
        "--ofg-heterogeneous",
        action="store_true",
        help="keep per-name marginals in the factor-only model instead of averaging",
    )


def _add_market_options(parser):
    parser.add_argument("--portfolio", required=True, help="constituents CSV")
    parser.add_argument("--curve", required=True, help="discount curve CSV")
    parser.add_argument("--maturity", type=float, default=5.0, help="trade maturity in years")
    parser.add_argument("--recovery", type=float, default=0.4, help="recovery rate")
    parser.add_argument("--running-coupon", type=float, default=100.0, help="running coupon in bps")
    parser.add_argument("--day-count", default="act365f", choices=("act365f", "act360"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contagio",
        description="Portfolio loss distributions with default contagion and CDO tranche pricing",
    )
    parser.add_argument("--seed", type=int, default=20_240_101, help="random seed (CONTAGIO_SEED overrides)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("dist", help="compute a loss distribution and summary statistics")
    _add_model_options(p_dist)
    p_dist.add_argument("--portfolio", help="constituents CSV (heterogeneous marginals)")
    p_dist.add_argument("--horizon", type=float, default=5.0, help="horizon in years for --portfolio mode")
    p_dist.add_argument("--recovery", type=float, default=0.4)
    p_dist.add_argument("--p-tilde", type=float, help="uniform marginal default probability")
    p_dist.add_argument("--n", type=int, default=125, help="number of names for --p-tilde mode")
    p_dist.add_argument("--lgd", type=float, default=1.0, help="loss given default for --p-tilde mode")
    p_dist.add_argument("--confidence", type=float, default=0.95)
    p_dist.add_argument("--output", help="prefix for the .csv and .json outputs")
    p_dist.set_defaults(func=cmd_dist)

    p_price = sub.add_parser("price", help="price the tranche set and index")
    _add_model_options(p_price)
    _add_market_options(p_price)
    p_price.add_argument("--output", help="output JSON path ('-' for stdout)")
    p_price.set_defaults(func=cmd_price)

    p_cal = sub.add_parser("calibrate", help="fit parameters to market quotes")
    p_cal.add_argument("--model", nargs="+", required=True, help="one or more variants")
    p_cal.add_argument("--quotes", required=True, help="market quotes CSV")
    _add_market_options(p_cal)
    p_cal.add_argument("--eta", type=float, default=1.0)
    p_cal.add_argument("--m", type=int, default=10)
    p_cal.add_argument("--ofg-heterogeneous", action="store_true")
    p_cal.add_argument("--lower-bound", type=float, default=0.05)
    p_cal.add_argument("--upper-bound", type=float, default=0.95)
    p_cal.add_argument("--multi-start", action="store_true", help="three jittered starts")
    p_cal.add_argument("--jobs", type=int, default=1, help="concurrent variants")
    p_cal.add_argument("--output", help="output JSON path ('-' for stdout)")
    p_cal.set_defaults(func=cmd_calibrate)

    p_val = sub.add_parser("validate", help="cross-check the recursion against its oracles")
    p_val.add_argument("--oracle-n", type=int, default=4, help="names for full enumeration (max 8)")
    p_val.add_argument("--n-names", type=int, default=125, help="portfolio size for the Monte Carlo table")
    p_val.add_argument(
        "--sims",
        type=lambda s: tuple(int(x) for x in s.split(",")),
        default=VALIDATE_SIMS,
        help="comma-separated simulation counts",
    )
    p_val.add_argument("--output", help="output JSON path ('-' for stdout)")
    p_val.set_defaults(func=cmd_validate)

    p_sweep = sub.add_parser("sweep-eta", help="calibration error across eta rescalings")
    p_sweep.add_argument("--model", nargs="+", required=True)
    p_sweep.add_argument("--quotes", required=True)
    _add_market_options(p_sweep)
    p_sweep.add_argument(
        "--etas",
        type=lambda s: tuple(float(x) for x in s.split(",")),
        default=DEFAULT_SWEEP_ETAS,
    )
    p_sweep.add_argument("--m", type=int, default=10)
    p_sweep.add_argument("--ofg-heterogeneous", action="store_true")
    p_sweep.add_argument("--lower-bound", type=float, default=0.05)
    p_sweep.add_argument("--upper-bound", type=float, default=0.95)
    p_sweep.add_argument("--multi-start", action="store_true")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--output", help="output JSON path ('-' for stdout)")
    p_sweep.set_defaults(func=cmd_sweep_eta)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleMappingError as err:
        sys.stderr.write(f"infeasible model parameters: {err}\n")
        return EXIT_INFEASIBLE
    except OSError as err:
        sys.stderr.write(f"i/o error: {err}\n")
        return EXIT_IO
    except ValueError as err:
        sys.stderr.write(f"invalid input: {err}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
