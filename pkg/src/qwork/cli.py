"""Command line driver: dos | prepare | run | analyze | scan.

Exit codes: 0 success, 2 configuration error, 3 missing inputs,
4 capacity refusal, 5 numerical failure.

Output layout under the configured directory:

    dos.csv, beta.json            density of states and fitted beta
    p_ini.csv, psi_ini.qwrk       filtered initial distribution / state
    rate_<g>/trace.csv            observables along the ramp at g*gamma0
    rate_<g>/p_fin.csv            final energy distribution
    rate_<g>/psi_fin.qwrk         final state checkpoint
    rate_<g>/p_fin_shifted.csv    shifted fixture (worst rate only)
    work_report.csv, work_report.json
    scan/L<length>/...            per-size runs of the finite-size scan
    scaling.json

Identical configuration and seed reproduce every output byte except the
timestamps inside '#' comment headers.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .chebyshev import gaussian_filter, make_filter_params, spectral_bound
from .config import ExperimentConfig, config_hash, load_config
from .errors import (CapacityError, ConfigError, FitError,
                     MissingInputError, NumericalError, QworkError)
from .evolve import run_protocol
from .lattice import FieldProtocol
from .spectral import average_series, autocorrelation, dos_estimate, ldos
from .statevec import check_capacity, haar_random, load_checkpoint, \
    save_checkpoint
from .workstats import (fit_beta, finite_size_scan, make_work_report,
                        shifted_distribution)


def _rate_dir(out: Path, rate: float) -> Path:
    return out / f"rate_{rate:g}"


def _density_emax(cfg: ExperimentConfig, n_steps: int) -> float:
    res = np.pi / (n_steps * cfg.dt)
    return spectral_bound(cfg.ladder) + max(1.0, 32 * res)


def _gauss_sigma(cfg: ExperimentConfig, n_steps: int) -> float | None:
    if cfg.gauss_factor == 0:
        return None
    return cfg.gauss_factor * np.pi / (n_steps * cfg.dt)


def _round_protocol(cfg: ExperimentConfig, rate: float):
    """Snap tau = 1/(2 gamma) to the step grid; returns the protocol and
    the realized sweep rate."""
    gamma = rate * cfg.gamma0
    steps = max(1, round(1.0 / (2.0 * gamma * cfg.dt)))
    protocol = FieldProtocol(strength=cfg.field_strength,
                             tau=steps * cfg.dt)
    return protocol, protocol.sweep_rate


def cmd_dos(cfg: ExperimentConfig) -> Path:
    """Estimate the density of states and fit beta around E_ini."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = config_hash(cfg)
    spec = cfg.ladder
    check_capacity(spec.n_spins, cfg.memory_budget, n_vectors=2)
    series = average_series([
        autocorrelation(spec, haar_random(spec.n_spins, cfg.seed + i,
                                          cfg.memory_budget),
                        cfg.integrator, cfg.k_dos)
        for i in range(cfg.n_dos_states)])
    density = dos_estimate(series, spec.n_spins,
                           gauss_sigma=_gauss_sigma(cfg, cfg.k_dos),
                           e_max=_density_emax(cfg, cfg.k_dos))
    io.write_density_csv(out / "dos.csv", density, tag,
                         {"n_spins": spec.n_spins,
                          "n_dos_states": cfg.n_dos_states})
    try:
        fit = fit_beta(density, cfg.resolved_e_ini, cfg.beta_epsilon,
                       cfg.epsilons)
        io.write_beta_json(out / "beta.json", fit, tag)
    except FitError as exc:
        # tiny systems have no smooth ln n(E); record why, keep the DOS
        io.write_beta_json(out / "beta.json", None, tag, error=str(exc))
    return out / "dos.csv"


def _prepare_state(cfg: ExperimentConfig):
    spec = cfg.ladder
    check_capacity(spec.n_spins, cfg.memory_budget, n_vectors=5)
    phi = haar_random(spec.n_spins, cfg.seed, cfg.memory_budget)
    params = make_filter_params(spec, cfg.filter_sharpness,
                                cfg.resolved_e_ini)
    return gaussian_filter(spec, params, phi)


def cmd_prepare(cfg: ExperimentConfig) -> Path:
    """Filter a Haar state around E_ini; write its distribution and a
    checkpoint."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = config_hash(cfg)
    psi0 = _prepare_state(cfg)
    save_checkpoint(psi0, out / "psi_ini.qwrk")
    p_ini = ldos(cfg.ladder, psi0, cfg.integrator, cfg.k_ldos,
                 gauss_sigma=_gauss_sigma(cfg, cfg.k_ldos))
    io.write_density_csv(out / "p_ini.csv", p_ini, tag,
                         {"e_ini": io._fmt(cfg.resolved_e_ini)})
    return out / "p_ini.csv"


def cmd_run(cfg: ExperimentConfig, rate: float | None = None) -> list[Path]:
    """Drive the prepared state through the ramp at one or all rates."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = config_hash(cfg)
    spec = cfg.ladder
    cmd_prepare(cfg)
    psi0 = load_checkpoint(out / "psi_ini.qwrk")
    rates = cfg.rates if rate is None else (rate,)
    written = []
    for r in rates:
        protocol, realized = _round_protocol(cfg, r)
        rdir = _rate_dir(out, r)
        rdir.mkdir(parents=True, exist_ok=True)
        result = run_protocol(spec, protocol, cfg.integrator, psi0)
        meta = {"rate_over_gamma0": io._fmt(r),
                "gamma_realized": io._fmt(realized),
                "tau": io._fmt(protocol.tau),
                "n_steps": result.n_steps}
        io.write_trace_csv(rdir / "trace.csv", result.trace, tag, meta)
        save_checkpoint(result.psi_final, rdir / "psi_fin.qwrk")
        p_fin = ldos(spec, result.psi_final, cfg.integrator, cfg.k_ldos,
                     gauss_sigma=_gauss_sigma(cfg, cfg.k_ldos))
        io.write_density_csv(rdir / "p_fin.csv", p_fin, tag, meta)
        written.append(rdir / "p_fin.csv")
    return written


def _resolve_beta(cfg: ExperimentConfig, out: Path):
    if cfg.beta_override is not None:
        return cfg.beta_override, 0.0
    sidecar = io.read_beta_json(out / "beta.json")
    if "beta" not in sidecar:
        raise FitError(
            "beta fit failed for this system "
            f"({sidecar.get('error', 'unknown reason')}); set "
            "analysis.beta_override to analyze anyway")
    return float(sidecar["beta"]), float(sidecar.get("stderr", 0.0))


def cmd_analyze(cfg: ExperimentConfig) -> Path:
    """Work statistics for every configured rate from the stored
    distributions; emits the shifted fixture for the worst rate."""
    out = Path(cfg.out_dir)
    tag = config_hash(cfg)
    beta, beta_err = _resolve_beta(cfg, out)
    p_ini = io.read_density_csv(out / "p_ini.csv")
    reports = []
    densities = {}
    for r in cfg.rates:
        p_fin = io.read_density_csv(_rate_dir(out, r) / "p_fin.csv")
        _, realized = _round_protocol(cfg, r)
        report = make_work_report(p_ini, p_fin, beta, beta_err,
                                  realized, cfg.gamma0, cfg.length)
        reports.append(report)
        densities[r] = p_fin
    io.write_work_reports(out / "work_report.csv",
                          out / "work_report.json", reports, tag)
    worst = max(zip(cfg.rates, reports),
                key=lambda pair: abs(1.0 - pair[1].exp_avg))
    shifted = shifted_distribution(densities[worst[0]], worst[1].delta_e)
    io.write_density_csv(_rate_dir(out, worst[0]) / "p_fin_shifted.csv",
                         shifted, tag,
                         {"delta_E": io._fmt(worst[1].delta_e),
                          "rate_over_gamma0": io._fmt(worst[0])})
    return out / "work_report.json"


def cmd_scan(cfg: ExperimentConfig, sizes, rate: float) -> Path:
    """Full pipeline per ladder size at one rate, then size-law fits."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = {}
    for length in sizes:
        sub = dataclasses.replace(
            cfg, length=length, e_ini=None, rates=(rate,),
            out_dir=str(out / "scan" / f"L{length}"))
        cmd_dos(sub)
        cmd_run(sub, rate)
        cmd_analyze(sub)
        data = io.read_work_reports(Path(sub.out_dir) / "work_report.json")
        from .workstats import WorkReport
        reports[length] = WorkReport(**data[0])
    scaling = finite_size_scan(reports)
    payload = {"config_hash": config_hash(cfg), "rate_over_gamma0": rate,
               "scaling": scaling.to_dict()}
    (out / "scaling.json").write_text(json.dumps(payload, indent=2,
                                                 sort_keys=True) + "\n")
    return out / "scaling.json"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwork",
        description="work statistics of driven spin ladders")
    parser.add_argument("--config", required=True,
                        help="INI or JSON configuration file")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--seed", type=int, help="override the seed")
    parser.add_argument("--threads", type=int,
                        help="worker threads for compiled kernels")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("dos", help="density of states and beta fit")
    sub.add_parser("prepare", help="filtered initial state and p_ini")
    p_run = sub.add_parser("run", help="drive the ramp and store p_fin")
    p_run.add_argument("--rate", type=float,
                       help="single rate in units of gamma0 "
                            "(default: all configured rates)")
    sub.add_parser("analyze", help="work statistics from stored outputs")
    p_scan = sub.add_parser("scan", help="finite-size scan")
    p_scan.add_argument("--sizes", default="5,6,7",
                        help="comma-separated ladder lengths")
    p_scan.add_argument("--rate", type=float, default=40.0,
                        help="rate in units of gamma0 for every size")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.out is not None:
            overrides["out_dir"] = args.out
        if args.seed is not None:
            overrides["seed"] = args.seed
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        if args.threads is not None:
            import numba
            numba.set_num_threads(max(1, args.threads))
        if args.command == "dos":
            cmd_dos(cfg)
        elif args.command == "prepare":
            cmd_prepare(cfg)
        elif args.command == "run":
            cmd_run(cfg, args.rate)
        elif args.command == "analyze":
            cmd_analyze(cfg)
        elif args.command == "scan":
            sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
            if len(sizes) < 3:
                raise ConfigError("scan needs at least three sizes")
            cmd_scan(cfg, sizes, args.rate)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MissingInputError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return 3
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return 4
    except (NumericalError, QworkError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
