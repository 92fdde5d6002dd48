"""File formats for densities, traces and work reports.

All CSV files start with '#' comment lines carrying the package version,
the configuration hash and key = value metadata.  Timestamps appear only
inside those comment lines: the data body is a pure function of
configuration and seed, so reruns are byte-identical below the header.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import MissingInputError
from .spectral import SpectralDensity
from .workstats import BetaFit, WorkReport

_DENSITY_COLUMN = {"dos": "n_E", "ldos": "P_E"}

WORK_COLUMNS = ("L", "gamma_over_gamma0", "beta", "beta_err", "exp_avg",
                "exp_mean", "mean_W", "delta_E", "delta_E_err", "Delta_E")


def _fmt(x) -> str:
    """Shortest representation that round-trips the float exactly."""
    return repr(float(x))


def _headers(cfg_hash: str, meta: dict | None) -> list[str]:
    lines = [f"# qwork {__version__}",
             f"# config_hash: {cfg_hash}",
             f"# created: {datetime.now(timezone.utc).isoformat()}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {value}")
    return lines


def write_density_csv(path, density: SpectralDensity, cfg_hash: str,
                      meta: dict | None = None) -> None:
    meta = dict(meta or {})
    meta.setdefault("kind", density.kind)
    meta.setdefault("resolution", _fmt(density.resolution))
    meta.setdefault("theta", _fmt(density.theta))
    meta.setdefault("raw_integral", _fmt(density.raw_integral))
    col = _DENSITY_COLUMN[density.kind]
    lines = _headers(cfg_hash, meta)
    lines.append(f"E,{col}")
    for e, v in zip(density.grid, density.values):
        lines.append(f"{_fmt(e)},{_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_density_csv(path) -> SpectralDensity:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"missing density file: {path}")
    meta = {}
    grid = []
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    meta[key.strip()] = value.strip()
                continue
            if line.startswith("E,"):
                continue
            e, _, v = line.partition(",")
            grid.append(float(e))
            vals.append(float(v))
    return SpectralDensity(
        grid=np.array(grid), values=np.array(vals),
        resolution=float(meta.get("resolution", "nan")),
        kind=meta.get("kind", "ldos"),
        theta=float(meta.get("theta", "nan")),
        raw_integral=float(meta.get("raw_integral", "nan")))


def write_trace_csv(path, trace, cfg_hash: str,
                    meta: dict | None = None) -> None:
    lines = _headers(cfg_hash, meta)
    lines.append("t,norm,energy,sz_leg1,sz_leg2")
    for row in zip(trace.t, trace.norm, trace.energy, trace.sz_leg1,
                   trace.sz_leg2):
        lines.append(",".join(_fmt(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_beta_json(path, fit: BetaFit | None, cfg_hash: str,
                    error: str | None = None) -> None:
    payload = {"config_hash": cfg_hash}
    if fit is not None:
        payload.update(beta=fit.beta, epsilon=fit.epsilon,
                       stderr=fit.stderr, window=list(fit.window),
                       sweep={repr(k): v for k, v in fit.sweep.items()})
    if error is not None:
        payload["error"] = error
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True)
                          + "\n")


def read_beta_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"missing beta sidecar: {path}")
    return json.loads(path.read_text())


def write_work_reports(csv_path, json_path, reports: list[WorkReport],
                       cfg_hash: str) -> None:
    lines = _headers(cfg_hash, None)
    lines.append(",".join(WORK_COLUMNS))
    for r in reports:
        floats = (r.gamma_over_gamma0, r.beta, r.beta_err, r.exp_avg,
                  r.exp_mean, r.mean_w, r.delta_e, r.delta_e_err,
                  r.big_delta_e)
        lines.append(",".join([str(r.length)] + [_fmt(x) for x in floats]))
    Path(csv_path).write_text("\n".join(lines) + "\n")
    payload = {"config_hash": cfg_hash,
               "reports": [r.to_dict() for r in reports]}
    Path(json_path).write_text(json.dumps(payload, indent=2, sort_keys=True)
                               + "\n")


def read_work_reports(json_path) -> list[dict]:
    path = Path(json_path)
    if not path.exists():
        raise MissingInputError(f"missing work report: {path}")
    return json.loads(path.read_text())["reports"]


def data_body(path) -> str:
    """File content with '#' comment lines stripped (for byte-level
    reproducibility comparisons that ignore timestamps)."""
    with open(path) as fh:
        return "".join(line for line in fh if not line.startswith("#"))
