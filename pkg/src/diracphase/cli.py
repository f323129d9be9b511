"""Command-line front end.

    diracphase simulate --config F --out-dir D [--workers k]
    diracphase sweep    --config F --n-values a,b,c --out-dir D [--workers k]
    diracphase fit      --sweep-csv F [--out-dir D]
    diracphase verify   [--quick]

Exit codes: 0 success, 1 validation or I/O error, 2 run aborted (too many
singular samples), 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import fields as dc_fields
from pathlib import Path

import numpy as np

from .fields import SingularRegionError
from .montecarlo import (
    DRIFTS, FIELDS, NOISES, ExperimentConfig, FitResult, MomentEstimate, PhaseEnsemble,
    RunAbortedError, SweepPoint, estimate_moments, fit_sqrt_law, run_experiment, sweep_variance,
)
from .paths import InvalidArgumentError

EXIT_OK, EXIT_INVALID, EXIT_ABORTED, EXIT_VERIFY = 0, 1, 2, 3

ENSEMBLE_HEADER = ["sample_index", "phase"]
SUMMARY_HEADER = ["samples", "rejected", "mean", "variance", "stderr_mean", "stderr_variance"]
SWEEP_HEADER = ["N", "sigma", "sigma_stderr"]
FIT_HEADER = ["a", "b", "residual_norm", "a_stderr", "b_stderr"]


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# -----------------------------------------------------------------------------
# Config grammar
# -----------------------------------------------------------------------------

def _str(choices):
    def conv(v):
        if v not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}")
        return v
    return conv


def _int(lo=None, hi=None):
    def conv(v):
        x = int(v)
        if (lo is not None and x < lo) or (hi is not None and x > hi):
            raise ValueError("out of range")
        return x
    return conv


def _float(lo=None, strict=False, hi=None):
    def conv(v):
        x = float(v)
        if not math.isfinite(x):
            raise ValueError("must be finite")
        if lo is not None and (x <= lo if strict else x < lo):
            raise ValueError(f"out of range: must be {'>' if strict else '>='} {lo}")
        if hi is not None and x > hi:
            raise ValueError(f"out of range: must be <= {hi}")
        return x
    return conv


KEYS = {
    "field": _str(FIELDS),
    "noise": _str(NOISES),
    "drift": _str(DRIFTS),
    "T": _float(0, strict=True),
    "steps": _int(1),
    "samples": _int(1),
    "seed": _int(0, 2 ** 64 - 1),
    "coupling": _float(),
    "Bx": _float(0),
    "By": _float(0),
    "Bz": _float(0),
    "gamma": _float(0, strict=True),
    "D": _float(0),
    "epsilon": _float(0),
    "theta0": _float(0, hi=math.pi),
    "phi0": _float(),
    "turns": _int(1),
    "quad_steps": _int(1),
    "bootstrap": _int(2),
}
REQUIRED = ("field", "noise", "drift", "T", "steps", "samples", "seed")


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` text into a validated ExperimentConfig."""
    values, where = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {where[key]})", lineno)
        try:
            values[key] = KEYS[key](val)
        except ValueError as exc:
            raise ConfigError(f"invalid value for {key!r}: {val!r} ({exc})", lineno) from None
        where[key] = lineno

    for key in REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    if "D" in values and "epsilon" in values:
        raise ConfigError(f"conflicting keys 'D' (line {where['D']}) and "
                          f"'epsilon' (line {where['epsilon']}); give exactly one",
                          where["epsilon"])
    if values["noise"] == "ou":
        for key in ("gamma",):
            if key not in values:
                raise ConfigError(f"missing required key {key!r} for OU noise")
        if "D" not in values and "epsilon" not in values:
            raise ConfigError("OU noise needs one of 'D' or 'epsilon'")
        if "epsilon" in values:
            values["D"] = 2.0 * values["gamma"] * values.pop("epsilon") ** 2
    else:
        for key in ("Bx", "By"):
            if key not in values:
                raise ConfigError(f"missing required key {key!r} for Wiener noise")
        values.pop("epsilon", None)
    if values["field"].startswith("monopole"):
        th = values.get("theta0")
        if th is None or not 0 < th < math.pi:
            raise ConfigError("monopole fields need 0 < theta0 < pi (off the polar axis)",
                              where.get("theta0"))
    try:
        return ExperimentConfig(**values)
    except (InvalidArgumentError, SingularRegionError) as exc:
        raise ConfigError(str(exc)) from None


def format_config(cfg: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config` (D is always written, never epsilon)."""
    lines = []
    for f in dc_fields(cfg):
        if f.name not in KEYS:
            continue
        v = getattr(cfg, f.name)
        if v is None:
            continue
        lines.append(f"{f.name} = {_num(v) if isinstance(v, float) else v}")
    return "\n".join(lines) + "\n"


# -----------------------------------------------------------------------------
# CSV formats
# -----------------------------------------------------------------------------

def _num(x) -> str:
    return "nan" if not math.isfinite(x) else repr(float(x))


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def _read_csv(path: Path, header):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != header:
        raise InvalidArgumentError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


def write_ensemble_csv(path, ensemble: PhaseEnsemble):
    _write_csv(path, ENSEMBLE_HEADER,
               ([int(i), _num(p)] for i, p in zip(ensemble.indices, ensemble.phases)))


def read_ensemble_csv(path):
    rows = _read_csv(path, ENSEMBLE_HEADER)
    return (np.array([int(r[0]) for r in rows], dtype=np.int64),
            np.array([float(r[1]) for r in rows]))


def write_summary_csv(path, ensemble: PhaseEnsemble, est: MomentEstimate):
    _write_csv(path, SUMMARY_HEADER, [[
        ensemble.config.samples, ensemble.rejected, _num(est.mean), _num(est.variance),
        _num(est.stderr_mean), _num(est.stderr_variance),
    ]])


def read_summary_csv(path) -> dict:
    (row,) = _read_csv(path, SUMMARY_HEADER)
    out = dict(zip(SUMMARY_HEADER, row))
    return {k: int(v) if k in ("samples", "rejected") else float(v) for k, v in out.items()}


def write_sweep_csv(path, points):
    _write_csv(path, SWEEP_HEADER,
               ([_num(p.N), _num(p.sigma), _num(p.sigma_stderr)] for p in points))


def read_sweep_csv(path) -> list[SweepPoint]:
    return [SweepPoint(float(r[0]), float(r[1]), float(r[2]))
            for r in _read_csv(path, SWEEP_HEADER)]


def write_fit_csv(path, fit: FitResult):
    _write_csv(path, FIT_HEADER, [[_num(fit.a), _num(fit.b), _num(fit.residual_norm),
                                   _num(fit.a_stderr), _num(fit.b_stderr)]])


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------

def _load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ens = run_experiment(cfg, workers=args.workers)
    est = estimate_moments(ens, cfg.bootstrap, resample_seed=cfg.seed)
    write_ensemble_csv(out / "ensemble.csv", ens)
    write_summary_csv(out / "summary.csv", ens, est)
    print(f"samples={cfg.samples} rejected={ens.rejected} mean={est.mean:.6g} "
          f"variance={est.variance:.6g} (+/- {est.stderr_variance:.2g})")
    return EXIT_OK


def _parse_n_values(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"could not parse N values {text!r}") from None
    if not vals:
        raise InvalidArgumentError("no N values given")
    return vals


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pts = sweep_variance(cfg, _parse_n_values(args.n_values), workers=args.workers,
                         resample_seed=cfg.seed)
    write_sweep_csv(out / "sweep.csv", pts)
    realised = "T = N / gamma" if cfg.noise == "ou" else "T = N"
    print(f"wrote {len(pts)} points to {out / 'sweep.csv'} ({realised})")
    return EXIT_OK


def cmd_fit(args) -> int:
    src = Path(args.sweep_csv)
    fit = fit_sqrt_law(read_sweep_csv(src))
    out = Path(args.out_dir) if args.out_dir else src.parent
    out.mkdir(parents=True, exist_ok=True)
    write_fit_csv(out / "fit.csv", fit)
    print(f"a = {fit.a!r}")
    print(f"b = {fit.b!r}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import format_table, run_all

    results = run_all(quick=args.quick, progress=lambda r: print(r.line(), flush=True))
    print()
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diracphase",
                                description="Dirac phase of noisy trajectories")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one ensemble")
    s.add_argument("--config", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="sigma as a function of N = gamma T")
    s.add_argument("--config", required=True)
    s.add_argument("--n-values", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fit", help="fit sigma = a sqrt(N) + b to a sweep")
    s.add_argument("--sweep-csv", required=True)
    s.add_argument("--out-dir", default=None)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("verify", help="run the acceptance checks")
    s.add_argument("--quick", action="store_true")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except RunAbortedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    except (ConfigError, InvalidArgumentError, SingularRegionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
