"""Command-line entry point: ``dfrc design | sweep | simulate``.

Exit codes: 0 success, 2 infeasible design, 3 solver failure, 4 config error.
The number of worker processes for sweeps is read from ``DFRC_THREADS``
(default 1); results are sorted before writing, so output does not depend on
it.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .array import beam_pattern
from .config import ConfigError, ExperimentConfig, load_config
from .design import (DesignConfig, DesignError, DesignOutcome, DesignStatus, Precoder, SolverFailure,
                     db2lin, lin2db, radar_only, sdr_beamform, zf_beamform)
from .linalg import lower_factor
from .matio import MatrixFormatError, read_matrix, write_matrix
from .metrics import (TrialReport, beampattern_mse, fairness, feasibility_probability,
                      interference_power, radar_inr, reports_to_csv, sinr_closed_form, sum_rate)
from .objective import build_radar_loss
from .simulate import (REFERENCE_TARGETS, NoiseModel, bin_covariance, capon_spectrum, comm_receive,
                       empirical_sinr, radar_receive, range_compress, range_profile,
                       rayleigh_channel, series_csv, trial_rng, waveform_block)

log = logging.getLogger("dfrc")

EXIT_OK, EXIT_INFEASIBLE, EXIT_SOLVER, EXIT_CONFIG = 0, 2, 3, 4
WORKERS_ENV = "DFRC_THREADS"

AGGREGATE_HEADER = ["method", "K", "gamma_db", "trials", "feasible", "infeasible", "failures",
                    "feasible_fraction", "mean_loss", "mean_mse", "mean_fairness_db",
                    "mean_sumrate", "mean_inr_db"]
VERIFY_HEADER = ["metric", "index", "closed_form", "empirical", "error", "pass"]


def trial_seed(master: int, K: int, trial: int) -> int:
    """Seed of the channel draw for user count K and trial index; shared by
    every method and threshold so that comparisons use common channels."""
    return int(np.random.SeedSequence([int(master), int(K), int(trial)]).generate_state(1)[0])


def trial_channel(cfg: ExperimentConfig, K: int, trial: int):
    return rayleigh_channel(K, cfg.geom.M, np.random.default_rng(trial_seed(cfg.seed, K, trial)))


def design_config(cfg: ExperimentConfig, gamma_db: float) -> DesignConfig:
    return DesignConfig(total_power=cfg.total_power, noise_power=cfg.noise_power, sinr=float(db2lin(gamma_db)))


class _Context:
    """Per-process cache of the radar loss and the radar-only reference."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.obj = build_radar_loss(cfg.geom, cfg.spec)
        self.R0, self.alpha0, self.loss0 = radar_only(cfg.geom, cfg.spec, design_config(cfg, 0.0), self.obj)


_CTX: _Context | None = None


def _init_worker(cfg: ExperimentConfig) -> None:
    global _CTX
    _CTX = _Context(cfg)


def run_design(ctx: _Context, method: str, K: int, gamma_db: float, trial: int) -> DesignOutcome:
    cfg = ctx.cfg
    if method == "radar_only":
        pre = Precoder(np.zeros((cfg.geom.M, 0)), lower_factor(ctx.R0))
        return DesignOutcome(DesignStatus.FEASIBLE, "radar_only", pre.covariance(), pre, ctx.alpha0,
                             ctx.loss0, np.zeros(0), {})
    ch = trial_channel(cfg, K, trial)
    fn = sdr_beamform if method == "sdr" else zf_beamform
    return fn(cfg.geom, cfg.spec, design_config(cfg, gamma_db), ch, ctx.obj)


def make_report(ctx: _Context, method: str, K: int, gamma_db: float, trial: int) -> TrialReport:
    t0 = time.perf_counter()
    try:
        out = run_design(ctx, method, K, gamma_db, trial)
        status = str(out.status)
    except DesignError as exc:
        out, status = None, type(exc).__name__
    return report_of(ctx, method, K, gamma_db, trial, out, status, (time.perf_counter() - t0) * 1e3)


def report_of(ctx: _Context, method: str, K: int, gamma_db: float, trial: int,
              out: DesignOutcome | None, status: str, wall_ms: float) -> TrialReport:
    cfg = ctx.cfg
    nan = float("nan")
    wall = wall_ms if cfg.record_timing else nan
    seed = trial_seed(cfg.seed, K, trial)
    if out is None or not out.feasible:
        return TrialReport(method, K, gamma_db, trial, seed, status, nan, nan, nan, nan, nan, nan, wall)
    mse = beampattern_mse(out.R, ctx.R0, cfg.spec.grid, cfg.geom)
    if method == "radar_only":
        fair_db = srate = inr_db = nan
    else:
        H = trial_channel(cfg, K, trial).H
        fair_db = float(lin2db(fairness(out.gamma)))
        srate = sum_rate(out.gamma)
        inr_db = float(lin2db(radar_inr(H, out.precoder.Wr, cfg.noise_power, 0)))
    return TrialReport(method, K, gamma_db, trial, seed, status, out.loss, out.alpha, mse, fair_db,
                       srate, inr_db, wall)


def _task(args) -> TrialReport:
    return make_report(_CTX, *args)


def sweep_reports(cfg: ExperimentConfig, workers: int | None = None) -> list[TrialReport]:
    tasks = [(m, K, g, t) for m in cfg.methods for K in cfg.users for g in cfg.gamma_db
             for t in range(cfg.trials)]
    workers = workers or int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers <= 1:
        _init_worker(cfg)
        reports = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(cfg,)) as ex:
            reports = list(ex.map(_task, tasks, chunksize=4))
    order = {m: i for i, m in enumerate(cfg.methods)}
    return sorted(reports, key=lambda r: (order[r.method], r.K, r.gamma_db, r.trial))


def _fmt(v: float) -> str:
    return "nan" if not np.isfinite(v) else f"{v:.10g}"


def aggregate_csv(reports: list[TrialReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_HEADER)
    cells: dict = {}
    for r in reports:
        cells.setdefault((r.method, r.K, r.gamma_db), []).append(r)
    for (m, K, g), rows in cells.items():
        fs = feasibility_probability(r.status for r in rows)
        ok = [r for r in rows if r.status == "Feasible"]

        def mean(attr):
            vals = np.array([getattr(r, attr) for r in ok], dtype=float)
            vals = vals[np.isfinite(vals)]
            return float(np.mean(vals)) if vals.size else float("nan")

        w.writerow([m, K, _fmt(g), fs.trials, fs.feasible, fs.infeasible, fs.failures, _fmt(fs.fraction),
                    _fmt(mean("loss")), _fmt(mean("mse")), _fmt(mean("fairness_db")),
                    _fmt(mean("sumrate")), _fmt(mean("inr_db"))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def _outdir(cfg: ExperimentConfig, sub: str | None = None) -> Path:
    d = cfg.output_dir / sub if sub else cfg.output_dir
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_design(cfg: ExperimentConfig) -> int:
    """Single design at the config's only (K, gamma) pair."""
    if cfg.methods != ("radar_only",) and (len(cfg.users) != 1 or len(cfg.gamma_db) != 1):
        raise ConfigError("design needs exactly one entry in design.users and design.gamma_db")
    K, g = cfg.users[0], cfg.gamma_db[0]
    ctx = _Context(cfg)
    code = EXIT_OK
    for method in cfg.methods:
        out_dir = _outdir(cfg, method if len(cfg.methods) > 1 else None)
        t0 = time.perf_counter()
        try:
            out = run_design(ctx, method, K, g, 0)
            status = str(out.status)
        except DesignError as exc:
            log.error("%s design failed: %s", method, exc)
            out, status = None, type(exc).__name__
        report = report_of(ctx, method, K, g, 0, out, status, (time.perf_counter() - t0) * 1e3)
        (out_dir / "report.csv").write_text(reports_to_csv([report], cfg.record_timing))
        if method != "radar_only":
            write_matrix(out_dir / "channel.txt", trial_channel(cfg, K, 0).H)
        if out is None or not out.feasible:
            log.error("%s design: %s", method, status)
            code = max(code, EXIT_INFEASIBLE if status == "Infeasible" else EXIT_SOLVER)
            continue
        out.precoder.save(out_dir / "precoder.txt")
        write_matrix(out_dir / "covariance.txt", out.R)
        grid = cfg.spec.grid
        pat = beam_pattern(cfg.geom, out.R, grid)
        ref = beam_pattern(cfg.geom, ctx.R0, grid)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta_deg", "power", "desired", "radar_only_power"])
        for row in zip(grid, pat, cfg.spec.desired(), ref):
            w.writerow([f"{x:.10g}" for x in row])
        (out_dir / "pattern.csv").write_text(buf.getvalue())
    return code


def cmd_sweep(cfg: ExperimentConfig, workers: int | None = None) -> int:
    reports = sweep_reports(cfg, workers)
    out_dir = _outdir(cfg)
    (out_dir / "sweep.csv").write_text(reports_to_csv(reports, cfg.record_timing))
    (out_dir / "aggregate.csv").write_text(aggregate_csv(reports))
    return EXIT_OK


def verify_precoder(cfg: ExperimentConfig, pre: Precoder, H: np.ndarray | None) -> tuple[list, np.ndarray, np.ndarray, np.ndarray]:
    """Waveform-level checks of one precoder.

    Returns (verify rows, Capon spectrum over the design grid at range bin 20,
    range profile toward 0 degrees, delays).
    """
    rows = []
    N = cfg.block_length
    rng = trial_rng(cfg.seed, 0x5EED)
    R = pre.covariance()
    bound = 5.0 * np.linalg.norm(R) / np.sqrt(N)
    errs, emp_sinr, emp_int = [], [], []
    for _ in range(cfg.sim_blocks):
        blk = waveform_block(pre, N, rng)
        errs.append(np.linalg.norm(blk.sample_covariance() - R))
        if H is not None and pre.K:
            Y = comm_receive(H, blk.X, cfg.noise_power, rng)
            emp_sinr.append(empirical_sinr(H, pre, blk, Y))
            clean = H @ blk.X
            g = np.sum(clean * blk.C.conj(), axis=1) / N
            emp_int.append(np.mean(np.abs(clean - g[:, None] * blk.C) ** 2, axis=1))
    if H is not None and pre.K:
        cf = sinr_closed_form(H, pre, cfg.noise_power)
        emp = np.mean(emp_sinr, axis=0)
        for k in range(pre.K):
            e = float(lin2db(emp[k]) - lin2db(cf[k]))
            rows.append(["sinr_db", k, _fmt(float(lin2db(cf[k]))), _fmt(float(lin2db(emp[k]))), _fmt(e),
                         int(abs(e) <= 1.0)])
        sig, itf = interference_power(H, pre)
        ei = np.mean(emp_int, axis=0)
        for k in range(pre.K):
            tol = 1e-10 * sig[k] + 5.0 * itf[k] / np.sqrt(N)
            rows.append(["interference", k, _fmt(itf[k]), _fmt(ei[k]), _fmt(ei[k] - itf[k]),
                         int(abs(ei[k] - itf[k]) <= tol)])
    med = float(np.mean(errs))
    rows.append(["covariance_error", "", _fmt(bound), _fmt(med), _fmt(med - bound), int(med <= bound)])

    blk = waveform_block(pre, N, rng)
    r = radar_receive(cfg.geom, REFERENCE_TARGETS, blk.X, NoiseModel(cfg.noise_power, cfg.radar_noise), rng)
    Z = range_compress(r, blk.X, max_delay=min(N - 1, 63))
    prof = range_profile(Z, cfg.geom, 0.0)
    spec = capon_spectrum(bin_covariance(Z[min(20, Z.shape[0] - 1)]), cfg.geom, cfg.spec.grid)
    return rows, spec, prof, np.arange(Z.shape[0])


def cmd_simulate(cfg: ExperimentConfig, precoder: Path, channel: Path | None = None) -> int:
    try:
        pre = Precoder.load(precoder)
        H = read_matrix(channel) if channel is not None and Path(channel).exists() else None
    except (OSError, MatrixFormatError, ValueError) as exc:
        raise ConfigError(f"cannot read precoder/channel: {exc}") from None
    if pre.M != cfg.geom.M:
        raise ConfigError(f"precoder has {pre.M} antennas, config has {cfg.geom.M}")
    if H is not None and H.shape != (pre.K, pre.M):
        raise ConfigError(f"channel shape {H.shape} does not match precoder ({pre.K} users, {pre.M} antennas)")
    rows, spec, prof, delays = verify_precoder(cfg, pre, H)
    out_dir = _outdir(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(VERIFY_HEADER)
    w.writerows(rows)
    (out_dir / "verify.csv").write_text(buf.getvalue())
    (out_dir / "spectrum.csv").write_text(series_csv(cfg.spec.grid, spec, ("angle_deg", "value")))
    (out_dir / "range_profile.csv").write_text(series_csv(delays, prof, ("delay", "value")))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dfrc", description="Joint radar-communication beamforming experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("-c", "--config", help="YAML config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (dotted path, YAML value); repeatable")
        sp.add_argument("--method", choices=("radar_only", "sdr", "zf", "both"))
        sp.add_argument("--users", type=int, nargs="+")
        sp.add_argument("--gamma-db", type=float, nargs="+")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("-o", "--output-dir")

    common(sub.add_parser("design", help="solve one design and write precoder, pattern and report"))
    common(sub.add_parser("sweep", help="Monte Carlo sweep over users and SINR thresholds"))
    sp = sub.add_parser("simulate", help="waveform-level verification of a stored precoder")
    common(sp)
    sp.add_argument("--precoder", required=True)
    sp.add_argument("--channel")
    return p


def _overrides(args) -> list[str]:
    ov = list(args.set)
    for flag, key in (("method", "method"), ("trials", "trials"), ("seed", "seed"), ("output_dir", "output_dir")):
        v = getattr(args, flag)
        if v is not None:
            ov.append(f"{key}={v}")
    if args.users is not None:
        ov.append(f"design.users={list(args.users)}")
    if args.gamma_db is not None:
        ov.append(f"design.gamma_db={list(args.gamma_db)}")
    return ov


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, _overrides(args))
        if args.command == "design":
            return cmd_design(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        channel = args.channel
        if channel is None:
            guess = Path(args.precoder).with_name("channel.txt")
            channel = guess if guess.exists() else None
        return cmd_simulate(cfg, Path(args.precoder), channel)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
