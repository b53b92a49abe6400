"""Monte Carlo orchestration and report emission.

Trial ``i`` always draws from ``substream(seed, i)``, and results are
merged in trial order, so a report depends only on the config and not on
how many workers ran it.

Output files for ``emit_csv(report, "out.csv")``:

* ``out.csv``: one row per trial, columns ``CSV_COLUMNS``
* ``out.summary.json``: aggregates, config echo, metadata, plan tables
* ``out.trajectory.csv``: purify only; one row per step per trial
* ``out.schedule.csv``: plan only; the connection schedule
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import __version__, kernels
from .channel import ChannelModel
from .config import Scenario, SimConfig
from .errors import ConfigError, OutputError
from .planner import (
    CostReport,
    Schedule,
    connect,
    doubling_fold,
    fold_connect,
    plan_repeater,
    repurified_doubling_schedule,
)
from .rng import GENERATOR_NAME, check_seed, substream

CSV_COLUMNS = ("trial", "attempts", "steps", "final_fidelity", "resets", "elapsed_channel_time")
TRAJECTORY_COLUMNS = ("trial", "step", "fidelity", "reset")
SCHEDULE_COLUMNS = ("round", "pairs", "fidelity", "extra_steps", "fidelity_after")
AGGREGATED = CSV_COLUMNS[1:]

STATUS_TEXT = {0: "ok", 1: "step cap reached", 2: "AFC retries exhausted", 3: "initial fidelity not above 1/2"}


@dataclass
class TrialRecord:
    trial: int
    attempts: int
    steps: int
    final_fidelity: float
    resets: int
    elapsed_channel_time: float
    outcomes: str = ""
    status: str = "ok"
    trajectory: list[float] | None = None
    reset_steps: list[int] | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def row(self) -> tuple:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


@dataclass
class SimReport:
    config: SimConfig
    records: list[TrialRecord]
    aggregates: dict[str, dict[str, Any]]
    metadata: dict[str, Any]
    plan: dict[str, Any] = field(default_factory=dict)

    @property
    def failures(self) -> list[TrialRecord]:
        return [r for r in self.records if not r.ok]


def summarize(values: Sequence[float]) -> dict[str, Any]:
    """Mean, sample variance and a normal-approximation 95% interval.

    Uses ``math.fsum`` so the result depends only on the values, not on
    summation order.
    """
    n = len(values)
    if n == 0:
        return {"n": 0, "mean": None, "variance": None, "ci95": None}
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1) if n > 1 else 0.0
    half = 1.959963984540054 * math.sqrt(var / n)
    return {"n": n, "mean": mean, "variance": var, "ci95": [mean - half, mean + half]}


def aggregate(records: Sequence[TrialRecord]) -> dict[str, dict[str, Any]]:
    return {c: summarize([getattr(r, c) for r in records]) for c in AGGREGATED}


def _afc_fidelity(s0r: float, s0i: float, s1r: float, s1i: float) -> float:
    pr, pi = 0.5 * (s0r + s1r), 0.5 * (s0i + s1i)
    mr, mi = 0.5 * (s0r - s1r), 0.5 * (s0i - s1i)
    plus = pr * pr + pi * pi
    return plus / (plus + mr * mr + mi * mi)


def _sequence(attempts: int, ok: bool) -> str:
    return "E" * (attempts - 1) + ("O" if ok else "E")


class _Trials:
    """Per-scenario trial functions on kernel scalars."""

    def __init__(self, config: SimConfig, backend: str | None):
        self.config = config
        self.k = kernels.get(backend)
        self.seed = check_seed(config.seed)
        chan = config.channel()
        if config.scenario is Scenario.CHAIN:
            # whole-link parameters, split evenly over the segments
            chan = ChannelModel(
                kappa=chan.kappa / config.n_segments, tau=chan.tau, phase_jitter=chan.phase_jitter
            )
        self.params = kernels.KernelParams.from_model(chan, config.policy())

    def __call__(self, i: int) -> TrialRecord:
        cfg, p = self.config, self.params
        bitgen = substream(self.seed, i)
        sc = cfg.scenario
        if sc is Scenario.CHANNEL:
            ok, att, t, fid = self.k.direct_trial(bitgen, *p.args, cfg.t0, p.max_attempts)
            return TrialRecord(i, att, 0, fid, 0, t - cfg.t0, _sequence(att, ok),
                               "ok" if ok else STATUS_TEXT[2])
        if sc is Scenario.AFC:
            ok, att, t, *s = self.k.afc_trial(bitgen, *p.args, cfg.t0, p.max_attempts)
            fid = _afc_fidelity(*s) if ok else 0.0
            return TrialRecord(i, att, 0, fid, 0, t - cfg.t0, _sequence(att, ok),
                               "ok" if ok else STATUS_TEXT[2])
        if sc is Scenario.PURIFY:
            status, steps, att, resets, fid, t, traj, rsteps = self.k.purify_trial(
                bitgen, *p.args, cfg.t0, p.max_attempts, cfg.f_target, cfg.step_cap, cfg.barrier, True
            )
            return TrialRecord(i, att, steps, fid, resets, t - cfg.t0, "", STATUS_TEXT[status], traj, rsteps)
        return self._chain(i, bitgen)

    def _chain(self, i: int, bitgen) -> TrialRecord:
        """Segments built in parallel from one substream, then connected."""
        cfg, p = self.config, self.params
        fids, attempts, steps, resets, t_end, status = [], 0, 0, 0, cfg.t0, "ok"
        for _ in range(cfg.n_segments):
            if cfg.f_target is None:
                ok, att, t, *s = self.k.afc_trial(bitgen, *p.args, cfg.t0, p.max_attempts)
                fid, code, n_steps, n_resets = (_afc_fidelity(*s) if ok else 0.0), (0 if ok else 2), 0, 0
            else:
                code, n_steps, att, n_resets, fid, t, _, _ = self.k.purify_trial(
                    bitgen, *p.args, cfg.t0, p.max_attempts, cfg.f_target, cfg.step_cap, cfg.barrier, False
                )
            attempts += att
            steps += n_steps
            resets += n_resets
            t_end = max(t_end, t)
            fids.append(fid)
            if code != 0 and status == "ok":
                status = STATUS_TEXT[code]
        q = cfg.connection_quality
        if cfg.schedule is Schedule.DOUBLING:
            final = doubling_fold(fids, q)[-1][0]
        else:
            final = fold_connect(fids, q)
        return TrialRecord(i, attempts, steps, final, resets, t_end - cfg.t0, "", status)


def _plan(config: SimConfig) -> dict[str, Any]:
    cost = CostReport.evaluate(config.l, config.l0)
    out: dict[str, Any] = {
        "simple_cost": cost.simple_cost,
        "optimal_segments": cost.n_segments,
        "compound_cost": cost.compound_cost,
        "min_cost": cost.min_cost,
        "min_cost_rounded": round(cost.min_cost),
        "segments_continuum": cost.n_continuum,
        "schedule": [],
    }
    if config.f_target is None:
        return out
    plan = plan_repeater(config.l, config.l0, config.f_target, config.schedule, config.n_segments)
    out.update(
        plan_segments=plan.n_segments,
        plan_transmissions=plan.transmissions,
        segment_length=plan.segment_length,
        required_f0=plan.f0,
        rounds=plan.rounds,
    )
    q = config.connection_quality
    n = plan.n_segments
    if plan.schedule is Schedule.DOUBLING:
        if config.f_working is not None:
            rows = repurified_doubling_schedule(plan.f0, n, config.f_working, config.repurify_rate, q)
            out["repurification"] = "stand-in exponential model, not a published protocol"
        else:
            fid = plan.f0
            rows = [(0, n, fid, 0, fid)]
            for k in range(1, plan.rounds + 1):
                fid = connect(fid, fid, q)
                rows.append((k, n >> k, fid, 0, fid))
    else:
        fid, rows = plan.f0, [(0, n, plan.f0, 0, plan.f0)]
        for k in range(1, n):
            fid = connect(fid, plan.f0, q)
            rows.append((k, n - k, fid, 0, fid))
    out["schedule"] = [list(r) for r in rows]
    out["end_to_end_fidelity"] = rows[-1][4]
    return out


def run(config: SimConfig, workers: int = 1, backend: str | None = None) -> SimReport:
    """Run every trial of ``config``; failed trials are recorded, not raised."""
    if workers < 1:
        raise ConfigError("workers must be >= 1", "workers")
    metadata = {
        "version": __version__,
        "seed": config.seed,
        "generator": GENERATOR_NAME,
        "scenario": config.scenario.value,
    }
    if not config.scenario.stochastic:
        return SimReport(config, [], aggregate([]), metadata, _plan(config))
    if config.seed is None:
        raise ConfigError(f"scenario {config.scenario.value} needs a seed", "seed")
    trial = _Trials(config, backend)
    n = config.trials
    if workers == 1:
        records = [trial(i) for i in range(n)]
    else:
        size = max(1, -(-n // (workers * 4)))
        chunks = [range(a, min(a + size, n)) for a in range(0, n, size)]
        with ThreadPoolExecutor(workers) as pool:
            parts = pool.map(lambda r: [trial(i) for i in r], chunks)
            records = [rec for part in parts for rec in part]
    return SimReport(config, records, aggregate(records), metadata)


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OutputError(exc.strerror or str(exc), os.fspath(path)) from exc


def companion(path: str | os.PathLike, kind: str) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}.{kind}")


def emit_csv(report: SimReport, path: str | os.PathLike) -> list[Path]:
    """Write the per-trial CSV and its companions; returns the paths written."""
    path = Path(path)
    written = [path]
    _write_rows(path, CSV_COLUMNS, (r.row() for r in report.records))
    if report.config.scenario is Scenario.PURIFY:
        tpath = companion(path, "trajectory.csv")

        def steps():
            for r in report.records:
                resets = set(r.reset_steps or ())
                for k, f in enumerate(r.trajectory or ()):
                    yield r.trial, k, f, int(k in resets)

        _write_rows(tpath, TRAJECTORY_COLUMNS, steps())
        written.append(tpath)
    if report.plan:
        spath = companion(path, "schedule.csv")
        _write_rows(spath, SCHEDULE_COLUMNS, report.plan["schedule"])
        written.append(spath)
    summary = {
        "config": report.config.to_dict(),
        "metadata": report.metadata,
        "aggregates": report.aggregates,
        "failures": {str(r.trial): r.status for r in report.failures},
        "plan": report.plan,
    }
    jpath = companion(path, "summary.json")
    try:
        jpath.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(exc.strerror or str(exc), os.fspath(jpath)) from exc
    written.append(jpath)
    return written


def read_csv(path: str | os.PathLike) -> list[TrialRecord]:
    """Parse a per-trial CSV written by :func:`emit_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [
        TrialRecord(
            int(r["trial"]), int(r["attempts"]), int(r["steps"]), float(r["final_fidelity"]),
            int(r["resets"]), float(r["elapsed_channel_time"]),
        )
        for r in rows
    ]
