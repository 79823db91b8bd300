"""Sweep orchestration: designs, analytic evaluation and simulation per point.

Keeps the CLI thin: everything here is plain library code that tests drive
directly.  A sweep produces one ``PointRecord`` per swept mean SNR; records
carry the designed thresholds so a later ``simulate`` run can rebuild the
exact link models from the designs file without re-optimizing.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytics import (LinkDesign, RelayLinkModel, eta_amc_only,
                        plr_amc_only, eta_slowfade, plr_slowfade)
from .designer import (DesignOutcome, FixedDesignOutcome,
                       InfeasibleDesignError, design_amc_only,
                       design_slowfade, optimize_conventional, optimize_coop,
                       optimize_fixed, optimize_lmsc)
from .scenario import Scenario
from .simulator import (SimConfig, SimResult, run, run_conventional,
                        run_fixed, run_slowfade)

__all__ = ["PointRecord", "design_point", "simulate_point", "run_sweep"]


@dataclass
class PointRecord:
    """Everything known about one sweep point, analytic and simulated."""

    p_bar_db: float
    scheme: str
    feasible: bool
    reason: str | None = None
    eta: float | None = None
    plr: float | None = None
    p_t_sd: float | None = None
    p_t_rd: float | None = None
    eta_equal_target: float | None = None
    eta_rd_gap: float | None = None
    rate_index_sd: int | None = None
    rate_index_rd: int | None = None
    clamped_sd: tuple = ()
    clamped_rd: tuple = ()
    sd_thresholds: tuple = ()
    rd_thresholds: tuple = ()
    sim: SimResult | None = None
    extras: dict = field(default_factory=dict)


def _point_seed(master_seed: int, index: int) -> int:
    state = np.random.SeedSequence([np.uint64(master_seed & (2**64 - 1)), index])
    return int(state.generate_state(1, np.uint64)[0])


def design_point(scenario: Scenario, p_bar_db: float,
                 grid_points: int | None = None) -> PointRecord:
    """Run the scheme's designer/optimizer at one sweep point."""
    grid = grid_points or scenario.grid_points
    ms = scenario.mode_set
    p_loss = scenario.p_loss
    sd = scenario.sd_dist(p_bar_db)
    rd = scenario.rd_dist(p_bar_db)
    sr = scenario.sr_snr(p_bar_db)
    rec = PointRecord(p_bar_db=p_bar_db, scheme=scenario.scheme, feasible=False)

    try:
        if scenario.scheme in ("coop_amc", "lmsc_coop"):
            if scenario.scheme == "coop_amc":
                out = optimize_coop(sd, rd, sr, ms, p_loss, grid)
            else:
                out = optimize_lmsc(sd, rd, ms, p_loss, grid)
            _fill_from_outcome(rec, out)
        elif scenario.scheme == "conventional_amc":
            out = optimize_conventional(sd, ms, p_loss, grid)
            _fill_from_outcome(rec, out)
        elif scenario.scheme == "slowfade_conventional":
            d = design_slowfade(sd, ms, p_loss)
            rec.feasible = True
            rec.eta = eta_slowfade(d.link)
            rec.plr = plr_slowfade(d.link)
            rec.clamped_sd = d.clamped
            rec.sd_thresholds = tuple(float(x) for x in d.link.thresholds)
        elif scenario.scheme == "amc_only":
            d = design_amc_only(sd, ms, p_loss)
            rec.feasible = True
            rec.eta = eta_amc_only(d.link)
            rec.plr = plr_amc_only(d.link)
            rec.clamped_sd = d.clamped
            rec.sd_thresholds = tuple(float(x) for x in d.link.thresholds)
        elif scenario.scheme in ("fixed_coop", "fixed_coop_equal_rate", "lmsc_fixed"):
            equal = scenario.scheme == "fixed_coop_equal_rate"
            out = optimize_fixed(ms, sd, rd, sr, p_loss, equal_rate=equal)
            rec.feasible = out.feasible
            rec.eta = out.eta
            rec.plr = out.plr
            rec.rate_index_sd = out.n
            rec.rate_index_rd = out.m
            if not out.feasible:
                rec.reason = "no loss-feasible rate pair"
        else:
            raise ValueError(f"unknown scheme {scenario.scheme!r}")
    except InfeasibleDesignError as exc:
        rec.feasible = False
        rec.reason = str(exc)
    return rec


def _fill_from_outcome(rec: PointRecord, out: DesignOutcome):
    rec.feasible = True
    rec.eta = out.eta
    rec.plr = out.plr
    rec.p_t_sd = out.p_t_sd
    rec.p_t_rd = out.p_t_rd
    rec.clamped_sd = out.sd.clamped
    rec.clamped_rd = out.rd.clamped if out.rd else ()
    rec.sd_thresholds = tuple(float(x) for x in out.sd.link.thresholds)
    rec.rd_thresholds = tuple(float(x) for x in out.rd.link.thresholds) if out.rd else ()
    rec.eta_equal_target = out.extras.get("eta_equal_target")
    rec.eta_rd_gap = out.extras.get("eta_rd_gap")
    rec.extras.update({k: v for k, v in out.extras.items()
                       if isinstance(v, (int, float, str, type(None)))})


def simulate_point(scenario: Scenario, rec: PointRecord, frames: int,
                   seed: int, point_index: int, workers: int = 1) -> SimResult | None:
    """Monte Carlo run for an already-designed point; None when infeasible
    (nothing to simulate) except for the fixed scheme, which has no design."""
    if not rec.feasible:
        return None
    ms = scenario.mode_set
    sd = scenario.sd_dist(rec.p_bar_db)
    rd = scenario.rd_dist(rec.p_bar_db)
    sr = scenario.sr_snr(rec.p_bar_db)
    cfg = SimConfig(frames=frames, seed=_point_seed(seed, point_index),
                    rd_sampling=scenario.rd_sampling, workers=workers)

    if scenario.scheme in ("coop_amc", "lmsc_coop", "amc_only"):
        sd_link = LinkDesign(ms, np.array(rec.sd_thresholds), sd)
        if scenario.scheme == "amc_only":
            model = RelayLinkModel(sd_link, sd_link, None, 0)
            return run(model, cfg)
        rd_link = LinkDesign(ms, np.array(rec.rd_thresholds), rd)
        model = RelayLinkModel(sd_link, rd_link, sr, scenario.nr)
        return run(model, cfg, lmsc=scenario.scheme == "lmsc_coop")
    if scenario.scheme == "conventional_amc":
        tx = LinkDesign(ms, np.array(rec.sd_thresholds), sd)
        rtx = LinkDesign(ms, np.array(rec.rd_thresholds), sd)
        return run_conventional(tx, rtx, scenario.nr, cfg)
    if scenario.scheme == "slowfade_conventional":
        link = LinkDesign(ms, np.array(rec.sd_thresholds), sd)
        return run_slowfade(link, cfg)
    if scenario.scheme in ("fixed_coop", "fixed_coop_equal_rate", "lmsc_fixed"):
        return run_fixed(ms, rec.rate_index_sd, rec.rate_index_rd, sd, rd, sr, cfg)
    raise ValueError(f"unknown scheme {scenario.scheme!r}")


def run_sweep(scenario: Scenario, *, simulate: bool = False,
              frames: int | None = None, seed: int | None = None,
              grid_points: int | None = None, workers: int = 1) -> list:
    """Design (and optionally simulate) every sweep point.

    Points are dispatched to a thread pool when ``workers > 1``; results are
    assembled in sweep order, so the report is identical for any degree of
    parallelism.
    """
    frames = scenario.frames if frames is None else frames
    seed = scenario.seed if seed is None else seed

    def one(item):
        idx, p_bar = item
        rec = design_point(scenario, p_bar, grid_points)
        if simulate:
            rec.sim = simulate_point(scenario, rec, frames, seed, idx,
                                     workers=1)
        return rec

    items = list(enumerate(scenario.p_bar_sweep_db))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, items))
    return [one(it) for it in items]
