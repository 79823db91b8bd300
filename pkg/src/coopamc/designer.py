"""Switching-threshold design and the target-PER split optimizers.

Thresholds are designed top-down: the highest mode's threshold is solved
against the open upper interval first, then each lower mode against the
interval capped by the threshold above it.  Each solve is a bisection on
the predicate "conditional average PER <= target", so the returned
threshold always sits on the feasible side; a mode whose average PER is
below the target even at the PER-fit cutoff is clamped there and recorded.

The optimizers sweep the source-link target PER over a logarithmic grid,
derive the relay-link (or retransmission) target from the loss budget, and
keep the efficiency argmax.  Ties within 1e-12 resolve to the smallest
target, which makes results deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytics import (
    AllOutageError, LinkDesign, RelayLinkModel, eps_bar, eta_amc_only,
    eta_conventional, eta_coop_nr1, eta_fixed, eta_lmsc,
    eta_rd_convention_gap, outage_mode_avg_per, per_mass, plr_amc_only,
    plr_conventional, plr_coop_nr1, plr_fixed, plr_lmsc, plr_slowfade,
    eta_slowfade,
)
from .channels import SnrDistribution
from .modes import AmcMode, ModeSet

__all__ = [
    "BracketingError", "InfeasibleDesignError", "DesignedLink",
    "DesignOutcome", "FixedDesignOutcome", "design_thresholds",
    "design_slowfade", "target_per_upper_bound", "solve_rd_target",
    "solve_rd_target_lmsc", "optimize_coop", "optimize_lmsc",
    "optimize_conventional", "optimize_fixed", "design_amc_only",
]

_GAMMA_CEILING = 1e15      # bracket growth limit for the top mode
_TIE_EPS = 1e-12


class BracketingError(RuntimeError):
    """A threshold root could not be bracketed; carries the bracket state."""


class InfeasibleDesignError(RuntimeError):
    """No point of the target grid admits a feasible design."""


@dataclass(frozen=True)
class DesignedLink:
    """A designed link plus which modes could not meet the target exactly."""

    link: LinkDesign
    target: float
    clamped: tuple = ()     # modes pinned at the PER-fit cutoff (achieved < target)
    collapsed: tuple = ()   # modes left with zero probability mass


@dataclass
class DesignOutcome:
    """Result of one optimizer run at a single mean-SNR point."""

    scheme: str
    sd: DesignedLink
    rd: DesignedLink | None
    p_t_sd: float
    p_t_rd: float | None
    eta: float
    plr: float
    extras: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)


@dataclass
class FixedDesignOutcome:
    """Result of the fixed rate-pair enumeration."""

    scheme: str
    feasible: bool
    n: int | None
    m: int | None
    eta: float
    plr: float | None
    pairs: list = field(default_factory=list)


def _avg_per(dist: SnrDistribution, mode: AmcMode, lo: float, hi: float):
    """Conditional average PER on [lo, hi) or None when the mass is zero."""
    mass = dist.interval_prob(lo, hi)
    if mass <= 0.0:
        return None
    return min(1.0, per_mass(dist, lo, hi, mode) / mass)


def _solve_threshold(dist: SnrDistribution, mode: AmcMode, hi_edge: float,
                     target: float):
    """Smallest threshold in [cutoff, hi_edge] whose interval PER <= target.

    Returns (threshold, clamped, collapsed).  The bisection keeps the
    feasible endpoint, so the achieved average never exceeds the target.
    """
    lo = mode.fit_gamma_pl
    if lo >= hi_edge:
        return hi_edge, False, True

    def feasible(g: float) -> bool:
        avg = _avg_per(dist, mode, g, hi_edge)
        return avg is None or avg <= target

    if feasible(lo):
        collapsed = _avg_per(dist, mode, lo, hi_edge) is None
        return lo, not collapsed, collapsed

    if math.isfinite(hi_edge):
        hi = hi_edge
    else:
        hi = max(lo, 1.0)
        while not feasible(hi):
            hi *= 2.0
            if hi > _GAMMA_CEILING:
                raise BracketingError(
                    f"mode {mode.index}: average PER stays above {target} up to "
                    f"SNR {hi:.3e}")
    # Invariant: feasible(hi) is True, feasible(lo) is False.
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    collapsed = _avg_per(dist, mode, hi, hi_edge) is None
    return hi, False, collapsed


def _design(dist: SnrDistribution, ms: ModeSet, targets, curve_of) -> DesignedLink:
    """Top-down threshold design; ``curve_of`` maps a mode to the curve whose
    conditional average is driven to the mode's target."""
    n_modes = len(ms)
    thresholds = np.empty(n_modes)
    clamped, collapsed = [], []
    hi_edge = np.inf
    for i in range(n_modes - 1, -1, -1):
        mode = ms.modes[i]
        thr, clamp, empty = _solve_threshold(dist, curve_of(mode), hi_edge,
                                             targets[i])
        thresholds[i] = max(thr, mode.fit_gamma_pl)
        if clamp:
            clamped.append(mode.index)
        if empty:
            collapsed.append(mode.index)
        hi_edge = thresholds[i]
    link = LinkDesign(ms, thresholds, dist)
    return DesignedLink(link, float(targets[0]), tuple(reversed(clamped)),
                        tuple(reversed(collapsed)))


def design_thresholds(dist: SnrDistribution, ms: ModeSet,
                      p_target: float) -> DesignedLink:
    """Design switching thresholds so each mode's average PER hits the target.

    Modes whose average PER is below the target everywhere are clamped at
    their PER-fit cutoff (their achieved average is then below the target,
    which only helps the loss constraint).
    """
    if not 0.0 < p_target < 1.0:
        raise ValueError("target PER must lie in (0, 1)")
    return _design(dist, ms, [p_target] * len(ms), lambda m: m)


def design_slowfade(dist: SnrDistribution, ms: ModeSet,
                    p_loss: float) -> DesignedLink:
    """Thresholds for the repeat-on-same-channel scheme: drives the average
    of PER^2 (the per-mode loss rate) to the loss budget directly."""
    if not 0.0 < p_loss < 1.0:
        raise ValueError("loss target must lie in (0, 1)")

    def squared(m: AmcMode) -> AmcMode:
        return AmcMode(m.index, m.rate, m.fit_a ** 2, 2.0 * m.fit_g,
                       m.fit_gamma_pl)

    return _design(dist, ms, [p_loss] * len(ms), squared)


def design_amc_only(dist: SnrDistribution, ms: ModeSet,
                    p_loss: float) -> DesignedLink:
    """No-retransmission benchmark: a lost packet is any packet error, so
    the per-mode PER target is the loss budget itself."""
    return design_thresholds(dist, ms, p_loss)


def target_per_upper_bound(dist: SnrDistribution, ms: ModeSet) -> float:
    """Largest achievable per-mode average PER with thresholds at the
    PER-fit cutoffs; shrinks the search interval of the optimizers."""
    cutoffs = list(ms.gamma_pl) + [np.inf]
    best = None
    for i, mode in enumerate(ms.modes):
        avg = _avg_per(dist, mode, cutoffs[i], min(cutoffs[i + 1], np.inf))
        if avg is not None:
            best = avg if best is None else max(best, avg)
    if best is None:
        raise AllOutageError("no probability mass in any mode interval")
    return float(best)


def solve_rd_target(p_loss: float, p_t_sd: float, eps_bar_val: float):
    """Relay-link target PER from the loss budget; None when infeasible
    (the relay cannot make up for the decode failures)."""
    if eps_bar_val >= 1.0:
        return None
    num = p_loss - eps_bar_val * p_t_sd
    if num <= 0.0:
        return None
    return num / (p_t_sd * (1.0 - eps_bar_val))


def solve_rd_target_lmsc(p_loss: float, p_t_sd: float, p_out: float,
                         per0: float) -> float:
    """Relay-link target PER when the outage mode also transmits."""
    den = p_t_sd * (1.0 - p_out) + p_out * per0
    if den <= 0.0:
        raise ValueError("degenerate loss-budget denominator")
    return p_loss / den


def _target_grid(p_loss: float, hi: float, points: int) -> np.ndarray:
    if hi <= p_loss * (1.0 + 1e-12):
        raise InfeasibleDesignError(
            f"achievable target PER bound {hi:.3e} does not exceed the loss "
            f"budget {p_loss:.3e}")
    return np.geomspace(p_loss, hi, points + 2)[1:-1]


def _argmax_update(best, candidate):
    if best is None or candidate["eta"] > best["eta"] + _TIE_EPS:
        return candidate
    return best


def optimize_coop(sd_dist: SnrDistribution, rd_dist: SnrDistribution,
                  sr_snr: float | None, ms: ModeSet, p_loss: float,
                  grid_points: int = 200) -> DesignOutcome:
    """Grid search over the source-link target PER for the relay scheme.

    Each grid point designs the source link, derives the relay target from
    the loss budget and the relay-decode failure rate, designs the relay
    link, and scores the efficiency.  Infeasible points (negative relay
    target, or a target outside (0, 1)) are skipped but traced.
    """
    p_up = min(1.0, target_per_upper_bound(sd_dist, ms))
    grid = _target_grid(p_loss, p_up, grid_points)
    best = None
    trace = []
    for p_t_sd in grid:
        row = {"p_t_sd": float(p_t_sd), "feasible": False}
        trace.append(row)
        sd = design_thresholds(sd_dist, ms, float(p_t_sd))
        try:
            model_eps = eps_bar(RelayLinkModel(sd.link, sd.link, sr_snr, 1))
        except AllOutageError:
            row["reason"] = "all outage"
            continue
        p_t_rd = solve_rd_target(p_loss, float(p_t_sd), model_eps)
        if p_t_rd is None or not 0.0 < p_t_rd < 1.0:
            row["reason"] = "relay target infeasible"
            continue
        rd = design_thresholds(rd_dist, ms, p_t_rd)
        model = RelayLinkModel(sd.link, rd.link, sr_snr, 1)
        try:
            eta = eta_coop_nr1(model)
            plr = plr_coop_nr1(model)
        except AllOutageError:
            row["reason"] = "all outage"
            continue
        row.update(feasible=True, p_t_rd=p_t_rd, eta=eta, plr=plr,
                   eps_bar=model_eps, sd=sd, rd=rd)
        best = _argmax_update(best, row)
    if best is None:
        raise InfeasibleDesignError(
            "no feasible source/relay target split on the search grid")
    model = RelayLinkModel(best["sd"].link, best["rd"].link, sr_snr, 1)
    return DesignOutcome(
        scheme="coop_amc", sd=best["sd"], rd=best["rd"],
        p_t_sd=best["p_t_sd"], p_t_rd=best["p_t_rd"],
        eta=best["eta"], plr=best["plr"],
        extras={
            "eps_bar": best["eps_bar"],
            "p_up": p_up,
            "eta_rd_gap": eta_rd_convention_gap(model),
        },
        trace=[{k: v for k, v in row.items() if k not in ("sd", "rd")}
               for row in trace],
    )


def optimize_lmsc(sd_dist: SnrDistribution, rd_dist: SnrDistribution,
                  ms: ModeSet, p_loss: float,
                  grid_points: int = 200) -> DesignOutcome:
    """Relay-scheme search for the satellite setting: the outage interval
    transmits at the fallback rate, and the relay target absorbs both the
    outage-mode losses and the regular-mode budget."""
    if ms.outage_rate <= 0.0:
        raise ValueError("satellite scheme requires a positive outage rate")
    p_up = min(1.0, target_per_upper_bound(sd_dist, ms))
    grid = _target_grid(p_loss, p_up, grid_points)
    best = None
    trace = []
    for p_t_sd in grid:
        row = {"p_t_sd": float(p_t_sd), "feasible": False}
        trace.append(row)
        sd = design_thresholds(sd_dist, ms, float(p_t_sd))
        p_out = sd.link.p0
        per0 = outage_mode_avg_per(sd.link) if p_out > 0.0 else 0.0
        if per0 is None:
            per0 = 0.0
        try:
            p_t_rd = solve_rd_target_lmsc(p_loss, float(p_t_sd), p_out, per0)
        except ValueError:
            row["reason"] = "degenerate denominator"
            continue
        if not 0.0 < p_t_rd < 1.0:
            row["reason"] = "relay target infeasible"
            continue
        rd = design_thresholds(rd_dist, ms, p_t_rd)
        model = RelayLinkModel(sd.link, rd.link, None, 1)
        try:
            eta = eta_lmsc(model)
            plr = plr_lmsc(model)
        except AllOutageError:
            row["reason"] = "all outage"
            continue
        row.update(feasible=True, p_t_rd=p_t_rd, eta=eta, plr=plr,
                   p_out=p_out, per0=per0, sd=sd, rd=rd)
        best = _argmax_update(best, row)
    if best is None:
        raise InfeasibleDesignError(
            "no feasible source/relay target split on the search grid")
    model = RelayLinkModel(best["sd"].link, best["rd"].link, None, 1)
    return DesignOutcome(
        scheme="lmsc_coop", sd=best["sd"], rd=best["rd"],
        p_t_sd=best["p_t_sd"], p_t_rd=best["p_t_rd"],
        eta=best["eta"], plr=best["plr"],
        extras={
            "p_out": best["p_out"],
            "per0": best["per0"],
            "p_up": p_up,
            "eta_rd_gap": eta_rd_convention_gap(model),
        },
        trace=[{k: v for k, v in row.items() if k not in ("sd", "rd")}
               for row in trace],
    )


def optimize_conventional(dist: SnrDistribution, ms: ModeSet, p_loss: float,
                          grid_points: int = 200) -> DesignOutcome:
    """Split the loss budget between the first transmission and the single
    retransmission of source-only ARQ.

    The equal-split point (both targets at sqrt of the budget) is always
    included in the candidate set and reported as the baseline, so the
    optimum can never fall below it.
    """
    p_up = min(1.0, target_per_upper_bound(dist, ms))
    equal_target = math.sqrt(p_loss)
    grid = sorted(set(float(x) for x in _target_grid(p_loss, p_up, grid_points))
                  | {equal_target})
    best = None
    equal_row = None
    trace = []
    for p_t in grid:
        row = {"p_t_sd": p_t, "feasible": False}
        trace.append(row)
        p_t_r = p_loss / p_t
        if not 0.0 < p_t_r < 1.0:
            row["reason"] = "retransmission target infeasible"
            continue
        tx = design_thresholds(dist, ms, p_t)
        rtx = design_thresholds(dist, ms, p_t_r)
        try:
            eta = eta_conventional(tx.link, rtx.link, 1)
            plr = plr_conventional(tx.link, rtx.link)
        except AllOutageError:
            row["reason"] = "all outage"
            continue
        row.update(feasible=True, p_t_rd=p_t_r, eta=eta, plr=plr, sd=tx, rd=rtx)
        if abs(p_t - equal_target) < 1e-15:
            equal_row = row
        best = _argmax_update(best, row)
    if best is None:
        raise InfeasibleDesignError("no feasible target split on the grid")
    return DesignOutcome(
        scheme="conventional_amc", sd=best["sd"], rd=best["rd"],
        p_t_sd=best["p_t_sd"], p_t_rd=best["p_t_rd"],
        eta=best["eta"], plr=best["plr"],
        extras={
            "p_up": p_up,
            "eta_equal_target": equal_row["eta"] if equal_row else None,
            "plr_equal_target": equal_row["plr"] if equal_row else None,
        },
        trace=[{k: v for k, v in row.items() if k not in ("sd", "rd")}
               for row in trace],
    )


def optimize_fixed(ms: ModeSet, sd_dist: SnrDistribution,
                   rd_dist: SnrDistribution, sr_snr: float | None,
                   p_loss: float, equal_rate: bool = False) -> FixedDesignOutcome:
    """Enumerate fixed rate pairs and keep the best loss-feasible one.

    Returns an infeasible outcome (efficiency 0) when no pair meets the
    budget, which is the below-power-threshold regime of the fixed scheme.
    """
    n_modes = len(ms)
    pairs = []
    best = None
    for n in range(1, n_modes + 1):
        for m in range(1, n_modes + 1):
            if equal_rate and n != m:
                continue
            plr = plr_fixed(ms, n, m, sd_dist, rd_dist, sr_snr)
            eta = eta_fixed(ms, n, m, sd_dist, rd_dist, sr_snr)
            ok = plr <= p_loss
            pairs.append({"n": n, "m": m, "eta": eta, "plr": plr, "feasible": ok})
            if ok and (best is None or eta > best["eta"] + _TIE_EPS):
                best = pairs[-1]
    scheme = "fixed_coop_equal_rate" if equal_rate else "fixed_coop"
    if best is None:
        return FixedDesignOutcome(scheme, False, None, None, 0.0, None, pairs)
    return FixedDesignOutcome(scheme, True, best["n"], best["m"],
                              best["eta"], best["plr"], pairs)
