"""Closed-form spectral efficiency and packet-loss rate for every scheme.

Everything here is a pure function of per-mode interval probabilities and
conditional average PERs, which a ``LinkDesign`` computes once at
construction.  Mode indices follow the convention used throughout: mode 0
is the outage interval below the first threshold, modes 1..N carry data.

Two retransmission-weighting conventions coexist deliberately.  The exact
closed forms weight each relay attempt by the unnormalized mode
probabilities (outage mass on the relay link simply drops out of the sums),
while the loss-rate forms condition each relay draw on non-outage.  Both
are implemented as written; ``eta_rd_convention_gap`` reports the exact
difference so simulation checks can budget for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .channels import SnrDistribution
from .modes import AmcMode, ModeSet, per_instantaneous

__all__ = [
    "AllOutageError", "EvaluationBudgetError", "LinkDesign", "RelayLinkModel",
    "Metrics", "mode_probability", "mode_avg_per", "outage_mode_avg_per",
    "eps_n", "eps_bar", "eta_coop", "eta_coop_nr1", "plr_coop",
    "plr_coop_nr1", "eta_rd_convention_gap", "eta_conventional",
    "plr_conventional", "eta_slowfade", "plr_slowfade", "eta_fixed",
    "plr_fixed", "fixed_avg_per", "eta_lmsc", "plr_lmsc", "eta_amc_only",
    "plr_amc_only", "select_mode",
]

DEFAULT_TERM_BUDGET = 10_000_000


class AllOutageError(ValueError):
    """Raised when a weighted average conditions on an empty non-outage set."""


class EvaluationBudgetError(RuntimeError):
    """Raised when the nested retransmission sums would exceed the term budget."""


def per_mass(dist: SnrDistribution, lo: float, hi: float, mode: AmcMode) -> float:
    """Unnormalized integral of the instantaneous PER of ``mode`` on [lo, hi).

    Splits at the fit cutoff (PER is 1 below it) and lets the distribution
    clamp the exponential branch, so this matches ``per_instantaneous``
    pointwise for every law including atomic ones.
    """
    mid = min(max(lo, mode.fit_gamma_pl), hi)
    out = 0.0
    if mid > lo:
        out += dist.interval_prob(lo, mid)
    if hi > mid:
        out += dist.per_integral(mid, hi, mode.fit_a, mode.fit_g)
    return out


def select_mode(thresholds: np.ndarray, gamma) -> np.ndarray:
    """Map SNR to mode index 0..N given thresholds for modes 1..N."""
    return np.searchsorted(thresholds, gamma, side="right")


@dataclass(frozen=True)
class LinkDesign:
    """Switching thresholds for one link plus cached per-mode statistics."""

    mode_set: ModeSet
    thresholds: np.ndarray
    dist: SnrDistribution
    p0: float = field(init=False)
    p: np.ndarray = field(init=False)          # P_n, n = 1..N
    per_bar: np.ndarray = field(init=False)    # conditional PER, nan if P_n = 0

    def __post_init__(self):
        thr = np.asarray(self.thresholds, dtype=float)
        n_modes = len(self.mode_set)
        if thr.shape != (n_modes,):
            raise ValueError(f"expected {n_modes} thresholds, got {thr.shape}")
        if (np.diff(thr) < 0).any():
            raise ValueError("thresholds must be non-decreasing")
        cutoffs = self.mode_set.gamma_pl
        if (thr < cutoffs - 1e-12).any():
            raise ValueError("thresholds must not fall below the PER-fit cutoffs")
        object.__setattr__(self, "thresholds", thr)

        edges = np.concatenate([thr, [np.inf]])
        p = np.empty(n_modes)
        per = np.full(n_modes, np.nan)
        for i, mode in enumerate(self.mode_set.modes):
            p[i] = self.dist.interval_prob(edges[i], edges[i + 1])
            if p[i] > 0.0:
                per[i] = min(1.0, per_mass(self.dist, edges[i], edges[i + 1], mode) / p[i])
        object.__setattr__(self, "p0", self.dist.interval_prob(0.0, thr[0]) if thr[0] > 0 else 0.0)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "per_bar", per)

    @property
    def usable_mass(self) -> float:
        return float(self.p.sum())

    def weighted_per(self) -> float:
        """Average PER conditioned on a non-outage mode being selected."""
        mask = self.p > 0
        total = self.p[mask].sum()
        if total <= 0.0:
            raise AllOutageError("no probability mass outside the outage mode")
        return float((self.per_bar[mask] * self.p[mask]).sum() / total)


@dataclass(frozen=True)
class RelayLinkModel:
    """Source-destination and relay-destination designs plus the relay feed.

    ``sr_snr`` is the constant source-relay SNR; ``None`` marks the
    error-free relay feed used by the satellite scheme.
    """

    sd: LinkDesign
    rd: LinkDesign
    sr_snr: float | None
    nr: int

    def __post_init__(self):
        if self.nr < 0:
            raise ValueError("retransmission limit must be >= 0")
        if self.sr_snr is not None and self.sr_snr < 0:
            raise ValueError("source-relay SNR must be >= 0")


@dataclass(frozen=True)
class Metrics:
    eta: float
    plr: float
    per_mode: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


def mode_probability(link: LinkDesign, n: int) -> float:
    """P(mode n selected), n = 0..N."""
    if n == 0:
        return link.p0
    if not 1 <= n <= len(link.mode_set):
        raise IndexError(f"mode index {n} outside 0..{len(link.mode_set)}")
    return float(link.p[n - 1])


def mode_avg_per(link: LinkDesign, n: int):
    """Conditional average PER of mode n, or None if the mode is never used."""
    if not 1 <= n <= len(link.mode_set):
        raise IndexError(f"mode index {n} outside 1..{len(link.mode_set)}")
    if link.p[n - 1] <= 0.0:
        return None
    return float(link.per_bar[n - 1])


def outage_mode_avg_per(link: LinkDesign):
    """Average PER of the outage interval [0, gamma_1) under mode 1's curve.

    Satellite scheme only: the outage mode transmits at the fallback rate
    with the lowest mode's error curve (PER = 1 below its cutoff).
    Returns None when the outage interval carries no probability mass.
    """
    gamma1 = float(link.thresholds[0])
    if gamma1 <= 0.0:
        raise ValueError("outage interval is empty (first threshold <= 0)")
    mass = link.dist.interval_prob(0.0, gamma1)
    if mass <= 0.0:
        return None
    mode1 = link.mode_set.modes[0]
    return min(1.0, per_mass(link.dist, 0.0, gamma1, mode1) / mass)


def eps_n(model: RelayLinkModel, n: int) -> float:
    """PER of the source-relay feed in mode n (0 when error-free)."""
    if model.sr_snr is None:
        return 0.0
    return float(per_instantaneous(model.sd.mode_set.mode(n), model.sr_snr))


def _eps_vector(model: RelayLinkModel) -> np.ndarray:
    n_modes = len(model.sd.mode_set)
    return np.array([eps_n(model, n) for n in range(1, n_modes + 1)])


def eps_bar(model: RelayLinkModel) -> float:
    """Mode-probability-weighted relay decode failure rate."""
    p = model.sd.p
    total = p.sum()
    if total <= 0.0:
        raise AllOutageError("no probability mass outside the outage mode")
    return float((_eps_vector(model) * p).sum() / total)


def _masked(link: LinkDesign):
    """(P, PER) with PER zeroed where P = 0 so products are well defined."""
    per = np.where(link.p > 0, np.nan_to_num(link.per_bar), 0.0)
    return link.p, per


def _rd_weights(link: LinkDesign, conditioned: bool) -> np.ndarray:
    p, _ = _masked(link)
    if not conditioned:
        return p
    total = p.sum()
    if total <= 0.0:
        raise AllOutageError("relay link has no non-outage mass to condition on")
    return p / total


def _check_budget(n_modes: int, nr: int, budget: int):
    if n_modes ** (nr + 1) > budget:
        raise EvaluationBudgetError(
            f"{n_modes}^{nr + 1} retransmission tuples exceed the budget of {budget}")


def eta_coop(model: RelayLinkModel, rd_conditioned: bool = False,
             term_budget: int = DEFAULT_TERM_BUDGET) -> float:
    """Average spectral efficiency of the cooperative truncated-ARQ scheme.

    Exact nested-sum evaluation for any retransmission limit; the cost is
    N^(nr+1) terms, guarded by ``term_budget``.
    """
    ms = model.sd.mode_set
    n_modes = len(ms)
    _check_budget(n_modes, model.nr, term_budget)
    rates = ms.rates
    p_sd, per_sd = _masked(model.sd)
    if model.nr == 0:
        # No relay attempts: every first transmission costs 1/R_n regardless
        # of outcome, which collapses to the AMC-only sum.
        return float((rates * p_sd).sum())
    eps = _eps_vector(model)
    total = float((rates * (1.0 - (1.0 - eps) * per_sd) * p_sd).sum())

    w_rd = _rd_weights(model.rd, rd_conditioned)
    _, per_rd = _masked(model.rd)
    engaged = (1.0 - eps) * per_sd * p_sd

    for n in range(n_modes):
        if engaged[n] == 0.0:
            continue
        base_l = 1.0 / rates[n]
        for tup_len in range(1, model.nr + 1):
            terminal = tup_len == model.nr
            for tup in product(range(n_modes), repeat=tup_len):
                weight = engaged[n]
                inv_l = base_l
                for k, m in enumerate(tup):
                    inv_l += 1.0 / rates[m]
                    last = k == tup_len - 1
                    if last:
                        weight *= w_rd[m] if terminal else (1.0 - per_rd[m]) * w_rd[m]
                    else:
                        weight *= per_rd[m] * w_rd[m]
                total += weight / inv_l
    return total


def eta_coop_nr1(model: RelayLinkModel, rd_conditioned: bool = False) -> float:
    """Single-retransmission specialization of the cooperative efficiency."""
    if model.nr != 1:
        raise ValueError("this form holds for exactly one relay retransmission")
    ms = model.sd.mode_set
    rates = ms.rates
    p_sd, per_sd = _masked(model.sd)
    eps = _eps_vector(model)
    w_rd = _rd_weights(model.rd, rd_conditioned)

    first = (rates * (1.0 - (1.0 - eps) * per_sd) * p_sd).sum()
    combine = rates[:, None] * rates[None, :] / (rates[:, None] + rates[None, :])
    engaged = (1.0 - eps) * per_sd * p_sd
    second = (combine * engaged[:, None] * w_rd[None, :]).sum()
    return float(first + second)


def eta_rd_convention_gap(model: RelayLinkModel,
                          term_budget: int = DEFAULT_TERM_BUDGET) -> float:
    """Exact efficiency difference between the two relay-weighting conventions.

    Zero whenever the relay link has no outage mass.
    """
    if model.nr == 0:
        return 0.0
    if model.rd.usable_mass >= 1.0 - 1e-15:
        return 0.0
    return abs(eta_coop(model, rd_conditioned=True, term_budget=term_budget)
               - eta_coop(model, rd_conditioned=False, term_budget=term_budget))


def plr_coop(model: RelayLinkModel) -> float:
    """Average PLR for any retransmission limit.

    Relay draws are conditioned on non-outage; the first transmission is
    conditioned on the source actually transmitting.
    """
    w_sd = model.sd.weighted_per()
    p_sd, per_sd = _masked(model.sd)
    total_sd = p_sd.sum()
    eps = _eps_vector(model)
    w_eps = float((eps * per_sd * p_sd).sum() / total_sd)
    if model.nr == 0:
        return w_sd
    w_rd = model.rd.weighted_per()
    return w_eps + (w_sd - w_eps) * w_rd ** model.nr


def plr_coop_nr1(model: RelayLinkModel) -> float:
    """Single-retransmission PLR in its product-plus-residual form."""
    if model.nr != 1:
        raise ValueError("this form holds for exactly one relay retransmission")
    w_sd = model.sd.weighted_per()
    w_rd = model.rd.weighted_per()
    p_sd, per_sd = _masked(model.sd)
    eps = _eps_vector(model)
    w_eps = float((eps * per_sd * p_sd).sum() / p_sd.sum())
    return w_sd * w_rd + w_eps * (1.0 - w_rd)


def eta_conventional(tx: LinkDesign, rtx: LinkDesign, nr: int,
                     rtx_conditioned: bool = False,
                     term_budget: int = DEFAULT_TERM_BUDGET) -> float:
    """Efficiency of source-only ARQ with per-attempt re-adaptation.

    The first attempt uses the ``tx`` design, every retransmission the
    ``rtx`` design (they may differ, which is the distinct-target scheme).
    """
    ms = tx.mode_set
    n_modes = len(ms)
    _check_budget(n_modes, nr, term_budget)
    rates = ms.rates
    p1, per1 = _masked(tx)
    p2, per2 = _masked(rtx)
    if rtx_conditioned:
        total2 = p2.sum()
        if total2 <= 0.0:
            raise AllOutageError("retransmission design has no usable mass")
        p2 = p2 / total2

    if nr == 0:
        return float((rates * p1).sum())

    total = 0.0
    for tup_len in range(1, nr + 2):
        terminal = tup_len == nr + 1
        for tup in product(range(n_modes), repeat=tup_len):
            weight = 1.0
            inv_l = 0.0
            for k, m in enumerate(tup):
                pk, perk = (p1[m], per1[m]) if k == 0 else (p2[m], per2[m])
                inv_l += 1.0 / rates[m]
                last = k == tup_len - 1
                if last:
                    weight *= pk if terminal else (1.0 - perk) * pk
                else:
                    weight *= perk * pk
            if weight:
                total += weight / inv_l
    return total


def plr_conventional(tx: LinkDesign, rtx: LinkDesign, nr: int = 1) -> float:
    """PLR of the conventional scheme: both factors conditioned on transmit."""
    return tx.weighted_per() * rtx.weighted_per() ** nr


def eta_slowfade(link: LinkDesign) -> float:
    """Efficiency when the retransmission sees the same channel draw."""
    rates = link.mode_set.rates
    p, per = _masked(link)
    return float((rates * (1.0 - 0.5 * per) * p).sum())


def plr_slowfade(link: LinkDesign) -> float:
    """PLR with one repeat on an unchanged channel: E[PER^2] per mode.

    ``min(1, a e^{-g x})^2 = min(1, a^2 e^{-2g x})``, so the squared curve
    reuses the same clamped-exponential machinery.
    """
    edges = np.concatenate([link.thresholds, [np.inf]])
    total = link.p.sum()
    if total <= 0.0:
        raise AllOutageError("no probability mass outside the outage mode")
    acc = 0.0
    for i, mode in enumerate(link.mode_set.modes):
        if link.p[i] <= 0.0:
            continue
        sq = AmcMode(mode.index, mode.rate, mode.fit_a ** 2, 2.0 * mode.fit_g,
                     mode.fit_gamma_pl)
        acc += per_mass(link.dist, edges[i], edges[i + 1], sq)
    return float(acc / total)


def fixed_avg_per(dist: SnrDistribution, mode: AmcMode) -> float:
    """Average PER of a fixed-rate link over the full SNR range."""
    return min(1.0, per_mass(dist, 0.0, np.inf, mode))


def eta_fixed(ms: ModeSet, n: int, m: int, sd_dist: SnrDistribution,
              rd_dist: SnrDistribution, sr_snr: float | None) -> float:
    """Efficiency of the fixed rate pair (R_n source, R_m relay)."""
    mode_n, mode_m = ms.mode(n), ms.mode(m)
    per_sd = fixed_avg_per(sd_dist, mode_n)
    eps = 0.0 if sr_snr is None else float(per_instantaneous(mode_n, sr_snr))
    rn, rm = mode_n.rate, mode_m.rate
    return rn * (1.0 - (1.0 - eps) * rn / (rn + rm) * per_sd)


def plr_fixed(ms: ModeSet, n: int, m: int, sd_dist: SnrDistribution,
              rd_dist: SnrDistribution, sr_snr: float | None) -> float:
    """PLR of the fixed rate pair (single relay retransmission)."""
    mode_n, mode_m = ms.mode(n), ms.mode(m)
    per_sd = fixed_avg_per(sd_dist, mode_n)
    per_rd = fixed_avg_per(rd_dist, mode_m)
    eps = 0.0 if sr_snr is None else float(per_instantaneous(mode_n, sr_snr))
    return per_sd * per_rd + eps * per_sd * (1.0 - per_rd)


def eta_lmsc(model: RelayLinkModel, rd_conditioned: bool = False) -> float:
    """Efficiency of the satellite scheme: the outage mode transmits too.

    Requires an error-free relay feed and one retransmission; the outage
    interval carries the fallback rate with mode 1's error curve.
    """
    if model.sr_snr is not None:
        raise ValueError("satellite scheme assumes an error-free relay feed")
    if model.nr != 1:
        raise ValueError("closed form holds for one relay retransmission")
    ms = model.sd.mode_set
    rates = ms.rates
    p_sd, per_sd = _masked(model.sd)
    w_rd = _rd_weights(model.rd, rd_conditioned)

    total = float((rates * (1.0 - per_sd) * p_sd).sum())
    cross = rates[:, None] * rates[None, :] / (rates[:, None] + rates[None, :])
    total += float((cross * (per_sd * p_sd)[:, None] * w_rd[None, :]).sum())

    if model.sd.p0 > 0.0:
        r0 = ms.outage_rate
        if r0 <= 0.0:
            raise ValueError("outage-mode transmissions need a positive fallback rate")
        per0 = outage_mode_avg_per(model.sd)
        total += r0 * (1.0 - per0) * model.sd.p0
        total += float(((r0 * rates / (r0 + rates)) * w_rd).sum()) * per0 * model.sd.p0
    return total


def plr_lmsc(model: RelayLinkModel) -> float:
    """Satellite-scheme PLR: every frame transmits, so the source factor is
    unnormalized while the relay factor conditions on non-outage."""
    if model.sr_snr is not None:
        raise ValueError("satellite scheme assumes an error-free relay feed")
    p_sd, per_sd = _masked(model.sd)
    sd_factor = float((per_sd * p_sd).sum())
    if model.sd.p0 > 0.0:
        per0 = outage_mode_avg_per(model.sd)
        sd_factor += per0 * model.sd.p0
    return sd_factor * model.rd.weighted_per()


def eta_amc_only(link: LinkDesign) -> float:
    """Rate-adaptation-only efficiency (no retransmissions)."""
    return float((link.mode_set.rates * link.p).sum())


def plr_amc_only(link: LinkDesign) -> float:
    return link.weighted_per()
