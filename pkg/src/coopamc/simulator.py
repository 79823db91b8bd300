"""Packet-level Monte Carlo simulation of the retransmission protocols.

One packet per frame; the channel draw, the packet error coin, the relay
decode coin and every retransmission coin are drawn per frame from a
counter-based (Philox) stream.  Frames are processed in fixed-size blocks,
each block on its own stream spawned from the master seed, so results are
bit-identical regardless of how many worker threads execute the blocks.

The relay-link sampling policy is explicit because the closed forms are
ambiguous about relay outage: ``non_outage_conditioned`` redraws the relay
SNR from the truncated law (matching the loss-rate conditioning), while
``unconditional`` lets an outage draw silence the relay and lose the packet
at the symbol cost spent so far.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytics import LinkDesign, RelayLinkModel, select_mode
from .modes import ModeSet

__all__ = [
    "SimConfig", "SimResult", "run", "run_conventional", "run_slowfade",
    "run_fixed",
]

RD_CONDITIONED = "non_outage_conditioned"
RD_UNCONDITIONAL = "unconditional"


@dataclass(frozen=True)
class SimConfig:
    frames: int
    seed: int
    rd_sampling: str = RD_CONDITIONED
    block_size: int = 1 << 16
    workers: int = 1

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("need at least one frame")
        if self.rd_sampling not in (RD_CONDITIONED, RD_UNCONDITIONAL):
            raise ValueError(f"unknown rd_sampling policy {self.rd_sampling!r}")


@dataclass
class SimResult:
    eta_hat: float
    eta_se: float
    plr_hat: float
    plr_se: float
    frames: int
    transmitted: int
    lost: int
    outage_frames: int
    relay_engaged: int
    relay_silent: int
    retx_hist: tuple = ()
    extras: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        """True when the run is too short for meaningful standard errors."""
        return self.frames < 2 or not math.isfinite(self.eta_se)


class _Accum:
    """Associative per-block tallies; merge order is fixed by block index."""

    __slots__ = ("v_sum", "v2_sum", "frames", "transmitted", "lost",
                 "outage", "engaged", "silent", "hist")

    def __init__(self, nr: int):
        self.v_sum = 0.0
        self.v2_sum = 0.0
        self.frames = 0
        self.transmitted = 0
        self.lost = 0
        self.outage = 0
        self.engaged = 0
        self.silent = 0
        self.hist = np.zeros(nr + 1, dtype=np.int64)

    def add_block(self, values, transmitted, lost, outage, engaged, silent, m_counts):
        self.v_sum += float(values.sum())
        self.v2_sum += float((values * values).sum())
        self.frames += int(values.size)
        self.transmitted += int(transmitted.sum())
        self.lost += int(lost.sum())
        self.outage += int(outage.sum())
        self.engaged += int(engaged.sum())
        self.silent += int(silent.sum())
        self.hist += np.bincount(m_counts[transmitted], minlength=self.hist.size)

    def merge(self, other: "_Accum"):
        self.v_sum += other.v_sum
        self.v2_sum += other.v2_sum
        self.frames += other.frames
        self.transmitted += other.transmitted
        self.lost += other.lost
        self.outage += other.outage
        self.engaged += other.engaged
        self.silent += other.silent
        self.hist += other.hist

    def result(self) -> SimResult:
        n = self.frames
        mean = self.v_sum / n
        if n > 1:
            var = max(0.0, (self.v2_sum - n * mean * mean) / (n - 1))
            eta_se = math.sqrt(var / n)
        else:
            eta_se = math.nan
        if self.transmitted > 0:
            p = self.lost / self.transmitted
            plr_se = math.sqrt(max(0.0, p * (1.0 - p)) / self.transmitted) \
                if self.transmitted > 1 else math.nan
        else:
            p, plr_se = math.nan, math.nan
        return SimResult(
            eta_hat=mean, eta_se=eta_se, plr_hat=p, plr_se=plr_se,
            frames=n, transmitted=self.transmitted, lost=self.lost,
            outage_frames=self.outage, relay_engaged=self.engaged,
            relay_silent=self.silent, retx_hist=tuple(int(x) for x in self.hist))


def _curve(per_a, per_g, cutoff, gamma):
    per = np.minimum(1.0, per_a * np.exp(-per_g * gamma))
    return np.where(gamma < cutoff, 1.0, per)


def _mode_tables(ms: ModeSet):
    return ms.rates, ms.fit_a, ms.fit_g, ms.gamma_pl


def _draw_rd(rng, dist, n, thr0, conditioned):
    gamma = np.asarray(dist.sample(rng, n), dtype=float)
    if conditioned and thr0 > 0.0:
        bad = gamma < thr0
        while bad.any():
            gamma[bad] = dist.sample(rng, int(bad.sum()))
            bad = gamma < thr0
    return gamma


def _run_blocks(cfg: SimConfig, nr: int, kernel) -> SimResult:
    n_blocks = (cfg.frames + cfg.block_size - 1) // cfg.block_size
    children = np.random.SeedSequence(cfg.seed).spawn(n_blocks)
    sizes = [min(cfg.block_size, cfg.frames - i * cfg.block_size)
             for i in range(n_blocks)]

    def one(i: int) -> _Accum:
        rng = np.random.Generator(np.random.Philox(children[i]))
        acc = _Accum(nr)
        kernel(rng, sizes[i], acc)
        return acc

    total = _Accum(nr)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for acc in pool.map(one, range(n_blocks)):
                total.merge(acc)
    else:
        for i in range(n_blocks):
            total.merge(one(i))
    return total.result()


def run(model: RelayLinkModel, cfg: SimConfig, lmsc: bool = False) -> SimResult:
    """Simulate the cooperative scheme (or its satellite variant).

    Per frame: draw the source-link SNR, pick the mode, flip the packet
    error coin, flip the relay decode coin, then run up to ``nr`` relay
    attempts with fresh relay-link draws.  Outage frames transmit nothing
    (terrestrial) or fall back to the outage rate (satellite).
    """
    ms = model.sd.mode_set
    rates, fa, fg, cut = _mode_tables(ms)
    thr_sd = model.sd.thresholds
    thr_rd = model.rd.thresholds
    eps = np.array([0.0 if model.sr_snr is None else
                    float(_curve(fa[i], fg[i], cut[i], np.array(model.sr_snr)))
                    for i in range(len(ms))])
    conditioned = cfg.rd_sampling == RD_CONDITIONED
    r0 = ms.outage_rate
    if lmsc and r0 <= 0.0:
        raise ValueError("satellite runs need a positive outage rate")

    def kernel(rng, n, acc):
        g1 = np.asarray(model.sd.dist.sample(rng, n), dtype=float)
        mode = select_mode(thr_sd, g1)
        tx = np.ones(n, dtype=bool) if lmsc else mode >= 1
        midx = np.maximum(mode, 1) - 1
        rate_eff = np.where(mode >= 1, rates[midx], r0)
        per1 = _curve(fa[midx], fg[midx], cut[midx], g1)
        fail1 = rng.random(n) < per1
        decode_fail = rng.random(n) < eps[midx]

        inv_l = 1.0 / np.where(rate_eff > 0, rate_eff, 1.0)
        engaged = tx & fail1 & ~decode_fail
        active = engaged.copy()
        silent = np.zeros(n, dtype=bool)
        m_count = np.zeros(n, dtype=np.int64)

        for _ in range(model.nr):
            if not active.any():
                break
            g2 = _draw_rd(rng, model.rd.dist, n, thr_rd[0], conditioned)
            mode2 = select_mode(thr_rd, g2)
            if not conditioned:
                quiet = active & (mode2 == 0)
                silent |= quiet
                active &= ~quiet
            att = active
            m2 = np.maximum(mode2, 1) - 1
            inv_l[att] += 1.0 / rates[m2[att]]
            m_count[att] += 1
            per2 = _curve(fa[m2], fg[m2], cut[m2], g2)
            fail2 = rng.random(n) < per2
            active = att & fail2

        lost = (tx & fail1 & decode_fail) | active | silent
        values = np.where(tx, 1.0 / inv_l, 0.0)
        acc.add_block(values, tx, lost, mode == 0 if lmsc else ~tx,
                      engaged, silent, m_count)

    return _run_blocks(cfg, model.nr, kernel)


def run_conventional(tx_design: LinkDesign, rtx_design: LinkDesign, nr: int,
                     cfg: SimConfig) -> SimResult:
    """Source-only ARQ: each retransmission redraws the source-link SNR and
    re-adapts with the retransmission thresholds."""
    ms = tx_design.mode_set
    rates, fa, fg, cut = _mode_tables(ms)
    conditioned = cfg.rd_sampling == RD_CONDITIONED

    def kernel(rng, n, acc):
        g1 = np.asarray(tx_design.dist.sample(rng, n), dtype=float)
        mode = select_mode(tx_design.thresholds, g1)
        txm = mode >= 1
        midx = np.maximum(mode, 1) - 1
        per1 = _curve(fa[midx], fg[midx], cut[midx], g1)
        fail1 = rng.random(n) < per1

        inv_l = 1.0 / rates[midx]
        active = txm & fail1
        silent = np.zeros(n, dtype=bool)
        m_count = np.zeros(n, dtype=np.int64)

        for _ in range(nr):
            if not active.any():
                break
            g2 = _draw_rd(rng, rtx_design.dist, n, rtx_design.thresholds[0],
                          conditioned)
            mode2 = select_mode(rtx_design.thresholds, g2)
            if not conditioned:
                quiet = active & (mode2 == 0)
                silent |= quiet
                active &= ~quiet
            att = active
            m2 = np.maximum(mode2, 1) - 1
            inv_l[att] += 1.0 / rates[m2[att]]
            m_count[att] += 1
            per2 = _curve(fa[m2], fg[m2], cut[m2], g2)
            fail2 = rng.random(n) < per2
            active = att & fail2

        lost = active | silent
        values = np.where(txm, 1.0 / inv_l, 0.0)
        acc.add_block(values, txm, lost, ~txm, txm & fail1, silent, m_count)

    return _run_blocks(cfg, nr, kernel)


def run_slowfade(design: LinkDesign, cfg: SimConfig) -> SimResult:
    """Conventional ARQ with the channel frozen across the retransmission:
    one SNR draw decides the mode, two independent error coins decide loss."""
    ms = design.mode_set
    rates, fa, fg, cut = _mode_tables(ms)

    def kernel(rng, n, acc):
        g1 = np.asarray(design.dist.sample(rng, n), dtype=float)
        mode = select_mode(design.thresholds, g1)
        txm = mode >= 1
        midx = np.maximum(mode, 1) - 1
        per = _curve(fa[midx], fg[midx], cut[midx], g1)
        fail1 = rng.random(n) < per
        fail2 = rng.random(n) < per
        retried = txm & fail1
        lost = retried & fail2
        inv_l = np.where(retried, 2.0, 1.0) / rates[midx]
        values = np.where(txm, 1.0 / inv_l, 0.0)
        acc.add_block(values, txm, lost, ~txm, np.zeros(n, dtype=bool),
                      np.zeros(n, dtype=bool), retried.astype(np.int64))

    return _run_blocks(cfg, 1, kernel)


def run_fixed(ms: ModeSet, n_mode: int, m_mode: int, sd_dist, rd_dist,
              sr_snr: float | None, cfg: SimConfig) -> SimResult:
    """Fixed rate pair: no thresholds, every frame transmits at rate R_n and
    a failed frame gets one relay attempt at rate R_m."""
    mn, mm = ms.mode(n_mode), ms.mode(m_mode)
    eps = 0.0 if sr_snr is None else \
        float(_curve(mn.fit_a, mn.fit_g, mn.fit_gamma_pl, np.array(sr_snr)))

    def kernel(rng, n, acc):
        g1 = np.asarray(sd_dist.sample(rng, n), dtype=float)
        per1 = _curve(mn.fit_a, mn.fit_g, mn.fit_gamma_pl, g1)
        fail1 = rng.random(n) < per1
        decode_fail = rng.random(n) < eps
        engaged = fail1 & ~decode_fail

        g2 = np.asarray(rd_dist.sample(rng, n), dtype=float)
        per2 = _curve(mm.fit_a, mm.fit_g, mm.fit_gamma_pl, g2)
        fail2 = rng.random(n) < per2

        lost = (fail1 & decode_fail) | (engaged & fail2)
        inv_l = 1.0 / mn.rate + np.where(engaged, 1.0 / mm.rate, 0.0)
        values = 1.0 / inv_l
        tx = np.ones(n, dtype=bool)
        acc.add_block(values, tx, lost, ~tx, engaged,
                      np.zeros(n, dtype=bool), engaged.astype(np.int64))

    return _run_blocks(cfg, 1, kernel)
