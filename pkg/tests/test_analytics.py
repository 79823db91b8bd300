import math
import random

import numpy as np
import pytest
from scipy import integrate as sint

from coopamc.analytics import (AllOutageError, EvaluationBudgetError,
                               LinkDesign, RelayLinkModel, eps_bar, eps_n,
                               eta_amc_only, eta_conventional, eta_coop,
                               eta_coop_nr1, eta_fixed, eta_lmsc,
                               eta_rd_convention_gap, eta_slowfade,
                               mode_avg_per, mode_probability,
                               outage_mode_avg_per, plr_conventional,
                               plr_coop, plr_coop_nr1, plr_fixed, plr_lmsc,
                               plr_slowfade, fixed_avg_per)
from coopamc.channels import Discrete, Exponential, Lutz, LutzParams
from coopamc.designer import design_thresholds
from coopamc.modes import AmcMode, ModeSet

from oracles import enumerate_conventional, enumerate_coop

LN2 = math.log(2.0)


def atom_for_per(mode: AmcMode, per: float) -> float:
    """SNR at which the mode's fitted curve equals ``per`` exactly."""
    return math.log(mode.fit_a / per) / mode.fit_g


def single_mode_model(per_sd: float, per_rd: float, sr_snr=None, nr=1):
    mode = AmcMode(1, 1.0, 2.0, 1.0, LN2)
    ms = ModeSet((mode,))
    sd = LinkDesign(ms, np.array([LN2]), Discrete(((atom_for_per(mode, per_sd), 1.0),)))
    rd_atom = atom_for_per(mode, per_rd) if per_rd > 0 else 1000.0
    rd = LinkDesign(ms, np.array([LN2]), Discrete(((rd_atom, 1.0),)))
    return RelayLinkModel(sd, rd, sr_snr, nr)


def random_discrete_config(rng: random.Random, lmsc=False, max_modes=3,
                           max_atoms=4, max_nr=2):
    n_modes = rng.randint(1, max_modes)
    modes, rate, cutoff = [], 0.0, 0.0
    for i in range(1, n_modes + 1):
        rate += rng.uniform(0.3, 1.5)
        a = rng.uniform(0.8, 50.0)
        g = rng.uniform(0.2, 4.0)
        cutoff = max(cutoff * 1.3,
                     math.log(max(a, 1.00001)) / g * rng.uniform(0.5, 1.0))
        modes.append(AmcMode(i, rate, a, g, cutoff))
    ms = ModeSet(tuple(modes), 1080, modes[0].rate if lmsc else 0.0)

    def atoms(k):
        gs = sorted(rng.uniform(0.0, 12.0) for _ in range(k))
        ps = [rng.uniform(0.05, 1.0) for _ in range(k)]
        total = sum(ps)
        ps = [p / total for p in ps]
        ps[-1] = 1.0 - sum(ps[:-1])
        return tuple(zip(gs, ps))

    thresholds = []
    lo = 0.01 if lmsc else 0.0
    for m in modes:
        lo = max(m.fit_gamma_pl, lo * rng.uniform(1.0, 1.4) + rng.uniform(0.01, 0.5))
        thresholds.append(lo)
    sd_thr = np.array(thresholds)
    rd_thr = np.array(thresholds)
    nr = rng.randint(0, max_nr)
    sr = None if rng.random() < 0.4 else rng.uniform(0.0, 10.0)
    if lmsc:
        sr, nr = None, 1
    return (ms, atoms(rng.randint(1, max_atoms)), sd_thr,
            atoms(rng.randint(1, max_atoms)), rd_thr, sr, nr)


class TestLinkDesign:
    def test_mode_probability_single_atom(self):
        mode1 = AmcMode(1, 1.0, 2.0, 1.0, 0.5)
        mode2 = AmcMode(2, 2.0, 2.0, 0.5, 2.0)
        ms = ModeSet((mode1, mode2))
        link = LinkDesign(ms, np.array([0.5, 2.0]), Discrete(((3.0, 1.0),)))
        assert mode_probability(link, 2) == 1.0
        assert mode_probability(link, 1) == 0.0
        assert mode_probability(link, 0) == 0.0

    def test_mode_probability_exponential(self, single_mode_set):
        link = LinkDesign(single_mode_set, np.array([LN2]), Exponential(1.0))
        assert mode_probability(link, 1) == pytest.approx(0.5, abs=1e-14)

    def test_partition_sums_to_one(self, hiperlan_modes, lutz_sd_params):
        designed = design_thresholds(Lutz(lutz_sd_params).scaled(100.0),
                                     hiperlan_modes, 0.05)
        total = designed.link.p0 + designed.link.p.sum()
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_threshold_below_cutoff_rejected(self, single_mode_set):
        with pytest.raises(ValueError):
            LinkDesign(single_mode_set, np.array([0.1]), Exponential(1.0))

    def test_index_range(self, single_mode_set):
        link = LinkDesign(single_mode_set, np.array([LN2]), Exponential(1.0))
        with pytest.raises(IndexError):
            mode_probability(link, 2)
        with pytest.raises(IndexError):
            mode_avg_per(link, 0)


class TestModeAvgPer:
    def test_single_atom_value(self, single_mode_set, mode_a2g1):
        atom = atom_for_per(mode_a2g1, 0.5)
        link = LinkDesign(single_mode_set, np.array([LN2]), Discrete(((atom, 1.0),)))
        assert mode_avg_per(link, 1) == pytest.approx(0.5, abs=1e-15)

    def test_narrow_interval_tends_to_pointwise_per(self, mode_a2g1):
        gamma_star = 2.0
        eps = 1e-5
        ms = ModeSet((mode_a2g1, AmcMode(2, 2.0, 2.0, 0.5, gamma_star + eps)))
        link = LinkDesign(ms, np.array([gamma_star, gamma_star + eps]),
                          Exponential(1.0))
        assert mode_avg_per(link, 1) == pytest.approx(
            2.0 * math.exp(-gamma_star), abs=1e-4)

    def test_unused_mode_marker(self, single_mode_set):
        link = LinkDesign(single_mode_set, np.array([LN2]),
                          Discrete(((0.1, 1.0),)))  # all mass in outage
        assert mode_avg_per(link, 1) is None

    def test_lutz_closed_form_vs_quadrature(self, hiperlan_modes, lutz_rd_params):
        dist = Lutz(lutz_rd_params).scaled(50.0)
        designed = design_thresholds(dist, hiperlan_modes, 0.03)
        link = designed.link
        edges = list(link.thresholds) + [np.inf]
        for i, mode in enumerate(hiperlan_modes.modes):
            if link.p[i] <= 1e-6:
                continue
            hi = min(edges[i + 1], 400.0)
            num, _ = sint.quad(
                lambda t, m=mode: min(1.0, m.fit_a * math.exp(-m.fit_g * t)) * dist.pdf(t),
                edges[i], hi, limit=300, epsabs=1e-12, epsrel=1e-11)
            den, _ = sint.quad(dist.pdf, edges[i], hi, limit=300,
                               epsabs=1e-12, epsrel=1e-11)
            assert mode_avg_per(link, i + 1) == pytest.approx(num / den, abs=1e-7)


class TestOutageModePer:
    def test_interval_below_cutoff_is_certain_loss(self, single_mode_set):
        link = LinkDesign(single_mode_set, np.array([LN2]), Exponential(1.0))
        assert outage_mode_avg_per(link) == pytest.approx(1.0, abs=1e-12)

    def test_single_atom_between_cutoff_and_threshold(self):
        mode = AmcMode(1, 1.0, 2.0, 1.0, 0.5)
        ms = ModeSet((mode,), outage_rate=1.0)
        gamma = 1.2  # in (cutoff, threshold)
        link = LinkDesign(ms, np.array([2.0]), Discrete(((gamma, 1.0),)))
        assert outage_mode_avg_per(link) == pytest.approx(
            min(1.0, 2.0 * math.exp(-gamma)), abs=1e-15)

    def test_lutz_against_quadrature(self, lutz_sd_params):
        mode = AmcMode(1, 1.0, 2.0, 1.0, 0.5)
        ms = ModeSet((mode,), outage_rate=1.0)
        dist = Lutz(lutz_sd_params).scaled(10.0)
        link = LinkDesign(ms, np.array([2.0]), dist)
        num, _ = sint.quad(
            lambda t: min(1.0, 2.0 * math.exp(-t)) * dist.pdf(t)
            if t >= 0.5 else dist.pdf(t), 0.0, 2.0, limit=300,
            points=[0.5, math.log(2.0)], epsabs=1e-12)
        den, _ = sint.quad(dist.pdf, 0.0, 2.0, limit=300, epsabs=1e-12)
        assert outage_mode_avg_per(link) == pytest.approx(num / den, abs=1e-7)

    def test_empty_outage_interval_rejected(self):
        mode = AmcMode(1, 1.0, 2.0, 1.0, 0.0)
        ms = ModeSet((mode,), outage_rate=1.0)
        link = LinkDesign(ms, np.array([0.0]), Exponential(1.0))
        with pytest.raises(ValueError):
            outage_mode_avg_per(link)


class TestEps:
    def test_error_free(self):
        model = single_mode_model(0.5, 0.2, sr_snr=None)
        assert eps_n(model, 1) == 0.0
        assert eps_bar(model) == 0.0

    def test_below_cutoff(self):
        model = single_mode_model(0.5, 0.2, sr_snr=0.1)
        assert eps_n(model, 1) == 1.0

    def test_direct_value(self):
        model = single_mode_model(0.5, 0.2, sr_snr=2 * LN2)
        assert eps_n(model, 1) == pytest.approx(0.5, abs=1e-15)

    def test_weighted_mean(self):
        m1 = AmcMode(1, 1.0, 2.0, 1.0, LN2)
        m2 = AmcMode(2, 2.0, 4.0, 0.5, 4.0)
        ms = ModeSet((m1, m2))
        d = Discrete(((0.2, 0.4), (1.0, 0.3), (6.0, 0.3)))
        link = LinkDesign(ms, np.array([LN2, 4.0]), d)
        model = RelayLinkModel(link, link, math.log(10.0), 1)
        e1, e2 = eps_n(model, 1), eps_n(model, 2)
        assert eps_bar(model) == pytest.approx((e1 * 0.3 + e2 * 0.3) / 0.6, abs=1e-12)

    def test_all_outage_raises(self, single_mode_set):
        link = LinkDesign(single_mode_set, np.array([LN2]), Discrete(((0.1, 1.0),)))
        with pytest.raises(AllOutageError):
            eps_bar(RelayLinkModel(link, link, 1.0, 1))


class TestCoopEfficiency:
    def test_matches_enumerated_value(self):
        model = single_mode_model(0.5, 0.0)
        assert eta_coop_nr1(model) == pytest.approx(0.75, abs=1e-15)
        assert eta_coop(model) == pytest.approx(0.75, abs=1e-15)

    def test_general_form_specializes_to_nr1(self):
        rng = random.Random(42)
        for _ in range(10):
            ms, sa, st, ra, rt, sr, _ = random_discrete_config(rng)
            model = RelayLinkModel(LinkDesign(ms, st, Discrete(sa)),
                                   LinkDesign(ms, rt, Discrete(ra)), sr, 1)
            assert eta_coop(model) == pytest.approx(eta_coop_nr1(model), abs=1e-12)

    def test_relay_never_decodes(self):
        model = single_mode_model(0.5, 0.2, sr_snr=0.01)
        link = model.sd
        assert eta_coop(model) == pytest.approx(
            float((link.mode_set.rates * link.p).sum()), abs=1e-12)

    def test_budget_guard(self):
        rng = random.Random(1)
        ms, sa, st, ra, rt, sr, _ = random_discrete_config(rng, max_modes=3)
        while len(ms) < 2:
            ms, sa, st, ra, rt, sr, _ = random_discrete_config(rng, max_modes=3)
        model = RelayLinkModel(LinkDesign(ms, st, Discrete(sa)),
                               LinkDesign(ms, rt, Discrete(ra)), sr, 2)
        with pytest.raises(EvaluationBudgetError):
            eta_coop(model, term_budget=len(ms) ** 3 - 1)

    def test_enumeration_agreement_both_conventions(self):
        rng = random.Random(7)
        for _ in range(60):
            ms, sa, st, ra, rt, sr, nr = random_discrete_config(rng)
            sd = LinkDesign(ms, st, Discrete(sa))
            rd = LinkDesign(ms, rt, Discrete(ra))
            if sd.usable_mass <= 0:
                continue
            model = RelayLinkModel(sd, rd, sr, nr)
            ev, _, _ = enumerate_coop(ms, sa, st, ra, rt, sr, nr, "verbatim")
            assert eta_coop(model) == pytest.approx(ev, abs=1e-12)
            if rd.usable_mass > 0 and nr >= 1:
                ec, pc, _ = enumerate_coop(ms, sa, st, ra, rt, sr, nr, "conditioned")
                assert eta_coop(model, rd_conditioned=True) == pytest.approx(ec, abs=1e-12)
                assert plr_coop(model) == pytest.approx(pc, abs=1e-12)

    def test_convention_gap_zero_without_outage_mass(self):
        model = single_mode_model(0.5, 0.2)
        assert eta_rd_convention_gap(model) == 0.0


class TestCoopLoss:
    def test_product_form(self):
        model = single_mode_model(0.5, 0.2)
        assert plr_coop_nr1(model) == pytest.approx(0.1, abs=1e-12)
        assert plr_coop(model) == pytest.approx(0.1, abs=1e-12)

    def test_relay_useless(self):
        model = single_mode_model(0.5, 0.2, sr_snr=0.01)
        assert plr_coop_nr1(model) == pytest.approx(0.5, abs=1e-12)

    def test_perfect_relay_link(self):
        model = single_mode_model(0.5, 0.0)
        assert plr_coop_nr1(model) == 0.0

    def test_monotone_repair(self):
        # Lowering every relay-link conditional PER (same interval masses)
        # can only reduce the loss rate.
        rng = random.Random(13)
        for _ in range(40):
            ms, sa, st, ra, rt, sr, _ = random_discrete_config(rng, max_nr=1)
            sd = LinkDesign(ms, st, Discrete(sa))
            rd = LinkDesign(ms, rt, Discrete(ra))
            if sd.usable_mass <= 0 or rd.usable_mass <= 0:
                continue
            edges = list(rt) + [np.inf]
            better_atoms = []
            for g, p in ra:
                idx = int(np.searchsorted(rt, g, side="right"))
                if idx >= 1:
                    hi = edges[idx]
                    target = g + 0.75 * ((min(hi, g + 5.0)) - g)
                    better_atoms.append((max(target, g), p))
                else:
                    better_atoms.append((g, p))
            rd_better = LinkDesign(ms, rt, Discrete(tuple(better_atoms)))
            m1 = RelayLinkModel(sd, rd, sr, 1)
            m2 = RelayLinkModel(sd, rd_better, sr, 1)
            assert plr_coop_nr1(m2) <= plr_coop_nr1(m1) + 1e-12

    def test_multilinearity_in_per(self):
        # With a single mode the loss rate is exactly linear in the
        # source-link PER, so a first-order check is exact.
        for eps_snr in (None, 2 * LN2):
            base = single_mode_model(0.4, 0.2, sr_snr=eps_snr)
            bumped = single_mode_model(0.5, 0.2, sr_snr=eps_snr)
            half = single_mode_model(0.2, 0.2, sr_snr=eps_snr)
            p1, p2, p3 = (plr_coop_nr1(m) for m in (base, bumped, half))
            assert p3 == pytest.approx(p1 / 2, abs=1e-12)
            assert p2 - p1 == pytest.approx(p1 / 4, abs=1e-12)


class TestConventional:
    def test_no_retransmission_is_amc_only(self, single_mode_set):
        link = LinkDesign(single_mode_set, np.array([1.0]), Exponential(2.0))
        assert eta_conventional(link, link, 0) == pytest.approx(
            eta_amc_only(link), abs=1e-15)

    def test_single_mode_enumeration(self):
        model = single_mode_model(0.5, 0.0)
        assert eta_conventional(model.sd, model.rd, 1) == pytest.approx(0.75, abs=1e-15)

    def test_corollary_reduction_exact(self):
        rng = random.Random(55)
        for _ in range(20):
            ms, sa, st, ra, rt, _, nr = random_discrete_config(rng)
            tx = LinkDesign(ms, st, Discrete(sa))
            rtx = LinkDesign(ms, rt, Discrete(sa))
            model = RelayLinkModel(tx, rtx, None, nr)
            assert eta_coop(model) == pytest.approx(
                eta_conventional(tx, rtx, nr), abs=1e-12)

    def test_loss_examples(self):
        model = single_mode_model(0.03, 0.0)
        tx = model.sd
        assert plr_conventional(tx, tx) == pytest.approx(9e-4, abs=1e-15)
        assert plr_conventional(tx, model.rd) == 0.0

    def test_target_split_product(self):
        m_tx = single_mode_model(0.1, 0.0)
        m_rtx = single_mode_model(0.01, 0.0)
        assert plr_conventional(m_tx.sd, m_rtx.sd) == pytest.approx(1e-3, abs=1e-15)

    def test_enumeration_agreement(self):
        rng = random.Random(77)
        for _ in range(40):
            ms, sa, st, ra, rt, _, nr = random_discrete_config(rng)
            tx = LinkDesign(ms, st, Discrete(sa))
            rtx = LinkDesign(ms, rt, Discrete(sa))
            if tx.usable_mass <= 0:
                continue
            ev, _, _ = enumerate_conventional(ms, sa, st, rt, nr, "verbatim")
            assert eta_conventional(tx, rtx, nr) == pytest.approx(ev, abs=1e-12)
            if rtx.usable_mass > 0:
                ec, pc, _ = enumerate_conventional(ms, sa, st, rt, nr, "conditioned")
                assert eta_conventional(tx, rtx, nr, rtx_conditioned=True) == \
                    pytest.approx(ec, abs=1e-12)
                assert plr_conventional(tx, rtx, nr) == pytest.approx(pc, abs=1e-12)


class TestSlowFade:
    def test_error_free_limit(self, single_mode_set):
        link = LinkDesign(single_mode_set, np.array([100.0]),
                          Discrete(((200.0, 1.0),)))
        assert eta_slowfade(link) == pytest.approx(1.0, abs=1e-12)
        assert plr_slowfade(link) < 1e-100

    def test_atom_half(self):
        model = single_mode_model(0.5, 0.0)
        assert eta_slowfade(model.sd) == pytest.approx(0.75, abs=1e-15)
        assert plr_slowfade(model.sd) == pytest.approx(0.25, abs=1e-15)

    def test_squared_per_against_quadrature(self, single_mode_set, mode_a2g1):
        link = LinkDesign(single_mode_set, np.array([1.0]), Exponential(1.0))
        num, _ = sint.quad(
            lambda t: min(1.0, 2.0 * math.exp(-t)) ** 2 * math.exp(-t), 1.0, 200.0,
            limit=200, epsabs=1e-14)
        den = math.exp(-1.0)
        assert plr_slowfade(link) == pytest.approx(num / den, abs=1e-8)


class TestFixed:
    def test_perfect_source_link(self, single_mode_set):
        d_far = Discrete(((1000.0, 1.0),))
        assert eta_fixed(single_mode_set, 1, 1, d_far, d_far, None) == 1.0
        assert plr_fixed(single_mode_set, 1, 1, d_far, d_far, None) == 0.0

    def test_enumerated_pair(self, single_mode_set, mode_a2g1):
        sd = Discrete(((atom_for_per(mode_a2g1, 0.5), 1.0),))
        rd = Discrete(((atom_for_per(mode_a2g1, 0.2), 1.0),))
        assert eta_fixed(single_mode_set, 1, 1, sd, rd, None) == pytest.approx(0.75, abs=1e-15)
        assert plr_fixed(single_mode_set, 1, 1, sd, rd, None) == pytest.approx(0.1, abs=1e-15)

    def test_relay_never_decodes_literal_form(self, single_mode_set, mode_a2g1):
        sd = Discrete(((atom_for_per(mode_a2g1, 0.5), 1.0),))
        rd = Discrete(((atom_for_per(mode_a2g1, 0.2), 1.0),))
        assert eta_fixed(single_mode_set, 1, 1, sd, rd, 0.01) == 1.0
        assert plr_fixed(single_mode_set, 1, 1, sd, rd, 0.01) == pytest.approx(0.5, abs=1e-15)

    def test_full_range_average_includes_outage_region(self, single_mode_set):
        dist = Exponential(1.0)
        ref, _ = sint.quad(
            lambda t: min(1.0, 2.0 * math.exp(-t)) if t >= LN2 else 1.0,
            0.0, 60.0, weight=None, limit=200,
            points=[LN2], wvar=None, epsabs=1e-13)
        # weight by the exponential density
        ref, _ = sint.quad(
            lambda t: (min(1.0, 2.0 * math.exp(-t)) if t >= LN2 else 1.0) * math.exp(-t),
            0.0, 60.0, points=[LN2], limit=200, epsabs=1e-13)
        assert fixed_avg_per(dist, single_mode_set.mode(1)) == pytest.approx(ref, abs=1e-9)


class TestLmsc:
    def make_model(self, sd_atoms, rd_atoms, thr):
        mode = AmcMode(1, 1.0, 2.0, 1.0, 0.3)
        ms = ModeSet((mode,), outage_rate=1.0)
        sd = LinkDesign(ms, np.array([thr]), Discrete(sd_atoms))
        rd = LinkDesign(ms, np.array([thr]), Discrete(rd_atoms))
        return RelayLinkModel(sd, rd, None, 1)

    def test_empty_outage_reduces_to_coop(self):
        mode = AmcMode(1, 1.0, 2.0, 1.0, 0.0)
        ms = ModeSet((mode,), outage_rate=1.0)
        sd = LinkDesign(ms, np.array([0.0]), Discrete(((0.5, 0.3), (2.0, 0.7))))
        rd = LinkDesign(ms, np.array([0.0]), Discrete(((1.0, 1.0),)))
        model = RelayLinkModel(sd, rd, None, 1)
        assert eta_lmsc(model) == pytest.approx(eta_coop_nr1(model), abs=1e-12)
        assert plr_lmsc(model) == pytest.approx(plr_coop_nr1(model), abs=1e-12)

    def test_enumeration_agreement(self):
        rng = random.Random(31)
        count = 0
        while count < 30:
            ms, sa, st, ra, rt, sr, nr = random_discrete_config(rng, lmsc=True)
            if st[0] <= 0:
                continue
            sd = LinkDesign(ms, st, Discrete(sa))
            rd = LinkDesign(ms, rt, Discrete(ra))
            if rd.usable_mass <= 0:
                continue
            count += 1
            model = RelayLinkModel(sd, rd, None, 1)
            ev, pv, _ = enumerate_coop(ms, sa, st, ra, rt, None, 1, "verbatim",
                                       lmsc=True)
            assert eta_lmsc(model) == pytest.approx(ev, abs=1e-12)
            assert plr_lmsc(model) == pytest.approx(pv, abs=1e-12)

    def test_relay_rescues_every_outage_loss(self):
        # Outage interval always fails on the direct link, relay always
        # succeeds: nothing is lost.
        model = self.make_model(((0.5, 1.0),), ((1000.0, 1.0),), thr=0.8)
        assert plr_lmsc(model) == pytest.approx(0.0, abs=1e-300)

    def test_requires_error_free_feed(self):
        model = single_mode_model(0.5, 0.2, sr_snr=3.0)
        with pytest.raises(ValueError):
            eta_lmsc(model)


class TestGlobalInvariants:
    def test_eta_bounded_by_top_rate(self):
        rng = random.Random(99)
        for _ in range(60):
            ms, sa, st, ra, rt, sr, nr = random_discrete_config(rng)
            sd = LinkDesign(ms, st, Discrete(sa))
            rd = LinkDesign(ms, rt, Discrete(ra))
            model = RelayLinkModel(sd, rd, sr, nr)
            top = ms.rates.max()
            assert -1e-12 <= eta_coop(model) <= top + 1e-12
            assert -1e-12 <= eta_conventional(sd, rd, nr) <= top + 1e-12
            assert -1e-12 <= eta_slowfade(sd) <= top + 1e-12
