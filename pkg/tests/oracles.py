"""Independent oracles for the closed forms.

Everything here re-derives results from first principles (probability tree
walks over discrete channel atoms, brute-force quadrature via scipy) and
deliberately avoids the package's own summation and integration code paths.
"""

from __future__ import annotations

import math


def _per(mode, gamma):
    if gamma < mode.fit_gamma_pl:
        return 1.0
    return min(1.0, mode.fit_a * math.exp(-mode.fit_g * gamma))


def _mode_of(thresholds, gamma):
    n = 0
    for t in thresholds:
        if gamma >= t:
            n += 1
        else:
            break
    return n


def enumerate_coop(ms, sd_atoms, sd_thresholds, rd_atoms, rd_thresholds,
                   sr_snr, nr, rd_convention="conditioned", lmsc=False):
    """Exhaustive outcome-path enumeration of the cooperative protocol.

    ``rd_convention`` picks how relay-link outage draws are handled:
      * ``"verbatim"``: paths containing an outage draw contribute nothing
        to the efficiency (the convention implicit in the closed form).
      * ``"conditioned"``: every relay draw comes from the law conditioned
        on non-outage.
      * ``"unconditional"``: an outage draw silences the relay and the
        packet is lost at the symbol cost spent so far.

    The loss rate is always accumulated under the ``conditioned``
    convention (the one the loss closed form states), over transmitted
    packets.  Returns (eta, plr, transmitted_mass).
    """
    rates = [m.rate for m in ms.modes]
    eta = 0.0
    lost_mass = 0.0
    tx_mass = 0.0

    rd_non_outage = [(g, p) for g, p in rd_atoms
                     if _mode_of(rd_thresholds, g) >= 1]
    rd_mass = sum(p for _, p in rd_non_outage)
    rd_cond = [(g, p / rd_mass) for g, p in rd_non_outage] if rd_mass > 0 else []

    def relay_eta(k, prob, inv_l, mode_atoms):
        nonlocal eta
        if prob == 0.0:
            return
        if k > nr:
            eta += prob / inv_l
            return
        for g2, q in mode_atoms:
            m = _mode_of(rd_thresholds, g2)
            if m == 0:
                if rd_convention == "unconditional":
                    eta += prob * q / inv_l
                # verbatim: drop the path entirely
                continue
            inv_l2 = inv_l + 1.0 / rates[m - 1]
            p2 = _per(ms.modes[m - 1], g2)
            eta += prob * q * (1.0 - p2) / inv_l2
            relay_eta(k + 1, prob * q * p2, inv_l2, mode_atoms)

    def relay_loss(k, prob):
        nonlocal lost_mass
        if prob == 0.0:
            return
        if k > nr:
            lost_mass += prob
            return
        if not rd_cond:
            lost_mass += prob
            return
        for g2, q in rd_cond:
            m = _mode_of(rd_thresholds, g2)
            p2 = _per(ms.modes[m - 1], g2)
            relay_loss(k + 1, prob * q * p2)

    for g1, p1 in sd_atoms:
        n = _mode_of(sd_thresholds, g1)
        if n == 0 and not lmsc:
            continue
        if n == 0:
            rate = ms.outage_rate
            curve_mode = ms.modes[0]
        else:
            rate = rates[n - 1]
            curve_mode = ms.modes[n - 1]
        tx_mass += p1
        per1 = _per(curve_mode, g1)
        eps = 0.0 if sr_snr is None else _per(curve_mode, sr_snr)
        inv_l = 1.0 / rate

        # First transmission succeeded, or failed with the relay unable to
        # decode: either way the frame ends at the first-attempt cost.
        eta += p1 * (1.0 - per1) / inv_l
        eta += p1 * per1 * eps / inv_l
        lost_mass += p1 * per1 * eps

        engaged = p1 * per1 * (1.0 - eps)
        atoms = rd_cond if rd_convention == "conditioned" else list(rd_atoms)
        relay_eta(1, engaged, inv_l, atoms)
        relay_loss(1, engaged)

    plr = lost_mass / tx_mass if tx_mass > 0 else math.nan
    return eta, plr, tx_mass


def enumerate_conventional(ms, atoms, tx_thresholds, rtx_thresholds, nr,
                           convention="conditioned"):
    """Outcome-path enumeration of source-only ARQ with re-adaptation."""
    rates = [m.rate for m in ms.modes]
    eta = 0.0
    lost_mass = 0.0
    tx_mass = 0.0

    non_outage = [(g, p) for g, p in atoms if _mode_of(rtx_thresholds, g) >= 1]
    mass = sum(p for _, p in non_outage)
    cond = [(g, p / mass) for g, p in non_outage] if mass > 0 else []

    def retry_eta(k, prob, inv_l, pool):
        nonlocal eta
        if prob == 0.0:
            return
        if k > nr:
            eta += prob / inv_l
            return
        for g2, q in pool:
            m = _mode_of(rtx_thresholds, g2)
            if m == 0:
                if convention == "unconditional":
                    eta += prob * q / inv_l
                continue
            inv_l2 = inv_l + 1.0 / rates[m - 1]
            p2 = _per(ms.modes[m - 1], g2)
            eta += prob * q * (1.0 - p2) / inv_l2
            retry_eta(k + 1, prob * q * p2, inv_l2, pool)

    def retry_loss(k, prob):
        nonlocal lost_mass
        if prob == 0.0:
            return
        if k > nr:
            lost_mass += prob
            return
        if not cond:
            lost_mass += prob
            return
        for g2, q in cond:
            m = _mode_of(rtx_thresholds, g2)
            p2 = _per(ms.modes[m - 1], g2)
            retry_loss(k + 1, prob * q * p2)

    for g1, p1 in atoms:
        n = _mode_of(tx_thresholds, g1)
        if n == 0:
            continue
        tx_mass += p1
        per1 = _per(ms.modes[n - 1], g1)
        inv_l = 1.0 / rates[n - 1]
        eta += p1 * (1.0 - per1) / inv_l
        pool = cond if convention == "conditioned" else list(atoms)
        retry_eta(1, p1 * per1, inv_l, pool)
        retry_loss(1, p1 * per1)

    plr = lost_mass / tx_mass if tx_mass > 0 else math.nan
    return eta, plr, tx_mass
