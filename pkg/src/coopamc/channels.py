"""Channel SNR laws and the closed-form Lutz mixture integrals.

All SNRs are linear; dB only appears in the lognormal shadowing parameters,
which are defined in dB by the channel model itself.  Every law exposes

* ``pdf(gamma)``
* ``interval_prob(lo, hi)``    -- P(lo <= gamma < hi), hi may be inf
* ``exp_integral(lo, hi, a, g)`` -- integral of a*exp(-g*gamma) against the law
* ``per_integral(lo, hi, a, g)`` -- same but with the curve clamped at 1
* ``sample(rng, size)``
* ``scaled(factor)``           -- the law of factor * gamma

The clamped form is what the PER analytics integrate; the raw exponential
form is the Lutz G function and its exponential/Rician specializations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .quadrature import integrate
from .specfun import bessel_i0e, marcum_q1

__all__ = [
    "LutzParams", "SnrDistribution", "Exponential", "Rician",
    "RayleighLognormal", "Lutz", "Discrete",
    "lognormal_mgf", "lutz_F", "lutz_G",
]

_XI = 10.0 / math.log(10.0)
_SHADOW_SPAN = 8.0      # +- sigmas kept in the dB-domain shadowing integrals
_QUAD_REL = 1e-10
_QUAD_ABS = 1e-15


@dataclass(frozen=True)
class LutzParams:
    """Two-state land-mobile-satellite channel parameters.

    ``rice_factor`` is linear (convert from dB at the configuration
    boundary).  ``shadow_mean_db``/``shadow_std_db`` describe the lognormal
    mean SNR in the blocked state, in dB.
    """

    blockage_prob: float
    rice_factor: float
    unblocked_mean_snr: float
    shadow_mean_db: float
    shadow_std_db: float

    xi = _XI

    def __post_init__(self):
        if not 0.0 <= self.blockage_prob <= 1.0:
            raise ValueError("blockage probability must be in [0, 1]")
        if self.unblocked_mean_snr <= 0:
            raise ValueError("unblocked mean SNR must be positive")
        if self.shadow_std_db <= 0:
            raise ValueError("shadowing std must be positive")


def lognormal_mgf(s: float, mu_db: float, sigma_db: float,
                  rel_tol: float = _QUAD_REL, abs_tol: float = _QUAD_ABS) -> float:
    """E[exp(-s t)] for t lognormal with ``10 log10 t ~ N(-mu_db, sigma_db^2)``.

    Evaluated in the dB domain (u = 10 log10 t), truncated at +-8 sigma,
    which removes both the 1/t singularity and the infinite range.  For
    s >= 0 the result lies in (0, 1].
    """
    if sigma_db <= 0:
        raise ValueError("sigma must be positive")
    center = -mu_db
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * sigma_db)

    def f(u):
        t = np.power(10.0, u / 10.0)
        return np.exp(-s * t) * norm * np.exp(-((u - center) ** 2) / (2.0 * sigma_db**2))

    lo = center - _SHADOW_SPAN * sigma_db
    hi = center + _SHADOW_SPAN * sigma_db
    return integrate(f, lo, hi, rel_tol, abs_tol).value


def _shadow_exp_integral(x: float, y: float, fit_a: float, fit_g: float,
                         mu_db: float, sigma_db: float) -> float:
    """Blocked-state part of G: E_w over the lognormal shadowing of
    ``a/(g w + 1) * (exp(-(g + 1/w) x) - exp(-(g + 1/w) y))``."""
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * sigma_db)
    y_finite = math.isfinite(y)

    def f(u):
        w = np.power(10.0, u / 10.0)
        c = fit_g + 1.0 / w
        span = np.exp(-c * x) - (np.exp(-c * y) if y_finite else 0.0)
        return fit_a / (fit_g * w + 1.0) * span * norm * \
            np.exp(-((u - mu_db) ** 2) / (2.0 * sigma_db**2))

    lo = mu_db - _SHADOW_SPAN * sigma_db
    hi = mu_db + _SHADOW_SPAN * sigma_db
    return integrate(f, lo, hi, _QUAD_REL, _QUAD_ABS).value


def _rician_exp_integral(x: float, y: float, fit_a: float, fit_g: float,
                         k: float, mean: float) -> float:
    """Integral of a*exp(-g*gamma) against the Rician SNR law on [x, y)."""
    v = (1.0 + k) / mean
    gv = fit_g + v
    alpha = math.sqrt(2.0 * k * v / gv)
    qx = marcum_q1(alpha, math.sqrt(2.0 * x * gv))
    qy = marcum_q1(alpha, math.sqrt(2.0 * y * gv)) if math.isfinite(y) else 0.0
    return fit_a * v / gv * math.exp(-fit_g * k / gv) * (qx - qy)


def lutz_F(x: float, y: float, params: LutzParams) -> float:
    """P(x <= gamma < y) under the Lutz mixture (closed form)."""
    _check_interval(x, y)
    p = params
    rice = _rician_exp_integral(x, y, 1.0, 0.0, p.rice_factor, p.unblocked_mean_snr)
    if p.blockage_prob == 0.0:
        return rice
    mx = lognormal_mgf(x, p.shadow_mean_db, p.shadow_std_db)
    my = lognormal_mgf(y, p.shadow_mean_db, p.shadow_std_db) if math.isfinite(y) else 0.0
    return (1.0 - p.blockage_prob) * rice + p.blockage_prob * (mx - my)


def lutz_G(x: float, y: float, params: LutzParams,
           fit_a: float, fit_g: float) -> float:
    """Integral of ``a exp(-g gamma)`` against the Lutz law on [x, y).

    The Rician component is closed-form in Marcum Q; the blocked component
    is a single dB-domain quadrature over the shadowing variable.
    """
    _check_interval(x, y)
    if fit_a <= 0 or fit_g < 0:
        raise ValueError("curve parameters must satisfy a > 0, g >= 0")
    p = params
    rice = _rician_exp_integral(x, y, fit_a, fit_g, p.rice_factor, p.unblocked_mean_snr)
    if p.blockage_prob == 0.0:
        return rice
    shadow = _shadow_exp_integral(x, y, fit_a, fit_g, p.shadow_mean_db, p.shadow_std_db)
    return (1.0 - p.blockage_prob) * rice + p.blockage_prob * shadow


def _check_interval(lo: float, hi: float):
    if lo < 0:
        raise ValueError("SNR interval must be non-negative")
    if lo > hi:
        raise ValueError(f"interval out of order: [{lo}, {hi})")


def _sample_rician(rng: np.random.Generator, k: float, mean: float, size):
    # Non-central chi-square with 2 degrees of freedom, mean ``mean``.
    los = math.sqrt(2.0 * k)
    x = rng.standard_normal(size) + los
    y = rng.standard_normal(size)
    return mean / (2.0 * (1.0 + k)) * (x * x + y * y)


def _sample_raylog(rng: np.random.Generator, mu_db: float, sigma_db: float, size):
    w = np.power(10.0, (mu_db + sigma_db * rng.standard_normal(size)) / 10.0)
    return rng.exponential(1.0, size) * w


class SnrDistribution:
    """Base class: clamp handling and interval checks shared by all laws."""

    kind = "base"

    def pdf(self, gamma):
        raise NotImplementedError

    def exp_integral(self, lo: float, hi: float, fit_a: float, fit_g: float) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def scaled(self, factor: float) -> "SnrDistribution":
        raise NotImplementedError

    def interval_prob(self, lo: float, hi: float) -> float:
        """P(lo <= gamma < hi)."""
        _check_interval(lo, hi)
        if lo == hi:
            return 0.0
        return min(1.0, max(0.0, self.exp_integral(lo, hi, 1.0, 0.0)))

    def per_integral(self, lo: float, hi: float, fit_a: float, fit_g: float) -> float:
        """Integral of ``min(1, a exp(-g gamma))`` against the law on [lo, hi)."""
        _check_interval(lo, hi)
        edge = math.log(fit_a) / fit_g if (fit_a > 1.0 and fit_g > 0) else 0.0
        mid = min(max(lo, edge), hi)
        out = 0.0
        if mid > lo:
            out += self.interval_prob(lo, mid)
        if hi > mid:
            out += self.exp_integral(mid, hi, fit_a, fit_g)
        return out

    @staticmethod
    def _check_pdf_arg(gamma):
        g = np.asarray(gamma, dtype=float)
        if (g < 0).any():
            raise ValueError("SNR must be non-negative")
        return g


@dataclass(frozen=True)
class Exponential(SnrDistribution):
    """Rayleigh-fading SNR: exponential with the given mean."""

    mean: float
    kind = "exponential"

    def __post_init__(self):
        if self.mean <= 0:
            raise ValueError("mean SNR must be positive")

    def pdf(self, gamma):
        g = self._check_pdf_arg(gamma)
        out = np.exp(-g / self.mean) / self.mean
        return float(out) if out.ndim == 0 else out

    def exp_integral(self, lo, hi, fit_a, fit_g):
        c = fit_g + 1.0 / self.mean
        upper = math.exp(-c * hi) if math.isfinite(hi) else 0.0
        return fit_a / (1.0 + fit_g * self.mean) * (math.exp(-c * lo) - upper)

    def sample(self, rng, size=None):
        return rng.exponential(self.mean, size)

    def scaled(self, factor):
        return Exponential(self.mean * factor)


@dataclass(frozen=True)
class Rician(SnrDistribution):
    """Unblocked line-of-sight SNR law (non-central chi-square, 2 dof)."""

    rice_factor: float
    mean: float
    kind = "rician"

    def __post_init__(self):
        if self.rice_factor < 0 or self.mean <= 0:
            raise ValueError("require rice_factor >= 0 and mean > 0")

    def pdf(self, gamma):
        g = self._check_pdf_arg(gamma)
        k, v = self.rice_factor, (1.0 + self.rice_factor) / self.mean
        z = 2.0 * np.sqrt(k * v * g)
        out = v * np.exp(-k - v * g + z) * bessel_i0e(z)
        return float(out) if out.ndim == 0 else out

    def exp_integral(self, lo, hi, fit_a, fit_g):
        return _rician_exp_integral(lo, hi, fit_a, fit_g, self.rice_factor, self.mean)

    def sample(self, rng, size=None):
        return _sample_rician(rng, self.rice_factor, self.mean, size)

    def scaled(self, factor):
        return replace(self, mean=self.mean * factor)


@dataclass(frozen=True)
class RayleighLognormal(SnrDistribution):
    """Blocked-state SNR law: exponential with lognormal random mean."""

    shadow_mean_db: float
    shadow_std_db: float
    kind = "rayleigh_lognormal"

    def __post_init__(self):
        if self.shadow_std_db <= 0:
            raise ValueError("shadowing std must be positive")

    def pdf(self, gamma):
        g = self._check_pdf_arg(gamma)
        mu, sigma = self.shadow_mean_db, self.shadow_std_db
        norm = 1.0 / (math.sqrt(2.0 * math.pi) * sigma)

        def density(gv: float) -> float:
            def f(u):
                w = np.power(10.0, u / 10.0)
                return np.exp(-gv / w) / w * norm * \
                    np.exp(-((u - mu) ** 2) / (2.0 * sigma**2))

            return integrate(f, mu - _SHADOW_SPAN * sigma,
                             mu + _SHADOW_SPAN * sigma, _QUAD_REL, _QUAD_ABS).value

        if g.ndim == 0:
            return density(float(g))
        return np.array([density(float(v)) for v in g.ravel()]).reshape(g.shape)

    def exp_integral(self, lo, hi, fit_a, fit_g):
        return _shadow_exp_integral(lo, hi, fit_a, fit_g,
                                    self.shadow_mean_db, self.shadow_std_db)

    def sample(self, rng, size=None):
        return _sample_raylog(rng, self.shadow_mean_db, self.shadow_std_db, size)

    def scaled(self, factor):
        return replace(self, shadow_mean_db=self.shadow_mean_db + 10.0 * math.log10(factor))


@dataclass(frozen=True)
class Lutz(SnrDistribution):
    """Two-state mixture: Rician unblocked, Rayleigh/lognormal blocked."""

    params: LutzParams
    kind = "lutz"

    def pdf(self, gamma):
        p = self.params
        rice = Rician(p.rice_factor, p.unblocked_mean_snr).pdf(gamma)
        if p.blockage_prob == 0.0:
            return rice
        shadow = RayleighLognormal(p.shadow_mean_db, p.shadow_std_db).pdf(gamma)
        return (1.0 - p.blockage_prob) * rice + p.blockage_prob * shadow

    def interval_prob(self, lo, hi):
        _check_interval(lo, hi)
        if lo == hi:
            return 0.0
        return min(1.0, max(0.0, lutz_F(lo, hi, self.params)))

    def exp_integral(self, lo, hi, fit_a, fit_g):
        if fit_g == 0.0:
            # G degenerates to a * F; route through F so both stay consistent.
            return fit_a * lutz_F(lo, hi, self.params)
        return lutz_G(lo, hi, self.params, fit_a, fit_g)

    def sample(self, rng, size=None):
        p = self.params
        blocked = rng.random(size) < p.blockage_prob
        rice = _sample_rician(rng, p.rice_factor, p.unblocked_mean_snr, size)
        shadow = _sample_raylog(rng, p.shadow_mean_db, p.shadow_std_db, size)
        return np.where(blocked, shadow, rice) if size is not None else \
            (shadow if blocked else rice)

    def scaled(self, factor):
        p = replace(self.params,
                    unblocked_mean_snr=self.params.unblocked_mean_snr * factor,
                    shadow_mean_db=self.params.shadow_mean_db + 10.0 * math.log10(factor))
        return Lutz(p)


@dataclass(frozen=True)
class Discrete(SnrDistribution):
    """Finite atomic law; the exact-arithmetic oracle channel for tests."""

    atoms: tuple  # ((gamma, prob), ...) sorted by gamma
    kind = "discrete"

    def __post_init__(self):
        atoms = tuple(sorted((float(g), float(p)) for g, p in self.atoms))
        if not atoms:
            raise ValueError("discrete law needs at least one atom")
        if any(g < 0 for g, _ in atoms):
            raise ValueError("SNR atoms must be non-negative")
        if any(p < 0 for _, p in atoms):
            raise ValueError("atom probabilities must be non-negative")
        total = math.fsum(p for _, p in atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom probabilities sum to {total}, expected 1")
        object.__setattr__(self, "atoms", atoms)

    def pdf(self, gamma):
        raise ValueError("atomic law has no density; use interval_prob")

    def _mask(self, lo, hi):
        return [(g, p) for g, p in self.atoms if lo <= g < hi]

    def interval_prob(self, lo, hi):
        _check_interval(lo, hi)
        return math.fsum(p for _, p in self._mask(lo, hi))

    def exp_integral(self, lo, hi, fit_a, fit_g):
        return math.fsum(p * fit_a * math.exp(-fit_g * g)
                         for g, p in self._mask(lo, hi))

    def sample(self, rng, size=None):
        gammas = np.array([g for g, _ in self.atoms])
        probs = np.array([p for _, p in self.atoms])
        probs = probs / probs.sum()
        idx = rng.choice(len(gammas), size=size, p=probs)
        return gammas[idx]

    def scaled(self, factor):
        return Discrete(tuple((g * factor, p) for g, p in self.atoms))
