"""Transmission modes and the exponential packet-error-rate curve model.

A mode is one modulation/coding choice with rate ``rate`` bits per symbol.
Its packet error rate as a function of linear SNR is modeled as 1 below the
cutoff ``fit_gamma_pl`` and ``fit_a * exp(-fit_g * snr)`` above it, clamped
to 1 so the value is always a probability even for fits where the two
branches do not meet exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AmcMode", "ModeSet", "ValidationIssue", "ValidationReport",
    "per_instantaneous", "validate_mode_set", "db_to_linear", "linear_to_db",
]


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("dB conversion requires a positive value")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class AmcMode:
    """One AMC mode: rate plus PER-curve fit parameters (linear SNR units)."""

    index: int
    rate: float
    fit_a: float
    fit_g: float
    fit_gamma_pl: float

    def per(self, gamma):
        return per_instantaneous(self, gamma)

    @property
    def clamp_edge(self) -> float:
        """SNR where the fitted curve crosses 1 (clamp active below it)."""
        if self.fit_a <= 1.0:
            return 0.0
        return math.log(self.fit_a) / self.fit_g


@dataclass(frozen=True)
class ModeSet:
    """Ordered mode list (strictly increasing rates) plus packet geometry.

    ``outage_rate`` is 0 for terrestrial schemes; the satellite scheme sets
    it to the lowest mode rate so the below-threshold region still carries
    data through the relay.
    """

    modes: tuple
    packet_length: int = 1080
    outage_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))

    def __len__(self) -> int:
        return len(self.modes)

    @property
    def rates(self) -> np.ndarray:
        return np.array([m.rate for m in self.modes])

    @property
    def fit_a(self) -> np.ndarray:
        return np.array([m.fit_a for m in self.modes])

    @property
    def fit_g(self) -> np.ndarray:
        return np.array([m.fit_g for m in self.modes])

    @property
    def gamma_pl(self) -> np.ndarray:
        return np.array([m.fit_gamma_pl for m in self.modes])

    def mode(self, n: int) -> AmcMode:
        """Mode by 1-based index n = 1..N."""
        if not 1 <= n <= len(self.modes):
            raise IndexError(f"mode index {n} outside 1..{len(self.modes)}")
        return self.modes[n - 1]


def per_instantaneous(mode: AmcMode, gamma):
    """Instantaneous PER of ``mode`` at linear SNR ``gamma`` (scalar or array).

    Returns 1 below the fit cutoff, otherwise ``min(1, a * exp(-g * gamma))``;
    the result is always in [0, 1] and non-increasing in gamma.
    """
    g = np.asarray(gamma, dtype=float)
    if (g < 0).any():
        raise ValueError("SNR must be non-negative")
    fitted = np.minimum(1.0, mode.fit_a * np.exp(-mode.fit_g * g))
    out = np.where(g < mode.fit_gamma_pl, 1.0, fitted)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ValidationIssue:
    path: str
    message: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: str, message: str):
        self.violations.append(ValidationIssue(path, message))

    def warn(self, path: str, message: str):
        self.warnings.append(ValidationIssue(path, message))


def validate_mode_set(ms: ModeSet) -> ValidationReport:
    """Check mode-set invariants; returns a report instead of raising."""
    report = ValidationReport()
    if len(ms.modes) < 1:
        report.add("modes", "at least one mode is required")
        return report
    if ms.packet_length <= 0:
        report.add("packet_length", "packet length must be positive")
    if ms.outage_rate < 0:
        report.add("outage_rate", "outage rate must be non-negative")
    prev_rate = 0.0
    for i, m in enumerate(ms.modes):
        path = f"modes[{i}]"
        if m.index != i + 1:
            report.add(f"{path}.index", f"expected index {i + 1}, got {m.index}")
        if m.rate <= prev_rate:
            report.add(f"{path}.rate", "non-increasing rates")
        prev_rate = max(prev_rate, m.rate)
        if m.rate <= 0:
            report.add(f"{path}.rate", "rate must be positive")
        if m.fit_a <= 0:
            report.add(f"{path}.fit_a", "fit parameter a must be positive")
        if m.fit_g <= 0:
            report.add(f"{path}.fit_g", "fit parameter g must be positive")
        if m.fit_gamma_pl < 0:
            report.add(f"{path}.fit_gamma_pl", "PER cutoff must be non-negative")
        elif m.fit_a * math.exp(-m.fit_g * m.fit_gamma_pl) > 1.0 + 1e-12:
            report.warn(
                f"{path}.fit_gamma_pl",
                "fitted curve exceeds 1 at the cutoff; values are clamped to 1")
    return report
