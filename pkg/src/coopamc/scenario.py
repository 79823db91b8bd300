"""Scenario documents: the experiment description consumed by the CLI.

A scenario is a single YAML document naming the scheme, a mode-set file,
the channel laws, the loss budget and the mean-SNR sweep.  Channel blocks
describe the law at unit mean SNR; each sweep point scales the
source-destination law by the swept power and the relay-destination law by
the power times the relay placement gain.

Validation never throws on the first problem: every violation is collected
with its dotted field path and reported together.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .channels import (Discrete, Exponential, Lutz, LutzParams,
                       RayleighLognormal, Rician, SnrDistribution)
from .modes import AmcMode, ModeSet, db_to_linear, validate_mode_set

__all__ = ["SchemaError", "Scenario", "parse_scenario", "load_mode_set",
           "SCHEMES"]

SCHEMES = (
    "coop_amc", "conventional_amc", "slowfade_conventional", "amc_only",
    "fixed_coop", "fixed_coop_equal_rate", "lmsc_coop", "lmsc_fixed",
)
_RELAY_SCHEMES = {"coop_amc", "fixed_coop", "fixed_coop_equal_rate",
                  "lmsc_coop", "lmsc_fixed"}
_CHANNEL_KINDS = ("exponential", "rician", "rayleigh_lognormal", "lutz",
                  "discrete")
_RD_POLICIES = ("non_outage_conditioned", "unconditional")


class SchemaError(ValueError):
    """Scenario document violations, each tagged with its field path."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.violations)
        super().__init__(f"invalid scenario: {lines}")


class _Check:
    def __init__(self):
        self.errors = []

    def fail(self, path, msg):
        self.errors.append((path, msg))

    def require(self, data, path, key, types, msg=None):
        if not isinstance(data, dict) or key not in data:
            self.fail(f"{path}.{key}" if path else key, msg or "missing required field")
            return None
        value = data[key]
        if types is not None and not isinstance(value, types):
            self.fail(f"{path}.{key}" if path else key,
                      f"expected {getattr(types, '__name__', types)}, got {type(value).__name__}")
            return None
        return value

    def raise_if_failed(self):
        if self.errors:
            raise SchemaError(self.errors)


def load_mode_set(path: Path) -> ModeSet:
    """Load a mode-set YAML file and enforce its invariants."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    chk = _Check()
    if not isinstance(doc, dict):
        chk.fail("", "mode-set document must be a mapping")
        chk.raise_if_failed()
    packet_length = chk.require(doc, "", "packet_length", int)
    outage = doc.get("outage_rate", 0.0)
    entries = chk.require(doc, "", "modes", list)
    modes = []
    if entries:
        for i, entry in enumerate(entries):
            p = f"modes[{i}]"
            if not isinstance(entry, dict):
                chk.fail(p, "expected a mapping")
                continue
            rate = chk.require(entry, p, "rate", (int, float))
            a = chk.require(entry, p, "a", (int, float))
            g = chk.require(entry, p, "g", (int, float))
            gdb = chk.require(entry, p, "gamma_pl_db", (int, float))
            if None not in (rate, a, g, gdb):
                modes.append(AmcMode(i + 1, float(rate), float(a), float(g),
                                     db_to_linear(float(gdb))))
    chk.raise_if_failed()

    if outage == "r1":
        outage_rate = modes[0].rate if modes else 0.0
    elif isinstance(outage, (int, float)):
        outage_rate = float(outage)
    else:
        raise SchemaError([("outage_rate", "expected a number or 'r1'")])
    ms = ModeSet(tuple(modes), int(packet_length), outage_rate)
    report = validate_mode_set(ms)
    if not report.ok:
        raise SchemaError([(v.path, v.message) for v in report.violations])
    return ms


def _build_dist(block: dict, path: str, chk: _Check):
    kind = chk.require(block, path, "kind", str)
    if kind is None:
        return None
    if kind not in _CHANNEL_KINDS:
        chk.fail(f"{path}.kind", f"unknown channel kind {kind!r}")
        return None
    try:
        if kind == "exponential":
            return Exponential(1.0)
        if kind == "rician":
            k_db = chk.require(block, path, "rice_factor_db", (int, float))
            if k_db is None:
                return None
            return Rician(db_to_linear(float(k_db)), 1.0)
        if kind == "rayleigh_lognormal":
            mu = chk.require(block, path, "shadow_mean_db", (int, float))
            sig = chk.require(block, path, "shadow_std_db", (int, float))
            if None in (mu, sig):
                return None
            return RayleighLognormal(float(mu), float(sig))
        if kind == "lutz":
            a = chk.require(block, path, "blockage_prob", (int, float))
            k_db = chk.require(block, path, "rice_factor_db", (int, float))
            mu = chk.require(block, path, "shadow_mean_db", (int, float))
            sig = chk.require(block, path, "shadow_std_db", (int, float))
            if None in (a, k_db, mu, sig):
                return None
            return Lutz(LutzParams(float(a), db_to_linear(float(k_db)), 1.0,
                                   float(mu), float(sig)))
        atoms = chk.require(block, path, "atoms", list)
        if atoms is None:
            return None
        pairs = []
        for i, pair in enumerate(atoms):
            if (not isinstance(pair, (list, tuple))) or len(pair) != 2:
                chk.fail(f"{path}.atoms[{i}]", "expected [snr, probability]")
                return None
            pairs.append((float(pair[0]), float(pair[1])))
        return Discrete(tuple(pairs))
    except ValueError as exc:
        chk.fail(path, str(exc))
        return None


@dataclass(frozen=True)
class Scenario:
    """A parsed experiment description; immutable and hashable by content."""

    scheme: str
    mode_set: ModeSet
    mode_set_ref: str
    sd_base: SnrDistribution
    rd_base: SnrDistribution | None
    sr_error_free: bool
    alpha_db: float | None
    lambda_db: float
    p_bar_sweep_db: tuple
    nr: int
    p_loss: float
    grid_points: int
    frames: int
    seed: int
    rd_sampling: str
    raw: dict = field(repr=False, compare=False, default_factory=dict)

    def sd_dist(self, p_bar_db: float) -> SnrDistribution:
        return self.sd_base.scaled(db_to_linear(p_bar_db))

    def rd_dist(self, p_bar_db: float) -> SnrDistribution | None:
        if self.rd_base is None:
            return None
        return self.rd_base.scaled(db_to_linear(p_bar_db + self.lambda_db))

    def sr_snr(self, p_bar_db: float) -> float | None:
        """Constant source-relay SNR at this sweep point; None = error-free."""
        if self.sr_error_free:
            return None
        return db_to_linear(p_bar_db + self.alpha_db)

    @property
    def needs_relay(self) -> bool:
        return self.scheme in _RELAY_SCHEMES

    def canonical(self) -> dict:
        return json.loads(json.dumps(self.raw, sort_keys=True))

    def sha256(self) -> str:
        payload = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


def parse_scenario(path) -> Scenario:
    """Parse and validate a scenario file; raises SchemaError with the full
    list of dotted field paths on any violation."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    chk = _Check()
    if not isinstance(doc, dict):
        chk.fail("", "scenario document must be a mapping")
        chk.raise_if_failed()

    scheme = chk.require(doc, "", "scheme", str)
    if scheme is not None and scheme not in SCHEMES:
        chk.fail("scheme", f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    p_loss = chk.require(doc, "", "p_loss", (int, float))
    if p_loss is not None and not 0.0 < float(p_loss) < 1.0:
        chk.fail("p_loss", "loss budget must lie in (0, 1)")
    sweep = chk.require(doc, "", "p_bar_sweep_db", list)
    if sweep is not None:
        if not sweep:
            chk.fail("p_bar_sweep_db", "sweep must not be empty")
        elif not all(isinstance(x, (int, float)) for x in sweep):
            chk.fail("p_bar_sweep_db", "sweep points must be numbers")

    mode_ref = chk.require(doc, "", "mode_set", str)
    mode_set = None
    if mode_ref is not None:
        ms_path = (path.parent / mode_ref).resolve()
        if not ms_path.exists():
            chk.fail("mode_set", f"file not found: {ms_path}")
        else:
            try:
                mode_set = load_mode_set(ms_path)
            except SchemaError as exc:
                for vpath, msg in exc.violations:
                    chk.fail(f"mode_set.{vpath}" if vpath else "mode_set", msg)

    nr = doc.get("nr", 1)
    if not isinstance(nr, int) or nr < 0:
        chk.fail("nr", "retransmission limit must be a non-negative integer")

    channels = chk.require(doc, "", "channels", dict)
    sd_base = rd_base = None
    sr_error_free = True
    needs_relay = scheme in _RELAY_SCHEMES
    uses_relay_channel = needs_relay or scheme is None
    if channels is not None:
        sd_block = chk.require(channels, "channels", "sd", dict)
        if sd_block is not None:
            sd_base = _build_dist(sd_block, "channels.sd", chk)
        if uses_relay_channel and "rd" in channels:
            rd_block = channels.get("rd")
            if isinstance(rd_block, dict):
                rd_base = _build_dist(rd_block, "channels.rd", chk)
            else:
                chk.fail("channels.rd", "expected a mapping")
        elif needs_relay:
            chk.fail("channels.rd", "missing required field")
        sr_block = channels.get("sr", {"kind": "error_free"})
        if not isinstance(sr_block, dict) or "kind" not in sr_block:
            chk.fail("channels.sr", "expected a mapping with a 'kind'")
        elif sr_block["kind"] == "error_free":
            sr_error_free = True
        elif sr_block["kind"] == "awgn":
            sr_error_free = False
        else:
            chk.fail("channels.sr.kind", "expected 'awgn' or 'error_free'")

    alpha_db = doc.get("alpha_db")
    if alpha_db is not None and not isinstance(alpha_db, (int, float)):
        chk.fail("alpha_db", "expected a number")
    if not sr_error_free and alpha_db is None:
        chk.fail("alpha_db", "required when channels.sr.kind is 'awgn'")
    lambda_db = doc.get("lambda_db", 0.0)
    if not isinstance(lambda_db, (int, float)):
        chk.fail("lambda_db", "expected a number")

    if scheme in ("lmsc_coop", "lmsc_fixed") and not sr_error_free:
        chk.fail("channels.sr.kind", "satellite schemes assume an error-free relay feed")
    if scheme == "lmsc_coop" and mode_set is not None and mode_set.outage_rate <= 0:
        chk.fail("mode_set.outage_rate",
                 "satellite relay scheme needs a positive outage rate (use 'r1')")

    design = doc.get("design", {})
    grid_points = design.get("grid_points", 200) if isinstance(design, dict) else 200
    if not isinstance(grid_points, int) or grid_points < 1:
        chk.fail("design.grid_points", "expected a positive integer")

    sim = doc.get("sim", {})
    if not isinstance(sim, dict):
        chk.fail("sim", "expected a mapping")
        sim = {}
    frames = sim.get("frames", 1_000_000)
    seed = sim.get("seed", 0)
    rd_sampling = sim.get("rd_sampling", "non_outage_conditioned")
    if not isinstance(frames, int) or frames < 1:
        chk.fail("sim.frames", "expected a positive integer")
    if not isinstance(seed, int):
        chk.fail("sim.seed", "expected an integer")
    if rd_sampling not in _RD_POLICIES:
        chk.fail("sim.rd_sampling", f"expected one of {_RD_POLICIES}")

    chk.raise_if_failed()

    return Scenario(
        scheme=scheme,
        mode_set=mode_set,
        mode_set_ref=mode_ref,
        sd_base=sd_base,
        rd_base=rd_base,
        sr_error_free=sr_error_free,
        alpha_db=None if alpha_db is None else float(alpha_db),
        lambda_db=float(lambda_db),
        p_bar_sweep_db=tuple(float(x) for x in sweep),
        nr=int(nr),
        p_loss=float(p_loss),
        grid_points=int(grid_points),
        frames=int(frames),
        seed=int(seed),
        rd_sampling=rd_sampling,
        raw=doc,
    )
