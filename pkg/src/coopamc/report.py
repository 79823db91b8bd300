"""Machine-readable sweep reports: one CSV per series plus a JSON sidecar.

The CSV carries the plot data (one row per sweep point, stable column
order, full-precision floats); the sidecar carries provenance: scenario
hash, seed, tool version, per-point flags and the CSV payload hash.  The
creation timestamp lives only in the sidecar and is excluded from the
hash, so identical runs produce identical payloads.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .runner import PointRecord
from .scenario import Scenario

__all__ = ["COLUMNS", "rows_to_csv", "write_report", "save_designs",
           "load_designs", "report_hash"]

COLUMNS = [
    "p_bar_db", "feasible", "eta", "plr", "p_t_sd", "p_t_rd",
    "eta_equal_target", "eta_rd_gap", "rate_index_sd", "rate_index_rd",
    "clamped_sd", "clamped_rd", "eta_sim", "eta_sim_se", "plr_sim",
    "plr_sim_se", "frames", "transmitted", "lost", "outage_frames",
    "relay_engaged", "retx_hist",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ";".join(str(v) for v in value)
    return str(value)


def _row_cells(rec: PointRecord) -> dict:
    cells = {
        "p_bar_db": rec.p_bar_db,
        "feasible": rec.feasible,
        "eta": rec.eta,
        "plr": rec.plr,
        "p_t_sd": rec.p_t_sd,
        "p_t_rd": rec.p_t_rd,
        "eta_equal_target": rec.eta_equal_target,
        "eta_rd_gap": rec.eta_rd_gap,
        "rate_index_sd": rec.rate_index_sd,
        "rate_index_rd": rec.rate_index_rd,
        "clamped_sd": rec.clamped_sd or None,
        "clamped_rd": rec.clamped_rd or None,
        "eta_sim": None, "eta_sim_se": None, "plr_sim": None,
        "plr_sim_se": None, "frames": None, "transmitted": None,
        "lost": None, "outage_frames": None, "relay_engaged": None,
        "retx_hist": None,
    }
    if rec.sim is not None:
        s = rec.sim
        cells.update(eta_sim=s.eta_hat, eta_sim_se=s.eta_se,
                     plr_sim=s.plr_hat, plr_sim_se=s.plr_se,
                     frames=s.frames, transmitted=s.transmitted, lost=s.lost,
                     outage_frames=s.outage_frames,
                     relay_engaged=s.relay_engaged, retx_hist=s.retx_hist)
    return cells


def rows_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in records:
        cells = _row_cells(rec)
        writer.writerow([_fmt(cells[c]) for c in COLUMNS])
    return buf.getvalue()


def report_hash(csv_payload: str) -> str:
    return hashlib.sha256(csv_payload.encode()).hexdigest()


def write_report(outdir, stem: str, records, scenario: Scenario,
                 seed: int, extras: dict | None = None) -> dict:
    """Write ``<stem>.csv`` and ``<stem>.json``; returns the file paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = rows_to_csv(records)
    csv_path = outdir / f"{stem}.csv"
    csv_path.write_text(payload, encoding="utf-8")

    sidecar = {
        "tool_version": __version__,
        "scheme": scenario.scheme,
        "scenario_sha256": scenario.sha256(),
        "scenario": scenario.canonical(),
        "seed": seed,
        "report_sha256": report_hash(payload),
        "points": [
            {
                "p_bar_db": rec.p_bar_db,
                "feasible": rec.feasible,
                **({"reason": rec.reason} if rec.reason else {}),
            }
            for rec in records
        ],
        # Excluded from any hash: everything above identifies the run.
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    if extras:
        sidecar.update(extras)
    json_path = outdir / f"{stem}.json"
    json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    return {"csv": csv_path, "json": json_path}


def save_designs(path, scenario: Scenario, records) -> None:
    """Persist designed thresholds/rates so `simulate` can rebuild models."""
    doc = {
        "tool_version": __version__,
        "scenario_sha256": scenario.sha256(),
        "scheme": scenario.scheme,
        "points": [
            {
                "p_bar_db": rec.p_bar_db,
                "feasible": rec.feasible,
                "sd_thresholds": list(rec.sd_thresholds),
                "rd_thresholds": list(rec.rd_thresholds),
                "rate_index_sd": rec.rate_index_sd,
                "rate_index_rd": rec.rate_index_rd,
                "p_t_sd": rec.p_t_sd,
                "p_t_rd": rec.p_t_rd,
                "eta": rec.eta,
                "plr": rec.plr,
            }
            for rec in records
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_designs(path, scenario: Scenario) -> list:
    """Rebuild PointRecords from a designs file (analytic fields included)."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("scenario_sha256") != scenario.sha256():
        raise ValueError("designs file was produced from a different scenario")
    records = []
    for pt in doc["points"]:
        records.append(PointRecord(
            p_bar_db=pt["p_bar_db"], scheme=scenario.scheme,
            feasible=pt["feasible"],
            eta=pt.get("eta"), plr=pt.get("plr"),
            p_t_sd=pt.get("p_t_sd"), p_t_rd=pt.get("p_t_rd"),
            rate_index_sd=pt.get("rate_index_sd"),
            rate_index_rd=pt.get("rate_index_rd"),
            sd_thresholds=tuple(pt.get("sd_thresholds") or ()),
            rd_thresholds=tuple(pt.get("rd_thresholds") or ()),
        ))
    return records
