"""Report emission and the built-in reproduction cases."""

from __future__ import annotations

import csv
import fnmatch
import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Any, Optional, Sequence

from . import __version__
from .design import DESIGN_FIELDS, MAXIMAL_DIAL, ClockDesign, DesignInput, close_design
from .feasibility import (
    FeasibilityReport,
    SweepResult,
    check,
    sweep_rows,
)
from .quantities import PhysicalConstants
from .wavepacket import SpreadingReport, verify_spreading_condition

SCHEMA_VERSION = "1"

DESIGN_COLUMNS = tuple(DESIGN_FIELDS) + ("mode",)
REPORT_COLUMNS = (
    "req_a_pass", "req_a_margin", "req_b_pass", "req_b_margin",
    "req_c_pass", "req_c_margin", "req_d_pass", "req_d_margin",
    "relativistic_warning", "mass_class", "size_class", "material",
)
REPRO_COLUMNS = ("case", "field", "computed", "expected", "ratio", "factor", "pass",
                 "citation")

UNITS = {
    "tau": "s", "T": "s", "n": "", "u": "cm/s", "dial": "cm", "dx": "cm",
    "dp": "g cm/s", "dt": "s", "du": "cm/s", "M": "g", "L_M": "cm", "R": "cm",
    "rho": "g/cm^3",
}

# sweep region-map colours, first matching category wins
REGION_COLORS = {
    "invalid": "#bdbdbd",
    "macro_behaviour": "#d73027",
    "oversized_body": "#fc8d59",
    "macroscopic_mass": "#4575b4",
    "micro_mass_large_dial": "#91bfdb",
    "unstable_nucleus": "#fee08b",
    "micro_clock": "#1a9850",
}
REGION_LEGEND = {
    "invalid": "closure failed",
    "macro_behaviour": "dx >> R fails",
    "oversized_body": "R << 2l fails",
    "macroscopic_mass": "M > 1e-16 g",
    "micro_mass_large_dial": "2l > 1e-5 cm",
    "unstable_nucleus": "needs unstable nucleus",
    "micro_clock": "microscopic clock",
}


def load_schema() -> dict:
    text = resources.files("swclock").joinpath("schemas/output.schema.json").read_text()
    return json.loads(text)


def csv_header_contract() -> dict:
    text = resources.files("swclock").joinpath("schemas/csv_headers.json").read_text()
    return json.loads(text)


# --- reproduction cases -----------------------------------------------------

@dataclass(frozen=True)
class Expected:
    field: str
    value: Any
    factor: float
    citation: str

    def __post_init__(self):
        if self.factor < 1:
            raise ValueError(f"tolerance factor must be >= 1, got {self.factor}")


@dataclass(frozen=True)
class ReproCase:
    name: str
    inputs: DesignInput
    expected: tuple[Expected, ...]
    strong_factor: float = 10.0
    rel_threshold: float = 0.01


def _cases(constants: PhysicalConstants) -> list[ReproCase]:
    mn = constants.nucleon_mass
    nuc = constants.density_nuclear
    exact = 1 + 1e-12
    return [
        ReproCase("wigner-1957", DesignInput.of(MAXIMAL_DIAL, tau=1e-8, T=8.64e4), (
            Expected("n", 8.64e12, exact, "Wigner 1957 example: relative accuracy"),
            Expected("M", 0.072, 1.5, "Wigner 1957 example: body mass"),
            Expected("dial", 300.0, 1.1, "Wigner 1957 example: dial = c tau, 3 m"),
            Expected("dx", 1e-11, 5.0, "Wigner 1957 example: packet width"),
            Expected("R", 0.26, 1.1, "Wigner 1957 example: radius at 1 g/cm^3"),
            Expected("req_c.pass", True, 1.0, "Wigner 1957 example: R << 2l"),
            Expected("req_d.pass", False, 1.0, "Wigner 1957 example: dx << R, macroscopic"),
            Expected("mass_class", "macroscopic", 1.0, "Wigner 1957 example: macroscopic mass"),
            Expected("spreading.satisfied", True, 1.0, "width at most doubles over T"),
        )),
        ReproCase("micro-mass", DesignInput.of(MAXIMAL_DIAL, tau=1e-7, n=1e7), (
            Expected("T", 1.0, exact, "microscopic-mass example: running time"),
            Expected("M", 1e-20, 1.5, "microscopic-mass example: body mass"),
            Expected("u", 3e3, 1.1, "microscopic-mass example: hand speed c/n"),
            Expected("dx", 3e-4, 1.5, "microscopic-mass example: dx = u tau"),
            Expected("dial", 3e3, 1.5, "microscopic-mass example: 30 m dial"),
            Expected("R", 1e-7, 2.0, "microscopic-mass example: radius at 1 g/cm^3"),
            Expected("req_d.pass", True, 1.0, "microscopic-mass example: dx >> R"),
            Expected("mass_class", "microscopic", 1.0, "microscopic-mass example"),
            Expected("size_class", "macroscopic", 1.0, "microscopic-mass example: dial"),
            Expected("spreading.satisfied", True, 1.0, "width at most doubles over T"),
        )),
        ReproCase("nucleon-n100", DesignInput.of(MAXIMAL_DIAL, rho=nuc, n=100, M=mn), (
            Expected("tau", 1e-18, 1.5, "nucleon clock, n = 100: accuracy"),
            Expected("T", 1e-16, 1.5, "nucleon clock, n = 100: running time"),
            Expected("dx", 3e-10, 1.5, "nucleon clock, n = 100: packet width"),
            Expected("dial", 3e-8, 1.5, "nucleon clock, n = 100: dial length"),
            Expected("u", 3e8, 1.1, "nucleon clock, n = 100: hand speed c/100"),
            Expected("R", 1e-13, 2.0, "nucleon clock, n = 100: nuclear radius"),
            Expected("req_c.pass", True, 1.0, "nucleon clock, n = 100: R << 2l"),
            Expected("req_d.pass", True, 1.0, "nucleon clock, n = 100: R << dx"),
            Expected("relativistic_warning", True, 1.0, "u = c/100 is not comfortably slow"),
            Expected("size_class", "microscopic", 1.0, "nucleon clock, n = 100: small dial"),
            Expected("spreading.satisfied", True, 1.0, "width at most doubles over T"),
        )),
        ReproCase("nucleon-n10", DesignInput.of(MAXIMAL_DIAL, rho=nuc, n=10, M=mn), (
            Expected("dx/R", 10.0, 2.0, "nucleon clock, n = 10: dx only about 10 R"),
            Expected("u", 3e9, 1.1, "nucleon clock, n = 10: u = 0.1 c"),
            Expected("req_d.pass", True, 1.0, "nucleon clock, n = 10: requirements met"),
            Expected("relativistic_warning", True, 1.0, "nucleon clock, n = 10: u = 0.1 c"),
        )),
    ]


def repro_cases(constants: PhysicalConstants, pattern: Optional[str] = None) -> list[ReproCase]:
    cases = _cases(constants)
    if pattern:
        cases = [c for c in cases if fnmatch.fnmatchcase(c.name, pattern)]
    return cases


def _lookup(key: str, design: ClockDesign, report: FeasibilityReport,
            spreading: SpreadingReport):
    if "/" in key:
        a, b = key.split("/")
        return getattr(design, a) / getattr(design, b)
    if key.startswith("req_"):
        req, attr = key.split(".")
        r = getattr(report, req)
        return r.passed if attr == "pass" else r.margin
    if key.startswith("spreading."):
        return getattr(spreading, key.split(".", 1)[1])
    if key in DESIGN_FIELDS:
        return getattr(design, key)
    return getattr(report, key)


def run_case(case: ReproCase, constants: PhysicalConstants) -> list[dict]:
    design = close_design(case.inputs, constants)
    report = check(design, case.strong_factor, case.rel_threshold, constants)
    spreading = verify_spreading_condition(design, constants)
    rows = []
    for exp in case.expected:
        got = _lookup(exp.field, design, report, spreading)
        if isinstance(exp.value, (bool, str)):
            ratio = None
            ok = got == exp.value
        else:
            ratio = got / exp.value
            ok = max(ratio, 1 / ratio) <= exp.factor
        rows.append({"case": case.name, "field": exp.field, "computed": got,
                     "expected": exp.value, "ratio": ratio, "factor": exp.factor,
                     "pass": bool(ok), "citation": exp.citation})
    return rows


def reproduce(constants: PhysicalConstants, pattern: Optional[str] = None) -> list[dict]:
    rows = []
    for case in repro_cases(constants, pattern):
        rows.extend(run_case(case, constants))
    return rows


# --- formatting -------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return f"{v:.6g}"


def _metric(name: str, value: float) -> str:
    unit = UNITS.get(name)
    if unit == "cm":
        return f" ({value / 100:.4g} m)"
    if unit == "g":
        return f" ({value / 1000:.4g} kg)"
    if unit == "cm/s":
        return f" ({value / 100:.4g} m/s)"
    return ""


def design_table(design: ClockDesign, human: bool = False) -> list[str]:
    lines = []
    for name in DESIGN_FIELDS:
        v = getattr(design, name)
        extra = _metric(name, v) if human else ""
        lines.append(f"  {name:<5} {fmt(v):>14} {UNITS[name]:<7}{extra}".rstrip())
    lines.append(f"  {'3M':<5} {fmt(design.total_mass):>14} g")
    lines.append(f"  mode  {design.mode}")
    return lines


def report_table(report: FeasibilityReport, material: str) -> list[str]:
    labels = {"req_a": "n >> 1", "req_b": "L_M << dx", "req_c": "R << 2l",
              "req_d": "dx >> R"}
    lines = [f"  strong factor {fmt(report.strong_factor)}"]
    for key, label in labels.items():
        r = getattr(report, key)
        lines.append(f"  {key} {label:<10} {'PASS' if r.passed else 'FAIL'}  "
                     f"margin {fmt(r.margin)}")
    lines.append(f"  relativistic warning  {report.relativistic_warning}")
    lines.append(f"  mass class  {report.mass_class}")
    lines.append(f"  size class  {report.size_class}")
    lines.append(f"  material    {material}")
    return lines


def table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    cells = [[fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    out = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    out.append("  ".join("-" * w for w in widths))
    for row in cells:
        out.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(out) + "\n"


def to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore",
                       lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_value(r.get(k)) for k in columns})
    return buf.getvalue()


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def to_json(doc: dict) -> str:
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def envelope(command: str, constants: PhysicalConstants, **payload) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "command": command,
           "constants": constants.as_dict()}
    doc.update(payload)
    return doc


def design_record(design: ClockDesign, report: Optional[FeasibilityReport] = None,
                  material: Optional[str] = None) -> dict:
    rec = design.as_dict()
    if report is not None:
        d = report.as_dict()
        for key in ("req_a", "req_b", "req_c", "req_d"):
            rec[f"{key}_pass"] = d[key]["pass"]
            rec[f"{key}_margin"] = d[key]["margin"]
        rec.update(relativistic_warning=d["relativistic_warning"],
                   mass_class=d["mass_class"], size_class=d["size_class"])
    if material is not None:
        rec["material"] = material
    return rec


def sweep_json(result: SweepResult) -> dict:
    return {
        "axes": [
            {"field": a.field, "lo": a.lo, "hi": a.hi, "points": a.points,
             "grid": [float(v) for v in a.grid]}
            for a in (result.axis1, result.axis2)
        ],
        "mode": result.mode,
        "strong_factor": result.strong_factor,
        "rho": result.rho,
        "summary": result.summary,
        "cells": sweep_rows(result),
    }


def sweep_columns(result: SweepResult) -> list[str]:
    return (["i", "j", result.axis1.field + "_axis", result.axis2.field + "_axis",
             "valid"] + list(DESIGN_COLUMNS) + list(REPORT_COLUMNS)
            + ["feasible", "realizable", "error"])


# --- SVG region map -----------------------------------------------------------

def region_of(cell) -> str:
    if not cell.valid:
        return "invalid"
    r = cell.report
    if not r.req_d.passed:
        return "macro_behaviour"
    if not r.req_c.passed:
        return "oversized_body"
    if r.mass_class != "microscopic":
        return "macroscopic_mass"
    if r.size_class != "microscopic":
        return "micro_mass_large_dial"
    if not cell.realizable:
        return "unstable_nucleus"
    return "micro_clock"


def sweep_svg(result: SweepResult, title: str = "") -> str:
    """Standalone SVG map of the sweep on log-log axes."""
    a1, a2 = result.axis1, result.axis2
    g1 = [math.log10(v) for v in a1.grid]
    g2 = [math.log10(v) for v in a2.grid]
    step1 = (g1[-1] - g1[0]) / (len(g1) - 1)
    step2 = (g2[-1] - g2[0]) / (len(g2) - 1)
    x0, x1 = g1[0] - step1 / 2, g1[-1] + step1 / 2
    y0, y1 = g2[0] - step2 / 2, g2[-1] + step2 / 2
    left, top, pw, ph = 80, 40, 480, 360
    legend_x = left + pw + 30
    width, height = legend_x + 200, top + ph + 60

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- swclock {__version__} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{left}" y="20" font-size="13">{_esc(title)}</text>')
    cw, ch = pw / len(g1), ph / len(g2)
    for cell in result.iter_cells():
        color = REGION_COLORS[region_of(cell)]
        cx, cy = px(g1[cell.i]), py(g2[cell.j])
        out.append(f'<rect x="{cx - cw / 2:.2f}" y="{cy - ch / 2:.2f}" width="{cw:.2f}" '
                   f'height="{ch:.2f}" fill="{color}" stroke="white" stroke-width="0.5"/>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" '
               'stroke="black"/>')
    for d in range(math.ceil(x0), math.floor(x1) + 1):
        x = px(d)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" '
                   'stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">1e{d}</text>')
    for d in range(math.ceil(y0), math.floor(y1) + 1):
        y = py(d)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" '
                   'stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">1e{d}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{top + ph + 40}" text-anchor="middle">'
               f'{_esc(a1.field)} [{_esc(UNITS.get(a1.field, ""))}] (log)</text>')
    out.append(f'<text x="20" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 20 {top + ph / 2})">'
               f'{_esc(a2.field)} [{_esc(UNITS.get(a2.field, ""))}] (log)</text>')
    out.append('<g id="legend">')
    for k, (key, color) in enumerate(REGION_COLORS.items()):
        y = top + 10 + 22 * k
        out.append(f'<rect x="{legend_x}" y="{y}" width="14" height="14" fill="{color}"/>')
        out.append(f'<text x="{legend_x + 20}" y="{y + 11}">{_esc(REGION_LEGEND[key])}</text>')
    best = result.summary.get("max_feasible_n")
    out.append(f'<text x="{legend_x}" y="{top + 10 + 22 * len(REGION_COLORS) + 14}">'
               f'max feasible n: {fmt(best)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")

