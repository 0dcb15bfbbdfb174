"""Requirement checks, size/mass classification and design-plane sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np

from .design import (
    MAXIMAL_DIAL,
    ClockDesign,
    DesignError,
    DesignInput,
    close_design,
)
from .quantities import DEFAULT_CONSTANTS, PhysicalConstants

MICRO_MASS_MAX = 1e-16  # g, inclusive
MICRO_DIAL_MAX = 1e-5  # cm, inclusive
MACRO_DIAL_MIN = 1.0  # cm, display threshold only
ATOMIC_RADIUS = 1e-8  # cm
BULK_MASS_MIN = 1e-3  # g

DEFAULT_STRONG_FACTOR = 10.0
DEFAULT_REL_THRESHOLD = 0.01

MATERIAL_LABELS = ("nucleon_scale", "unstable_nucleus_scale",
                   "atomic_solid_scale", "bulk_scale")


class Requirement(NamedTuple):
    passed: bool
    margin: float


@dataclass(frozen=True)
class FeasibilityReport:
    req_a: Requirement  # n >> 1
    req_b: Requirement  # L_M << dx
    req_c: Requirement  # R << dial
    req_d: Requirement  # dx >> R
    relativistic_warning: bool
    mass_class: str
    size_class: str
    strong_factor: float = DEFAULT_STRONG_FACTOR

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in (self.req_a, self.req_b, self.req_c, self.req_d))

    @property
    def microscopic(self) -> bool:
        return self.mass_class == "microscopic" and self.size_class == "microscopic"

    def as_dict(self) -> dict:
        out = {}
        for key in ("req_a", "req_b", "req_c", "req_d"):
            r = getattr(self, key)
            out[key] = {"pass": r.passed, "margin": r.margin}
        out.update(relativistic_warning=self.relativistic_warning,
                   mass_class=self.mass_class, size_class=self.size_class,
                   strong_factor=self.strong_factor)
        return out


def _requirement(lhs: float, rhs: float, strong_factor: float) -> Requirement:
    margin = lhs / (rhs * strong_factor)
    return Requirement(margin >= 1.0, margin)


def mass_class(M: float) -> str:
    return "microscopic" if M <= MICRO_MASS_MAX else "macroscopic"


def size_class(dial: float) -> str:
    if dial <= MICRO_DIAL_MAX:
        return "microscopic"
    if dial >= MACRO_DIAL_MIN:
        return "macroscopic"
    return "intermediate"


def check(design: ClockDesign,
          strong_factor: float = DEFAULT_STRONG_FACTOR,
          rel_threshold: float = DEFAULT_REL_THRESHOLD,
          constants: PhysicalConstants = DEFAULT_CONSTANTS) -> FeasibilityReport:
    """Evaluate requirements a) to d) and classify the design.

    A requirement "A >> B" passes when A/B >= strong_factor; the reported
    margin is A/(B*strong_factor), so pass means margin >= 1.
    """
    if not strong_factor > 1:
        raise ValueError(f"strong_factor must exceed 1, got {strong_factor}")
    if not 0 < rel_threshold < 1:
        raise ValueError(f"rel_threshold must lie in (0, 1), got {rel_threshold}")

    req_a = _requirement(design.n, 1.0, strong_factor)
    req_b = _requirement(design.dx, design.L_M, strong_factor)
    req_c = _requirement(design.dial, design.R, strong_factor)
    req_d = _requirement(design.dx, design.R, strong_factor)

    # L_M/dx = u/(n c), so b) follows from a) for any sub-luminal hand
    if req_a.passed and design.u <= constants.c and not req_b.passed:
        raise AssertionError(
            f"requirement b) failed although a) holds (n={design.n:g}); "
            "design is not a valid closure"
        )

    return FeasibilityReport(
        req_a=req_a, req_b=req_b, req_c=req_c, req_d=req_d,
        # inclusive so that u = c/100 is flagged at the default threshold
        relativistic_warning=design.u / constants.c >= rel_threshold,
        mass_class=mass_class(design.M),
        size_class=size_class(design.dial),
        strong_factor=strong_factor,
    )


def material_note(design: ClockDesign,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> str:
    """Rough material realisability label; never affects pass/fail.

    Up to ten nucleon masses a body can be a light nucleus.  Heavier bodies
    whose radius is below an atomic radius would need nuclear-matter
    density, i.e. a large nucleus, which does not exist as a stable object.
    """
    if design.M <= 10 * constants.nucleon_mass:
        return "nucleon_scale"
    if design.R < ATOMIC_RADIUS:
        return "unstable_nucleus_scale"
    if design.M < BULK_MASS_MIN:
        return "atomic_solid_scale"
    return "bulk_scale"


def density_for(M: float, rho: Union[str, float],
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Resolve a density choice: a number, 'terrestrial', 'nuclear' or 'auto'.

    'auto' uses nuclear density within ten nucleon masses and terrestrial
    density above.
    """
    if isinstance(rho, str):
        if rho == "terrestrial":
            return constants.density_terrestrial
        if rho == "nuclear":
            return constants.density_nuclear
        if rho == "auto":
            if M <= 10 * constants.nucleon_mass:
                return constants.density_nuclear
            return constants.density_terrestrial
        raise ValueError(f"unknown density choice {rho!r}")
    return float(rho)


@dataclass(frozen=True)
class Axis:
    field: str
    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"axis {self.field}: need at least 2 points, got {self.points}")
        if not (0 < self.lo < self.hi and math.isfinite(self.hi)):
            raise ValueError(f"axis {self.field}: need 0 < lo < hi, got {self.lo}, {self.hi}")

    @property
    def grid(self) -> np.ndarray:
        return np.geomspace(self.lo, self.hi, self.points)

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """Parse ``field:lo:hi:points``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"axis must look like field:lo:hi:points, got {text!r}")
        return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))


@dataclass(frozen=True)
class SweepCell:
    i: int
    j: int
    x: float
    y: float
    design: Optional[ClockDesign]
    report: Optional[FeasibilityReport]
    material: Optional[str]
    error: Optional[str] = None

    @property
    def valid(self) -> bool:
        return self.design is not None

    @property
    def feasible(self) -> bool:
        """All requirements that matter for a small clock, ignoring material."""
        r = self.report
        return (r is not None and r.req_c.passed and r.req_d.passed
                and r.microscopic)

    @property
    def realizable(self) -> bool:
        return self.feasible and self.material != "unstable_nucleus_scale"


@dataclass
class SweepResult:
    axis1: Axis
    axis2: Axis
    mode: str
    strong_factor: float
    rho: Union[str, float]
    cells: list[list[SweepCell]]
    summary: dict = field(default_factory=dict)

    def iter_cells(self):
        for row in self.cells:
            yield from row


def _summarise(cells: list[list[SweepCell]]) -> dict:
    counts: dict[str, int] = {}
    invalid = 0
    best = best_any = None
    for cell in (c for row in cells for c in row):
        if not cell.valid:
            invalid += 1
            continue
        key = f"{cell.report.mass_class}_mass/{cell.report.size_class}_size"
        counts[key] = counts.get(key, 0) + 1
        n = cell.design.n
        if cell.feasible:
            best_any = n if best_any is None else max(best_any, n)
        if cell.realizable:
            best = n if best is None else max(best, n)
    return {
        "class_counts": dict(sorted(counts.items())),
        "invalid_cells": invalid,
        "feasible_cells": sum(c.feasible for row in cells for c in row),
        "realizable_cells": sum(c.realizable for row in cells for c in row),
        "max_feasible_n": best,
        "max_feasible_n_ignoring_material": best_any,
    }


def sweep(axis1: Axis, axis2: Axis, mode: str = MAXIMAL_DIAL,
          strong_factor: float = DEFAULT_STRONG_FACTOR,
          rho: Union[str, float] = "auto",
          constants: PhysicalConstants = DEFAULT_CONSTANTS,
          rel_threshold: float = DEFAULT_REL_THRESHOLD,
          extra_knowns: Optional[dict] = None,
          workers: int = 1) -> SweepResult:
    """Close and check every cell of a log-spaced two-axis grid.

    ``summary['max_feasible_n']`` is the largest n with a cell that has
    microscopic mass and size, passes requirements c) and d), and is not
    an unstable-nucleus body.  Cells whose numbers overflow are kept as
    invalid instead of aborting the sweep.
    """
    if axis1.field == axis2.field:
        raise ValueError("sweep axes must be distinct fields")
    extra = dict(extra_knowns or {})
    # fail fast if the axes cannot determine a closure
    close_with_density({axis1.field: axis1.lo, axis2.field: axis2.lo, **extra},
                       mode, rho, constants)

    g1, g2 = axis1.grid, axis2.grid

    def row(i: int) -> list[SweepCell]:
        out = []
        for j, y in enumerate(g2):
            x = float(g1[i])
            try:
                d = close_with_density({axis1.field: x, axis2.field: float(y), **extra},
                                       mode, rho, constants)
                rep = check(d, strong_factor, rel_threshold, constants)
                out.append(SweepCell(i, j, x, float(y), d, rep, material_note(d, constants)))
            except (DesignError, OverflowError, ZeroDivisionError) as exc:
                out.append(SweepCell(i, j, x, float(y), None, None, None, str(exc)))
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(row, range(len(g1))))
    else:
        cells = [row(i) for i in range(len(g1))]

    return SweepResult(axis1, axis2, mode, strong_factor, rho, cells, _summarise(cells))


def close_with_density(knowns: dict, mode: str = MAXIMAL_DIAL,
                       rho: Union[str, float] = "terrestrial",
                       constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ClockDesign:
    """``close_design`` with a symbolic density choice (see ``density_for``)."""
    M = knowns.get("M")
    if M is None and isinstance(rho, str) and rho == "auto":
        # density depends on the mass, which is only known after closure
        M = close_design(DesignInput(mode, knowns, constants.density_terrestrial),
                         constants).M
    density = density_for(M if M is not None else 1.0, rho, constants)
    return close_design(DesignInput(mode, knowns, density), constants)


def sweep_rows(result: SweepResult) -> list[dict]:
    """Flat per-cell records, used by the CSV and JSON writers."""
    rows = []
    for cell in result.iter_cells():
        rec = {"i": cell.i, "j": cell.j, result.axis1.field + "_axis": cell.x,
               result.axis2.field + "_axis": cell.y, "valid": cell.valid}
        if cell.valid:
            d = asdict(cell.design)
            rec.update(d)
            rep = cell.report.as_dict()
            for key in ("req_a", "req_b", "req_c", "req_d"):
                rec[f"{key}_pass"] = rep[key]["pass"]
                rec[f"{key}_margin"] = rep[key]["margin"]
            rec.update(relativistic_warning=rep["relativistic_warning"],
                       mass_class=rep["mass_class"], size_class=rep["size_class"],
                       material=cell.material, feasible=cell.feasible,
                       realizable=cell.realizable)
        else:
            rec["error"] = cell.error
        rows.append(rec)
    return rows

