"""Closure of the Salecker-Wigner design relations.

Every design relation is a monomial: a product of powers of design
variables and constants equal to one.  Taking logarithms turns the system
into a linear one with small rational coefficients, which is reduced here
exactly (``fractions.Fraction``).  Each unknown then comes out as an
explicit monomial in the knowns, evaluated once in floating point.  No
iteration and no tolerances are involved apart from the consistency check
on over-determined input.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Union

from .quantities import DEFAULT_CONSTANTS, PhysicalConstants, Quantity, dimension

GENERAL_DIAL = "general_dial"
MAXIMAL_DIAL = "maximal_dial"
MODES = (GENERAL_DIAL, MAXIMAL_DIAL)

RADIUS_COEFFICIENT = 0.62
CONSISTENCY_RTOL = 1e-9

# field name -> dimension name; order is the serialisation order
DESIGN_FIELDS: dict[str, str] = {
    "tau": "time",
    "T": "time",
    "n": "dimensionless",
    "u": "speed",
    "dial": "length",
    "dx": "length",
    "dp": "momentum",
    "dt": "time",
    "du": "speed",
    "M": "mass",
    "L_M": "length",
    "R": "length",
    "rho": "density",
}

# fields a caller may fix; rho is a material choice, not a design unknown
SOLVABLE = tuple(k for k in DESIGN_FIELDS if k != "rho")
PRIMARY_INPUTS = ("tau", "T", "n", "M", "u", "dial", "dx")

# symbols that are always known
_CONSTANT_SYMBOLS = ("hbar", "c", "rho", "k_R")


@dataclass(frozen=True)
class Relation:
    label: str
    powers: Mapping[str, int]


RELATIONS = (
    Relation("n = T/tau", {"T": 1, "n": -1, "tau": -1}),
    Relation("T = dial/u", {"T": 1, "u": 1, "dial": -1}),
    Relation("dx = u*tau", {"dx": 1, "u": -1, "tau": -1}),
    Relation("M = hbar*T/dx^2", {"M": 1, "dx": 2, "hbar": -1, "T": -1}),
    Relation("dp = hbar/dx", {"dp": 1, "dx": 1, "hbar": -1}),
    Relation("dt = dx/u", {"dt": 1, "dx": -1, "u": 1}),
    Relation("du = dp/M", {"du": 1, "dp": -1, "M": 1}),
    Relation("L_M = hbar/(M*c)", {"L_M": 1, "hbar": -1, "M": 1, "c": 1}),
    Relation("R = 0.62*(M/rho)^(1/3)", {"R": 3, "M": -1, "rho": 1, "k_R": -3}),
)
MAXIMAL_RELATION = Relation("dial = c*tau", {"dial": 1, "c": -1, "tau": -1})


class DesignError(ValueError):
    """Base class for closure failures."""


class UnderdeterminedError(DesignError):
    def __init__(self, missing: int, candidates: list[str]):
        self.missing = missing
        self.candidates = candidates
        super().__init__(
            f"under-determined: need {missing} more of {{{', '.join(candidates)}}}"
        )


class InconsistentError(DesignError):
    def __init__(self, relations: list[str], rel_error: float):
        self.relations = relations
        self.rel_error = rel_error
        super().__init__(
            "inconsistent input: knowns violate "
            + " combined with ".join(repr(r) for r in relations)
            + f" (relative error {rel_error:.3g})"
        )


def relations_for(mode: str) -> tuple[Relation, ...]:
    if mode == GENERAL_DIAL:
        return RELATIONS
    if mode == MAXIMAL_DIAL:
        return RELATIONS + (MAXIMAL_RELATION,)
    raise DesignError(f"unknown mode {mode!r}; expected one of {MODES}")


def degrees_of_freedom(mode: str) -> int:
    return len(SOLVABLE) - len(relations_for(mode))


@dataclass(frozen=True)
class ClockDesign:
    """A closed design; all values CGS.

    ``dial`` is the full dial length 2l and ``M`` the mass of each of the
    three bodies.
    """

    tau: float
    T: float
    n: float
    u: float
    dial: float
    dx: float
    dp: float
    dt: float
    du: float
    M: float
    L_M: float
    R: float
    rho: float
    mode: str = MAXIMAL_DIAL

    def __post_init__(self):
        for name in DESIGN_FIELDS:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DesignError(f"{name} must be positive and finite, got {v!r}")
        if self.mode not in MODES:
            raise DesignError(f"unknown mode {self.mode!r}")

    @property
    def ell(self) -> float:
        return self.dial / 2

    @property
    def total_mass(self) -> float:
        return 3 * self.M

    def quantity(self, name: str) -> Quantity:
        return Quantity(getattr(self, name), dimension(DESIGN_FIELDS[name]))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DesignInput:
    mode: str = MAXIMAL_DIAL
    knowns: Mapping[str, Union[float, Quantity]] = field(default_factory=dict)
    rho: Union[float, None] = None

    @classmethod
    def of(cls, mode: str = MAXIMAL_DIAL, rho: float | None = None, **knowns):
        return cls(mode=mode, knowns=knowns, rho=rho)


def _known_value(name: str, value) -> float:
    if name not in SOLVABLE:
        raise DesignError(f"unknown design field {name!r}")
    if isinstance(value, Quantity):
        expected = dimension(DESIGN_FIELDS[name])
        if value.dim != expected:
            raise DesignError(
                f"{name} needs dimension {expected.name}, got {value.dim.name}"
            )
        value = value.value
    v = float(value)
    if not (math.isfinite(v) and v > 0):
        raise DesignError(f"{name} must be positive and finite, got {value!r}")
    return v


def _rref(rows: list[list[Fraction]], ncols: int):
    """Reduce ``rows`` in place on the first ``ncols`` columns.

    Returns the pivot column list.  Row operations act on the whole row, so
    trailing columns can carry bookkeeping.
    """
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][col]
        rows[r] = [x / lead for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots


def _monomial(exponents: Mapping[str, Fraction], values: Mapping[str, float]) -> float:
    num = den = 1.0
    for name, e in exponents.items():
        if e > 0:
            num *= values[name] ** (int(e) if e.denominator == 1 else float(e))
        elif e < 0:
            den *= values[name] ** (int(-e) if e.denominator == 1 else float(-e))
    out = num / den if den != 0 else math.inf
    if not math.isfinite(out) or out == 0.0:
        # intermediate over/underflow; the log form is slightly less exact
        out = math.exp(math.fsum(float(e) * math.log(values[k])
                                 for k, e in exponents.items()))
    return out


@dataclass(frozen=True)
class _Elimination:
    solutions: tuple  # (unknown, ((symbol, exponent), ...))
    conditions: tuple  # (((symbol, exponent), ...), (relation label, ...))
    missing: int
    candidates: tuple


@lru_cache(maxsize=None)
def _eliminate(mode: str, known_names: frozenset) -> _Elimination:
    rels = relations_for(mode)
    unknown = [k for k in SOLVABLE if k not in known_names]
    known_syms = [k for k in SOLVABLE if k in known_names] + list(_CONSTANT_SYMBOLS)
    nu, nk, nr = len(unknown), len(known_syms), len(rels)
    rows = []
    for i, rel in enumerate(rels):
        row = [Fraction(rel.powers.get(k, 0)) for k in unknown]
        row += [Fraction(rel.powers.get(k, 0)) for k in known_syms]
        row += [Fraction(int(i == j)) for j in range(nr)]  # provenance
        rows.append(row)
    pivots = _rref(rows, nu)

    # rows with no unknowns left are consistency conditions on the knowns
    conditions = []
    for row in rows[len(pivots):]:
        ks = tuple((s, e) for s, e in zip(known_syms, row[nu:nu + nk]) if e)
        if ks:
            involved = tuple(rels[j].label for j, w in enumerate(row[nu + nk:]) if w)
            conditions.append((ks, involved))

    missing = nu - len(pivots)
    candidates: tuple = ()
    if missing:
        free = [unknown[c] for c in range(nu) if c not in pivots]
        candidates = tuple(k for k in PRIMARY_INPUTS if k in unknown) or tuple(free)
        return _Elimination((), tuple(conditions), missing, candidates)

    solutions = tuple(
        (unknown[col], tuple((s, -e) for s, e in zip(known_syms, rows[r][nu:nu + nk]) if e))
        for r, col in enumerate(pivots)
    )
    return _Elimination(solutions, tuple(conditions), 0, ())


def solve_monomials(mode: str, knowns: Mapping[str, float],
                    constants: Mapping[str, float]) -> dict[str, float]:
    """Solve the design relations for every field not in ``knowns``."""
    elim = _eliminate(mode, frozenset(knowns))
    values = dict(knowns)
    values.update(constants)
    for exps, involved in elim.conditions:
        log_residual = math.fsum(float(e) * math.log(values[s]) for s, e in exps)
        rel_error = abs(math.expm1(log_residual))
        if rel_error > CONSISTENCY_RTOL:
            raise InconsistentError(list(involved), rel_error)
    if elim.missing:
        raise UnderdeterminedError(elim.missing, list(elim.candidates))
    return {name: _monomial(dict(exps), values) for name, exps in elim.solutions}


def close_design(inp: DesignInput,
                 constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ClockDesign:
    """Close the full design tuple from ``inp.knowns``.

    Maximal-dial mode needs two independent knowns, general-dial mode
    three.  Consistent redundant knowns are accepted; inconsistent ones
    raise ``InconsistentError`` naming the relation they break.
    """
    relations_for(inp.mode)
    knowns = {k: _known_value(k, v) for k, v in inp.knowns.items()}
    rho = constants.density_terrestrial if inp.rho is None else _known_value_rho(inp.rho)
    syms = {"hbar": constants.hbar, "c": constants.c, "rho": rho,
            "k_R": RADIUS_COEFFICIENT}
    values = dict(knowns)
    values.update(solve_monomials(inp.mode, knowns, syms))
    return ClockDesign(rho=rho, mode=inp.mode, **{k: values[k] for k in SOLVABLE})


def _known_value_rho(rho) -> float:
    if isinstance(rho, Quantity):
        if rho.dim != dimension("density"):
            raise DesignError(f"rho needs dimension density, got {rho.dim.name}")
        rho = rho.value
    v = float(rho)
    if not (math.isfinite(v) and v > 0):
        raise DesignError(f"rho must be positive and finite, got {rho!r}")
    return v


def invert_for(target: str, fixed: DesignInput,
               constants: PhysicalConstants = DEFAULT_CONSTANTS) -> Quantity:
    """Solve for a single field given the fixed knowns."""
    if target not in DESIGN_FIELDS:
        raise DesignError(f"unknown design field {target!r}")
    return close_design(fixed, constants).quantity(target)


def closure_residuals(design: ClockDesign,
                      constants: PhysicalConstants = DEFAULT_CONSTANTS) -> dict[str, float]:
    """Relative violation of every relation of the design's mode."""
    values = {k: getattr(design, k) for k in DESIGN_FIELDS}
    values.update(hbar=constants.hbar, c=constants.c, k_R=RADIUS_COEFFICIENT)
    out = {}
    for rel in relations_for(design.mode):
        log_res = math.fsum(e * math.log(values[k]) for k, e in rel.powers.items())
        out[rel.label] = abs(math.expm1(log_res))
    return out
