"""CGS quantities and the physical-constant table.

Every number in this package is a CGS value (centimetre, gram, second).
Dimensions are tracked structurally as exponent vectors over
(mass, length, time), so ``Quantity`` arithmetic catches unit slips in the
closure solver without pulling in a full units library.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Union

CONSTANTS_ENV_VAR = "SWCLOCK_CONSTANTS"


class ConfigurationError(ValueError):
    """Raised for an invalid constants override."""


Exponent = Union[int, Fraction]


@dataclass(frozen=True)
class Dimension:
    mass: Fraction = Fraction(0)
    length: Fraction = Fraction(0)
    time: Fraction = Fraction(0)

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, Fraction(getattr(self, f.name)))

    def __mul__(self, other: "Dimension") -> "Dimension":
        return Dimension(self.mass + other.mass, self.length + other.length,
                         self.time + other.time)

    def __truediv__(self, other: "Dimension") -> "Dimension":
        return Dimension(self.mass - other.mass, self.length - other.length,
                         self.time - other.time)

    def __pow__(self, p: Exponent) -> "Dimension":
        p = Fraction(p)
        return Dimension(self.mass * p, self.length * p, self.time * p)

    @property
    def name(self) -> str:
        for key, dim in NAMED_DIMENSIONS.items():
            if dim == self:
                return key
        parts = []
        for sym, e in (("g", self.mass), ("cm", self.length), ("s", self.time)):
            if e:
                parts.append(sym if e == 1 else f"{sym}^{e}")
        return "·".join(parts) or "dimensionless"


NAMED_DIMENSIONS: dict[str, Dimension] = {
    "dimensionless": Dimension(),
    "mass": Dimension(mass=1),
    "length": Dimension(length=1),
    "time": Dimension(time=1),
    "speed": Dimension(length=1, time=-1),
    "momentum": Dimension(mass=1, length=1, time=-1),
    "density": Dimension(mass=1, length=-3),
    "action": Dimension(mass=1, length=2, time=-1),
}


def dimension(name: str) -> Dimension:
    try:
        return NAMED_DIMENSIONS[name]
    except KeyError:
        raise ValueError(f"unknown dimension {name!r}") from None


@dataclass(frozen=True)
class Quantity:
    """A finite CGS scalar with its dimension."""

    value: float
    dim: Dimension = Dimension()

    def __post_init__(self):
        if isinstance(self.dim, str):
            object.__setattr__(self, "dim", dimension(self.dim))
        value = float(self.value)
        if not math.isfinite(value):
            raise ValueError(f"quantity value must be finite, got {self.value!r}")
        object.__setattr__(self, "value", value)

    def _same_dim(self, other: "Quantity", op: str) -> None:
        if not isinstance(other, Quantity):
            raise TypeError(f"cannot {op} Quantity and {type(other).__name__}")
        if other.dim != self.dim:
            raise TypeError(
                f"dimension mismatch in {op}: {self.dim.name} vs {other.dim.name}"
            )

    def __add__(self, other: "Quantity") -> "Quantity":
        self._same_dim(other, "add")
        return Quantity(self.value + other.value, self.dim)

    def __sub__(self, other: "Quantity") -> "Quantity":
        self._same_dim(other, "subtract")
        return Quantity(self.value - other.value, self.dim)

    def __neg__(self) -> "Quantity":
        return Quantity(-self.value, self.dim)

    def __mul__(self, other):
        if isinstance(other, Quantity):
            return Quantity(self.value * other.value, self.dim * other.dim)
        return Quantity(self.value * float(other), self.dim)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Quantity):
            return Quantity(self.value / other.value, self.dim / other.dim)
        return Quantity(self.value / float(other), self.dim)

    def __rtruediv__(self, other):
        return Quantity(float(other) / self.value, Dimension() / self.dim)

    def __pow__(self, p: Exponent) -> "Quantity":
        return Quantity(self.value ** float(p), self.dim ** p)

    def __lt__(self, other: "Quantity") -> bool:
        self._same_dim(other, "compare")
        return self.value < other.value

    def __le__(self, other: "Quantity") -> bool:
        self._same_dim(other, "compare")
        return self.value <= other.value

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return f"{self.value:.6g} [{self.dim.name}]"


@dataclass(frozen=True)
class PhysicalConstants:
    """CGS constant table shared by every computation.

    Defaults are CODATA 2018 values; the nucleon mass is the proton mass.
    ``density_nuclear`` is picked so a single nucleon gets a radius near
    1e-13 cm with the 0.62 sphere coefficient.
    """

    hbar: float = 1.054571817e-27  # erg s
    c: float = 2.99792458e10  # cm/s
    nucleon_mass: float = 1.67262192e-24  # g
    density_terrestrial: float = 1.0  # g/cm^3
    density_nuclear: float = 2.3e14  # g/cm^3

    def __post_init__(self):
        for f in fields(self):
            _check_positive(f.name, getattr(self, f.name))

    @property
    def hbar_over_c2(self) -> float:
        return self.hbar / self.c**2

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


CONSTANT_DIMENSIONS = {
    "hbar": "action",
    "c": "speed",
    "nucleon_mass": "mass",
    "density_terrestrial": "density",
    "density_nuclear": "density",
}


def _check_positive(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name}: not a number: {value!r}") from None
    if not math.isfinite(v) or v <= 0:
        raise ConfigurationError(f"{name}: must be positive and finite, got {value!r}")
    return v


def read_constants_file(path: Union[str, Path]) -> dict[str, float]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    known = {f.name for f in fields(PhysicalConstants)}
    out: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else (":" if ":" in line else None)
        if sep is None:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split(sep, 1))
        if key not in known:
            raise ConfigurationError(f"{path}:{lineno}: unknown constant {key!r}")
        out[key] = _check_positive(key, value)
    return out


def load_constants(
    overrides: Mapping[str, float] | None = None,
    path: Union[str, Path, None] = None,
    use_env: bool = False,
) -> PhysicalConstants:
    """Return the default table merged with overrides.

    Precedence, lowest first: defaults, the file at ``path`` (or at
    ``$SWCLOCK_CONSTANTS`` when ``use_env`` is set and no path is given),
    then ``overrides``.
    """
    if path is None and use_env:
        path = os.environ.get(CONSTANTS_ENV_VAR) or None
    merged: dict[str, float] = {}
    if path is not None:
        merged.update(read_constants_file(path))
    known = {f.name for f in fields(PhysicalConstants)}
    for key, value in (overrides or {}).items():
        if key not in known:
            raise ConfigurationError(f"unknown constant {key!r}")
        merged[key] = _check_positive(key, value)
    return replace(PhysicalConstants(), **merged)


DEFAULT_CONSTANTS = PhysicalConstants()
