"""Free Gaussian packet dynamics behind the clock's spreading assumption.

Three independent views of the same physics:

* ``width_at``: closed-form width of a free minimal Gaussian packet;
* ``propagate_grid``: the sampled wavefunction evolved by one exact
  momentum-space phase (FFT), measured empirically;
* ``arrival_time_spread``: semiclassical Monte Carlo of the hand's passage
  time over the dial.

Two width conventions are supported.  ``standard_deviation_hbar_half``
reads a width as the position standard deviation (sigma_x sigma_p = hbar/2);
``paper_hbar`` reads it as sqrt(2) sigma_x, so that width times momentum
width equals hbar.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

import numpy as np

from .design import ClockDesign
from .quantities import DEFAULT_CONSTANTS, PhysicalConstants

STANDARD = "standard_deviation_hbar_half"
PAPER = "paper_hbar"
CONVENTIONS = (STANDARD, PAPER)

SUPPORT_SIGMAS = 8.0
# amplitude of |psi(k)| at the Nyquist edge stays below exp(-k^2/(4 s_k^2)) ~ 1e-16
_K_SIGMAS = 14.0

SPREADING_MAX = 2.5
MAX_DISCARD_FRACTION = 1e-3
MC_BATCH = 1 << 16


class DomainTooSmallError(ValueError):
    def __init__(self, message: str, suggested: tuple[float, float], points: int):
        self.suggested = suggested
        self.points = points
        super().__init__(
            f"{message}; try domain ({suggested[0]:.6g}, {suggested[1]:.6g}) "
            f"with {points} points"
        )


class SemiclassicalBreakdownError(ValueError):
    pass


def _convention_factor(convention: str) -> float:
    """Ratio width/sigma_x for a convention."""
    if convention == STANDARD:
        return 1.0
    if convention == PAPER:
        return math.sqrt(2.0)
    raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")


@dataclass(frozen=True)
class GaussianPacketState:
    """Minimal Gaussian prepared at time 0, viewed at elapsed time ``t``.

    ``center`` and ``velocity`` are the values at preparation; the hand of
    the clock starts at +l with velocity -u.
    """

    center: float
    velocity: float
    sigma0: float
    mass: float
    t: float = 0.0
    convention: str = STANDARD

    def __post_init__(self):
        _convention_factor(self.convention)
        if not self.sigma0 > 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.t >= 0:
            raise ValueError(f"t must be non-negative, got {self.t}")

    @property
    def sigma_x0(self) -> float:
        """Initial position standard deviation."""
        return self.sigma0 / _convention_factor(self.convention)

    def center_at(self, t: float) -> float:
        return self.center + self.velocity * t

    def with_convention(self, convention: str) -> "GaussianPacketState":
        factor = _convention_factor(convention)
        return replace(self, sigma0=self.sigma_x0 * factor, convention=convention)

    @classmethod
    def hand_of(cls, design: ClockDesign, convention: str = PAPER) -> "GaussianPacketState":
        return cls(center=design.ell, velocity=-design.u, sigma0=design.dx,
                   mass=design.M, convention=convention)


def spreading_parameter(mass: float, sigma_x0: float, t: float,
                        hbar: float = DEFAULT_CONSTANTS.hbar) -> float:
    return hbar * t / (2.0 * mass * sigma_x0**2)


def width_at(state: GaussianPacketState, t: float,
             hbar: float = DEFAULT_CONSTANTS.hbar) -> float:
    """Width at time ``t`` after preparation, in the state's convention."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    s = spreading_parameter(state.mass, state.sigma_x0, t, hbar)
    return state.sigma0 * math.hypot(1.0, s)


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    points: int

    def __post_init__(self):
        if self.points < 2 or self.points & (self.points - 1):
            raise ValueError(f"points must be a power of two, got {self.points}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / self.points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.points)


@dataclass(frozen=True)
class GridState:
    domain: tuple[float, float]
    points: int
    amplitudes: np.ndarray
    mass: float
    t: float

    @property
    def spacing(self) -> float:
        return (self.domain[1] - self.domain[0]) / self.points

    @property
    def x(self) -> np.ndarray:
        return self.domain[0] + self.spacing * np.arange(self.points)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density) * self.spacing)

    def mean(self) -> float:
        # measured relative to the domain centre to limit cancellation
        mid = 0.5 * (self.domain[0] + self.domain[1])
        p = self.density * self.spacing
        return mid + float(np.sum(p * (self.x - mid)) / np.sum(p))

    def std(self) -> float:
        p = self.density * self.spacing
        xc = self.x - self.mean()
        return float(np.sqrt(np.sum(p * xc**2) / np.sum(p)))

    def width(self, convention: str = STANDARD) -> float:
        return self.std() * _convention_factor(convention)


def suggest_grid(state: GaussianPacketState, t: float,
                 hbar: float = DEFAULT_CONSTANTS.hbar,
                 margin: float = 10.0) -> GridSpec:
    """Smallest power-of-two grid that holds and resolves the packet up to ``t``."""
    sx0 = state.sigma_x0
    sxt = sx0 * math.hypot(1.0, spreading_parameter(state.mass, sx0, t, hbar))
    c0, c1 = state.center, state.center_at(t)
    lo = min(c0 - margin * sx0, c1 - margin * sxt)
    hi = max(c0 + margin * sx0, c1 + margin * sxt)
    k0 = abs(state.mass * state.velocity / hbar)
    k_need = k0 + _K_SIGMAS / (2.0 * sx0)
    points = 1 << max(4, math.ceil(math.log2((hi - lo) * k_need / math.pi)))
    return GridSpec(lo, hi, points)


def _check_grid(state: GaussianPacketState, grid: GridSpec, t: float, hbar: float):
    sx0 = state.sigma_x0
    sxt = sx0 * math.hypot(1.0, spreading_parameter(state.mass, sx0, t, hbar))
    ok = True
    for c, s in ((state.center, sx0), (state.center_at(t), sxt)):
        if c - SUPPORT_SIGMAS * s < grid.x_min or c + SUPPORT_SIGMAS * s > grid.x_max:
            ok = False
    if not ok:
        g = suggest_grid(state, t, hbar)
        raise DomainTooSmallError(
            f"packet support leaves the domain ({grid.x_min:.6g}, {grid.x_max:.6g}) "
            f"before t={t:.6g}", (g.x_min, g.x_max), g.points)
    k0 = abs(state.mass * state.velocity / hbar)
    if k0 + _K_SIGMAS / (2.0 * sx0) > math.pi / grid.spacing:
        g = suggest_grid(state, t, hbar)
        raise DomainTooSmallError(
            f"grid spacing {grid.spacing:.3g} does not resolve the packet momentum",
            (g.x_min, g.x_max), g.points)


def sample_initial(state: GaussianPacketState, grid: GridSpec,
                   hbar: float = DEFAULT_CONSTANTS.hbar) -> np.ndarray:
    sx0 = state.sigma_x0
    x = grid.x
    k0 = state.mass * state.velocity / hbar
    psi = np.exp(-((x - state.center) ** 2) / (4.0 * sx0**2)
                 + 1j * k0 * (x - state.center))
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.spacing)
    return psi


def propagate_grid(initial: GaussianPacketState, grid: Optional[GridSpec],
                   t: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> GridState:
    """Evolve the sampled packet freely for time ``t`` in one spectral step.

    The initial packet is the minimal Gaussian at preparation; ``t`` is the
    time since preparation.  With ``grid=None`` a grid is chosen by
    ``suggest_grid``.
    """
    hbar = constants.hbar
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if grid is None:
        grid = suggest_grid(initial, t, hbar)
    _check_grid(initial, grid, t, hbar)
    psi = sample_initial(initial, grid, hbar)
    if t > 0:
        k = 2.0 * np.pi * np.fft.fftfreq(grid.points, d=grid.spacing)
        phase = np.exp(-1j * hbar * t / (2.0 * initial.mass) * k**2)
        psi = np.fft.ifft(np.fft.fft(psi) * phase)
    return GridState((grid.x_min, grid.x_max), grid.points, psi, initial.mass, t)


def write_density_csv(states: Iterable[GridState], path) -> Path:
    """Dump |psi|^2 snapshots as rows of (x, probability_density, t)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "probability_density", "t"])
        for st in states:
            for xi, pi in zip(st.x, st.density):
                w.writerow([repr(float(xi)), repr(float(pi)), repr(float(st.t))])
    return path


class SpreadingReport(NamedTuple):
    growth_paper: float
    growth_standard: float
    dt_end_paper: float
    dt_end_standard: float
    ratio_to_tau_paper: float
    ratio_to_tau_standard: float
    satisfied: bool


def verify_spreading_condition(design: ClockDesign,
                               constants: PhysicalConstants = DEFAULT_CONSTANTS
                               ) -> SpreadingReport:
    """Width growth over one run, with the design's dx read in both conventions.

    ``satisfied`` is true when both growth factors lie in (1, 2.5].
    """
    out = {}
    for conv, tag in ((PAPER, "paper"), (STANDARD, "standard")):
        st = GaussianPacketState(design.ell, -design.u, design.dx, design.M,
                                 convention=conv)
        w_end = width_at(st, design.T, constants.hbar)
        out[tag] = (w_end / design.dx, w_end / design.u)
    gp, gs = out["paper"][0], out["standard"][0]
    return SpreadingReport(
        growth_paper=gp, growth_standard=gs,
        dt_end_paper=out["paper"][1], dt_end_standard=out["standard"][1],
        ratio_to_tau_paper=out["paper"][1] / design.tau,
        ratio_to_tau_standard=out["standard"][1] / design.tau,
        satisfied=all(1.0 < g <= SPREADING_MAX for g in (gp, gs)),
    )


class ArrivalStats(NamedTuple):
    mean: float
    spread: float
    discarded: int
    samples: int


def analytic_arrival_spread(design: ClockDesign, velocity_spread: bool = True,
                            detector_jitter: bool = False) -> float:
    """First-order error propagation for t = (2l + dx0 - dd)/(u - dv)."""
    var = design.dx**2 / design.u**2
    if velocity_spread:
        var += design.dial**2 * design.du**2 / design.u**4
    if detector_jitter:
        var += design.dx**2 / design.u**2
    return math.sqrt(var)


def _arrival_batch(design, size, seed_seq, velocity_spread, detector_jitter):
    rng = np.random.default_rng(seed_seq)
    # offsets from the nominal start (+l) and velocity (-u); sampling the
    # offsets keeps precision when dx << l
    dx0 = rng.normal(0.0, design.dx, size)
    dv = rng.normal(0.0, design.du, size) if velocity_spread else np.zeros(size)
    dd = rng.normal(0.0, design.dx, size) if detector_jitter else 0.0
    speed = design.u - dv  # magnitude of the leftward velocity
    good = speed > 0
    t = (design.dial + dx0[good] - (dd[good] if detector_jitter else 0.0)) / speed[good]
    return t, int(size - good.sum())


def arrival_time_spread(design: ClockDesign, samples: int = 100_000, seed: int = 0,
                        velocity_spread: bool = True, detector_jitter: bool = False,
                        workers: int = 1) -> ArrivalStats:
    """Monte Carlo passage time of the hand from +l to the detector at -l.

    Initial position ~ N(+l, dx) and velocity ~ N(-u, du).  Samples moving
    the wrong way are discarded; more than 0.1% of them means the
    semiclassical picture has broken down.  Batches are seeded from one
    ``SeedSequence`` so the result does not depend on ``workers``.
    """
    if samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {samples}")
    sizes = [MC_BATCH] * (samples // MC_BATCH)
    if samples % MC_BATCH:
        sizes.append(samples % MC_BATCH)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    args = [(design, s, ss, velocity_spread, detector_jitter) for s, ss in zip(sizes, seeds)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _arrival_batch(*a), args))
    else:
        parts = [_arrival_batch(*a) for a in args]
    times = np.concatenate([p[0] for p in parts])
    discarded = sum(p[1] for p in parts)
    if discarded > MAX_DISCARD_FRACTION * samples:
        raise SemiclassicalBreakdownError(
            f"{discarded} of {samples} samples never reach the detector; "
            "design too relativistic or noisy for the semiclassical model")
    return ArrivalStats(float(np.mean(times)), float(np.std(times, ddof=1)),
                        discarded, samples)
