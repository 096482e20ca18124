################################################################################
# Copyright (c) 2025 Hackerbot Industries LLC
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.
#
# Created By: Allen Chien
# Created:    October 2026
# Updated:    2026.10.19
#
# This module contains the satellite lens chain: the effective thin lens of a
# satellite telescope, chain construction with seeded perturbations, hop by hop
# propagation with power bookkeeping, and the periodic lens-guide eigenmode.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


from dataclasses import dataclass, field, replace
import math

import numpy as np

from qnetsim.utils.errors import (
    DomainError,
    InvariantViolationError,
    OffsetOutsideWindowError,
    UnstableGuideError,
)
from qnetsim.utils.seeding import make_rng
from qnetsim.utils.units import transmittance_to_db
from qnetsim.wavefield import (
    GaussianSpec,
    Grid,
    absorbing_boundary,
    beam_radius,
    circular_mask,
    gaussian_field,
    propagate,
    total_power,
)

DISTRIBUTIONS = ("uniform_pm", "gaussian_sigma")


@dataclass(frozen=True)
class SatelliteLens:
    focal_length: float = field(default=60e3, metadata={"unit": "m"})
    aperture_diameter: float = field(default=0.6, metadata={"unit": "m"})
    power_transmittance: float = 0.98

    def __post_init__(self):
        if not self.focal_length > 0:
            raise InvariantViolationError("focal_length", f"must be positive, got {self.focal_length}")
        if not self.aperture_diameter > 0:
            raise InvariantViolationError("aperture_diameter", f"must be positive, got {self.aperture_diameter}")
        if not 0 < self.power_transmittance <= 1:
            raise InvariantViolationError("power_transmittance", f"must be in (0, 1], got {self.power_transmittance}")

    @property
    def reflection_db(self):
        return transmittance_to_db(self.power_transmittance)


@dataclass(frozen=True)
class ErrorSpec:
    separation_frac: float = 0.10
    lateral_abs: float = field(default=0.006, metadata={"unit": "m"})
    focal_frac: float = 0.05
    distribution: str = "uniform_pm"

    def __post_init__(self):
        for name in ("separation_frac", "lateral_abs", "focal_frac"):
            value = getattr(self, name)
            if not value >= 0:
                raise InvariantViolationError(name, f"must be >= 0, got {value}")
        if self.distribution not in DISTRIBUTIONS:
            raise InvariantViolationError("distribution", f"must be one of {DISTRIBUTIONS}, got {self.distribution!r}")

    @classmethod
    def none(cls):
        return cls(separation_frac=0.0, lateral_abs=0.0, focal_frac=0.0)

    @property
    def is_zero(self):
        return self.separation_frac == 0 and self.lateral_abs == 0 and self.focal_frac == 0


@dataclass(frozen=True)
class ChainSpec:
    separation: float = field(default=120e3, metadata={"unit": "m"})
    hops: int = 167
    lens: SatelliteLens = field(default_factory=SatelliteLens)
    wavelength: float = field(default=800e-9, metadata={"unit": "m"})
    launch: GaussianSpec = field(default_factory=GaussianSpec)
    grid: Grid = None

    def __post_init__(self):
        if not self.separation > 0:
            raise InvariantViolationError("separation", f"must be positive, got {self.separation}")
        if not isinstance(self.hops, (int, np.integer)) or self.hops < 1:
            raise InvariantViolationError("hops", f"must be an integer >= 1, got {self.hops}")
        if not self.wavelength > 0:
            raise InvariantViolationError("wavelength", f"must be positive, got {self.wavelength}")
        if self.grid is None:
            # Window is 2.5 apertures; without an aperture, size it from the launch beam
            if math.isfinite(self.lens.aperture_diameter):
                window = 2.5 * self.lens.aperture_diameter
            else:
                window = 10.0 * self.launch.waist
            object.__setattr__(self, "grid", Grid(window, 1024))

    @property
    def total_path(self):
        return self.hops * self.separation

    @classmethod
    def for_distance(cls, total_distance, separation=120e3, **kwargs):
        if not total_distance > 0:
            raise InvariantViolationError("total_distance", f"must be positive, got {total_distance}")
        hops = max(1, math.ceil(total_distance / separation - 1e-9))
        return cls(separation=separation, hops=hops, **kwargs)


@dataclass(frozen=True)
class Hop:
    separation: float
    lens: SatelliteLens
    offset: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class Chain:
    hops: tuple
    wavelength: float
    grid: Grid

    def __len__(self):
        return len(self.hops)

    @property
    def total_path(self):
        return sum(hop.separation for hop in self.hops)

    @property
    def reflection_db(self):
        return sum(hop.lens.reflection_db for hop in self.hops)


@dataclass(frozen=True)
class HopRecord:
    hop: int
    power_in: float
    power_after_aperture: float
    power_after_reflection: float
    cumulative_db: float
    clipped: float
    absorbed: float
    guard_loss: float


@dataclass(frozen=True, eq=False)
class ChainTrace:
    records: tuple
    final_field: object
    reflection_db: float
    launch_power: float = 1.0

    @property
    def total_db(self):
        if not self.records:
            return 0.0
        return self.records[-1].cumulative_db

    @property
    def diffraction_db(self):
        return self.total_db - self.reflection_db

    @property
    def per_hop_diffraction_db(self):
        """Power lost on each hop before its reflection loss (window edge and aperture), in dB."""
        losses = []
        departed = self.launch_power
        for record in self.records:
            if departed > 0 and record.power_after_aperture > 0:
                losses.append(transmittance_to_db(record.power_after_aperture / departed))
            else:
                losses.append(math.inf)
            departed = record.power_after_reflection
        return np.array(losses)

    def cumulative_db(self):
        return np.array([record.cumulative_db for record in self.records])


@dataclass(frozen=True)
class ChainExtrapolation:
    total_hops: int
    simulated_hops: int
    per_hop_diffraction_db: float
    diffraction_db: float
    reflection_db: float
    settled: bool

    @property
    def total_db(self):
        return self.diffraction_db + self.reflection_db


#### CHAIN CONSTRUCTION

def lens_guide_mode(separation, focal_length, wavelength):
    """
    Eigenmode of an infinite periodic lens guide, sampled just after a lens.

    The one-period ray matrix is [[1, L], [-1/f, 1 - L/f]]. The guide is stable
    only for 0 < L < 4f. For L = 2f the beam leaves each lens converging with a
    radius of 2f and focuses at mid-hop.

    :return: GaussianSpec with the launch-plane radius and converging curvature
    """
    if not (math.isfinite(focal_length) and 0 < separation < 4.0 * focal_length):
        raise UnstableGuideError(
            f"lens guide with separation {separation:.6g} m and focal length {focal_length:.6g} m is unstable")
    g = 1.0 - separation / (2.0 * focal_length)
    radius = math.sqrt(wavelength * separation / (math.pi * math.sqrt(1.0 - g * g)))
    return GaussianSpec(waist=radius, curvature_radius=2.0 * focal_length)


def launch_field(spec):
    return gaussian_field(spec.grid, spec.launch, spec.wavelength)


def build_chain(spec):
    hop = Hop(spec.separation, spec.lens)
    return Chain(hops=(hop,) * spec.hops, wavelength=spec.wavelength, grid=spec.grid)


def _draw(rng, distribution, size):
    if distribution == "uniform_pm":
        return rng.uniform(-1.0, 1.0, size=size)
    return rng.standard_normal(size=size)


def perturb_chain(chain, errors, seed):
    """
    Draw independent separation, lateral offset and focal length errors for
    every hop. The draws are taken in that order from one stream seeded by seed.

    :param chain: nominal Chain
    :param errors: ErrorSpec with the magnitudes (bounds or sigmas)
    :param seed: integer seed
    :return: perturbed Chain, or the input chain when every magnitude is zero
    """
    if errors.is_zero:
        return chain
    rng = make_rng(seed)
    count = len(chain.hops)
    separation_factor = 1.0 + errors.separation_frac * _draw(rng, errors.distribution, count)
    offsets = errors.lateral_abs * _draw(rng, errors.distribution, (count, 2))
    focal_factor = 1.0 + errors.focal_frac * _draw(rng, errors.distribution, count)
    # Gaussian tails can cross zero for absurd sigmas
    separation_factor = np.maximum(separation_factor, 1e-3)
    focal_factor = np.maximum(focal_factor, 1e-3)

    hops = []
    for i, hop in enumerate(chain.hops):
        lens = hop.lens
        if math.isfinite(lens.focal_length):
            lens = replace(lens, focal_length=lens.focal_length * float(focal_factor[i]))
        hops.append(Hop(
            separation=hop.separation * float(separation_factor[i]),
            lens=lens,
            offset=(hop.offset[0] + float(offsets[i, 0]), hop.offset[1] + float(offsets[i, 1])),
        ))
    return replace(chain, hops=tuple(hops))


#### ELEMENTS

def apply_lens(field, lens, lateral_offset=(0.0, 0.0)):
    """
    Aperture, thin-lens phase and reflection loss of one satellite, all
    centred on the satellite's lateral position.

    :return: (output field, power clipped by the aperture, power absorbed by reflection loss)
    """
    grid = field.grid
    ox, oy = float(lateral_offset[0]), float(lateral_offset[1])
    half = grid.window / 2.0
    reach = lens.aperture_diameter / 2.0 if math.isfinite(lens.aperture_diameter) else 0.0
    if abs(ox) + reach > half or abs(oy) + reach > half:
        raise OffsetOutsideWindowError(
            f"aperture at offset ({ox:.4g}, {oy:.4g}) m does not fit in the {grid.window:.4g} m window")

    power_in = total_power(field)
    samples = field.samples * circular_mask(grid, lens.aperture_diameter, (ox, oy))
    power_masked = float(np.sum(np.abs(samples) ** 2) * grid.cell_area)
    if math.isfinite(lens.focal_length):
        X, Y = grid.coordinates()
        r2 = (X - ox) ** 2 + (Y - oy) ** 2
        samples = samples * np.exp(-1j * math.pi * r2 / (field.wavelength * lens.focal_length))
    samples = samples * math.sqrt(lens.power_transmittance)

    clipped = power_in - power_masked
    absorbed = power_masked * (1.0 - lens.power_transmittance)
    return field.with_samples(samples), clipped, absorbed


def propagate_chain(field, chain):
    """
    Run a launched field through every hop: free-space leg, guard band, then
    the receiving satellite's lens.

    :param field: launched ComplexField, normally of unit power
    :param chain: Chain to traverse
    :return: ChainTrace with one HopRecord per hop
    """
    records = []
    current = field
    for index, hop in enumerate(chain.hops, start=1):
        current = propagate(current, hop.separation)
        current, guard_loss = absorbing_boundary(current)
        arriving = total_power(current)
        current, clipped, absorbed = apply_lens(current, hop.lens, hop.offset)
        departing = total_power(current)
        records.append(HopRecord(
            hop=index,
            power_in=arriving,
            power_after_aperture=arriving - clipped,
            power_after_reflection=departing,
            cumulative_db=transmittance_to_db(departing),
            clipped=clipped,
            absorbed=absorbed,
            guard_loss=guard_loss,
        ))
    return ChainTrace(records=tuple(records), final_field=current, reflection_db=chain.reflection_db,
                      launch_power=total_power(field))


def waist_position(field, separation, points=25):
    """
    Distance along one hop at which the beam radius is smallest.

    :param field: field just after a lens
    :param separation: hop length to scan
    :param points: number of evenly spaced planes including both ends
    :return: (distance of the narrowest plane, its beam radius)
    """
    distances = np.linspace(0.0, separation, points)
    radii = [beam_radius(propagate(field, float(z))) for z in distances]
    best = int(np.argmin(radii))
    return float(distances[best]), float(radii[best])


#### REDUCED-HOP MODE

def extrapolate_chain(trace, total_hops, tail=4, tolerance=0.2):
    """
    Extend a short simulated chain to total_hops using the mean diffraction
    loss of its last tail hops.

    settled is False when those hops still differ by more than tolerance
    (relative to their mean), i.e. the beam has not reached the periodic mode.
    """
    simulated = len(trace.records)
    if simulated == 0:
        raise DomainError("cannot extrapolate an empty trace")
    if total_hops < simulated:
        raise DomainError(f"total_hops {total_hops} is below the {simulated} simulated hops")
    tail_losses = trace.per_hop_diffraction_db[-min(tail, simulated):]
    per_hop = float(np.mean(tail_losses))
    spread = float(np.max(tail_losses) - np.min(tail_losses))
    settled = spread <= tolerance * abs(per_hop) or spread < 1e-6
    reflection_per_hop = trace.reflection_db / simulated
    return ChainExtrapolation(
        total_hops=total_hops,
        simulated_hops=simulated,
        per_hop_diffraction_db=per_hop,
        diffraction_db=trace.diffraction_db + per_hop * (total_hops - simulated),
        reflection_db=reflection_per_hop * total_hops,
        settled=settled,
    )


def convergence_gate(spec, hops=20, threshold_db=0.05):
    """
    Compare the diffraction loss of a short chain at n and 2n samples.

    :return: (absolute difference in dB, True when below threshold_db)
    """
    losses = []
    for n in (spec.grid.n, 2 * spec.grid.n):
        refined = replace(spec, hops=min(hops, spec.hops), grid=Grid(spec.grid.window, n))
        trace = propagate_chain(launch_field(refined), build_chain(refined))
        losses.append(trace.diffraction_db)
    delta = abs(losses[1] - losses[0])
    return delta, delta < threshold_db
