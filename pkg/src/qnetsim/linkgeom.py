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
# This module contains the non-chain pieces of a link budget: spherical Earth
# geometry, air mass and atmospheric attenuation, satellite to ground
# diffraction and pointing jitter loss.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


from dataclasses import dataclass, field
import math

import numpy as np

from qnetsim.utils.errors import DomainError, InvariantViolationError, UnknownWavelengthError
from qnetsim.utils.seeding import make_rng
from qnetsim.utils.units import transmittance_to_db
from qnetsim.wavefield import (
    Grid,
    circular_mask,
    encircled_power,
    gaussian_field,
    propagate_scaled,
)

EARTH_RADIUS = 6371e3
EARTH_MU = 3.986004418e14


@dataclass(frozen=True)
class GroundLink:
    orbit_altitude: float = field(default=500e3, metadata={"unit": "m"})
    zenith_angle: float = field(default=0.0, metadata={"unit": "deg"})
    tx_aperture: float = field(default=0.6, metadata={"unit": "m"})
    rx_aperture: float = field(default=1.2, metadata={"unit": "m"})
    wavelength: float = field(default=800e-9, metadata={"unit": "m"})

    def __post_init__(self):
        if not self.orbit_altitude > 0:
            raise InvariantViolationError("orbit_altitude", f"must be positive, got {self.orbit_altitude}")
        if not 0 <= self.zenith_angle < 90:
            raise InvariantViolationError("zenith_angle", f"must be in [0, 90) deg, got {self.zenith_angle}")
        for name in ("tx_aperture", "rx_aperture", "wavelength"):
            if not getattr(self, name) > 0:
                raise InvariantViolationError(name, f"must be positive, got {getattr(self, name)}")

    @classmethod
    def from_ground_offset(cls, orbit_altitude, ground_offset, **kwargs):
        """Link to a satellite whose sub-satellite point is ground_offset away along the surface."""
        elevation = elevation_angle(orbit_altitude, ground_offset)
        if elevation <= 0:
            raise DomainError(f"satellite is below the horizon at {ground_offset:.6g} m offset")
        return cls(orbit_altitude=orbit_altitude, zenith_angle=90.0 - elevation, **kwargs)

    @property
    def slant_range(self):
        return slant_range(self.orbit_altitude, self.zenith_angle)


@dataclass(frozen=True)
class AttenuationModel:
    zenith_db_at_reference: float = field(default=0.5, metadata={"unit": "dB"})
    reference_wavelength: float = field(default=1550e-9, metadata={"unit": "m"})
    table_wavelengths: tuple = field(default=(800e-9, 580e-9), metadata={"unit": "m"})
    table_zenith_db: tuple = field(default=(0.7, 1.0), metadata={"unit": "dB"})
    air_mass_a: float = 0.50572
    air_mass_b: float = 96.07995
    air_mass_c: float = 1.6364

    def __post_init__(self):
        object.__setattr__(self, "table_wavelengths", tuple(float(w) for w in self.table_wavelengths))
        object.__setattr__(self, "table_zenith_db", tuple(float(d) for d in self.table_zenith_db))
        if len(self.table_wavelengths) != len(self.table_zenith_db):
            raise InvariantViolationError("table_zenith_db", "needs one value per table wavelength")
        if self.zenith_db_at_reference < 0 or any(d < 0 for d in self.table_zenith_db):
            raise InvariantViolationError("table_zenith_db", "attenuation must be non-negative")

    def zenith_db(self, wavelength):
        if math.isclose(wavelength, self.reference_wavelength, rel_tol=1e-6):
            return self.zenith_db_at_reference
        for known, loss in zip(self.table_wavelengths, self.table_zenith_db):
            if math.isclose(wavelength, known, rel_tol=1e-6):
                return loss
        raise UnknownWavelengthError(f"no zenith attenuation for {wavelength * 1e9:.6g} nm")


#### ATMOSPHERE

def air_mass(zenith, a=0.50572, b=96.07995, c=1.6364):
    """
    Relative optical path through the atmosphere, 1 at zenith.

    Empirical interpolation X = 1 / (cos z + a (b - z)^-c) with z in degrees,
    normalized by its zenith value. It stays finite at the horizon.

    :param zenith: zenith angle in degrees, in [0, 90)
    :return: air mass (dimensionless)
    """
    if not 0 <= zenith < 90:
        raise DomainError(f"zenith angle must be in [0, 90) deg, got {zenith}")

    def raw(z):
        return 1.0 / (math.cos(math.radians(z)) + a * (b - z) ** (-c))

    return raw(zenith) / raw(0.0)


def atmospheric_db(model, wavelength, zenith):
    return model.zenith_db(wavelength) * air_mass(zenith, model.air_mass_a, model.air_mass_b, model.air_mass_c)


#### GEOMETRY

def slant_range(altitude, zenith):
    """Distance from a ground station to a satellite at altitude seen at the given zenith angle (deg)."""
    z = math.radians(zenith)
    return math.sqrt((EARTH_RADIUS + altitude) ** 2 - (EARTH_RADIUS * math.sin(z)) ** 2) - EARTH_RADIUS * math.cos(z)


def elevation_angle(altitude, ground_offset):
    """Elevation (deg) of a satellite whose sub-satellite point lies ground_offset away along the surface."""
    gamma = ground_offset / EARTH_RADIUS
    ratio = EARTH_RADIUS / (EARTH_RADIUS + altitude)
    return math.degrees(math.atan2(math.cos(gamma) - ratio, math.sin(gamma)))


def max_ground_distance(orbit_altitude, min_elevation):
    """
    Longest great-circle distance between two stations that both see one
    satellite at or above min_elevation (deg).
    """
    if min_elevation < 0:
        raise DomainError(f"min_elevation must be >= 0, got {min_elevation}")
    if orbit_altitude <= 0:
        return 0.0
    eps = math.radians(min_elevation)
    half_angle = math.acos(EARTH_RADIUS * math.cos(eps) / (EARTH_RADIUS + orbit_altitude)) - eps
    return max(0.0, 2.0 * EARTH_RADIUS * half_angle)


def pass_duration(orbit_altitude, min_elevation):
    """Time an overhead circular-orbit pass spends above min_elevation, ignoring Earth rotation."""
    half_range = max_ground_distance(orbit_altitude, min_elevation) / 2.0
    period = 2.0 * math.pi * math.sqrt((EARTH_RADIUS + orbit_altitude) ** 3 / EARTH_MU)
    return period * (2.0 * half_range / EARTH_RADIUS) / (2.0 * math.pi)


def ground_track_speed(orbit_altitude):
    """Speed of the sub-satellite point of a circular orbit (m/s), ignoring Earth rotation."""
    if not orbit_altitude > 0:
        raise DomainError(f"orbit altitude must be positive, got {orbit_altitude}")
    radius = EARTH_RADIUS + orbit_altitude
    return math.sqrt(EARTH_MU / radius) * EARTH_RADIUS / radius


def fiber_loss_db(length, db_per_km=0.2):
    return db_per_km * length / 1e3


#### DIFFRACTION

def ground_link_diffraction(link, launch, n=512):
    """
    Wave-optics loss of one satellite to ground leg.

    The launch beam is truncated by the transmitting aperture and carried over
    the slant range with the rescaled Fresnel propagator onto a window sized
    for the receiver.

    :param link: GroundLink geometry
    :param launch: GaussianSpec of the transmitted beam
    :param n: samples per side
    :return: loss in dB, -10 log10 of the power entering the receiving aperture
    """
    tx_grid = Grid(2.5 * link.tx_aperture, n)
    field = gaussian_field(tx_grid, launch, link.wavelength)
    field = field.with_samples(field.samples * circular_mask(tx_grid, link.tx_aperture))
    out_window = 1.25 * max(2.5 * link.rx_aperture, tx_grid.window + link.rx_aperture)
    received = propagate_scaled(field, link.slant_range, out_window)
    return transmittance_to_db(encircled_power(received, link.rx_aperture))


def link_loss_db(link, launch, model):
    return ground_link_diffraction(link, launch) + atmospheric_db(model, link.wavelength, link.zenith_angle)


def far_field_capture_db(divergence, distance, rx_aperture):
    """
    Loss of a Gaussian far field of half-angle divergence caught by a circular
    receiver at distance: -10 log10(1 - exp(-2 a^2 / (theta d)^2)).
    """
    if not (divergence > 0 and distance > 0):
        raise DomainError("divergence and distance must be positive")
    radius = divergence * distance
    fraction = -math.expm1(-2.0 * (rx_aperture / 2.0) ** 2 / radius ** 2)
    return transmittance_to_db(fraction)


#### POINTING

def pointing_jitter_loss(jitter_rms, beam_divergence):
    """
    Mean loss from Gaussian pointing jitter over a Gaussian far field.

    :param jitter_rms: radial RMS pointing error (rad)
    :param beam_divergence: 1/e^2 half-angle divergence (rad)
    :return: 10 log10(1 + 2 (jitter / divergence)^2) in dB
    """
    if jitter_rms < 0 or beam_divergence < 0:
        raise DomainError("jitter and divergence must be >= 0")
    if jitter_rms == 0:
        return 0.0
    if beam_divergence == 0:
        return math.inf
    return 10.0 * math.log10(1.0 + 2.0 * (jitter_rms / beam_divergence) ** 2)


def pointing_jitter_loss_mc(jitter_rms, beam_divergence, draws=100_000, seed=0):
    rng = make_rng(seed)
    sigma = jitter_rms / math.sqrt(2.0)
    offsets = rng.normal(0.0, sigma, size=(draws, 2))
    rho2 = np.sum(offsets ** 2, axis=1)
    return transmittance_to_db(float(np.mean(np.exp(-2.0 * rho2 / beam_divergence ** 2))))
