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
# This module contains the Kolmogorov phase screens, the layered atmosphere
# and the multi-screen uplink channel, plus the calibration of the Fried
# parameter against a target uplink loss.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from qnetsim.utils.errors import BracketExhaustedError, DomainError, InvariantViolationError
from qnetsim.utils.seeding import derive_seed, make_rng
from qnetsim.utils.units import transmittance_to_db
from qnetsim.wavefield import (
    ComplexField,
    GaussianSpec,
    Grid,
    circular_mask,
    encircled_power,
    gaussian_field,
    mode_overlap,
    propagate_scaled,
    propagate_stepped,
)

DEFAULT_ALTITUDES = (0.0, 1333.3, 4000.0, 9333.3, 20000.0)
DEFAULT_WEIGHTS = (0.56, 0.18, 0.12, 0.08, 0.06)
SUBHARMONIC_LEVELS = 3
R0_BRACKET = (0.01, 1.0)
CALIBRATION_TOLERANCE_DB = 0.5


@dataclass(frozen=True, eq=False)
class PhaseScreen:
    grid: Grid
    phase: np.ndarray
    r0: float

    def __post_init__(self):
        phase = np.array(self.phase, dtype=np.float64, copy=True)
        if phase.shape != (self.grid.n, self.grid.n):
            raise InvariantViolationError("phase", f"shape {phase.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(phase)):
            raise InvariantViolationError("phase", "must be finite")
        phase.setflags(write=False)
        object.__setattr__(self, "phase", phase)

    def apply(self, field):
        return field.with_samples(field.samples * np.exp(1j * self.phase))


def _psd(f, r0):
    with np.errstate(divide="ignore"):
        psd = 0.023 * r0 ** (-5.0 / 3.0) * f ** (-11.0 / 3.0)
    psd[~np.isfinite(psd)] = 0.0
    return psd


def make_screen(grid, r0, seed):
    """
    FFT phase screen with a Kolmogorov spectrum and three levels of 3x3
    subharmonics for the low frequencies the FFT grid cannot hold.

    The screen is drawn for r0 = 1 m and scaled by r0^(-5/6), so the same
    seed gives the same pattern at every turbulence strength.

    :param grid: sampling grid of the screen
    :param r0: Fried parameter in metres (> 0; inf gives a flat screen)
    :param seed: integer seed
    :return: PhaseScreen
    """
    if not r0 > 0:
        raise DomainError(f"r0 must be positive, got {r0}")
    n = grid.n
    window = grid.window
    rng = make_rng(seed)

    df = 1.0 / window
    fx = (np.arange(n) - n // 2) * df
    f = np.sqrt(fx[np.newaxis, :] ** 2 + fx[:, np.newaxis] ** 2)
    noise = rng.standard_normal((2, n, n))
    cn = (noise[0] + 1j * noise[1]) * np.sqrt(_psd(f, 1.0)) * df
    high = np.real(np.fft.ifftshift(np.fft.ifft2(np.fft.ifftshift(cn)))) * n * n

    X, Y = grid.coordinates()
    low = np.zeros((n, n), dtype=np.complex128)
    offsets = np.array([-1.0, 0.0, 1.0])
    for level in range(1, SUBHARMONIC_LEVELS + 1):
        dfp = df / 3.0 ** level
        fxp = offsets[np.newaxis, :] * dfp * np.ones((3, 1))
        fyp = fxp.T
        psd = _psd(np.sqrt(fxp ** 2 + fyp ** 2), 1.0)
        draws = rng.standard_normal((2, 3, 3))
        cnp = (draws[0] + 1j * draws[1]) * np.sqrt(psd) * dfp
        for a, fa, fb in zip(cnp.ravel(), fxp.ravel(), fyp.ravel()):
            if a != 0:
                low += a * np.exp(2j * math.pi * (fa * X + fb * Y))
    low = np.real(low)
    low -= low.mean()

    scale = r0 ** (-5.0 / 6.0) if math.isfinite(r0) else 0.0
    return PhaseScreen(grid=grid, phase=(high + low) * scale, r0=r0)


def structure_function(phase, separations):
    """
    Mean squared phase difference at integer cell separations along both axes.

    :param phase: 2D array, or a stack of screens with shape (k, n, n)
    :param separations: iterable of separations in cells
    :return: array of D(r), one value per separation
    """
    stack = np.asarray(phase, dtype=float)
    if stack.ndim == 2:
        stack = stack[np.newaxis]
    values = []
    for r in separations:
        dx = stack[:, :, r:] - stack[:, :, :-r]
        dy = stack[:, r:, :] - stack[:, :-r, :]
        values.append(0.5 * (np.mean(dx ** 2) + np.mean(dy ** 2)))
    return np.array(values)


@dataclass(frozen=True)
class AtmosphereProfile:
    screen_altitudes: tuple = field(default=DEFAULT_ALTITUDES, metadata={"unit": "m"})
    screen_r0: tuple = field(default=(0.1,) * 5, metadata={"unit": "m"})
    zenith_attenuation_db: float = field(default=0.7, metadata={"unit": "dB"})

    def __post_init__(self):
        object.__setattr__(self, "screen_altitudes", tuple(float(h) for h in self.screen_altitudes))
        object.__setattr__(self, "screen_r0", tuple(float(r) for r in self.screen_r0))
        if len(self.screen_altitudes) != len(self.screen_r0) or not self.screen_altitudes:
            raise InvariantViolationError("screen_r0", "needs one r0 per screen altitude")
        if any(h < 0 for h in self.screen_altitudes) or list(self.screen_altitudes) != sorted(self.screen_altitudes):
            raise InvariantViolationError("screen_altitudes", "must be non-negative and ascending")
        if any(not r > 0 for r in self.screen_r0):
            raise InvariantViolationError("screen_r0", "every r0 must be positive")
        if not self.zenith_attenuation_db >= 0:
            raise InvariantViolationError("zenith_attenuation_db", f"must be >= 0, got {self.zenith_attenuation_db}")

    @classmethod
    def from_integrated(cls, r0, altitudes=DEFAULT_ALTITUDES, weights=DEFAULT_WEIGHTS, zenith_attenuation_db=0.7):
        """Split an integrated r0 over the screens so each carries weight_i of the turbulence."""
        if not r0 > 0:
            raise InvariantViolationError("r0", f"must be positive, got {r0}")
        weights = np.asarray(weights, dtype=float)
        if len(weights) != len(altitudes) or np.any(weights <= 0):
            raise InvariantViolationError("weights", "need one positive weight per altitude")
        weights = weights / weights.sum()
        screen_r0 = tuple(float(r0 * w ** (-3.0 / 5.0)) for w in weights)
        return cls(tuple(altitudes), screen_r0, zenith_attenuation_db)

    @classmethod
    def vacuum(cls, altitudes=DEFAULT_ALTITUDES, zenith_attenuation_db=0.7):
        return cls(tuple(altitudes), (math.inf,) * len(altitudes), zenith_attenuation_db)

    @property
    def integrated_r0(self):
        total = sum(r ** (-5.0 / 3.0) for r in self.screen_r0 if math.isfinite(r))
        if total == 0:
            return math.inf
        return total ** (-3.0 / 5.0)


@dataclass(frozen=True)
class UplinkGeometry:
    orbit_altitude: float = field(default=500e3, metadata={"unit": "m"})
    tx_waist: float = field(default=0.25, metadata={"unit": "m"})
    rx_aperture: float = field(default=0.6, metadata={"unit": "m"})
    rx_window: float = field(default=20.0, metadata={"unit": "m"})
    wavelength: float = field(default=800e-9, metadata={"unit": "m"})
    grid: Grid = field(default_factory=lambda: Grid(2.0, 2048))
    target_loss_db: float = field(default=22.0, metadata={"unit": "dB"})
    ensemble: int = 30

    def __post_init__(self):
        for name in ("orbit_altitude", "tx_waist", "rx_aperture", "rx_window", "wavelength"):
            if not getattr(self, name) > 0:
                raise InvariantViolationError(name, f"must be positive, got {getattr(self, name)}")
        if self.rx_window < 2.0 * self.rx_aperture:
            raise InvariantViolationError("rx_window", "must be at least twice the receiving aperture")
        if self.ensemble < 1:
            raise InvariantViolationError("ensemble", f"must be >= 1, got {self.ensemble}")

    def launch(self):
        return gaussian_field(self.grid, GaussianSpec(self.tx_waist), self.wavelength)


#### CHANNEL

def uplink_channel(field, profile, orbit_altitude, seed, out_window=20.0):
    """
    Ground to orbit: screen, propagate to the next screen, ... up to the last
    screen, then a rescaled Fresnel leg to the orbit plane.

    Screen j of this realization is seeded with derive_seed(seed, j).

    :return: ComplexField on Grid(out_window, n) at the orbit altitude
    """
    top = profile.screen_altitudes[-1]
    if orbit_altitude <= top:
        raise DomainError(f"orbit altitude {orbit_altitude:.6g} m is inside the turbulent layer")
    current = field
    height = 0.0
    for j, (altitude, r0) in enumerate(zip(profile.screen_altitudes, profile.screen_r0)):
        if altitude > height:
            current, _ = propagate_stepped(current, altitude - height)
            height = altitude
        if math.isfinite(r0):
            current = make_screen(current.grid, r0, derive_seed(seed, j)).apply(current)
    return propagate_scaled(current, orbit_altitude - height, out_window)


@dataclass(frozen=True)
class UplinkEnsemble:
    loss_db: float
    mean_fraction: float
    fractions: tuple
    mode_fraction: float


def _received(geometry, profile, seed):
    return uplink_channel(geometry.launch(), profile, geometry.orbit_altitude, seed, geometry.rx_window)


def captured_field(field, rx_aperture):
    """The part of a received field that enters a receiving aperture centred on the axis."""
    return field.with_samples(field.samples * circular_mask(field.grid, rx_aperture))


def vacuum_reference(geometry, profile):
    """Captured field of the same uplink without turbulence."""
    vacuum = AtmosphereProfile.vacuum(profile.screen_altitudes, profile.zenith_attenuation_db)
    return captured_field(_received(geometry, vacuum, 0), geometry.rx_aperture)


def uplink_trial(geometry, profile, seed, reference):
    """
    One turbulence realization.

    :return: (received field, fraction entering the receiver, overlap of the captured field with reference)
    """
    received = _received(geometry, profile, seed)
    fraction = encircled_power(received, geometry.rx_aperture)
    overlap = mode_overlap(captured_field(received, geometry.rx_aperture), reference)
    return received, fraction, overlap


def uplink_ensemble(geometry, profile, seeds):
    """
    Run the uplink for every seed.

    mode_fraction is the ensemble-mean overlap of the captured field with the
    captured turbulence-free field, i.e. the share of the received light still
    in the fundamental Gaussian mode.
    """
    seeds = list(seeds)
    if not seeds:
        raise DomainError("an uplink ensemble needs at least one seed")
    reference = vacuum_reference(geometry, profile)
    fractions = []
    overlaps = []
    for seed in seeds:
        _, fraction, overlap = uplink_trial(geometry, profile, seed, reference)
        fractions.append(fraction)
        overlaps.append(overlap)
    mean_fraction = float(np.mean(fractions))
    return UplinkEnsemble(
        loss_db=transmittance_to_db(mean_fraction),
        mean_fraction=mean_fraction,
        fractions=tuple(fractions),
        mode_fraction=float(np.mean(overlaps)),
    )


def uplink_loss_db(geometry, profile, seeds):
    fractions = [encircled_power(_received(geometry, profile, seed), geometry.rx_aperture) for seed in seeds]
    return transmittance_to_db(float(np.mean(fractions)))


def calibrate_r0(target_uplink_loss_db, geometry, seeds, altitudes=DEFAULT_ALTITUDES, weights=DEFAULT_WEIGHTS,
                 zenith_attenuation_db=0.7):
    """
    Find the integrated r0 in [1 cm, 1 m] whose ensemble-mean uplink loss
    matches the target within 0.5 dB.

    Every evaluation reuses the same seeds, so the loss is a smooth, monotone
    function of r0 and brentq can work on log r0.

    :return: AtmosphereProfile with the calibrated r0
    """
    seeds = list(seeds)

    def profile_for(r0):
        return AtmosphereProfile.from_integrated(r0, altitudes, weights, zenith_attenuation_db)

    def mismatch(log_r0):
        return uplink_loss_db(geometry, profile_for(math.exp(log_r0)), seeds) - target_uplink_loss_db

    r0_low, r0_high = R0_BRACKET
    weakest = mismatch(math.log(r0_high))
    if abs(weakest) <= CALIBRATION_TOLERANCE_DB:
        return profile_for(r0_high)
    if weakest > 0:
        raise BracketExhaustedError(
            f"target {target_uplink_loss_db:.3g} dB is below the {weakest + target_uplink_loss_db:.3g} dB "
            f"loss at r0 = {r0_high} m")
    strongest = mismatch(math.log(r0_low))
    if abs(strongest) <= CALIBRATION_TOLERANCE_DB:
        return profile_for(r0_low)
    if strongest < 0:
        raise BracketExhaustedError(
            f"target {target_uplink_loss_db:.3g} dB is above the {strongest + target_uplink_loss_db:.3g} dB "
            f"loss at r0 = {r0_low} m")
    log_r0 = brentq(mismatch, math.log(r0_low), math.log(r0_high), xtol=1e-3)
    return profile_for(math.exp(log_r0))
