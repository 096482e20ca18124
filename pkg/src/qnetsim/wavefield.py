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
# This module contains the scalar wave-optics kernel: the sampling grid, the
# complex field, Gaussian sources, band-limited angular-spectrum propagation,
# the rescaled two-step Fresnel propagator used for long ground legs, and the
# power / radius / mode-overlap diagnostics.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from qnetsim.utils.errors import (
    AliasingError,
    DomainError,
    GridMismatchError,
    GridTooCoarseError,
    InvariantViolationError,
    WindowTooSmallError,
    ZeroPowerError,
)

# Band-limit margin: the passband must reach this many times the radius that
# holds 1 - e^-2 of the field's spectral power.
BAND_LIMIT_MARGIN = 3.5
SPECTRAL_FRACTION = 1.0 - math.exp(-2.0)

# Absorbing boundary: separable super-Gaussian, only the outer 10% of the window
# sees noticeable attenuation.
GUARD_ORDER = 32
GUARD_HALF_WIDTH = 0.46


@dataclass(frozen=True)
class Grid:
    window: float = field(default=1.5, metadata={"unit": "m"})
    n: int = 1024

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 256 or (self.n & (self.n - 1)) != 0:
            raise InvariantViolationError("n", f"must be a power of two >= 256, got {self.n}")
        if not self.window > 0:
            raise InvariantViolationError("window", f"must be positive, got {self.window}")

    @property
    def dx(self):
        return self.window / self.n

    @property
    def cell_area(self):
        return self.dx * self.dx

    def axis(self):
        return (np.arange(self.n) - self.n // 2) * self.dx

    def coordinates(self):
        return _coordinates(self)


@lru_cache(maxsize=8)
def _coordinates(grid):
    x = grid.axis()
    X, Y = np.meshgrid(x, x, indexing="xy")
    X.setflags(write=False)
    Y.setflags(write=False)
    return X, Y


@lru_cache(maxsize=8)
def _radius_squared(grid):
    X, Y = _coordinates(grid)
    r2 = X * X + Y * Y
    r2.setflags(write=False)
    return r2


@lru_cache(maxsize=8)
def _frequency_squared(n, dx):
    f = np.fft.fftfreq(n, dx)
    f2 = f[np.newaxis, :] ** 2 + f[:, np.newaxis] ** 2
    f2.setflags(write=False)
    return f2


@lru_cache(maxsize=8)
def _guard_mask(grid):
    x = grid.axis()
    profile = np.exp(-((np.abs(x) / (GUARD_HALF_WIDTH * grid.window)) ** GUARD_ORDER))
    mask = profile[np.newaxis, :] * profile[:, np.newaxis]
    mask.setflags(write=False)
    return mask


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    wavelength: float
    samples: np.ndarray

    def __post_init__(self):
        if not self.wavelength > 0:
            raise InvariantViolationError("wavelength", f"must be positive, got {self.wavelength}")
        samples = np.array(self.samples, dtype=np.complex128, copy=True)
        if samples.shape != (self.grid.n, self.grid.n):
            raise GridMismatchError(f"samples shape {samples.shape} does not match grid n={self.grid.n}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def k(self):
        return 2.0 * math.pi / self.wavelength

    def with_samples(self, samples, grid=None):
        return ComplexField(grid or self.grid, self.wavelength, samples)

    def scaled(self, factor):
        return self.with_samples(self.samples * factor)


@dataclass(frozen=True)
class GaussianSpec:
    """
    Launch beam description.

    waist is the 1/e^2 amplitude radius at the launch plane. With the default
    flat wavefront this is the beam waist itself. A finite curvature_radius
    makes the beam converge (positive) or diverge (negative) from that plane.
    """
    waist: float = field(default=0.1748, metadata={"unit": "m"})
    curvature_radius: float = field(default=math.inf, metadata={"unit": "m"})

    def __post_init__(self):
        if not self.waist > 0:
            raise InvariantViolationError("waist", f"must be positive, got {self.waist}")
        if self.curvature_radius == 0 or math.isnan(self.curvature_radius):
            raise InvariantViolationError("curvature_radius", "must be non-zero (use inf for a flat wavefront)")

    def rayleigh_range(self, wavelength):
        return math.pi * self.waist ** 2 / wavelength

    def q_parameter(self, wavelength):
        inverse_q = complex(-1.0 / self.curvature_radius, -wavelength / (math.pi * self.waist ** 2))
        return 1.0 / inverse_q

    def focus(self, wavelength):
        """
        :return: (true waist radius, distance from the launch plane to that waist)
        """
        q = self.q_parameter(wavelength)
        return math.sqrt(wavelength * q.imag / math.pi), -q.real

    def divergence(self, wavelength):
        w0, _ = self.focus(wavelength)
        return wavelength / (math.pi * w0)


#### SOURCES

def gaussian_field(grid, spec, wavelength):
    """
    Sample a unit-power Gaussian beam on the grid.

    :param grid: sampling grid
    :param spec: GaussianSpec describing radius and wavefront curvature
    :param wavelength: optical wavelength in metres
    :return: ComplexField with total power 1
    """
    if spec.waist < 4.0 * grid.dx:
        raise GridTooCoarseError(
            f"waist {spec.waist:.4g} m spans fewer than 4 cells of {grid.dx:.4g} m")
    if spec.waist > grid.window / 4.0:
        raise WindowTooSmallError(
            f"waist {spec.waist:.4g} m exceeds a quarter of the {grid.window:.4g} m window")
    r2 = _radius_squared(grid)
    samples = np.exp(-r2 / spec.waist ** 2).astype(np.complex128)
    if math.isfinite(spec.curvature_radius):
        k = 2.0 * math.pi / wavelength
        samples = samples * np.exp(-1j * k * r2 / (2.0 * spec.curvature_radius))
    samples /= math.sqrt(np.sum(np.abs(samples) ** 2) * grid.cell_area)
    return ComplexField(grid, wavelength, samples)


def circular_mask(grid, diameter, center=(0.0, 0.0)):
    if math.isinf(diameter):
        return np.ones((grid.n, grid.n), dtype=bool)
    X, Y = _coordinates(grid)
    return (X - center[0]) ** 2 + (Y - center[1]) ** 2 <= (diameter / 2.0) ** 2


#### DIAGNOSTICS

def total_power(field):
    return float(np.sum(np.abs(field.samples) ** 2) * field.grid.cell_area)


def encircled_power(field, diameter, center=(0.0, 0.0)):
    mask = circular_mask(field.grid, diameter, center)
    return float(np.sum(np.abs(field.samples[mask]) ** 2) * field.grid.cell_area)


def beam_radius(field):
    """
    Second-moment radius about the intensity centroid, scaled so that a
    Gaussian reports its 1/e^2 radius: w = sqrt(2 <r^2>).
    """
    intensity = np.abs(field.samples) ** 2
    power = float(np.sum(intensity))
    if not power > 0:
        raise ZeroPowerError("beam radius of a zero-power field is undefined")
    X, Y = _coordinates(field.grid)
    cx = float(np.sum(intensity * X)) / power
    cy = float(np.sum(intensity * Y)) / power
    second_moment = float(np.sum(intensity * ((X - cx) ** 2 + (Y - cy) ** 2))) / power
    return math.sqrt(2.0 * second_moment)


def mode_overlap(field, reference):
    """
    Normalized power overlap |<reference|field>|^2 / (P_reference * P_field).

    Both powers are taken on the shared grid, so the result is the fraction of
    the field's power carried by the reference mode. It lies in [0, 1] and is
    insensitive to a global phase.
    """
    if field.grid != reference.grid or not math.isclose(field.wavelength, reference.wavelength, rel_tol=1e-12):
        raise GridMismatchError("mode overlap needs identical grids and wavelengths")
    p_field = float(np.sum(np.abs(field.samples) ** 2))
    p_reference = float(np.sum(np.abs(reference.samples) ** 2))
    if not (p_field > 0 and p_reference > 0):
        raise ZeroPowerError("mode overlap with a zero-power field is undefined")
    inner = np.vdot(reference.samples.ravel(), field.samples.ravel())
    return min(1.0, float(abs(inner) ** 2) / (p_field * p_reference))


def spectral_radius(field, fraction=SPECTRAL_FRACTION):
    """Radius in spatial frequency (1/m) enclosing the given fraction of spectral power."""
    grid = field.grid
    spectrum = np.abs(np.fft.fft2(field.samples)) ** 2
    radial = np.sqrt(_frequency_squared(grid.n, grid.dx))
    bin_width = 1.0 / (8.0 * grid.window)
    bins = (radial / bin_width).astype(np.int64).ravel()
    cumulative = np.cumsum(np.bincount(bins, weights=spectrum.ravel()))
    if cumulative[-1] <= 0:
        raise ZeroPowerError("spectral radius of a zero-power field is undefined")
    index = int(np.searchsorted(cumulative, fraction * cumulative[-1]))
    return (index + 1) * bin_width


def max_safe_distance(field):
    """Largest propagation distance the band-limit criterion accepts for this field."""
    required = BAND_LIMIT_MARGIN * spectral_radius(field)
    lam_u = field.wavelength * required
    if lam_u >= 1.0:
        return 0.0
    return field.grid.window * math.sqrt(1.0 / lam_u ** 2 - 1.0)


#### PROPAGATION

def propagate(field, distance):
    """
    Band-limited angular-spectrum propagation over a distance.

    The field is zero-padded to twice the window, multiplied by the exact
    scalar transfer function (carrier phase removed) inside the passband,
    and cropped back. Light that leaves the window is lost with the crop.

    :param field: ComplexField to propagate
    :param distance: propagation distance in metres, >= 0
    :return: the propagated ComplexField
    """
    if distance < 0:
        raise DomainError(f"propagation distance must be >= 0, got {distance}")
    if distance == 0:
        return field

    grid = field.grid
    n = grid.n
    wavelength = field.wavelength
    u_limit = 1.0 / (wavelength * math.sqrt((distance / grid.window) ** 2 + 1.0))
    required = BAND_LIMIT_MARGIN * spectral_radius(field)
    if u_limit < required:
        raise AliasingError(
            f"band limit {u_limit:.4g} 1/m below required {required:.4g} 1/m at distance {distance:.6g} m",
            max_safe_distance(field))

    padded = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    lo = n // 2
    padded[lo:lo + n, lo:lo + n] = field.samples

    f2 = _frequency_squared(2 * n, grid.dx)
    k = 2.0 * math.pi / wavelength
    kt2 = (2.0 * math.pi) ** 2 * f2
    passband = f2 <= u_limit ** 2
    kz_minus_k = -kt2 / (k + np.sqrt(np.maximum(k * k - kt2, 0.0)))
    transfer = np.where(passband, np.exp(1j * distance * kz_minus_k), 0.0)

    out = np.fft.ifft2(np.fft.fft2(padded) * transfer)
    return field.with_samples(out[lo:lo + n, lo:lo + n])


def absorbing_boundary(field):
    """
    :return: (field with the guard band applied, power removed by the guard band)
    """
    before = total_power(field)
    out = field.with_samples(field.samples * _guard_mask(field.grid))
    return out, before - total_power(out)


def propagate_stepped(field, distance, max_steps=1000):
    """
    Propagate over a long distance in band-limit-safe steps, absorbing the
    window edge between steps.

    :return: (propagated field, total power absorbed by the guard band)
    """
    if distance < 0:
        raise DomainError(f"propagation distance must be >= 0, got {distance}")
    remaining = float(distance)
    absorbed = 0.0
    current = field
    for _ in range(max_steps):
        if remaining <= 0:
            return current, absorbed
        safe = max_safe_distance(current)
        if safe <= 0:
            raise AliasingError("field spectrum exceeds the grid's passband", safe)
        step = min(remaining, 0.95 * safe)
        current = propagate(current, step)
        current, lost = absorbing_boundary(current)
        absorbed += lost
        remaining -= step
    if remaining > 0:
        raise AliasingError(f"needed more than {max_steps} steps for {distance:.6g} m", distance - remaining)
    return current, absorbed


def propagate_scaled(field, distance, out_window):
    """
    Two-step Fresnel propagation with coordinate rescaling.

    The output grid has the same sample count and a window of out_window, so
    legs of hundreds of kilometres can land on a receiver-sized grid. Spatial
    frequencies that would land outside the output window are removed.

    :param field: input ComplexField
    :param distance: propagation distance in metres, > 0
    :param out_window: side of the output window in metres
    :return: ComplexField on Grid(out_window, n)
    """
    if not distance > 0:
        raise DomainError(f"scaled propagation needs a positive distance, got {distance}")
    grid = field.grid
    out_grid = Grid(out_window, grid.n)
    m = out_window / grid.window
    wavelength = field.wavelength
    k = 2.0 * math.pi / wavelength

    q1 = np.exp(1j * k / (2.0 * distance) * (1.0 - m) * _radius_squared(grid))
    f2 = _frequency_squared(grid.n, grid.dx)
    f_limit = out_window / (2.0 * wavelength * distance)
    q2 = np.where(f2 <= f_limit ** 2, np.exp(-1j * math.pi * wavelength * distance * f2 / m), 0.0)
    q3 = np.exp(1j * k / (2.0 * distance) * (m - 1.0) / m * _radius_squared(out_grid))

    shifted = np.fft.ifftshift(field.samples / m * q1)
    out = np.fft.fftshift(np.fft.ifft2(np.fft.fft2(shifted) * q2)) * q3
    return ComplexField(out_grid, wavelength, out)


def resample(field, grid):
    """Linearly interpolate the field onto another grid; samples outside the source window are zero."""
    axis = field.grid.axis()
    X, Y = _coordinates(grid)
    points = np.column_stack([Y.ravel(), X.ravel()])
    parts = []
    for values in (field.samples.real, field.samples.imag):
        interpolator = RegularGridInterpolator((axis, axis), values, bounds_error=False, fill_value=0.0)
        parts.append(interpolator(points).reshape(grid.n, grid.n))
    return ComplexField(grid, field.wavelength, parts[0] + 1j * parts[1])
