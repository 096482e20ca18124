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
# This module contains the protocol rate models: direct transmission, nested
# satellite repeaters with ground or space memories, direct geostationary
# distribution and the single / double memory satellite key rates with a
# finite-key bound.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.optimize import bisect
from scipy.special import entr

from qnetsim.linkgeom import (
    EARTH_RADIUS,
    AttenuationModel,
    atmospheric_db,
    elevation_angle,
    far_field_capture_db,
    slant_range,
)
from qnetsim.utils.errors import (
    DegenerateParameterError,
    DomainError,
    InvariantViolationError,
    NoKeyAtZeroLossError,
)
from qnetsim.utils.units import db_to_transmittance

SPEED_OF_LIGHT = 299_792_458.0
PROTOCOLS = ("single_memory", "double_memory")
PLACEMENTS = ("ground", "space")


def _check_fraction(name, value, allow_zero=False):
    low_ok = value >= 0 if allow_zero else value > 0
    if not (low_ok and value <= 1):
        raise InvariantViolationError(name, f"must be in {'[0' if allow_zero else '(0'}, 1], got {value}")


def binary_entropy(p):
    p = min(max(float(p), 0.0), 1.0)
    return float((entr(p) + entr(1.0 - p)) / math.log(2.0))


@dataclass(frozen=True)
class RateCurve:
    abscissa: tuple
    values: tuple
    tag: str
    abscissa_unit: str = "m"
    value_unit: str = "Hz"

    def __post_init__(self):
        abscissa = tuple(float(x) for x in self.abscissa)
        values = tuple(float(v) for v in self.values)
        if len(abscissa) != len(values):
            raise InvariantViolationError("values", "need one value per abscissa point")
        if any(b <= a for a, b in zip(abscissa, abscissa[1:])):
            raise InvariantViolationError("abscissa", "must be strictly increasing")
        if any(v < 0 or math.isnan(v) for v in values):
            raise InvariantViolationError("values", "rates must be >= 0")
        object.__setattr__(self, "abscissa", abscissa)
        object.__setattr__(self, "values", values)

    def per_day(self):
        return tuple(v * 86400.0 for v in self.values)


#### DIRECT TRANSMISSION

def direct_rate(source_rate, total_loss_db):
    if total_loss_db < 0:
        raise DomainError(f"loss must be >= 0 dB, got {total_loss_db}")
    return source_rate * db_to_transmittance(total_loss_db)


#### REPEATERS

def nested_waiting_rate(p0, p_swap, attempt_interval, levels, modes=1):
    """
    Rate of a nested repeater under the (3/2)-per-level waiting-time rule.

    :param p0: success probability of one elementary attempt per mode
    :param p_swap: success probability of one swap
    :param attempt_interval: time per attempt (s)
    :param levels: nesting level
    :param modes: multiplexed modes tried in parallel per attempt
    :return: end-to-end rate in Hz
    """
    if not 0 < p0 <= 1:
        raise DegenerateParameterError(f"elementary success probability must be in (0, 1], got {p0}")
    if not 0 < p_swap <= 1:
        raise DegenerateParameterError(f"swap success probability must be in (0, 1], got {p_swap}")
    per_window = -math.expm1(modes * math.log1p(-p0)) if p0 < 1 else 1.0
    if per_window <= 0:
        raise DegenerateParameterError("elementary link never succeeds")
    elementary_time = attempt_interval / per_window
    return 1.0 / (elementary_time * (1.5 / p_swap) ** levels)


@dataclass(frozen=True)
class RepeaterParams:
    """
    Nested satellite repeater. With placement "ground" each elementary link is
    a satellite pair source sending both photons down to ground memories
    heralded by QND detectors. With placement "space" the memories fly on the
    satellites and each link is one photon from a memory-source to the next
    satellite.
    """
    n_links: int = 8
    nesting_level: int = 3
    per_link_loss_db: float = field(default=40.0, metadata={"unit": "dB"})
    memory_write_eff: float = 0.9
    memory_read_eff: float = 0.9
    source_eff: float = 0.9
    detector_eff: float = 0.9
    qnd_eff: float = 0.32
    pair_source_rate: float = field(default=10e6, metadata={"unit": "Hz"})
    link_length: float = field(default=2500e3, metadata={"unit": "m"})
    multiplexing_modes: int = 1000
    bsm_success: float = 0.5
    placement: str = "ground"

    def __post_init__(self):
        if self.n_links != 2 ** self.nesting_level:
            raise InvariantViolationError("n_links", f"must equal 2^nesting_level, got {self.n_links}")
        for name in ("memory_write_eff", "memory_read_eff", "source_eff", "detector_eff", "qnd_eff", "bsm_success"):
            _check_fraction(name, getattr(self, name))
        if self.per_link_loss_db < 0:
            raise InvariantViolationError("per_link_loss_db", "must be >= 0")
        if not (self.pair_source_rate > 0 and self.link_length > 0):
            raise InvariantViolationError("pair_source_rate", "source rate and link length must be positive")
        if self.multiplexing_modes < 1:
            raise InvariantViolationError("multiplexing_modes", "must be >= 1")
        if self.placement not in PLACEMENTS:
            raise InvariantViolationError("placement", f"must be one of {PLACEMENTS}")

    @classmethod
    def ground_memory(cls, total_distance, **overrides):
        return repeater_for_distance(cls(**overrides), total_distance)

    @classmethod
    def space_memory(cls, total_distance, **overrides):
        settings = dict(qnd_eff=0.9, pair_source_rate=20e6, bsm_success=1.0, placement="space")
        settings.update(overrides)
        return repeater_for_distance(cls(**settings), total_distance)

    @property
    def p0(self):
        eta = db_to_transmittance(self.per_link_loss_db)
        if self.placement == "ground":
            # both photons reach ground memories; eta covers the pair
            return self.source_eff * eta * (self.qnd_eff * self.memory_write_eff) ** 2
        return self.source_eff * self.memory_write_eff * eta * self.qnd_eff * self.memory_write_eff

    @property
    def p_swap(self):
        return self.bsm_success * self.memory_read_eff ** 2

    @property
    def attempt_interval(self):
        return max(1.0 / self.pair_source_rate, 2.0 * self.link_length / SPEED_OF_LIGHT)


def repeater_rate(params):
    """End-to-end entanglement rate (Hz) including the final read-out and detection of both ends."""
    rate = nested_waiting_rate(params.p0, params.p_swap, params.attempt_interval, params.nesting_level,
                               params.multiplexing_modes)
    return rate * (params.memory_read_eff * params.detector_eff) ** 2


# 4 urad divergence, 1 m receivers, 1200 km orbit, 580 nm
REPEATER_DIVERGENCE = 4e-6
REPEATER_RX_APERTURE = 1.0
REPEATER_ORBIT = 1200e3
REPEATER_WAVELENGTH = 580e-9


def ground_pair_link_terms(link_length, model=None):
    """
    Per-photon losses of a pair source above the middle of a ground link.

    :return: (far-field capture loss in dB, atmospheric loss in dB)
    """
    model = model or AttenuationModel()
    offset = link_length / 2.0
    zenith = 90.0 - elevation_angle(REPEATER_ORBIT, offset)
    if zenith >= 90:
        raise DomainError(f"link of {link_length:.6g} m is beyond the satellite's horizon")
    gamma = offset / EARTH_RADIUS
    orbit_radius = EARTH_RADIUS + REPEATER_ORBIT
    distance = math.sqrt(EARTH_RADIUS ** 2 + orbit_radius ** 2 - 2 * EARTH_RADIUS * orbit_radius * math.cos(gamma))
    return (far_field_capture_db(REPEATER_DIVERGENCE, distance, REPEATER_RX_APERTURE),
            atmospheric_db(model, REPEATER_WAVELENGTH, zenith))


def ground_pair_link_loss_db(link_length, model=None):
    """Loss of both photons of a pair source above the middle of a ground link."""
    return 2.0 * sum(ground_pair_link_terms(link_length, model))


def space_link_loss_db(link_length):
    return far_field_capture_db(REPEATER_DIVERGENCE, link_length, REPEATER_RX_APERTURE)


def repeater_for_distance(params, total_distance, model=None):
    """Split total_distance into the params' elementary links and set their loss for its placement."""
    link_length = total_distance / params.n_links
    if params.placement == "ground":
        loss = ground_pair_link_loss_db(link_length, model)
    else:
        loss = space_link_loss_db(link_length)
    return replace(params, link_length=link_length, per_link_loss_db=loss)


def repeater_distance_curve(distances, params=None, model=None):
    params = params or RepeaterParams()
    values = [repeater_rate(repeater_for_distance(params, d, model)) for d in distances]
    return RateCurve(tuple(distances), tuple(values), f"{params.placement}_repeater")


#### GEOSTATIONARY DIRECT

@dataclass(frozen=True)
class GeoDirect:
    altitude: float = field(default=36_000e3, metadata={"unit": "m"})
    source_rate: float = field(default=1e9, metadata={"unit": "Hz"})
    divergence: float = field(default=4e-6, metadata={"unit": "rad"})
    rx_aperture: float = field(default=1.0, metadata={"unit": "m"})
    wavelength: float = field(default=580e-9, metadata={"unit": "m"})
    detector_eff: float = 0.9
    min_elevation: float = field(default=30.0, metadata={"unit": "deg"})

    def __post_init__(self):
        for name in ("altitude", "source_rate", "divergence", "rx_aperture", "wavelength"):
            if not getattr(self, name) > 0:
                raise InvariantViolationError(name, f"must be positive, got {getattr(self, name)}")
        _check_fraction("detector_eff", self.detector_eff)
        if not 0 <= self.min_elevation < 90:
            raise InvariantViolationError("min_elevation", "must be in [0, 90) deg")


def geo_direct_rate(geo, ground_distance, model=None):
    """Pair rate (Hz) to two stations placed symmetrically about the sub-satellite point."""
    model = model or AttenuationModel()
    elevation = elevation_angle(geo.altitude, ground_distance / 2.0)
    if elevation < geo.min_elevation:
        return 0.0
    zenith = 90.0 - elevation
    distance = slant_range(geo.altitude, zenith)
    per_photon = (far_field_capture_db(geo.divergence, distance, geo.rx_aperture)
                  + atmospheric_db(model, geo.wavelength, zenith))
    return direct_rate(geo.source_rate, 2.0 * per_photon) * geo.detector_eff ** 2


def geo_direct_curve(distances, geo=None, model=None):
    geo = geo or GeoDirect()
    return RateCurve(tuple(distances), tuple(geo_direct_rate(geo, d, model) for d in distances), "geo_direct")


#### MEMORY SATELLITES

@dataclass(frozen=True)
class ProtocolParams:
    source_rate: float = field(default=5e6, metadata={"unit": "Hz"})
    transmission_period: float = field(default=240.0, metadata={"unit": "s"})
    memory_efficiency: float = 0.6
    detector_efficiency: float = 0.8
    memory_noise_prob: float = 1e-3
    background_prob: float = 6.4e-7
    dark_count_prob: float = 1e-7
    coincidence_window: float = field(default=200e-9, metadata={"unit": "s"})
    memory_dephasing_rate: float = field(default=0.0, metadata={"unit": "1/s"})
    error_correction_inefficiency: float = 1.16
    security_epsilon: float = 1e-9
    multiplexing_modes: int = None
    sifting_factor: float = 0.5
    parameter_estimation_fraction: float = 0.1
    detectors_per_station: int = 2
    swap_efficiency: float = 1.0
    storage_time: float = field(default=None, metadata={"unit": "s"})
    flight_time: float = field(default=0.0, metadata={"unit": "s"})

    def __post_init__(self):
        for name in ("memory_efficiency", "detector_efficiency", "memory_noise_prob", "background_prob",
                     "dark_count_prob", "sifting_factor", "swap_efficiency"):
            _check_fraction(name, getattr(self, name), allow_zero=True)
        _check_fraction("security_epsilon", self.security_epsilon)
        if not 0 < self.parameter_estimation_fraction < 1:
            raise InvariantViolationError("parameter_estimation_fraction", "must be in (0, 1)")
        for name in ("source_rate", "transmission_period", "coincidence_window"):
            if not getattr(self, name) > 0:
                raise InvariantViolationError(name, f"must be positive, got {getattr(self, name)}")
        if self.memory_dephasing_rate < 0 or self.flight_time < 0:
            raise InvariantViolationError("memory_dephasing_rate", "rates and times must be >= 0")
        if self.error_correction_inefficiency < 1:
            raise InvariantViolationError("error_correction_inefficiency", "must be >= 1")
        if self.multiplexing_modes is not None and self.multiplexing_modes < 1:
            raise InvariantViolationError("multiplexing_modes", "must be >= 1 or None")

    @classmethod
    def ideal_memories(cls, **overrides):
        return cls(**{"memory_efficiency": 1.0, "memory_dephasing_rate": 0.0, **overrides})

    @property
    def pulses(self):
        return self.transmission_period * min(self.source_rate, 1.0 / self.coincidence_window)

    @property
    def noise_prob(self):
        return self.detectors_per_station * (self.background_prob + self.dark_count_prob)

    @property
    def duration(self):
        return 2.0 * self.transmission_period + self.flight_time

    @property
    def dephasing_error(self):
        stored = self.storage_time if self.storage_time is not None else self.transmission_period + self.flight_time
        return 0.5 * -math.expm1(-self.memory_dephasing_rate * stored)


@dataclass(frozen=True)
class KeyResult:
    key_length: float
    key_rate: float
    sifted: float
    qber: float


def _link_stats(params, channel_loss_db):
    """:return: (signal click probability, error of a click on a bare link)"""
    signal = db_to_transmittance(channel_loss_db) * params.detector_efficiency
    p_n = params.noise_prob
    clicks = signal + p_n
    return signal, (0.5 * p_n / clicks if clicks > 0 else 0.5)


def _memory_error(params):
    denominator = params.memory_efficiency + params.memory_noise_prob
    return 0.5 * params.memory_noise_prob / denominator if denominator > 0 else 0.5


def sifted_and_qber(params, channel_loss_db, protocol):
    """
    Sifted counts accumulated over one run and their error rate.

    memory_efficiency is the efficiency of one memory write or read.
    double_memory writes a memory over station A for one period, flies to B and
    writes the second memory, then swaps in place by gate and measurement, so
    each pair pays two writes and no read. single_memory writes over A, reads
    the stored qubits back out and sends them over the B link, so they pay a
    write, a read and the second transmittance.
    """
    if channel_loss_db < 0:
        raise DomainError(f"loss must be >= 0 dB, got {channel_loss_db}")
    if protocol not in PROTOCOLS:
        raise DomainError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    signal, e_link = _link_stats(params, channel_loss_db)
    p_n = params.noise_prob
    loaded = params.pulses * (signal + p_n)
    if params.multiplexing_modes is not None:
        loaded = min(loaded, float(params.multiplexing_modes))
    e_mem = _memory_error(params)
    e_deph = params.dephasing_error

    if protocol == "double_memory":
        sifted = params.sifting_factor * loaded * params.memory_efficiency ** 2 * params.swap_efficiency
        qber = 2.0 * e_link + 2.0 * e_mem + 2.0 * e_deph
    else:
        released = params.memory_efficiency ** 2 * signal + p_n
        e_release = 0.5 * p_n / released if released > 0 else 0.5
        sifted = params.sifting_factor * loaded * released
        qber = e_link + e_release + e_mem + e_deph
    return sifted, min(qber, 0.5)


def _raw_key_length(params, sifted, qber):
    leak = math.log2(2.0 / params.security_epsilon ** 3)
    k = params.parameter_estimation_fraction * sifted
    n = sifted - k
    if k <= 0 or n <= 0:
        return -leak
    mu = math.sqrt((n + k) / (n * k) * (k + 1.0) / k * math.log(2.0 / params.security_epsilon))
    return (n * (1.0 - binary_entropy(min(qber + mu, 0.5)))
            - params.error_correction_inefficiency * n * binary_entropy(qber)
            - leak)


def memory_key_rate(params, channel_loss_db, protocol):
    """
    Finite-key length and rate of a memory satellite run.

    :param params: ProtocolParams
    :param channel_loss_db: loss of each ground link (dB)
    :param protocol: "single_memory" or "double_memory"
    :return: KeyResult; key_length is 0 when the bound is not positive
    """
    sifted, qber = sifted_and_qber(params, channel_loss_db, protocol)
    length = max(0.0, _raw_key_length(params, sifted, qber))
    return KeyResult(key_length=length, key_rate=length / params.duration, sifted=sifted, qber=qber)


def asymptotic_key_rate(params, channel_loss_db, protocol):
    """Key bits per pulse in the infinite-block limit, with the same estimation split."""
    sifted, qber = sifted_and_qber(params, channel_loss_db, protocol)
    fraction = 1.0 - (1.0 + params.error_correction_inefficiency) * binary_entropy(qber)
    return max(0.0, (1.0 - params.parameter_estimation_fraction) * sifted / params.pulses * fraction)


def max_tolerable_loss(params, protocol, resolution=0.1, upper=100.0):
    """
    Largest channel loss with a positive key, found by bisection.

    :raise NoKeyAtZeroLossError: when there is no key even without loss
    """
    def margin(loss):
        sifted, qber = sifted_and_qber(params, loss, protocol)
        return _raw_key_length(params, sifted, qber)

    if margin(0.0) <= 0:
        raise NoKeyAtZeroLossError(f"{protocol} yields no key at 0 dB")
    if margin(upper) > 0:
        return upper
    return float(bisect(margin, 0.0, upper, xtol=resolution))


def key_rate_curve(params, losses, protocol):
    values = [memory_key_rate(params, float(loss), protocol).key_rate for loss in losses]
    return RateCurve(tuple(losses), tuple(values), protocol, abscissa_unit="dB", value_unit="bit/s")


def crossover_loss(params, source_rate, losses=np.arange(0.0, 400.0, 1.0)):
    """Smallest total loss at which the repeater beats direct transmission of the same total loss."""
    for total in losses:
        repeater = repeater_rate(replace(params, per_link_loss_db=float(total) / params.n_links))
        if repeater > direct_rate(source_rate, float(total)):
            return float(total)
    return math.inf
