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
# This module contains the scenario configuration types and the named presets
# that populate them.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


from dataclasses import dataclass, field, replace

from qnetsim.chainoptics import ChainSpec, ErrorSpec, SatelliteLens, lens_guide_mode
from qnetsim.linkgeom import AttenuationModel, GroundLink
from qnetsim.ratemodels import GeoDirect, ProtocolParams, RepeaterParams
from qnetsim.turbulence import AtmosphereProfile, UplinkGeometry
from qnetsim.utils.errors import InvariantViolationError, UnknownPresetError
from qnetsim.wavefield import Grid

KINDS = (
    "asqn_entanglement",
    "asqn_qubit_uplink",
    "vbg_guide",
    "geo_direct",
    "ground_repeater",
    "space_repeater",
    "single_memory_sat",
    "double_memory_sat",
    "relay_plus_repeater",
)


@dataclass(frozen=True)
class BudgetSettings:
    pointing_jitter: float = field(default=0.4e-6, metadata={"unit": "rad"})
    inefficiency_db: float = field(default=2.3, metadata={"unit": "dB"})
    error_allowance_db: float = field(default=5.7, metadata={"unit": "dB"})
    source_rate: float = field(default=1e9, metadata={"unit": "Hz"})

    def __post_init__(self):
        for name in ("pointing_jitter", "inefficiency_db", "error_allowance_db"):
            if not getattr(self, name) >= 0:
                raise InvariantViolationError(name, f"must be >= 0, got {getattr(self, name)}")
        if not self.source_rate > 0:
            raise InvariantViolationError("source_rate", f"must be positive, got {self.source_rate}")


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "asqn_entanglement"
    total_distance: float = field(default=20_000e3, metadata={"unit": "m"})
    chain: ChainSpec = field(default_factory=ChainSpec)
    link: GroundLink = field(default_factory=GroundLink)
    attenuation: AttenuationModel = field(default_factory=AttenuationModel)
    errors: ErrorSpec = field(default_factory=ErrorSpec)
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    repeater: RepeaterParams = field(default_factory=RepeaterParams)
    uplink: UplinkGeometry = field(default_factory=UplinkGeometry)
    atmosphere: AtmosphereProfile = None
    geo: GeoDirect = field(default_factory=GeoDirect)
    budget: BudgetSettings = field(default_factory=BudgetSettings)
    simulate_hops: int = None
    ensemble: int = 1
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvariantViolationError("kind", f"must be one of {KINDS}, got {self.kind!r}")
        if not self.total_distance > 0:
            raise InvariantViolationError("total_distance", f"must be positive, got {self.total_distance}")
        if self.ensemble < 1:
            raise InvariantViolationError("ensemble", f"must be >= 1, got {self.ensemble}")
        if self.workers < 1:
            raise InvariantViolationError("workers", f"must be >= 1, got {self.workers}")
        if self.simulate_hops is not None and self.simulate_hops < 1:
            raise InvariantViolationError("simulate_hops", f"must be >= 1, got {self.simulate_hops}")


#### PRESETS

def _relay_chain(separation=120e3, focal_length=60e3, hops=167):
    lens = SatelliteLens(focal_length=focal_length, aperture_diameter=0.6, power_transmittance=0.98)
    return ChainSpec(
        separation=separation,
        hops=hops,
        lens=lens,
        wavelength=800e-9,
        launch=lens_guide_mode(separation, focal_length, 800e-9),
        grid=Grid(1.5, 1024),
    )


def _asqn_entanglement():
    return ScenarioConfig(
        kind="asqn_entanglement",
        total_distance=20_000e3,
        chain=_relay_chain(),
        link=GroundLink(orbit_altitude=500e3, zenith_angle=0.0, tx_aperture=0.6, rx_aperture=1.2, wavelength=800e-9),
        errors=ErrorSpec(),
    )


def _asqn_qubit_uplink():
    return ScenarioConfig(
        kind="asqn_qubit_uplink",
        total_distance=20_000e3,
        chain=_relay_chain(separation=80e3, focal_length=40e3, hops=250),
        errors=ErrorSpec.none(),
        uplink=UplinkGeometry(),
        ensemble=30,
    )


def _vbg_guide():
    # 1e-4 dB/km over 4 km per element; the 4.8 cm eigenmode sits well inside the 40 cm lens
    lens = SatelliteLens(focal_length=4e3, aperture_diameter=0.4, power_transmittance=10 ** (-4e-4 / 10))
    chain = ChainSpec(
        separation=4e3,
        hops=5000,
        lens=lens,
        wavelength=1550e-9,
        launch=lens_guide_mode(4e3, 4e3, 1550e-9),
        grid=Grid(0.5, 512),
    )
    return ScenarioConfig(
        kind="vbg_guide",
        total_distance=20_000e3,
        chain=chain,
        errors=ErrorSpec.none(),
        budget=BudgetSettings(pointing_jitter=0.0, inefficiency_db=0.0, error_allowance_db=0.0),
        simulate_hops=20,
    )


def _geo_direct():
    return ScenarioConfig(kind="geo_direct", total_distance=4000e3, errors=ErrorSpec.none(), geo=GeoDirect())


def _ground_repeater():
    return ScenarioConfig(kind="ground_repeater", total_distance=20_000e3, errors=ErrorSpec.none(),
                          repeater=RepeaterParams())


def _space_repeater():
    repeater = RepeaterParams(qnd_eff=0.9, pair_source_rate=20e6, bsm_success=1.0, placement="space")
    return ScenarioConfig(kind="space_repeater", total_distance=20_000e3, errors=ErrorSpec.none(), repeater=repeater)


def _memory_sat(kind):
    # detector efficiency is part of ProtocolParams, so the budget carries no separate allowance
    return ScenarioConfig(kind=kind, total_distance=2000e3, errors=ErrorSpec.none(), protocol=ProtocolParams(),
                          budget=BudgetSettings(inefficiency_db=0.0, error_allowance_db=0.0))


def _relay_plus_repeater():
    repeater = RepeaterParams(qnd_eff=0.9, pair_source_rate=20e6, bsm_success=1.0, placement="space",
                              link_length=2000e3)
    return ScenarioConfig(
        kind="relay_plus_repeater",
        total_distance=16_000e3,
        chain=_relay_chain(hops=17),
        errors=ErrorSpec.none(),
        repeater=repeater,
    )


_PRESETS = {
    "asqn_entanglement": _asqn_entanglement,
    "asqn_qubit_uplink": _asqn_qubit_uplink,
    "vbg_guide": _vbg_guide,
    "geo_direct": _geo_direct,
    "ground_repeater": _ground_repeater,
    "space_repeater": _space_repeater,
    "single_memory_sat": lambda: _memory_sat("single_memory_sat"),
    "double_memory_sat": lambda: _memory_sat("double_memory_sat"),
    "relay_plus_repeater": _relay_plus_repeater,
}


def preset_names():
    return tuple(_PRESETS)


def preset(name, **overrides):
    """
    :param name: one of KINDS
    :param overrides: top-level ScenarioConfig fields to replace
    :return: ScenarioConfig
    """
    try:
        builder = _PRESETS[name]
    except (KeyError, TypeError):
        raise UnknownPresetError(f"Unknown preset: {name!r} (known: {', '.join(_PRESETS)})")
    config = builder()
    return replace(config, **overrides) if overrides else config
