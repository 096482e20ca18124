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
# This module contains the ScenarioRunner, which assembles end-to-end loss
# budgets and rate reports for every scenario kind, runs seeded Monte Carlo
# ensembles and parameter sweeps.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, fields, is_dataclass, replace
from functools import lru_cache
import math
import numbers

import numpy as np
from scipy.optimize import bisect

from qnetsim.chainoptics import (
    apply_lens,
    build_chain,
    extrapolate_chain,
    launch_field,
    lens_guide_mode,
    perturb_chain,
    propagate_chain,
)
from qnetsim.linkgeom import (
    atmospheric_db,
    elevation_angle,
    far_field_capture_db,
    ground_link_diffraction,
    ground_track_speed,
    max_ground_distance,
    pointing_jitter_loss,
    slant_range,
)
from qnetsim.ratemodels import (
    RateCurve,
    RepeaterParams,
    direct_rate,
    geo_direct_curve,
    geo_direct_rate,
    ground_pair_link_terms,
    key_rate_curve,
    max_tolerable_loss,
    memory_key_rate,
    repeater_distance_curve,
    repeater_for_distance,
    repeater_rate,
    space_link_loss_db,
)
from qnetsim.scenarios.budget import (
    COMPONENTS,
    LossBudget,
    Report,
    build_budget,
    ensemble_stats,
    provenance,
)
from qnetsim.scenarios.presets import KINDS, BudgetSettings, ScenarioConfig, preset, preset_names
from qnetsim.turbulence import (
    calibrate_r0,
    captured_field,
    uplink_trial,
    vacuum_reference,
)
from qnetsim.utils.errors import (
    DomainError,
    InvariantViolationError,
    NoKeyAtZeroLossError,
    ScenarioStageError,
    UnknownParameterError,
    UnstableGuideError,
    ZeroPowerError,
)
from qnetsim.utils.qnet_helper import QNetHelper
from qnetsim.utils.seeding import derive_seed
from qnetsim.utils.units import transmittance_to_db
from qnetsim.wavefield import GaussianSpec, resample, total_power

# Ground distances for the rate-versus-distance curves, 1000 to 20,000 km
DISTANCE_GRID = tuple(float(d) for d in np.arange(1000e3, 20_000e3 + 1.0, 500e3))
# Channel losses for the key-rate curves, 0 to 50 dB
LOSS_GRID = tuple(float(x) for x in np.arange(0.0, 51.0, 1.0))

CHAIN_KINDS = ("asqn_entanglement", "vbg_guide", "relay_plus_repeater")
# Swept fields that move the lens-guide eigenmode
GUIDE_PATHS = ("chain.separation", "chain.lens.focal_length", "chain.wavelength")


@contextmanager
def _stage(name):
    try:
        yield
    except ScenarioStageError:
        raise
    except Exception as e:
        raise ScenarioStageError(name, e) from e


@dataclass(frozen=True, eq=False)
class ChainRun:
    diffraction_db: float
    reflection_db: float
    trace: object
    mode: str
    settled: bool


def _run_chain(field, chain, simulate_hops):
    if simulate_hops is None or simulate_hops >= len(chain):
        trace = propagate_chain(field, chain)
        return ChainRun(trace.diffraction_db, trace.reflection_db, trace, "full", True)
    trace = propagate_chain(field, replace(chain, hops=chain.hops[:simulate_hops]))
    extended = extrapolate_chain(trace, len(chain))
    return ChainRun(extended.diffraction_db, extended.reflection_db, trace, "extrapolated", extended.settled)


@lru_cache(maxsize=8)
def _nominal_chain(spec, simulate_hops):
    return _run_chain(launch_field(spec), build_chain(spec), simulate_hops)


def _chain_spec(config, distance):
    """The config's chain with enough hops to cover distance."""
    hops = max(1, math.ceil(distance / config.chain.separation - 1e-9))
    return replace(config.chain, hops=hops)


def _direct_rates(source_rate, total_db):
    rate = direct_rate(source_rate, total_db)
    return {"primary": rate, "primary_per_day": rate * 86400.0}


def _trace_rows(run):
    if run is None:
        return ()
    return tuple((record.hop, record.cumulative_db) for record in run.trace.records)


def with_parameter(config, path, value):
    """
    Copy of config with the numeric field at a dotted path set to value.

    Changing the guide geometry of a chain launched on its eigenmode relaunches
    it on the eigenmode of the new geometry.

    :raise UnknownParameterError: when the path does not resolve to a numeric field
    """
    def assign(obj, parts):
        head = parts[0]
        if not is_dataclass(obj) or head not in {f.name for f in fields(obj)}:
            raise UnknownParameterError(f"Unknown parameter: {path}")
        current = getattr(obj, head)
        if len(parts) > 1:
            return replace(obj, **{head: assign(current, parts[1:])})
        if isinstance(current, bool) or not isinstance(current, numbers.Real):
            raise UnknownParameterError(f"Parameter {path} is not numeric")
        if isinstance(current, numbers.Integral):
            if float(value) != int(value):
                raise UnknownParameterError(f"Parameter {path} takes integers, got {value}")
            return replace(obj, **{head: int(value)})
        return replace(obj, **{head: float(value)})

    updated = assign(config, path.split("."))
    if path in GUIDE_PATHS:
        updated = replace(updated, chain=_relaunch(config.chain, updated.chain))
    return updated


def _relaunch(before, after):
    """Keep a chain that launched its lens-guide eigenmode on the eigenmode of its new geometry."""
    try:
        mode = lens_guide_mode(before.separation, before.lens.focal_length, before.wavelength)
    except UnstableGuideError:
        return after
    launch = before.launch
    if not (math.isclose(launch.waist, mode.waist, rel_tol=1e-9)
            and math.isclose(launch.curvature_radius, mode.curvature_radius, rel_tol=1e-9)):
        return after
    return replace(after, launch=lens_guide_mode(after.separation, after.lens.focal_length, after.wavelength))


def parameter_unit(config, path):
    """Unit declared for the field at a dotted path, "" when it has none or does not resolve."""
    obj = config
    parts = path.split(".")
    for part in parts[:-1]:
        obj = getattr(obj, part, None)
    if not is_dataclass(obj):
        return ""
    for f in fields(obj):
        if f.name == parts[-1]:
            return f.metadata.get("unit", "")
    return ""


def crossover_distance(repeater, geo, model=None, distances=DISTANCE_GRID, resolution=1e3):
    """
    Ground distance beyond which the repeater outperforms direct geostationary
    distribution for good.

    :return: distance in m, 0 when the repeater wins everywhere on the grid, inf when it never does
    """
    def gap(d):
        return geo_direct_rate(geo, d, model) - repeater_rate(repeater_for_distance(repeater, d, model))

    gaps = [gap(d) for d in distances]
    behind = [i for i, g in enumerate(gaps) if g >= 0]
    if not behind:
        return 0.0
    last = behind[-1]
    if last == len(distances) - 1:
        return math.inf
    return float(bisect(gap, distances[last], distances[last + 1], xtol=resolution))


class ScenarioRunner():
    def __init__(self, controller: QNetHelper):
        """
        Initialize the scenario runner with a QNetHelper object

        :param controller: QNetHelper used for logging
        """
        self._controller = controller
        self._pipelines = {
            "asqn_entanglement": self._asqn_entanglement,
            "asqn_qubit_uplink": self._asqn_qubit_uplink,
            "vbg_guide": self._vbg_guide,
            "geo_direct": self._geo_direct,
            "ground_repeater": self._repeater,
            "space_repeater": self._repeater,
            "single_memory_sat": self._memory_sat,
            "double_memory_sat": self._memory_sat,
            "relay_plus_repeater": self._relay_plus_repeater,
        }

    #### PUBLIC OPERATIONS

    def run_scenario(self, config):
        """
        Run the pipeline for the config's scenario kind.

        :param config: ScenarioConfig
        :return: Report
        """
        try:
            self._controller.log_info(f"Running {config.kind} scenario with seed {config.seed}")
            return self._pipelines[config.kind](config, config.seed)
        except Exception as e:
            self._controller.log_error(f"Error in scenarios:run_scenario: {e}")
            raise

    def monte_carlo(self, config, trials, seed=None):
        """
        Ensemble of perturbed-chain or turbulence runs.

        Trial i draws its chain errors from derive_seed(seed, i). For chain
        scenarios the measured mean excess diffraction replaces the error
        allowance in the budget; the statistics are over the per-trial totals.
        Scenarios without a chain or turbulence have nothing to draw and
        return their single analytic report.

        :param config: ScenarioConfig
        :param trials: number of trials (>= 1)
        :param seed: ensemble seed, defaults to config.seed
        :return: Report
        """
        try:
            if isinstance(trials, bool) or not isinstance(trials, numbers.Integral) or trials < 1:
                raise InvariantViolationError("trials", f"must be an integer >= 1, got {trials}")
            seed = config.seed if seed is None else int(seed)
            self._controller.log_info(f"Monte Carlo {config.kind}: {trials} trials, seed {seed}")
            if config.kind == "asqn_qubit_uplink":
                return self._asqn_qubit_uplink(replace(config, ensemble=trials, seed=seed), seed)
            if config.kind not in CHAIN_KINDS:
                return self._pipelines[config.kind](config, seed)

            distance = config.total_distance
            if config.kind == "relay_plus_repeater":
                distance /= config.repeater.n_links
            with _stage("chain"):
                excess = self._error_excess_trials(config, _chain_spec(config, distance), trials, seed)
            report = self._pipelines[config.kind](config, seed, max(0.0, float(np.mean(excess))))
            base = report.total_db - report.budget.error_excess
            return replace(report, stats=ensemble_stats(base + max(0.0, e) for e in excess))
        except Exception as e:
            self._controller.log_error(f"Error in scenarios:monte_carlo: {e}")
            raise

    def sweep(self, config, path, grid):
        """
        One run per grid value of the numeric config field at path.

        :param config: ScenarioConfig
        :param path: dotted parameter path, e.g. "total_distance" or "chain.separation"
        :param grid: strictly increasing values
        :return: Report whose single curve is the primary rate over the grid
        """
        try:
            grid = [float(v) for v in grid]
            if not grid:
                raise InvariantViolationError("grid", "needs at least one value")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise InvariantViolationError("grid", "must be strictly increasing")
            configs = [with_parameter(config, path, value) for value in grid]
            self._controller.log_info(f"Sweeping {path} over {len(grid)} points")
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                reports = list(pool.map(self.run_scenario, configs))

            first = reports[0]
            totals = [report.total_db for report in reports]
            curve = RateCurve(tuple(grid), tuple(report.primary_rate for report in reports),
                              f"{config.kind}:{path}", abscissa_unit=parameter_unit(config, path))
            return Report(
                kind=config.kind,
                budget=first.budget,
                rates=first.rates,
                stats=ensemble_stats(totals),
                metrics={"points": len(grid), "min_total_db": min(totals), "max_total_db": max(totals)},
                curves=(curve,),
                trace=first.trace,
                provenance=provenance((config, path, tuple(grid)), config.seed),
                mode=first.mode,
            )
        except Exception as e:
            self._controller.log_error(f"Error in scenarios:sweep: {e}")
            raise

    #### SHARED PIECES

    def _map(self, config, func, items):
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(func, items))

    def _error_excess_trials(self, config, spec, trials, seed):
        if config.errors.is_zero:
            return [0.0] * trials
        nominal = _nominal_chain(spec, config.simulate_hops)
        chain = build_chain(spec)
        field = launch_field(spec)

        def trial(i):
            perturbed = perturb_chain(chain, config.errors, derive_seed(seed, i))
            return _run_chain(field, perturbed, config.simulate_hops).diffraction_db - nominal.diffraction_db

        return self._map(config, trial, range(trials))

    def _allowance(self, config, measured):
        if measured is not None:
            return measured
        return 0.0 if config.errors.is_zero else config.budget.error_allowance_db

    def _report(self, config, seed, budget, rates, metrics, curves=(), run=None, stats=None):
        return Report(
            kind=config.kind,
            budget=budget,
            rates=rates,
            stats=stats or ensemble_stats([budget.total]),
            metrics=metrics,
            curves=tuple(curves),
            trace=_trace_rows(run),
            provenance=provenance(config, seed),
            mode=run.mode if run is not None else "full",
        )

    def _chain(self, spec, simulate_hops):
        with _stage("chain"):
            run = _nominal_chain(spec, simulate_hops)
        if not run.settled:
            self._controller.log_warning(
                f"per-hop diffraction had not settled after {simulate_hops} hops; extrapolated loss is approximate")
        return run

    def _injected_chain(self, captured, spec, simulate_hops):
        """Chain run of a field caught by the first satellite, normalized after its lens."""
        field = resample(captured, spec.grid)
        if total_power(field) <= 0:
            raise ZeroPowerError("no power reached the first relay satellite")
        field, _, _ = apply_lens(field, spec.lens)
        power = total_power(field)
        if power <= 0:
            raise ZeroPowerError("no power passed the first relay satellite")
        return _run_chain(field.scaled(1.0 / math.sqrt(power)), build_chain(spec), simulate_hops)

    #### PIPELINES

    def _asqn_entanglement(self, config, seed, error_excess=None):
        spec = _chain_spec(config, config.total_distance)
        run = self._chain(spec, config.simulate_hops)
        settings = config.budget
        link = config.link
        with _stage("ground_link"):
            ground = 2.0 * ground_link_diffraction(link, spec.launch)
            atmospheric = 2.0 * atmospheric_db(config.attenuation, link.wavelength, link.zenith_angle)
            pointing = 2.0 * pointing_jitter_loss(settings.pointing_jitter, spec.launch.divergence(spec.wavelength))
        with _stage("budget"):
            budget = build_budget(
                self._controller,
                chain_diffraction=run.diffraction_db,
                ground_diffraction=ground,
                reflection=run.reflection_db,
                atmospheric=atmospheric,
                pointing=pointing,
                error_excess=self._allowance(config, error_excess),
                other=settings.inefficiency_db,
            )
        with _stage("rates"):
            rates = _direct_rates(settings.source_rate, budget.total)
        metrics = {
            "hops": spec.hops,
            "total_diffraction_db": budget.chain_diffraction + budget.ground_diffraction,
            "other_aggregate_db": budget.atmospheric + budget.pointing + budget.error_excess + budget.other,
            "settled": run.settled,
        }
        return self._report(config, seed, budget, rates, metrics, run=run)

    def _asqn_qubit_uplink(self, config, seed, error_excess=None):
        geometry = config.uplink
        seeds = [derive_seed(config.seed, i) for i in range(config.ensemble)]
        profile = config.atmosphere
        if profile is None:
            self._controller.log_info(f"Calibrating r0 to {geometry.target_loss_db} dB over {len(seeds)} seeds")
            with _stage("calibration"):
                profile = calibrate_r0(geometry.target_loss_db, geometry, seeds)

        spec = _chain_spec(config, config.total_distance)
        run = self._chain(spec, config.simulate_hops)
        with _stage("uplink"):
            reference = vacuum_reference(geometry, profile)
            reference_run = self._injected_chain(reference, spec, config.simulate_hops)

            def trial(trial_seed):
                received, fraction, overlap = uplink_trial(geometry, profile, trial_seed, reference)
                injected = self._injected_chain(captured_field(received, geometry.rx_aperture), spec,
                                                config.simulate_hops)
                return fraction, overlap, injected.diffraction_db - reference_run.diffraction_db

            results = self._map(config, trial, seeds)
        fractions = [r[0] for r in results]
        excesses = [r[2] for r in results]
        uplink_db = transmittance_to_db(float(np.mean(fractions)))

        settings = config.budget
        link = config.link
        with _stage("ground_link"):
            downlink = ground_link_diffraction(link, spec.launch)
            atmospheric = (profile.zenith_attenuation_db
                           + atmospheric_db(config.attenuation, link.wavelength, link.zenith_angle))
            up_divergence = GaussianSpec(geometry.tx_waist).divergence(geometry.wavelength)
            pointing = (pointing_jitter_loss(settings.pointing_jitter, up_divergence)
                        + pointing_jitter_loss(settings.pointing_jitter, spec.launch.divergence(spec.wavelength)))
        with _stage("budget"):
            budget = build_budget(
                self._controller,
                chain_diffraction=run.diffraction_db,
                ground_diffraction=uplink_db + downlink,
                reflection=run.reflection_db,
                atmospheric=atmospheric,
                turbulence_excess=float(np.mean(excesses)),
                pointing=pointing,
                error_excess=self._allowance(config, error_excess),
                other=settings.inefficiency_db,
            )
        with _stage("rates"):
            rates = _direct_rates(settings.source_rate, budget.total)

        base = budget.total - budget.turbulence_excess - uplink_db
        totals = [base + max(0.0, e) + transmittance_to_db(f) for f, e in zip(fractions, excesses)]
        metrics = {
            "hops": spec.hops,
            "r0": profile.integrated_r0,
            "uplink_loss_db": uplink_db,
            "mode_fraction": float(np.mean([r[1] for r in results])),
            "calibrated": config.atmosphere is None,
            "settled": run.settled,
        }
        return self._report(config, seed, budget, rates, metrics, run=run, stats=ensemble_stats(totals))

    def _vbg_guide(self, config, seed, error_excess=None):
        spec = _chain_spec(config, config.total_distance)
        run = self._chain(spec, config.simulate_hops)
        settings = config.budget
        with _stage("budget"):
            budget = build_budget(
                self._controller,
                chain_diffraction=run.diffraction_db,
                reflection=run.reflection_db,
                error_excess=self._allowance(config, error_excess),
                other=settings.inefficiency_db,
            )
        with _stage("rates"):
            rates = _direct_rates(settings.source_rate, budget.total)
        metrics = {
            "hops": spec.hops,
            "per_km_db": budget.total / (config.total_distance / 1e3),
            "settled": run.settled,
        }
        return self._report(config, seed, budget, rates, metrics, run=run)

    def _geo_direct(self, config, seed, error_excess=None):
        geo = config.geo
        model = config.attenuation
        with _stage("ground_link"):
            elevation = elevation_angle(geo.altitude, config.total_distance / 2.0)
            if elevation <= 0:
                raise DomainError(f"stations {config.total_distance:.6g} m apart cannot both see the satellite")
            zenith = 90.0 - elevation
            capture = far_field_capture_db(geo.divergence, slant_range(geo.altitude, zenith), geo.rx_aperture)
            atmospheric = atmospheric_db(model, geo.wavelength, zenith)
        with _stage("budget"):
            budget = build_budget(
                self._controller,
                ground_diffraction=2.0 * capture,
                atmospheric=2.0 * atmospheric,
                other=transmittance_to_db(geo.detector_eff ** 2),
            )
        with _stage("rates"):
            rate = geo_direct_rate(geo, config.total_distance, model)
            curve = geo_direct_curve(DISTANCE_GRID, geo, model)
        if rate == 0:
            self._controller.log_warning(f"elevation {elevation:.1f} deg is below the {geo.min_elevation} deg minimum")
        metrics = {
            "elevation_deg": elevation,
            "max_distance": max_ground_distance(geo.altitude, geo.min_elevation),
        }
        rates = {"primary": rate, "primary_per_day": rate * 86400.0}
        return self._report(config, seed, budget, rates, metrics, curves=(curve,))

    def _repeater(self, config, seed, error_excess=None):
        """Budget of one elementary link; rates and curves for the whole repeater."""
        model = config.attenuation
        with _stage("ground_link"):
            params = repeater_for_distance(config.repeater, config.total_distance, model)
            if params.placement == "ground":
                capture, atmospheric = ground_pair_link_terms(params.link_length, model)
                components = {"ground_diffraction": 2.0 * capture, "atmospheric": 2.0 * atmospheric}
            else:
                components = {"chain_diffraction": space_link_loss_db(params.link_length)}
        with _stage("budget"):
            budget = build_budget(self._controller, **components)
        with _stage("rates"):
            rate = repeater_rate(params)
            curves = (repeater_distance_curve(DISTANCE_GRID, config.repeater, model),
                      geo_direct_curve(DISTANCE_GRID, config.geo, model))
            metrics = {
                "link_length": params.link_length,
                "per_link_loss_db": params.per_link_loss_db,
                "crossover_distance": crossover_distance(config.repeater, config.geo, model),
            }
            if params.placement == "space":
                ground_rate = repeater_rate(repeater_for_distance(RepeaterParams(), config.total_distance, model))
                metrics["ground_memory_ratio"] = rate / ground_rate if ground_rate > 0 else math.inf
        rates = {
            "primary": rate,
            "primary_per_day": rate * 86400.0,
            "geo_direct": geo_direct_rate(config.geo, config.total_distance, model),
        }
        return self._report(config, seed, budget, rates, metrics, curves=curves)

    def _memory_sat(self, config, seed, error_excess=None):
        protocol = "single_memory" if config.kind == "single_memory_sat" else "double_memory"
        link = config.link
        launch = config.chain.launch
        settings = config.budget
        with _stage("ground_link"):
            diffraction = ground_link_diffraction(link, launch)
            atmospheric = atmospheric_db(config.attenuation, link.wavelength, link.zenith_angle)
            pointing = pointing_jitter_loss(settings.pointing_jitter, launch.divergence(link.wavelength))
        with _stage("budget"):
            budget = build_budget(
                self._controller,
                ground_diffraction=diffraction,
                atmospheric=atmospheric,
                pointing=pointing,
                error_excess=self._allowance(config, error_excess),
                other=settings.inefficiency_db,
            )
        params = config.protocol
        flight_time = config.total_distance / ground_track_speed(link.orbit_altitude)
        if params.flight_time == 0:
            params = replace(params, flight_time=flight_time)
        with _stage("rates"):
            result = memory_key_rate(params, budget.total, protocol)
            try:
                limit = max_tolerable_loss(params, protocol)
            except NoKeyAtZeroLossError as e:
                self._controller.log_warning(str(e))
                limit = 0.0
            curves = tuple(key_rate_curve(params, LOSS_GRID, name) for name in ("single_memory", "double_memory"))
        rates = {"primary": result.key_rate, "primary_per_day": result.key_rate * 86400.0}
        metrics = {
            "channel_loss_db": budget.total,
            "key_length": result.key_length,
            "sifted": result.sifted,
            "qber": result.qber,
            "max_tolerable_loss_db": limit,
            "margin_db": limit - budget.total,
            "flight_time": flight_time,
        }
        return self._report(config, seed, budget, rates, metrics, curves=curves)

    def _relay_plus_repeater(self, config, seed, error_excess=None):
        repeater = config.repeater
        sublink = config.total_distance / repeater.n_links
        spec = _chain_spec(config, sublink)
        run = self._chain(spec, config.simulate_hops)
        with _stage("budget"):
            budget = build_budget(
                self._controller,
                chain_diffraction=run.diffraction_db,
                reflection=run.reflection_db,
                error_excess=self._allowance(config, error_excess),
            )
        with _stage("rates"):
            rate = repeater_rate(replace(repeater, link_length=sublink, per_link_loss_db=budget.total))
            free_space = repeater_for_distance(repeater, config.total_distance, config.attenuation)
            free_space_rate = repeater_rate(free_space)
        rates = {"primary": rate, "primary_per_day": rate * 86400.0, "free_space_repeater": free_space_rate}
        metrics = {
            "hops": spec.hops,
            "sublink_length": sublink,
            "sublink_db": budget.total,
            "free_space_link_db": free_space.per_link_loss_db,
            "settled": run.settled,
        }
        return self._report(config, seed, budget, rates, metrics, run=run)
