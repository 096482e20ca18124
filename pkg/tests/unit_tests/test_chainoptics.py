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
# This module contains the unit tests for the chainoptics module.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


import math
import unittest

from qnetsim.chainoptics import (
    ChainSpec,
    ChainTrace,
    ErrorSpec,
    HopRecord,
    SatelliteLens,
    apply_lens,
    build_chain,
    convergence_gate,
    extrapolate_chain,
    launch_field,
    lens_guide_mode,
    perturb_chain,
    propagate_chain,
    waist_position,
)
from qnetsim.utils.errors import (
    DomainError,
    InvariantViolationError,
    OffsetOutsideWindowError,
    UnstableGuideError,
)
from qnetsim.wavefield import Grid, beam_radius

WAVELENGTH = 800e-9


def small_spec(hops=3, aperture=0.08, transmittance=1.0):
    """1 km confocal guide (f = 500 m) with a 1.6 cm eigenmode on a 20 cm window."""
    lens = SatelliteLens(focal_length=500.0, aperture_diameter=aperture, power_transmittance=transmittance)
    return ChainSpec(separation=1000.0, hops=hops, lens=lens, wavelength=WAVELENGTH,
                     launch=lens_guide_mode(1000.0, 500.0, WAVELENGTH), grid=Grid(0.2, 256))


def run(spec):
    return propagate_chain(launch_field(spec), build_chain(spec))


class TestChainOptics(unittest.TestCase):

    #### CONSTRUCTION TESTS

    def test_lens_guide_mode_of_relay_chain(self):
        mode = lens_guide_mode(120e3, 60e3, WAVELENGTH)
        self.assertAlmostEqual(mode.waist, 0.1748, delta=1e-4)
        self.assertEqual(mode.curvature_radius, 120e3)

    def test_lens_guide_mode_needs_a_stable_guide(self):
        with self.assertRaises(UnstableGuideError):
            lens_guide_mode(4000.0, 1000.0, WAVELENGTH)
        with self.assertRaises(UnstableGuideError):
            lens_guide_mode(1000.0, math.inf, WAVELENGTH)

    def test_chain_spec_defaults(self):
        spec = ChainSpec()
        self.assertEqual(spec.grid, Grid(1.5, 1024))
        self.assertEqual(spec.total_path, 167 * 120e3)

    def test_chain_spec_for_distance(self):
        self.assertEqual(ChainSpec.for_distance(1e6).hops, 9)
        self.assertEqual(ChainSpec.for_distance(1.2e6).hops, 10)
        with self.assertRaises(InvariantViolationError):
            ChainSpec.for_distance(-1.0)

    def test_lens_and_error_validation(self):
        with self.assertRaises(InvariantViolationError):
            SatelliteLens(aperture_diameter=-1.0)
        with self.assertRaises(InvariantViolationError):
            SatelliteLens(power_transmittance=1.5)
        with self.assertRaises(InvariantViolationError):
            ErrorSpec(separation_frac=-0.1)
        with self.assertRaises(InvariantViolationError):
            ErrorSpec(distribution="cauchy")

    def test_reflection_loss_of_relay_chain(self):
        chain = build_chain(ChainSpec())
        self.assertAlmostEqual(chain.reflection_db, 167 * -10 * math.log10(0.98), places=9)
        self.assertTrue(14.0 <= chain.reflection_db <= 16.0)

    #### PERTURBATION TESTS

    def test_zero_errors_keep_the_chain(self):
        chain = build_chain(small_spec())
        self.assertIs(perturb_chain(chain, ErrorSpec.none(), 3), chain)

    def test_perturbation_is_seeded(self):
        chain = build_chain(small_spec(hops=8))
        errors = ErrorSpec(0.1, 0.002, 0.05)
        self.assertEqual(perturb_chain(chain, errors, 7), perturb_chain(chain, errors, 7))
        self.assertNotEqual(perturb_chain(chain, errors, 7), perturb_chain(chain, errors, 8))

    def test_uniform_errors_stay_in_bounds(self):
        chain = build_chain(small_spec(hops=50))
        errors = ErrorSpec(0.1, 0.002, 0.05)
        perturbed = perturb_chain(chain, errors, 11)
        for hop in perturbed.hops:
            self.assertLessEqual(abs(hop.separation / 1000.0 - 1.0), 0.1 + 1e-12)
            self.assertLessEqual(abs(hop.lens.focal_length / 500.0 - 1.0), 0.05 + 1e-12)
            self.assertLessEqual(abs(hop.offset[0]), 0.002)
            self.assertLessEqual(abs(hop.offset[1]), 0.002)

    #### PROPAGATION TESTS

    def test_power_bookkeeping_per_element(self):
        trace = run(small_spec(hops=4, aperture=0.04, transmittance=0.98))
        for record in trace.records:
            self.assertAlmostEqual(record.power_in - record.clipped, record.power_after_aperture, delta=1e-9)
            self.assertAlmostEqual(record.power_in - record.clipped - record.absorbed,
                                   record.power_after_reflection, delta=1e-9)

    def test_eigenmode_reproduces_itself(self):
        spec = small_spec(hops=3, aperture=math.inf)
        trace = run(spec)
        self.assertAlmostEqual(beam_radius(trace.final_field), spec.launch.waist, delta=0.01 * spec.launch.waist)
        self.assertLess(trace.diffraction_db, 1e-3)

    def test_reflection_only_chain(self):
        trace = run(small_spec(hops=5, aperture=math.inf, transmittance=0.98))
        self.assertAlmostEqual(trace.reflection_db, 5 * -10 * math.log10(0.98), places=9)
        self.assertAlmostEqual(trace.total_db, trace.reflection_db, delta=1e-3)

    def test_smaller_aperture_loses_more(self):
        tight = run(small_spec(hops=3, aperture=0.04))
        loose = run(small_spec(hops=3, aperture=0.08))
        self.assertGreater(tight.diffraction_db, loose.diffraction_db)
        self.assertEqual(len(tight.per_hop_diffraction_db), 3)

    def test_cumulative_loss_never_falls(self):
        trace = run(small_spec(hops=8, aperture=0.04, transmittance=0.98))
        cumulative = trace.cumulative_db()
        self.assertTrue(all(b >= a for a, b in zip(cumulative, cumulative[1:])))
        self.assertAlmostEqual(cumulative[-1], -10 * math.log10(trace.records[-1].power_after_reflection), places=9)

    def test_per_hop_loss_settles(self):
        per_hop = run(small_spec(hops=12, aperture=0.04)).per_hop_diffraction_db
        settled = per_hop[5:]
        for previous, current in zip(settled, settled[1:]):
            self.assertLess(abs(current - previous), 0.2 * previous)

    def test_offset_outside_window(self):
        spec = small_spec()
        with self.assertRaises(OffsetOutsideWindowError):
            apply_lens(launch_field(spec), spec.lens, (0.09, 0.0))

    def test_waist_sits_mid_hop(self):
        spec = small_spec()
        distance, radius = waist_position(launch_field(spec), spec.separation)
        self.assertAlmostEqual(distance, 500.0, delta=50.0)
        self.assertLess(radius, spec.launch.waist)

    #### REDUCED-HOP TESTS

    def test_extrapolation_of_a_settled_trace(self):
        fraction = 0.99
        records = tuple(
            HopRecord(hop=i, power_in=fraction ** (i - 1), power_after_aperture=fraction ** i,
                      power_after_reflection=fraction ** i, cumulative_db=-10 * math.log10(fraction ** i),
                      clipped=fraction ** (i - 1) - fraction ** i, absorbed=0.0, guard_loss=0.0)
            for i in range(1, 5))
        trace = ChainTrace(records=records, final_field=None, reflection_db=0.0)
        extended = extrapolate_chain(trace, 10)
        per_hop = -10 * math.log10(fraction)
        self.assertTrue(extended.settled)
        self.assertAlmostEqual(extended.per_hop_diffraction_db, per_hop, places=9)
        self.assertAlmostEqual(extended.diffraction_db, 10 * per_hop, places=9)
        self.assertEqual(extended.simulated_hops, 4)

    def test_extrapolation_needs_enough_hops(self):
        trace = run(small_spec(hops=3))
        with self.assertRaises(DomainError):
            extrapolate_chain(trace, 2)

    def test_extrapolated_reflection_scales_with_hops(self):
        trace = run(small_spec(hops=3, transmittance=0.98))
        extended = extrapolate_chain(trace, 12)
        self.assertAlmostEqual(extended.reflection_db, 12 * -10 * math.log10(0.98), places=9)

    def test_convergence_gate_passes_for_resolved_guide(self):
        delta, passed = convergence_gate(small_spec(hops=3), hops=3)
        self.assertLess(delta, 0.05)
        self.assertTrue(passed)


if __name__ == "__main__":
    unittest.main()
