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
# This module contains the unit tests for the turbulence module.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################



import math
import unittest

import numpy as np

from qnetsim.turbulence import (
    AtmosphereProfile,
    PhaseScreen,
    UplinkGeometry,
    calibrate_r0,
    make_screen,
    structure_function,
    uplink_channel,
    uplink_ensemble,
    uplink_loss_db,
)
from qnetsim.utils.errors import BracketExhaustedError, DomainError, InvariantViolationError
from qnetsim.wavefield import Grid

WAVELENGTH = 800e-9


def small_geometry(**overrides):
    """A 5 cm waist, 100 km uplink on a 256 sample grid."""
    settings = dict(orbit_altitude=100e3, tx_waist=0.05, rx_aperture=0.6, rx_window=4.0,
                    wavelength=WAVELENGTH, grid=Grid(0.5, 256), target_loss_db=3.0, ensemble=2)
    settings.update(overrides)
    return UplinkGeometry(**settings)


class TestTurbulence(unittest.TestCase):

    #### PHASE SCREEN TESTS

    def test_screen_is_seeded(self):
        grid = Grid(1.0, 256)
        first = make_screen(grid, 0.1, 5)
        self.assertTrue(np.array_equal(first.phase, make_screen(grid, 0.1, 5).phase))
        self.assertFalse(np.array_equal(first.phase, make_screen(grid, 0.1, 6).phase))

    def test_screen_scales_with_r0(self):
        grid = Grid(1.0, 256)
        weak = make_screen(grid, 1.0, 3)
        strong = make_screen(grid, 0.1, 3)
        np.testing.assert_allclose(strong.phase, weak.phase * 0.1 ** (-5.0 / 6.0), rtol=1e-12)

    def test_infinite_r0_gives_flat_screen(self):
        screen = make_screen(Grid(1.0, 256), math.inf, 1)
        self.assertTrue(np.all(screen.phase == 0.0))

    def test_negligible_turbulence_is_nearly_flat(self):
        screen = make_screen(Grid(1.0, 256), 1e12, 2)
        self.assertLess(float(np.sqrt(np.mean(screen.phase ** 2))), 1e-3)

    def test_screen_needs_positive_r0(self):
        with self.assertRaises(DomainError):
            make_screen(Grid(1.0, 256), 0.0, 1)

    def test_screen_shape_must_match_grid(self):
        with self.assertRaises(InvariantViolationError):
            PhaseScreen(Grid(1.0, 256), np.zeros((128, 128)), 0.1)

    def test_structure_function_is_kolmogorov(self):
        grid = Grid(2.0, 256)
        r0 = 0.1
        stack = np.stack([make_screen(grid, r0, seed).phase for seed in range(40)])
        separations = (4, 8, 16)
        measured = structure_function(stack, separations)
        for cells, value in zip(separations, measured):
            expected = 6.88 * (cells * grid.dx / r0) ** (5.0 / 3.0)
            self.assertAlmostEqual(value, expected, delta=0.1 * expected)

    #### PROFILE TESTS

    def test_integrated_r0_round_trip(self):
        profile = AtmosphereProfile.from_integrated(0.1)
        self.assertAlmostEqual(profile.integrated_r0, 0.1, places=9)
        self.assertEqual(len(profile.screen_r0), 5)
        # the ground layer carries the most turbulence
        self.assertEqual(min(profile.screen_r0), profile.screen_r0[0])

    def test_vacuum_profile(self):
        self.assertEqual(AtmosphereProfile.vacuum().integrated_r0, math.inf)

    def test_profile_validation(self):
        with self.assertRaises(InvariantViolationError):
            AtmosphereProfile((0.0, 1000.0), (0.1,))
        with self.assertRaises(InvariantViolationError):
            AtmosphereProfile((1000.0, 0.0), (0.1, 0.1))
        with self.assertRaises(InvariantViolationError):
            AtmosphereProfile((0.0,), (-0.1,))
        with self.assertRaises(InvariantViolationError):
            AtmosphereProfile.from_integrated(0.1, weights=(1.0, 1.0))

    def test_geometry_validation(self):
        with self.assertRaises(InvariantViolationError):
            small_geometry(rx_window=1.0)
        with self.assertRaises(InvariantViolationError):
            small_geometry(ensemble=0)

    #### UPLINK TESTS

    def test_vacuum_uplink_matches_gaussian_capture(self):
        geometry = small_geometry()
        zr = math.pi * 0.05 ** 2 / WAVELENGTH
        w = 0.05 * math.sqrt(1.0 + (100e3 / zr) ** 2)
        expected = 1.0 - math.exp(-2.0 * 0.3 ** 2 / w ** 2)
        ensemble = uplink_ensemble(geometry, AtmosphereProfile.vacuum(), [0, 1])
        self.assertAlmostEqual(ensemble.mean_fraction, expected, delta=0.02)
        self.assertAlmostEqual(ensemble.mode_fraction, 1.0, delta=1e-9)
        self.assertAlmostEqual(ensemble.loss_db, -10 * math.log10(ensemble.mean_fraction), places=12)

    def test_turbulence_costs_capture(self):
        geometry = small_geometry()
        vacuum = uplink_loss_db(geometry, AtmosphereProfile.vacuum(), [0])
        turbulent = uplink_loss_db(geometry, AtmosphereProfile.from_integrated(0.05), range(4))
        self.assertGreater(turbulent, vacuum)

    def test_uplink_is_seeded(self):
        geometry = small_geometry()
        profile = AtmosphereProfile.from_integrated(0.05)
        first = uplink_channel(geometry.launch(), profile, geometry.orbit_altitude, 9, geometry.rx_window)
        again = uplink_channel(geometry.launch(), profile, geometry.orbit_altitude, 9, geometry.rx_window)
        self.assertTrue(np.array_equal(first.samples, again.samples))

    def test_orbit_inside_turbulent_layer(self):
        geometry = small_geometry()
        with self.assertRaises(DomainError):
            uplink_channel(geometry.launch(), AtmosphereProfile.vacuum(), 10e3, 0)

    def test_empty_ensemble(self):
        with self.assertRaises(DomainError):
            uplink_ensemble(small_geometry(), AtmosphereProfile.vacuum(), [])

    #### CALIBRATION TESTS

    def test_calibration_below_weakest_turbulence(self):
        with self.assertRaises(BracketExhaustedError):
            calibrate_r0(0.0, small_geometry(), [0])

    def test_calibration_at_the_weak_end(self):
        geometry = small_geometry()
        target = uplink_loss_db(geometry, AtmosphereProfile.from_integrated(1.0), [0])
        profile = calibrate_r0(target, geometry, [0])
        self.assertAlmostEqual(profile.integrated_r0, 1.0, places=9)

    def test_calibration_hits_target(self):
        geometry = small_geometry()
        seeds = [0, 1]
        target = uplink_loss_db(geometry, AtmosphereProfile.from_integrated(0.03), seeds)
        profile = calibrate_r0(target, geometry, seeds)
        self.assertAlmostEqual(uplink_loss_db(geometry, profile, seeds), target, delta=0.5)


if __name__ == "__main__":
    unittest.main()
