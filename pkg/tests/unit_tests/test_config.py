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
# This module contains the unit tests for the YAML scenario configuration.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################



import math
import os
import tempfile
import unittest

from qnetsim.qnetcli import apply_override, load_config, parse_config, read_document, serialize_config
from qnetsim.scenarios import preset, preset_names
from qnetsim.utils.errors import (
    ConfigError,
    ConfigParseError,
    InvariantViolationError,
    UnitMismatchError,
    UnknownKeyError,
    UnknownPresetError,
)
from qnetsim.utils.units import format_quantity, parse_quantity


class TestConfig(unittest.TestCase):

    #### UNIT TESTS

    def test_parse_quantity_converts(self):
        self.assertEqual(parse_quantity("120 km", "m"), 120e3)
        self.assertAlmostEqual(parse_quantity("800 nm", "m"), 800e-9, places=20)
        self.assertAlmostEqual(parse_quantity("2 urad", "rad"), 2e-6, places=18)
        self.assertEqual(parse_quantity("inf m", "m"), float("inf"))
        self.assertAlmostEqual(parse_quantity("180 deg", "rad"), math.pi, places=12)
        self.assertAlmostEqual(parse_quantity("2 h", "s"), 7200.0, places=9)
        self.assertAlmostEqual(parse_quantity("5 MHz", "Hz"), 5e6, places=3)
        self.assertAlmostEqual(parse_quantity("1e-3 1/s", "1/s"), 1e-3, places=15)
        self.assertEqual(parse_quantity("2.3 dB", "dB"), 2.3)

    def test_parse_quantity_rejects_mismatches(self):
        with self.assertRaises(UnitMismatchError):
            parse_quantity(120, "m")
        with self.assertRaises(UnitMismatchError):
            parse_quantity("120 s", "m")
        with self.assertRaises(UnitMismatchError):
            parse_quantity("120 furlong", "m")
        with self.assertRaises(UnitMismatchError):
            parse_quantity("120", "m")
        with self.assertRaises(UnitMismatchError):
            parse_quantity("3 km", "dB")

    def test_format_quantity_reads_back(self):
        self.assertEqual(parse_quantity(format_quantity(0.1748, "m"), "m"), 0.1748)

    #### DOCUMENT TESTS

    def test_minimal_document_is_the_preset(self):
        self.assertEqual(parse_config("preset: geo_direct\n"), preset("geo_direct"))

    def test_values_override_the_preset(self):
        config = parse_config("preset: asqn_entanglement\nchain:\n  separation: 100 km\nseed: 7\n")
        self.assertEqual(config.chain.separation, 100e3)
        self.assertEqual(config.chain.hops, preset("asqn_entanglement").chain.hops)
        self.assertEqual(config.seed, 7)

    def test_invalid_value_names_its_path(self):
        with self.assertRaises(InvariantViolationError) as context:
            parse_config("preset: asqn_entanglement\nchain:\n  lens:\n    aperture_diameter: -1 m\n")
        self.assertEqual(context.exception.field, "chain.lens.aperture_diameter")

    def test_unknown_key(self):
        with self.assertRaises(UnknownKeyError) as context:
            parse_config("preset: asqn_entanglement\nchain:\n  mirror_size: 1 m\n")
        self.assertEqual(context.exception.path, "chain.mirror_size")
        with self.assertRaises(UnknownKeyError):
            parse_config("preset: geo_direct\nkind: vbg_guide\n")

    def test_bare_number_for_dimensioned_field(self):
        with self.assertRaises(UnitMismatchError):
            parse_config("preset: geo_direct\ntotal_distance: 4000\n")

    def test_quantity_for_dimensionless_field(self):
        with self.assertRaises(UnitMismatchError):
            parse_config("preset: geo_direct\nensemble: 3 s\n")

    def test_parse_error_has_position(self):
        with self.assertRaises(ConfigParseError) as context:
            read_document("preset: geo_direct\nchain: [unclosed\n")
        self.assertIsNotNone(context.exception.line)
        self.assertIsNotNone(context.exception.column)

    def test_missing_preset(self):
        with self.assertRaises(ConfigParseError):
            read_document("seed: 3\n")
        with self.assertRaises(ConfigParseError):
            read_document("- just\n- a list\n")

    def test_unknown_preset(self):
        with self.assertRaises(UnknownPresetError):
            parse_config("preset: warp_drive\n")

    #### OVERRIDE TESTS

    def test_apply_override(self):
        document = {"preset": "asqn_entanglement"}
        updated = apply_override(document, "chain.lens.aperture_diameter=0.5 m")
        self.assertEqual(updated["chain"]["lens"]["aperture_diameter"], "0.5 m")
        self.assertEqual(document, {"preset": "asqn_entanglement"})
        self.assertEqual(apply_override(document, "ensemble=50")["ensemble"], 50)

    def test_override_needs_assignment(self):
        with self.assertRaises(ConfigParseError):
            apply_override({"preset": "geo_direct"}, "ensemble")

    #### LOADING TESTS

    def test_load_config_from_preset_with_overrides(self):
        config = load_config(preset_name="geo_direct", overrides=["total_distance=6000 km"])
        self.assertEqual(config.total_distance, 6000e3)

    def test_load_config_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "scenario.yaml")
            with open(path, "w", encoding="utf-8") as f:
                f.write("preset: ground_repeater\nrepeater:\n  multiplexing_modes: 100\n")
            self.assertEqual(load_config(path).repeater.multiplexing_modes, 100)

    def test_load_config_needs_one_source(self):
        with self.assertRaises(ConfigError):
            load_config()
        with self.assertRaises(ConfigError):
            load_config("scenario.yaml", "geo_direct")
        with self.assertRaises(ConfigError):
            load_config(os.path.join(tempfile.gettempdir(), "no-such-qnetsim-scenario.yaml"))

    #### ROUND TRIP TESTS

    def test_every_preset_survives_serialization(self):
        for name in preset_names():
            config = preset(name)
            self.assertEqual(parse_config(serialize_config(config)), config, name)


if __name__ == "__main__":
    unittest.main()
