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
# This module contains the unit tests for the qnetsim command line and its output files.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################



import csv
import io
import os
from pathlib import Path
import tempfile
import unittest
from unittest.mock import patch
import xml.etree.ElementTree as ElementTree

from qnetsim import QNetSim
from qnetsim.qnetcli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, emit_outputs, exit_code, main
from qnetsim.qnetcli.outputs import BUDGET_HEADER, CURVES_HEADER, OUTPUT_FILES, TRACE_HEADER, manifest_lines
from qnetsim.scenarios import preset, preset_names
from qnetsim.scenarios.budget import COMPONENTS
from qnetsim.utils.errors import AliasingError, DomainError, OutputError, ScenarioStageError


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


class TestCli(unittest.TestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def run_cli(self, *argv):
        with patch("sys.stdout", new_callable=io.StringIO) as out, patch("sys.stderr", new_callable=io.StringIO):
            code = main(list(argv))
        return code, out.getvalue()

    #### EXIT CODE TESTS

    def test_missing_command_is_usage_error(self):
        self.assertEqual(self.run_cli()[0], EXIT_USAGE)
        self.assertEqual(self.run_cli("run")[0], EXIT_USAGE)
        self.assertEqual(self.run_cli("run", "--preset", "warp_drive")[0], EXIT_USAGE)

    def test_unreadable_config_is_config_error(self):
        missing = os.path.join(self.tmp, "missing.yaml")
        self.assertEqual(self.run_cli("run", "--config", missing)[0], EXIT_CONFIG)

    def test_bad_override_is_config_error(self):
        code, _ = self.run_cli("validate", "--preset", "geo_direct", "--set", "total_distance=4000")
        self.assertEqual(code, EXIT_CONFIG)

    def test_exit_code_mapping(self):
        self.assertEqual(exit_code(ScenarioStageError("chain", AliasingError("too far", 10.0))), EXIT_NUMERICAL)
        self.assertEqual(exit_code(AliasingError("too far", 10.0)), EXIT_NUMERICAL)
        self.assertEqual(exit_code(ScenarioStageError("ground_link", DomainError("below horizon"))), EXIT_CONFIG)

    def test_output_path_that_is_a_file(self):
        blocker = os.path.join(self.tmp, "blocker")
        with open(blocker, "w", encoding="utf-8") as f:
            f.write("not a directory")
        code, _ = self.run_cli("run", "--preset", "geo_direct", "--out", blocker)
        self.assertEqual(code, EXIT_CONFIG)

    #### COMMAND TESTS

    def test_presets_command(self):
        code, out = self.run_cli("presets")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(tuple(out.split()), preset_names())

    def test_validate_command(self):
        code, out = self.run_cli("validate", "--preset", "asqn_entanglement", "--set", "chain.separation=100 km")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.strip(), "ok")

    def test_run_writes_every_output(self):
        code, out = self.run_cli("run", "--preset", "geo_direct", "--out", self.tmp, "--seed", "9")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("geo_direct", out)
        self.assertEqual(sorted(os.listdir(self.tmp)), sorted(OUTPUT_FILES))

        budget = read_rows(os.path.join(self.tmp, "budget.csv"))
        self.assertEqual(tuple(budget[0]), BUDGET_HEADER)
        self.assertEqual([row[0] for row in budget[1:]], list(COMPONENTS) + ["total"])
        self.assertAlmostEqual(sum(float(row[1]) for row in budget[1:-1]), float(budget[-1][1]), places=9)

        self.assertEqual(tuple(read_rows(os.path.join(self.tmp, "curves.csv"))[0]), CURVES_HEADER)
        self.assertEqual(read_rows(os.path.join(self.tmp, "trace.csv")), [list(TRACE_HEADER)])
        with open(os.path.join(self.tmp, "manifest.txt"), encoding="utf-8") as f:
            manifest = f.read().splitlines()
        self.assertIn("seed: 9", manifest)
        self.assertIn("kind: geo_direct", manifest)

    def test_plot_is_well_formed_svg(self):
        self.run_cli("run", "--preset", "ground_repeater", "--out", self.tmp)
        root = ElementTree.parse(os.path.join(self.tmp, "plot.svg")).getroot()
        self.assertTrue(root.tag.endswith("svg"))

    def test_outputs_are_reproducible(self):
        first = os.path.join(self.tmp, "first")
        second = os.path.join(self.tmp, "second")
        self.run_cli("run", "--preset", "geo_direct", "--out", first)
        self.run_cli("run", "--preset", "geo_direct", "--out", second)
        for name in OUTPUT_FILES:
            with open(os.path.join(first, name), "rb") as a, open(os.path.join(second, name), "rb") as b:
                self.assertEqual(a.read(), b.read(), name)

    def test_output_directory_from_environment(self):
        target = os.path.join(self.tmp, "from-env")
        with patch.dict(os.environ, {"QNETSIM_OUTDIR": target}):
            code, _ = self.run_cli("run", "--preset", "geo_direct")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(os.path.isfile(os.path.join(target, "budget.csv")))

    def test_sweep_command(self):
        code, _ = self.run_cli("sweep", "--preset", "geo_direct", "--param", "total_distance",
                               "--grid", "2000 km", "4000 km", "6000 km", "--out", self.tmp)
        self.assertEqual(code, EXIT_OK)
        rows = read_rows(os.path.join(self.tmp, "curves.csv"))
        self.assertEqual(len(rows), 4)
        self.assertEqual(rows[1][2], "geo_direct:total_distance")
        self.assertEqual(float(rows[1][0]), 2000e3)

    def test_sweep_grid_without_unit_for_dimensionless_parameter(self):
        code, _ = self.run_cli("sweep", "--preset", "geo_direct", "--param", "ensemble",
                               "--grid", "1 s", "--out", self.tmp)
        self.assertEqual(code, EXIT_CONFIG)

    def test_mc_command(self):
        code, _ = self.run_cli("mc", "--preset", "geo_direct", "--trials", "2", "--out", self.tmp)
        self.assertEqual(code, EXIT_OK)

    #### OUTPUT WRITER TESTS

    def test_emit_outputs_leaves_no_staging_files(self):
        report = QNetSim().run(preset("space_repeater"))
        written = emit_outputs(report, self.tmp)
        self.assertEqual(len(written), len(OUTPUT_FILES))
        self.assertFalse([name for name in os.listdir(self.tmp) if name.startswith(".qnetsim-")])

    def test_emit_outputs_reports_the_path(self):
        blocker = os.path.join(self.tmp, "blocker")
        with open(blocker, "w", encoding="utf-8") as f:
            f.write("x")
        with self.assertRaises(OutputError) as context:
            emit_outputs(QNetSim().run(preset("geo_direct")), blocker)
        self.assertIn("blocker", str(context.exception.path))

    def test_failed_plot_writes_nothing(self):
        with patch("qnetsim.qnetcli.outputs.write_plot", side_effect=ValueError("no renderer")):
            with self.assertRaises(OutputError) as context:
                emit_outputs(QNetSim().run(preset("geo_direct")), self.tmp)
            code, _ = self.run_cli("run", "--preset", "geo_direct", "--out", self.tmp)
        self.assertIn("plot.svg", str(context.exception.path))
        self.assertEqual(code, EXIT_CONFIG)
        self.assertEqual(os.listdir(self.tmp), [])

    def test_failed_install_restores_previous_outputs(self):
        emit_outputs(QNetSim().run(preset("geo_direct")), self.tmp)
        before = {}
        for name in OUTPUT_FILES:
            with open(os.path.join(self.tmp, name), "rb") as f:
                before[name] = f.read()
        real_replace = os.replace

        def replace_until_manifest(src, dst):
            staged = Path(src).parent.name.startswith(".qnetsim-")
            if staged and Path(dst).name == "manifest.txt":
                raise OSError(28, "No space left on device")
            return real_replace(src, dst)

        with patch("qnetsim.qnetcli.outputs.os.replace", side_effect=replace_until_manifest):
            with self.assertRaises(OutputError):
                emit_outputs(QNetSim().run(preset("space_repeater")), self.tmp)
        self.assertEqual(sorted(os.listdir(self.tmp)), sorted(OUTPUT_FILES))
        for name in OUTPUT_FILES:
            with open(os.path.join(self.tmp, name), "rb") as f:
                self.assertEqual(f.read(), before[name], name)

    def test_manifest_lists_metrics(self):
        lines = manifest_lines(QNetSim().run(preset("geo_direct")))
        self.assertTrue(any(line.startswith("metrics.elevation_deg: ") for line in lines))
        self.assertTrue(any(line.startswith("version.numpy: ") for line in lines))


if __name__ == "__main__":
    unittest.main()
