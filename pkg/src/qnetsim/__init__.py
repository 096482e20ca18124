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
# This module contains the QNetSim entry point, which shares one helper for
# logging with the scenario runner.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


from .scenarios import ScenarioRunner
from .scenarios.presets import preset, preset_names
from .utils.qnet_helper import QNetHelper


class QNetSim(QNetHelper):
    def __init__(self, verbose_mode=False):
        super().__init__(verbose_mode)
        # Share self (which is a QNetHelper) with the runner
        self.scenarios = ScenarioRunner(controller=self)

    def run(self, config):
        return self.scenarios.run_scenario(config)

    def monte_carlo(self, config, trials, seed=None):
        return self.scenarios.monte_carlo(config, trials, seed)

    def sweep(self, config, path, grid):
        return self.scenarios.sweep(config, path, grid)
