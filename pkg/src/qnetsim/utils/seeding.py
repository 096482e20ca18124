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
# This module contains the seed derivation used by Monte Carlo trials and
# turbulence layers. Stream i of seed s is SeedSequence([s, i]); no global RNG
# state is ever touched.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


import numpy as np


def derive_seed(seed, index):
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def make_rng(seed):
    return np.random.default_rng(int(seed))
