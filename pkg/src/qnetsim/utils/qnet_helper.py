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
# This module contains the QNetHelper class. It holds the state shared among
# higher level components: verbosity and the last error, warning and info message.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


import logging

logger = logging.getLogger("qnetsim")


class QNetHelper:
    def __init__(self, verbose_mode=False):
        self._error_msg = ""
        self._warning_msg = ""
        self._info_msg = ""
        self._v_mode = verbose_mode

    def get_error(self):
        return self._error_msg

    def get_warning(self):
        return self._warning_msg

    def get_info(self):
        return self._info_msg

    def log_error(self, error):
        if self._v_mode:
            logger.error(error)
        self._error_msg = error

    def log_warning(self, warning):
        if self._v_mode:
            logger.warning(warning)
        self._warning_msg = warning

    def log_info(self, info):
        if self._v_mode:
            logger.info(info)
        self._info_msg = info

    def set_verbose(self, mode):
        self._v_mode = bool(mode)
