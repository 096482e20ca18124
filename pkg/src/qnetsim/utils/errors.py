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
# This module contains the exception hierarchy shared by every qnetsim
# component. Numerical guards, configuration problems and scenario stage
# failures each get their own branch so the CLI can map them to exit codes.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


class QNetError(Exception):
    """Base class for every error raised by qnetsim."""


#### NUMERICAL GUARDS

class NumericalGuardError(QNetError):
    pass


class AliasingError(NumericalGuardError):
    def __init__(self, message, max_safe_distance):
        super().__init__(f"{message} (maximum safe distance for this grid: {max_safe_distance:.6g} m)")
        self.max_safe_distance = max_safe_distance


class BracketExhaustedError(NumericalGuardError):
    pass


class UnstableGuideError(NumericalGuardError):
    pass


class SamplingError(NumericalGuardError):
    pass


class GridTooCoarseError(SamplingError):
    pass


class WindowTooSmallError(SamplingError):
    pass


#### FIELD ERRORS

class FieldError(QNetError):
    pass


class ZeroPowerError(FieldError):
    pass


class GridMismatchError(FieldError):
    pass


class OffsetOutsideWindowError(FieldError):
    pass


#### MODEL ERRORS

class DomainError(QNetError, ValueError):
    pass


class UnknownWavelengthError(QNetError):
    pass


class DegenerateParameterError(QNetError):
    pass


class NoKeyAtZeroLossError(QNetError):
    pass


#### CONFIGURATION ERRORS

class ConfigError(QNetError):
    pass


class ConfigParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownKeyError(ConfigError):
    def __init__(self, path):
        super().__init__(f"Unknown key: {path}")
        self.path = path


class UnitMismatchError(ConfigError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantViolationError(ConfigError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.detail = message


class UnknownPresetError(ConfigError):
    pass


class UnknownParameterError(ConfigError):
    pass


#### SCENARIO STAGES

class ScenarioStageError(QNetError):
    """Wraps a failure inside a scenario pipeline with the stage it happened in."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


#### OUTPUT

class OutputError(QNetError):
    def __init__(self, path, cause):
        super().__init__(f"Cannot write {path}: {cause}")
        self.path = path
