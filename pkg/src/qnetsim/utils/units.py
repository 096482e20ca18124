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
# This module contains the quantity parsing used by the configuration layer and
# the decibel helpers used throughout the budgets.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


import math

from astropy import units as u

from .errors import UnitMismatchError

# Losses are logarithmic figures, not astropy linear quantities
DECIBEL = "dB"


def _parse_decibels(text, path):
    number = text.strip()
    if not number.endswith(DECIBEL):
        raise UnitMismatchError(path, f"expected a loss in dB, got {text!r}")
    try:
        return float(number[:-len(DECIBEL)])
    except ValueError as e:
        raise UnitMismatchError(path, f"cannot read quantity {text!r}") from e


def parse_quantity(text, target_unit, path="value"):
    """
    Convert a unit-suffixed string such as "120 km" into target_unit.

    :param text: the quantity as written in a config document
    :param target_unit: unit the caller stores internally, e.g. "m", "rad", "s", "Hz", "1/s" or "dB"
    :param path: dotted config path used in error messages
    :return: float value expressed in target_unit
    """
    if not isinstance(text, str):
        raise UnitMismatchError(path, f"expected a quantity with a unit suffix ({target_unit}), got {text!r}")
    if target_unit == DECIBEL:
        return _parse_decibels(text, path)
    try:
        return float(u.Quantity(text).to_value(u.Unit(target_unit)))
    except u.UnitConversionError as e:
        raise UnitMismatchError(path, f"expected {u.Unit(target_unit).physical_type}, got {text!r}") from e
    except (u.UnitsError, ValueError, TypeError) as e:
        raise UnitMismatchError(path, f"cannot read quantity {text!r}") from e


def format_quantity(value, unit):
    return f"{float(value)!r} {unit}"


def db_to_transmittance(loss_db):
    return 10.0 ** (-loss_db / 10.0)


def transmittance_to_db(transmittance):
    if transmittance <= 0.0:
        return math.inf
    return -10.0 * math.log10(transmittance)
