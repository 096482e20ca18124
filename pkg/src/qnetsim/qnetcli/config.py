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
# This module contains the YAML scenario documents: parsing with unit-suffixed
# quantities, dotted-path overrides and serialization back to the same schema.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


import copy
from dataclasses import fields, is_dataclass, replace
import numbers
from pathlib import Path

import yaml

from qnetsim.scenarios.presets import preset
from qnetsim.utils.errors import (
    ConfigError,
    ConfigParseError,
    InvariantViolationError,
    UnitMismatchError,
    UnknownKeyError,
)
from qnetsim.utils.units import format_quantity, parse_quantity


def read_document(text):
    """
    Parse YAML text into a mapping with a preset name.

    :raise ConfigParseError: on malformed YAML (with line and column) or a missing preset
    """
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        if mark is not None:
            raise ConfigParseError(f"Cannot parse config: {getattr(e, 'problem', e)}", mark.line + 1,
                                   mark.column + 1) from e
        raise ConfigParseError(f"Cannot parse config: {e}") from e
    if not isinstance(document, dict):
        raise ConfigParseError("Config must be a mapping with at least a 'preset' key")
    if "preset" not in document:
        raise ConfigParseError("Config is missing the required 'preset' key")
    return document


def _leaf(f, current, value, path):
    unit = f.metadata.get("unit")
    if value is None:
        if f.default is None:
            return None
        raise InvariantViolationError(path, "cannot be null")
    if unit is not None:
        if isinstance(current, tuple):
            if not isinstance(value, list):
                raise UnitMismatchError(path, f"expected a list of quantities in {unit}")
            return tuple(parse_quantity(item, unit, f"{path}[{i}]") for i, item in enumerate(value))
        return parse_quantity(value, unit, path)
    if isinstance(current, str):
        if not isinstance(value, str):
            raise InvariantViolationError(path, f"expected text, got {value!r}")
        return value
    if isinstance(value, str):
        raise UnitMismatchError(path, f"is dimensionless, expected a plain number, got {value!r}")
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvariantViolationError(path, f"expected a number, got {value!r}")
    if isinstance(current, numbers.Integral) or (current is None and isinstance(value, numbers.Integral)):
        if float(value) != int(value):
            raise InvariantViolationError(path, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _merge(obj, mapping, prefix):
    if not isinstance(mapping, dict):
        raise UnitMismatchError(prefix, "expected a nested section")
    known = {f.name: f for f in fields(obj)}
    changes = {}
    for key, value in mapping.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if key not in known:
            raise UnknownKeyError(path)
        f = known[key]
        current = getattr(obj, key)
        if is_dataclass(current) or (current is None and is_dataclass(f.type)):
            if value is None:
                if f.default is not None:
                    raise InvariantViolationError(path, "cannot be null")
                changes[key] = None
                continue
            base = current if current is not None else f.type()
            changes[key] = _merge(base, value, path)
        else:
            changes[key] = _leaf(f, current, value, path)
    try:
        return replace(obj, **changes)
    except InvariantViolationError as e:
        if not prefix or e.field.startswith(prefix):
            raise
        raise InvariantViolationError(f"{prefix}.{e.field}", e.detail) from e


def build_config(document):
    """ScenarioConfig from a parsed document: the named preset with the document's values on top."""
    document = dict(document)
    if "kind" in document:
        raise UnknownKeyError("kind")
    config = preset(document.pop("preset"))
    return _merge(config, document, "")


def parse_config(text):
    """
    :param text: YAML scenario document
    :return: validated ScenarioConfig
    """
    return build_config(read_document(text))


def apply_override(document, assignment):
    """
    Copy of document with one dotted-path assignment such as
    "chain.separation=100 km" applied. The value is read as YAML, so
    "ensemble=50" sets an integer and quantities stay strings.
    """
    key, sep, raw = assignment.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigParseError(f"Override must look like path=value, got {assignment!r}")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigParseError(f"Cannot parse override value {raw!r}: {e}") from e
    updated = copy.deepcopy(document)
    node = updated
    parts = key.split(".")
    for part in parts[:-1]:
        child = node.get(part)
        if child is None:
            child = {}
        elif not isinstance(child, dict):
            raise UnitMismatchError(key, f"{part} is not a section")
        node[part] = child
        node = child
    node[parts[-1]] = value
    return updated


def load_config(path=None, preset_name=None, overrides=()):
    """
    Read a scenario from a YAML file or a bare preset name, then apply overrides.

    :raise ConfigError: when neither or both sources are given, or the file cannot be read
    """
    if (path is None) == (preset_name is None):
        raise ConfigError("Give exactly one of a config file or a preset name")
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {e.strerror or e}") from e
        document = read_document(text)
    else:
        document = {"preset": preset_name}
    for assignment in overrides:
        document = apply_override(document, assignment)
    return build_config(document)


def _dump(obj):
    out = {}
    for f in fields(obj):
        value = getattr(obj, f.name)
        unit = f.metadata.get("unit")
        if value is None:
            out[f.name] = None
        elif is_dataclass(value):
            out[f.name] = _dump(value)
        elif unit is not None and isinstance(value, tuple):
            out[f.name] = [format_quantity(v, unit) for v in value]
        elif unit is not None:
            out[f.name] = format_quantity(value, unit)
        elif isinstance(value, numbers.Integral):
            out[f.name] = int(value)
        elif isinstance(value, numbers.Real):
            out[f.name] = float(value)
        else:
            out[f.name] = value
    return out


def serialize_config(config):
    """YAML text that parse_config reads back into an equal ScenarioConfig."""
    document = {"preset": config.kind}
    body = _dump(config)
    body.pop("kind")
    document.update(body)
    return yaml.safe_dump(document, sort_keys=False)
