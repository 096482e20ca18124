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
# This module contains the loss budget and the report a scenario run returns.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


from dataclasses import dataclass, field, replace
import hashlib
from importlib.metadata import PackageNotFoundError, version
import math

import numpy as np

from qnetsim.utils.errors import InvariantViolationError

COMPONENTS = (
    "chain_diffraction",
    "ground_diffraction",
    "reflection",
    "atmospheric",
    "turbulence_excess",
    "pointing",
    "error_excess",
    "other",
)


@dataclass(frozen=True)
class LossBudget:
    chain_diffraction: float = 0.0
    ground_diffraction: float = 0.0
    reflection: float = 0.0
    atmospheric: float = 0.0
    turbulence_excess: float = 0.0
    pointing: float = 0.0
    error_excess: float = 0.0
    other: float = 0.0

    def __post_init__(self):
        for name in COMPONENTS:
            value = float(getattr(self, name))
            if math.isnan(value) or value < 0:
                raise InvariantViolationError(name, f"budget components must be >= 0 dB, got {value}")
            object.__setattr__(self, name, value)

    @property
    def total(self):
        return math.fsum(getattr(self, name) for name in COMPONENTS)

    def items(self):
        return [(name, getattr(self, name)) for name in COMPONENTS]

    def without(self, name):
        if name not in COMPONENTS:
            raise InvariantViolationError(name, "is not a budget component")
        return replace(self, **{name: 0.0})


def build_budget(helper=None, **components):
    """
    LossBudget from raw component values. Negative values (a wave-optics
    measurement can land slightly below a reference) are clamped to 0 and
    reported through the helper's warning log.
    """
    clean = {}
    for name, value in components.items():
        value = float(value)
        if value < 0:
            if helper is not None:
                helper.log_warning(f"budget component {name} of {value:.4g} dB clamped to 0")
            value = 0.0
        clean[name] = value
    return LossBudget(**clean)


def ensemble_stats(values):
    values = np.asarray(list(values), dtype=float)
    return {
        "mean": float(np.mean(values)),
        "std": float(np.std(values)),
        "p10": float(np.percentile(values, 10)),
        "p90": float(np.percentile(values, 90)),
        "count": int(values.size),
    }


def package_version():
    try:
        return version("qnetsim")
    except PackageNotFoundError:
        return "0.1.0"


def provenance(config, seed):
    return {
        "config_hash": hashlib.sha256(repr(config).encode("utf-8")).hexdigest(),
        "seed": int(seed),
        "version": package_version(),
    }


@dataclass(frozen=True, eq=False)
class Report:
    kind: str
    budget: LossBudget
    rates: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    curves: tuple = ()
    trace: tuple = ()
    provenance: dict = field(default_factory=dict)
    mode: str = "full"

    @property
    def total_db(self):
        return self.budget.total

    @property
    def primary_rate(self):
        return self.rates.get("primary", 0.0)

    def summary(self):
        return f"{self.kind}: total {self.total_db:.2f} dB, rate {self.primary_rate:.4g} Hz"

    def as_dict(self):
        """Plain, deterministic view used for equality checks and serialization."""
        return {
            "kind": self.kind,
            "budget": dict(self.budget.items()),
            "total": self.total_db,
            "rates": dict(sorted(self.rates.items())),
            "stats": dict(sorted(self.stats.items())),
            "metrics": dict(sorted(self.metrics.items())),
            "curves": [(c.tag, c.abscissa, c.values) for c in self.curves],
            "trace": list(self.trace),
            "provenance": dict(sorted(self.provenance.items())),
            "mode": self.mode,
        }
