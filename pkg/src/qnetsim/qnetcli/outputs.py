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
# This module contains the output writers for a Report: budget, curve and
# trace CSVs, an SVG figure and a key-value run manifest. The file set is
# written into a temporary directory and moved into place at the end.
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


import csv
from importlib.metadata import PackageNotFoundError, version
import os
import shutil
from pathlib import Path
import tempfile

import matplotlib
from matplotlib.figure import Figure

from qnetsim.scenarios.budget import COMPONENTS
from qnetsim.utils.errors import OutputError

OUTPUT_FILES = ("budget.csv", "curves.csv", "trace.csv", "plot.svg", "manifest.txt")

# Frozen column schemas; new columns are only ever appended
BUDGET_HEADER = ("component", "db")
CURVES_HEADER = ("abscissa", "value", "tag")
TRACE_HEADER = ("hop", "cum_db")

SVG_HASH_SALT = "qnetsim"


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_budget(report, path):
    rows = [(name, repr(float(value))) for name, value in report.budget.items()]
    rows.append(("total", repr(float(report.total_db))))
    _write_csv(path, BUDGET_HEADER, rows)


def write_curves(report, path):
    rows = []
    for curve in report.curves:
        rows.extend((repr(x), repr(y), curve.tag) for x, y in zip(curve.abscissa, curve.values))
    _write_csv(path, CURVES_HEADER, rows)


def write_trace(report, path):
    _write_csv(path, TRACE_HEADER, [(int(hop), repr(float(db))) for hop, db in report.trace])


def _library_versions():
    versions = {}
    for name in ("numpy", "scipy", "matplotlib", "pyyaml"):
        try:
            versions[name] = version(name)
        except PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def manifest_lines(report):
    lines = [
        ("kind", report.kind),
        ("mode", report.mode),
        ("total_db", repr(float(report.total_db))),
        ("primary_rate", repr(float(report.primary_rate))),
    ]
    lines += [(key, value) for key, value in sorted(report.provenance.items())]
    lines += [(f"version.{name}", v) for name, v in sorted(_library_versions().items())]
    for section in ("rates", "metrics", "stats"):
        for key, value in sorted(getattr(report, section).items()):
            lines.append((f"{section}.{key}", repr(value) if isinstance(value, float) else value))
    return [f"{key}: {value}" for key, value in lines]


def write_manifest(report, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(manifest_lines(report)) + "\n")


def write_plot(report, path):
    """
    Rate curves on a log axis when the report has any, otherwise a bar chart
    of the loss budget. The hash salt and the missing date keep repeated runs
    byte-identical.
    """
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.subplots()
    if report.curves:
        for curve in report.curves:
            scale = 1e-3 if curve.abscissa_unit == "m" else 1.0
            unit = "km" if curve.abscissa_unit == "m" else curve.abscissa_unit
            ax.plot([x * scale for x in curve.abscissa], curve.values, label=curve.tag)
        if any(v > 0 for curve in report.curves for v in curve.values):
            ax.set_yscale("log", nonpositive="mask")
        ax.set_xlabel(unit)
        ax.set_ylabel(report.curves[0].value_unit)
        ax.legend()
    else:
        names = list(COMPONENTS)
        ax.bar(range(len(names)), [getattr(report.budget, name) for name in names])
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right")
        ax.set_ylabel("dB")
    ax.set_title(report.summary())
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def emit_outputs(report, outdir):
    """
    Write the full output set for a report.

    :param report: Report to write
    :param outdir: target directory, created if missing
    :return: list of the written file paths
    :raise OutputError: with the offending path when anything cannot be written
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(outdir, e.strerror or e) from e

    writers = {
        "budget.csv": write_budget,
        "curves.csv": write_curves,
        "trace.csv": write_trace,
        "plot.svg": write_plot,
        "manifest.txt": write_manifest,
    }
    try:
        staging = Path(tempfile.mkdtemp(prefix=".qnetsim-", dir=outdir))
    except OSError as e:
        raise OutputError(outdir, e.strerror or e) from e
    try:
        for name in OUTPUT_FILES:
            try:
                writers[name](report, staging / name)
            except OSError as e:
                raise OutputError(outdir / name, e.strerror or e) from e
            except Exception as e:
                raise OutputError(outdir / name, e) from e
        _install(staging, outdir)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return [outdir / name for name in OUTPUT_FILES]


def _install(staging, outdir):
    """Move the staged files into outdir; on failure put every earlier file back."""
    previous = staging / "previous"
    previous.mkdir()
    installed = []
    name = None
    try:
        for name in OUTPUT_FILES:
            target = outdir / name
            if target.is_file():
                os.replace(target, previous / name)
            os.replace(staging / name, target)
            installed.append(name)
    except OSError as e:
        for done in installed:
            (outdir / done).unlink(missing_ok=True)
        for kept in previous.iterdir():
            os.replace(kept, outdir / kept.name)
        raise OutputError(outdir / name, e.strerror or e) from e
