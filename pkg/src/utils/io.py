"""
Reading and writing result files.

Curves are CSV with a column-name line; scalar reports are JSON. Every file
starts with provenance: a '# nwidth <version> config=<json>' comment line in
CSV files, a "provenance" object in JSON reports.
"""

import csv
import json
import sys
from contextlib import contextmanager

import numpy as np

from .errors import PointsFormatError

PROVENANCE_PREFIX = "nwidth "


def provenance_line(run_config):
    """Single comment line (without '# ') describing how a file was produced."""
    if run_config is None:
        return None
    return f"{PROVENANCE_PREFIX}{run_config.version} config={run_config.to_json()}"


@contextmanager
def open_output(path):
    """Open a file for writing, or stdout for '-'."""
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as f:
            yield f


@contextmanager
def open_input(path):
    """Open a file for reading, or stdin for '-'."""
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", newline="") as f:
            yield f


def write_table(path, columns, data, run_config=None, comments=(), fmt="%.17g"):
    """
    Write a CSV table.

    Args:
        path: Output path or '-' for stdout
        columns: Column names, written as the first non-comment line
        data: 2-D array-like with one row per record
        run_config: Optional RunConfig for the provenance header
        comments: Extra comment lines placed after the provenance line
        fmt: numpy format for every cell (a single string or one per column)
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data.reshape(-1, len(columns))
    with open_output(path) as f:
        line = provenance_line(run_config)
        if line:
            f.write(f"# {line}\n")
        for comment in comments:
            f.write(f"# {comment}\n")
        f.write(",".join(columns) + "\n")
        if len(data):
            np.savetxt(f, data, delimiter=",", fmt=fmt)


def read_table(path):
    """
    Read a CSV table written by write_table().

    Args:
        path: Input path or '-' for stdin

    Returns:
        Tuple (columns, data) with data of shape (rows, len(columns))
    """
    columns = None
    rows = []
    with open_input(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            record = next(csv.reader([line]))
            if columns is None:
                columns = [c.strip() for c in record]
                continue
            if len(record) != len(columns):
                raise PointsFormatError(
                    f"expected {len(columns)} fields, got {len(record)}", line=lineno)
            try:
                rows.append([float(v) for v in record])
            except ValueError as e:
                raise PointsFormatError(str(e), line=lineno) from None
    if columns is None:
        raise PointsFormatError(f"{path}: no column header found")
    data = np.array(rows, dtype=np.float64).reshape(-1, len(columns))
    return columns, data


def write_json(path, report, run_config=None):
    """
    Write a JSON report, with provenance first.

    Args:
        path: Output path or '-' for stdout
        report: JSON-serializable dict
        run_config: Optional RunConfig
    """
    payload = {}
    if run_config is not None:
        payload["provenance"] = {"version": run_config.version, "config": run_config.as_dict()}
    payload.update(report)
    with open_output(path) as f:
        json.dump(payload, f, indent=2, default=_json_default)
        f.write("\n")


def write_plot_data(path, xs, ys, labels=("x", "y")):
    """Two-column whitespace-separated file for gnuplot."""
    data = np.column_stack([np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64)])
    np.savetxt(path, data, fmt="%.10g", header=f"{labels[0]} {labels[1]}")


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")
