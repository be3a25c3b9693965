"""CSV and JSON plumbing for the command-line tools.

Input data is a headered CSV with one named response column; the feature
grouping comes from a two-column manifest ``feature,group``.  Outputs are
deterministic: floats are serialized with ``repr`` and infinities as the
literal string ``inf``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import warnings

import numpy as np
import pandas as pd

from .core import GroupedDesign, ValidationError, build_layout


def load_design(data_path: str, response: str,
                groups_path: str) -> tuple[GroupedDesign, list[str]]:
    """Read the design from a data CSV plus a group manifest.

    Returns the design and the feature names in data-file column order.
    Missing manifest entries are schema errors; extra ones are ignored with
    a warning.
    """
    frame = pd.read_csv(data_path)
    if response not in frame.columns:
        raise ValidationError(
            f"response column {response!r} is not in {data_path} "
            f"(columns: {list(frame.columns)[:8]}...)")
    feature_names = [c for c in frame.columns if c != response]
    if not feature_names:
        raise ValidationError("the data file has no feature columns")

    mapping = {}
    with open(groups_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["feature", "group"]:
            raise ValidationError(
                f"{groups_path} must start with the header 'feature,group'")
        for row in reader:
            if len(row) < 2:
                raise ValidationError(f"malformed manifest row: {row!r}")
            mapping[row[0].strip()] = row[1].strip()

    missing = [f for f in feature_names if f not in mapping]
    if missing:
        raise ValidationError(
            f"the group manifest is missing {len(missing)} feature(s), "
            f"e.g. {missing[:5]}")
    extra = sorted(set(mapping) - set(feature_names) - {response})
    if extra:
        warnings.warn(f"manifest names {len(extra)} unknown feature(s); ignored",
                      RuntimeWarning)

    try:
        X = frame[feature_names].to_numpy(dtype=float)
        Y = frame[response].to_numpy(dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"non-numeric data in {data_path}: {exc}") from exc
    layout = build_layout([mapping[f] for f in feature_names])
    return GroupedDesign(X=X, Y=Y, layout=layout), feature_names


def jsonable(value):
    """Recursively convert numpy scalars/arrays, mapping ``inf`` to 'inf'."""
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if np.isposinf(v):
            return "inf"
        if np.isneginf(v):
            return "-inf"
        return v
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def config_hash(config: dict) -> str:
    blob = json.dumps(jsonable(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(jsonable(payload), fh, sort_keys=True, indent=2)
        fh.write("\n")


def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if np.isposinf(v):
            return "inf"
        if np.isneginf(v):
            return "-inf"
        return repr(v)
    return str(value)


def write_csv(path: str, header: list[str], rows, meta: dict | None = None) -> None:
    """Write a CSV with '#'-prefixed reproducibility comment lines."""
    with open(path, "w", newline="") as fh:
        if meta:
            for key, value in meta.items():
                fh.write(f"# {key}: {value}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(c) for c in row) + "\n")


def repro_meta(version: str, seed, config: dict) -> dict:
    cfg = json.dumps(jsonable(config), sort_keys=True)
    return {"sigmaridge": version, "seed": seed, "config": cfg,
            "config_hash": config_hash(config)}
