"""Deterministic, versioned serialization of signals, warps, trajectories,
and match reports.

Signal file format (delimited text, one-line typed header)::

    #ustalign-signal v1 space=<tag>
    <t> <value columns...>

with one row per sample, fields separated by single spaces, every number
printed as %.17g (which round-trips float64 exactly), and rows terminated by
a single newline.  Value columns per space tag:

    scalar        t x                                    (2 columns)
    vector(d)     t v0 .. v{d-1}                         (1 + d)
    matrix(r,c)   t m00 m01 .. (row-major)               (1 + r*c)
    se3           t r00 r01 r02 r10 .. r22 tx ty tz      (13 columns)

Timestamps may be on any scale; they are affinely renormalized to [0, 1] at
ingestion and must be strictly increasing.  Non-uniform timestamps are
resampled onto a uniform grid of the same length (linear, or geodesic for
se3), since non-uniform grids are not represented internally.  SE(3)
rotation blocks drifting from orthonormality by more than 1e-6 (Frobenius)
or with a non-positive determinant are rejected.

A body trajectory is stored as three parallel signal files plus a small JSON
manifest; match reports are stored either as human-readable text or as a
single JSON object.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from . import __version__
from .errors import (
    BadRotation,
    NonMonotoneTime,
    ParseError,
    SchemaMismatch,
    UstAlignError,
)
from .matching import BodyTrajectory, MatchReport
from .metric_spaces import Signal, Space, TimeGrid, space_from_tag
from .reparam import UstResult

_HEADER_PREFIX = "#ustalign-signal v1 "
_ROTATION_DRIFT_TOL = 1e-6


def _fmt(x):
    return "%.17g" % x


def _row_width(space: Space) -> int:
    if space.kind == "scalar":
        return 2
    if space.kind == "se3":
        return 13
    return 1 + int(np.prod(space.shape))


def _flatten_value(space: Space, value):
    if space.kind == "scalar":
        return [value]
    if space.kind == "se3":
        return list(value[:3, :3].reshape(9)) + list(value[:3, 3])
    return list(np.asarray(value).reshape(-1))


def write_signal(sig: Signal, path) -> None:
    """Write a signal; identical inputs produce byte-identical files."""
    if len(sig) < 2:
        raise UstAlignError("refusing to write a signal with fewer than 2 samples")
    if sig.space.kind == "se3_product":
        raise SchemaMismatch("se3_product signals are stored as trajectories")
    times = sig.grid.times
    lines = [_HEADER_PREFIX.rstrip() + f" space={sig.space.tag}\n"]
    for k in range(len(sig)):
        fields = [times[k]] + _flatten_value(sig.space, sig.values[k])
        lines.append(" ".join(_fmt(f) for f in fields) + "\n")
    with open(path, "w", newline="") as fh:
        fh.writelines(lines)


def _parse_header(line):
    if not line.startswith(_HEADER_PREFIX):
        raise ParseError(f"missing header {_HEADER_PREFIX!r}...", line=1)
    tag = None
    for token in line[len(_HEADER_PREFIX):].split():
        if token.startswith("space="):
            tag = token[len("space="):]
    if tag is None:
        raise ParseError("header lacks a space= declaration", line=1)
    try:
        return space_from_tag(tag)
    except UstAlignError as exc:
        raise ParseError(str(exc), line=1) from exc


def _fix_rotations(flat):
    """Validate/reproject the 9 rotation columns of raw se3 rows."""
    r = flat[:, 1:10].reshape(-1, 3, 3)
    t = flat[:, 10:13]
    drift = np.linalg.norm(np.swapaxes(r, 1, 2) @ r - np.eye(3), axis=(1, 2))
    det = np.linalg.det(r)
    if np.any(det <= 0):
        raise BadRotation(f"rotation with determinant {float(np.min(det)):.6g}")
    if np.any(drift > _ROTATION_DRIFT_TOL):
        raise BadRotation(
            f"rotation drift {float(np.max(drift)):.3g} exceeds {_ROTATION_DRIFT_TOL}"
        )
    loose = drift > 1e-9
    if np.any(loose):
        u, _, vt = np.linalg.svd(r[loose])
        r = r.copy()
        r[loose] = u @ vt
    out = np.zeros((flat.shape[0], 4, 4))
    out[:, :3, :3] = r
    out[:, :3, 3] = t
    out[:, 3, 3] = 1.0
    return out


def _resample_uniform(times, values, space: Space):
    n = times.shape[0]
    target = TimeGrid(n).times
    k = np.clip(np.searchsorted(times, target, side="right") - 1, 0, n - 2)
    alpha = np.clip((target - times[k]) / (times[k + 1] - times[k]), 0.0, 1.0)
    out = space.interpolate_stacked(values[k], values[k + 1], alpha)
    out[0] = values[0]
    out[-1] = values[-1]
    return out


def read_signal(path, expected_space: Space | None = None) -> Signal:
    """Parse a signal file; see the module docstring for the format."""
    with open(path, "r") as fh:
        lines = fh.readlines()
    if not lines:
        raise ParseError("empty file", line=1)
    space = _parse_header(lines[0])
    if expected_space is not None and space != expected_space:
        raise SchemaMismatch(
            f"expected space {expected_space.tag}, file declares {space.tag}"
        )
    width = _row_width(space)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split()
        if len(fields) != width:
            raise ParseError(
                f"expected {width} columns for {space.tag}, got {len(fields)}",
                line=lineno,
            )
        try:
            row = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from exc
        if not all(math.isfinite(v) for v in row):
            raise ParseError("non-finite value", line=lineno)
        rows.append(row)
    if len(rows) < 2:
        raise ParseError(f"need at least 2 data rows, got {len(rows)}", line=len(lines))
    flat = np.array(rows)
    times = flat[:, 0]
    if np.any(np.diff(times) <= 0):
        bad = int(np.argmax(np.diff(times) <= 0)) + 3  # header + 1-based + next row
        raise NonMonotoneTime(f"time column not strictly increasing at line {bad}")
    span = times[-1] - times[0]
    times = (times - times[0]) / span
    times[-1] = 1.0

    if space.kind == "se3":
        values = _fix_rotations(flat)
    elif space.kind == "scalar":
        values = flat[:, 1]
    else:
        values = flat[:, 1:].reshape((flat.shape[0],) + space.shape)

    uniform = TimeGrid(flat.shape[0]).times
    if np.max(np.abs(times - uniform)) > 1e-9:
        values = _resample_uniform(times, values, space)
    return Signal(values, space)


# --- body trajectories --------------------------------------------------------

_JOINTS = ("shoulder", "elbow", "hand")


def write_trajectory(traj: BodyTrajectory, basepath) -> str:
    """Write the three joint signals plus a JSON manifest; returns the
    manifest path."""
    basepath = str(basepath)
    names = {}
    for joint in _JOINTS:
        fname = f"{os.path.basename(basepath)}.{joint}.sig"
        write_signal(getattr(traj, joint), os.path.join(os.path.dirname(basepath) or ".", fname))
        names[joint] = fname
    manifest = {"format": "ustalign-trajectory v1", "joints": names}
    mpath = basepath + ".traj.json"
    with open(mpath, "w", newline="") as fh:
        json.dump(manifest, fh, sort_keys=True)
        fh.write("\n")
    return mpath


def read_trajectory(manifest_path) -> BodyTrajectory:
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "ustalign-trajectory v1":
        raise ParseError(f"not a trajectory manifest: {manifest_path}", line=1)
    base = os.path.dirname(str(manifest_path)) or "."
    sigs = {
        joint: read_signal(os.path.join(base, manifest["joints"][joint]))
        for joint in _JOINTS
    }
    return BodyTrajectory(sigs["shoulder"], sigs["elbow"], sigs["hand"])


# --- reports -------------------------------------------------------------------

def _report_payload(report):
    if isinstance(report, MatchReport):
        payload = {
            "kind": "match",
            "method": report.method,
            "distance": report.distance,
            "profile": [float(v) for v in report.profile],
        }
        if report.path is not None:
            payload["path"] = [[int(i), int(j)] for i, j in report.path]
        return payload
    if isinstance(report, UstResult):
        return {
            "kind": "ust",
            "total_length": report.total_length,
            "samples": len(report.resampled),
            "space": report.resampled.space.tag,
        }
    raise UstAlignError(f"cannot serialize report of type {type(report).__name__}")


def write_report(report, path, format: str = "structured") -> None:
    """Persist a MatchReport or UstResult summary (text or JSON)."""
    payload = _report_payload(report)
    payload["tool"] = "ustalign"
    payload["version"] = __version__
    with open(path, "w", newline="") as fh:
        if format == "structured":
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")
        elif format == "text":
            for key in sorted(payload):
                if key in ("profile", "path"):
                    continue
                fh.write(f"{key}: {payload[key]}\n")
        else:
            raise UstAlignError(f"unknown report format {format!r}")


def read_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
