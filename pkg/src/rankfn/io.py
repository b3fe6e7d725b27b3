"""Readers and writers for every file format the CLI produces or consumes.

Text outputs start with a schema header so readers can reject foreign or
newer files. Floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .complexes import Filtration
from .persistence import PersistenceDiagram
from .rank import BiRankGrid, RankGrid, cell_weights

SCHEMA_VERSION = 1


class InputError(ValueError):
    """A file could not be parsed."""


def schema_header(kind: str) -> str:
    return f"# rankfn-schema={SCHEMA_VERSION} kind={kind}\n"


def _check_header(line: str, kind: str, path) -> None:
    fields = dict(tok.split("=", 1) for tok in line.lstrip("#").split() if "=" in tok)
    if fields.get("kind") != kind:
        raise InputError(f"{path}: expected a {kind} file")
    if int(fields.get("rankfn-schema", -1)) != SCHEMA_VERSION:
        raise InputError(f"{path}: unsupported schema version {fields.get('rankfn-schema')}")


def _read_lines(path) -> list[str]:
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _numeric_rows(path, lines: list[str]) -> list[list[float]]:
    rows = []
    body = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    for n, row in enumerate(csv.reader(body)):
        try:
            rows.append([float(x) for x in row])
        except ValueError:
            if n == 0:
                continue  # header row
            raise InputError(f"{path}: non-numeric row {row!r}") from None
    return rows


def read_point_cloud(path) -> np.ndarray:
    """One point per row; an optional non-numeric header row is skipped."""
    rows = _numeric_rows(path, _read_lines(path))
    if not rows:
        raise InputError(f"{path}: no points")
    if len({len(r) for r in rows}) != 1:
        raise InputError(f"{path}: rows have different lengths")
    arr = np.array(rows, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{path}: non-finite coordinate")
    return arr


def read_time_series(path) -> np.ndarray:
    arr = read_point_cloud(path)
    if arr.shape[1] != 1:
        raise InputError(f"{path}: a time series has exactly one column")
    return arr[:, 0]


def write_point_cloud(path, points) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in np.atleast_2d(np.asarray(points, dtype=float)):
            writer.writerow([repr(float(x)) for x in row])


def write_filtration(path, filt: Filtration) -> None:
    """Debug dump: ``value,dim,v0,v1,...`` in filtration order."""
    with open(path, "w", newline="") as fh:
        fh.write(schema_header("filtration"))
        fh.write(f"# exact_degree={filt.exact_degree}\n")
        writer = csv.writer(fh)
        for value, dim, simplex in zip(filt.values.tolist(), filt.dims.tolist(), filt.simplices):
            writer.writerow([repr(value), dim, *simplex])


def read_filtration(path) -> Filtration:
    lines = _read_lines(path)
    if not lines:
        raise InputError(f"{path}: empty file")
    _check_header(lines[0], "filtration", path)
    exact = None
    simplices, values = [], []
    for ln in lines[1:]:
        if ln.startswith("# exact_degree="):
            exact = int(ln.split("=", 1)[1])
            continue
        if not ln.strip() or ln.startswith("#"):
            continue
        parts = ln.split(",")
        try:
            value, dim, verts = float(parts[0]), int(parts[1]), [int(v) for v in parts[2:]]
        except (ValueError, IndexError):
            raise InputError(f"{path}: bad filtration row {ln!r}") from None
        if len(verts) != dim + 1:
            raise InputError(f"{path}: dimension does not match vertex count in {ln!r}")
        simplices.append(verts)
        values.append(value)
    return Filtration.from_simplices(simplices, values, exact)


def write_diagram(path, diagram: PersistenceDiagram) -> None:
    """Rows ``degree,birth,death`` sorted by (degree, birth, death)."""
    with open(path, "w", newline="") as fh:
        fh.write(schema_header("diagram"))
        fh.write(f"# cap={diagram.cap!r}\n")
        fh.write("degree,birth,death\n")
        for q in diagram.degrees:
            for b, d in diagram[q].tolist():
                fh.write(f"{q},{b!r},{d!r}\n")


def read_diagram(path) -> PersistenceDiagram:
    lines = _read_lines(path)
    cap = None
    pairs: dict[int, list] = {}
    for ln in lines:
        s = ln.strip()
        if s.startswith("# rankfn-schema"):
            _check_header(s, "diagram", path)
        elif s.startswith("# cap="):
            try:
                cap = float(s.split("=", 1)[1])
            except ValueError:
                raise InputError(f"{path}: bad cap line {s!r}") from None
        elif not s or s.startswith("#") or s.startswith("degree"):
            continue
        else:
            parts = s.split(",")
            try:
                q, b, d = int(parts[0]), float(parts[1]), float(parts[2])
            except (ValueError, IndexError):
                raise InputError(f"{path}: bad diagram row {s!r}") from None
            if len(parts) != 3:
                raise InputError(f"{path}: bad diagram row {s!r}")
            pairs.setdefault(q, []).append((b, d))
    if cap is None:
        cap = max((d for pts in pairs.values() for _, d in pts), default=0.0)
    try:
        return PersistenceDiagram({q: np.array(v) for q, v in pairs.items()}, cap)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def rank_grid_to_dict(grid: RankGrid) -> dict:
    return {"schema": f"rankfn/rank-grid/{SCHEMA_VERSION}",
            "tMin": grid.t_min, "tMax": grid.t_max, "G": grid.resolution,
            "degree": grid.degree, "cap": grid.cap, "delta": grid.delta,
            "values": np.asarray(grid.values).astype(np.int64).ravel().tolist()}


def rank_grid_from_dict(obj: dict) -> RankGrid:
    if obj.get("schema") != f"rankfn/rank-grid/{SCHEMA_VERSION}":
        raise InputError(f"not a rank grid: schema {obj.get('schema')!r}")
    try:
        g = int(obj["G"])
        t_min, t_max, delta = float(obj["tMin"]), float(obj["tMax"]), float(obj.get("delta", 0.0))
        values = np.asarray(obj["values"], dtype=np.int64).reshape(g, g)
        weights = cell_weights(t_min, t_max, g, delta)
        cap = None if obj.get("cap") is None else float(obj["cap"])
        return RankGrid(t_min, t_max, g, values, weights, int(obj["degree"]), cap, delta)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed rank grid: {exc}") from exc


def bi_rank_grid_to_dict(grid: BiRankGrid) -> dict:
    """Header plus ``[i, j, k, l, rank]`` entries for comparable index pairs.

    ``axis2`` is listed in storage order: for degree-Rips that is descending
    degree threshold so that larger indices are larger complexes.
    """
    return {"schema": f"rankfn/bi-rank-grid/{SCHEMA_VERSION}",
            "kind": grid.kind, "degree": grid.degree,
            "axis1": [float(v) for v in grid.axis1], "axis2": [float(v) for v in grid.axis2],
            "axis2Order": "descending" if grid.kind == "degree-rips" else "ascending",
            "entries": [[*idx, r] for idx, r in grid.pairs()]}


def bi_rank_grid_from_dict(obj: dict) -> BiRankGrid:
    if obj.get("schema") != f"rankfn/bi-rank-grid/{SCHEMA_VERSION}":
        raise InputError(f"not a bi-rank grid: schema {obj.get('schema')!r}")
    try:
        a1 = np.asarray(obj["axis1"], dtype=float)
        a2 = np.asarray(obj["axis2"], dtype=float)
        values = np.zeros((len(a1), len(a2), len(a1), len(a2)), dtype=np.int64)
        for i, j, k, l, r in obj["entries"]:
            values[i, j, k, l] = r
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise InputError(f"malformed bi-rank grid: {exc}") from exc
    values.setflags(write=False)
    return BiRankGrid(a1, a2, obj["kind"], int(obj["degree"]), values)


def write_json(path, obj: dict) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}") from exc


def write_rank_grid(path, grid: RankGrid) -> None:
    write_json(path, rank_grid_to_dict(grid))


def read_rank_grid(path) -> RankGrid:
    return rank_grid_from_dict(read_json(path))


def write_bi_rank_grid(path, grid: BiRankGrid) -> None:
    write_json(path, bi_rank_grid_to_dict(grid))


def read_bi_rank_grid(path) -> BiRankGrid:
    return bi_rank_grid_from_dict(read_json(path))
