"""Plain-text file formats and graph construction from external data.

Graph file::

    gmgraph v1 <n> <k>
    <n rows of n adjacency values>
    <n rows of k attribute values, only when k > 0>

Points file::

    gmpoints v1 <m> <d>
    <m rows of d coordinates>

Assignment file::

    gmatch v1
    <j i>            one line per node j of g_prime, matched to node i of g
    # metric <key> <value>

Floats are written with 17 significant digits so they round-trip exactly.
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from gmatch.core import Assignment, Graph, SolveReport, ValidationError, as_matrix


class FormatError(ValueError):
    """Malformed input file; the message carries path and line number."""


def _fmt17(v: float) -> str:
    return f"{float(v):.17g}"


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _lines(path):
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            yield lineno, line.rstrip("\n")


def _parse_floats(path, lineno, line, width):
    parts = line.split()
    if len(parts) != width:
        raise FormatError(f"{path}:{lineno}: expected {width} values, got {len(parts)}")
    try:
        return [float(t) for t in parts]
    except ValueError as exc:
        raise FormatError(f"{path}:{lineno}: {exc}") from None


def _header(path, lines, magic, nfields):
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise FormatError(f"{path}:1: empty file") from None
    parts = line.split()
    if len(parts) < 2 or parts[0] != magic:
        raise FormatError(f"{path}:{lineno}: expected a '{magic}' header")
    if parts[1] != "v1":
        raise FormatError(f"{path}:{lineno}: unsupported {magic} version {parts[1]!r}")
    if len(parts) != 2 + nfields:
        raise FormatError(f"{path}:{lineno}: malformed header {line!r}")
    try:
        dims = [int(t) for t in parts[2:]]
    except ValueError:
        raise FormatError(f"{path}:{lineno}: malformed header {line!r}") from None
    if any(d < 0 for d in dims):
        raise FormatError(f"{path}:{lineno}: negative dimension in header")
    return dims


def _read_block(path, lines, rows, width):
    out = np.empty((rows, width))
    for r in range(rows):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise FormatError(f"{path}: unexpected end of file after {r} of {rows} rows") from None
        out[r] = _parse_floats(path, lineno, line, width)
    return out


def _expect_eof(path, lines):
    for lineno, line in lines:
        if line.strip():
            raise FormatError(f"{path}:{lineno}: unexpected trailing data")


def load_adjacency(path) -> Graph:
    lines = _lines(path)
    n, k = _header(path, lines, "gmgraph", 2)
    adj = _read_block(path, lines, n, n)
    attrs = _read_block(path, lines, n, k) if k > 0 else None
    _expect_eof(path, lines)
    try:
        return Graph(adj, attrs)
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from None


load_graph = load_adjacency


def save_graph(g: Graph, path) -> None:
    rows = [f"gmgraph v1 {g.n} {g.k}"]
    rows += [" ".join(map(_fmt17, row)) for row in g.adjacency]
    if g.attributes is not None:
        rows += [" ".join(map(_fmt17, row)) for row in g.attributes]
    atomic_write(path, "\n".join(rows) + "\n")


def load_points(path) -> np.ndarray:
    lines = _lines(path)
    m, d = _header(path, lines, "gmpoints", 2)
    pts = _read_block(path, lines, m, d)
    _expect_eof(path, lines)
    return pts


def save_points(points, path) -> None:
    pts = as_matrix(points, "points")
    rows = [f"gmpoints v1 {pts.shape[0]} {pts.shape[1]}"]
    rows += [" ".join(map(_fmt17, row)) for row in pts]
    atomic_write(path, "\n".join(rows) + "\n")


def points_to_graph(points, attributes=None) -> Graph:
    """Complete graph whose edge weights are Euclidean distances."""
    pts = as_matrix(points, "points")
    m, d = pts.shape
    if d not in (2, 3):
        raise ValidationError(f"points must be 2D or 3D, got d={d}")
    if m < 1:
        raise ValidationError("need at least one point")
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    # exact symmetry regardless of summation order
    dist = np.triu(dist, 1)
    return Graph(dist + dist.T, attributes)


def features_to_affinity(b, b_prime) -> np.ndarray:
    """Inner products between node feature vectors: K = B B'^T."""
    b = as_matrix(b, "b")
    b_prime = as_matrix(b_prime, "b_prime")
    if b.shape[1] != b_prime.shape[1]:
        raise ValidationError(
            f"feature dimensions differ: {b.shape[1]} vs {b_prime.shape[1]}"
        )
    return b @ b_prime.T


REPORT_SCALARS = ("iterations", "wall_time", "edge_error", "total_error", "excess_error", "converged", "degenerate")


def save_assignment(a: Assignment, report: SolveReport, path, extra: dict | None = None) -> None:
    rows = ["gmatch v1"]
    rows += [f"{j} {i}" for j, i in enumerate(a.map)]
    rows.append(f"# metric n {a.n}")
    if report.solver:
        rows.append(f"# metric solver {report.solver}")
    for key in REPORT_SCALARS:
        value = getattr(report, key)
        if value is None:
            continue
        if isinstance(value, (bool, np.bool_)):
            value = int(value)
        rows.append(f"# metric {key} {value if isinstance(value, int) else _fmt17(value)}")
    for r in report.residuals:
        rows.append(f"# metric residual {_fmt17(r)}")
    for f in report.objective_trace:
        rows.append(f"# metric objective {_fmt17(f)}")
    for key, value in (extra or {}).items():
        rows.append(f"# metric {key} {value}")
    atomic_write(path, "\n".join(rows) + "\n")


def load_assignment(path) -> tuple[Assignment, SolveReport]:
    lines = _lines(path)
    _header(path, lines, "gmatch", 0)
    pairs, metrics, residuals, objectives = [], {}, [], []
    for lineno, line in lines:
        if not line.strip():
            continue
        parts = line.split()
        if parts[0] == "#":
            if len(parts) != 4 or parts[1] != "metric":
                raise FormatError(f"{path}:{lineno}: malformed metric line")
            key, value = parts[2], parts[3]
            if key == "residual":
                residuals.append(float(value))
            elif key == "objective":
                objectives.append(float(value))
            else:
                metrics[key] = value
            continue
        if metrics or residuals or objectives:
            raise FormatError(f"{path}:{lineno}: assignment pair after metric trailer")
        try:
            j, i = (int(t) for t in parts)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: expected 'j i', got {line!r}") from None
        if j != len(pairs):
            raise FormatError(f"{path}:{lineno}: expected node {len(pairs)}, got {j}")
        pairs.append(i)
    if "n" not in metrics:
        raise FormatError(f"{path}: missing '# metric n' line")
    try:
        a = Assignment(np.array(pairs, dtype=np.int64), int(metrics["n"]))
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from None
    report = SolveReport(
        iterations=int(metrics.get("iterations", len(residuals))),
        residuals=residuals,
        objective_trace=objectives,
        wall_time=float(metrics.get("wall_time", 0.0)),
        edge_error=float(metrics.get("edge_error", "nan")),
        total_error=float(metrics.get("total_error", "nan")),
        excess_error=float(metrics["excess_error"]) if "excess_error" in metrics else None,
        converged=bool(int(metrics.get("converged", 0))),
        degenerate=bool(int(metrics.get("degenerate", 0))),
        solver=metrics.get("solver", ""),
    )
    return a, report
