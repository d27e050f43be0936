"""Binary-slice grids, contour extraction, and file emitters.

A binary mutual information is a function of (s, t, p) through
U = [[s, t], [1-s, 1-t]] diag(p, 1-p); fixing p = p0 gives a 2-d field whose
contours visualize the measure.  The uninformative diagonal s = t carries
value zero for every information-monotone measure, and contour shape around
it distinguishes how measures punish one-sided versus two-sided noise.
"""

import io
import json
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .core import JointDistribution, lower_set_vertices_binary, to_stp
from .errors import ConfigurationError, PreconditionError
from .measures import MeasureSpec


@dataclass
class SliceGrid:
    """Endpoint-inclusive lattice of measure (or density) values on a slice:
    values[i][j] at (s_i, t_j) = (i, j) / (n - 1)."""

    p0: float
    n: int
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.n < 2 or self.values.shape != (self.n, self.n):
            raise ConfigurationError("grid needs n >= 2 and an n x n value array")
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError("grid values must be finite")

    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def value_at(self, s: float, t: float) -> float:
        """Bilinear interpolation."""
        x = np.clip(s, 0, 1) * (self.n - 1)
        y = np.clip(t, 0, 1) * (self.n - 1)
        i, j = int(min(x, self.n - 2)), int(min(y, self.n - 2))
        fx, fy = x - i, y - j
        v = self.values
        return float(v[i, j] * (1 - fx) * (1 - fy) + v[i + 1, j] * fx * (1 - fy)
                     + v[i, j + 1] * (1 - fx) * fy + v[i + 1, j + 1] * fx * fy)


def _grid_matrices(p0: float, n: int) -> np.ndarray:
    s = np.linspace(0.0, 1.0, n)
    S, T = np.meshgrid(s, s, indexing="ij")
    Sf, Tf = S.reshape(-1), T.reshape(-1)
    return np.stack([Sf * p0, Tf * (1 - p0),
                     (1 - Sf) * p0, (1 - Tf) * (1 - p0)], axis=1)


def slice_grid(measure: MeasureSpec, p0: float, n: int) -> SliceGrid:
    """Values of the measure on the p = p0 slice lattice (binary only)."""
    if n < 2:
        raise PreconditionError("n must be >= 2")
    if not 0 <= p0 <= 1:
        raise PreconditionError("p0 must lie in [0, 1]")
    pts = _grid_matrices(p0, n)
    vals = _measure_batch(measure, pts)
    return SliceGrid(p0=p0, n=n, values=vals.reshape(n, n),
                     metadata={"kind": "measure", "spec": measure.label, "p0": p0})


def _measure_batch(measure: MeasureSpec, pts: np.ndarray) -> np.ndarray:
    if measure.kind == "dmi":
        return np.abs(pts[:, 0] * pts[:, 3] - pts[:, 1] * pts[:, 2])
    if measure.kind in ("dmi2", "poly"):
        return measure.polynomial().eval_batch(pts)
    if measure.kind == "vmi" and measure.closed_form is not None:
        cf = measure.closed_form
        v = cf.poly.eval_batch(pts)
        if not cf.estimable:
            v = np.abs(v)
        return v * math.sqrt(cf.C) ** cf.radical_pow
    out = np.empty(pts.shape[0])
    for k, flat in enumerate(pts):
        out[k] = float(measure.evaluate(JointDistribution(flat.reshape(2, 2)
                                                          / flat.sum())))
    return out


def density_heatmap_grid(density, p0: float, n: int) -> SliceGrid:
    """Density w evaluated on the slice lattice (the heatmap companion of a
    VMI contour plot)."""
    if n < 2:
        raise PreconditionError("n must be >= 2")
    pts = _grid_matrices(p0, n)
    vals = density.eval_batch(pts)
    return SliceGrid(p0=p0, n=n, values=vals.reshape(n, n),
                     metadata={"kind": "density", "spec": repr(density), "p0": p0})


# ---------------------------------------------------------------------------
# marching squares


def _interp(p1, p2, v1, v2, level):
    if v2 == v1:
        f = 0.5
    else:
        f = (level - v1) / (v2 - v1)
    return (p1[0] + f * (p2[0] - p1[0]), p1[1] + f * (p2[1] - p1[1]))


def marching_squares(grid: SliceGrid, levels) -> dict:
    """Linear-interpolation marching squares.  Saddle cells are resolved by
    the cell-average rule; segments are stitched into polylines.  Returns
    {level: [polyline, ...]} with polylines as lists of (s, t) points."""
    levels = sorted(set(float(l) for l in levels))
    if not levels:
        raise PreconditionError("need at least one level")
    v = grid.values
    ax = grid.axis()
    out = {}
    for level in levels:
        segments = []
        for i in range(grid.n - 1):
            for j in range(grid.n - 1):
                corners = [(ax[i], ax[j]), (ax[i + 1], ax[j]),
                           (ax[i + 1], ax[j + 1]), (ax[i], ax[j + 1])]
                vals = [v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1]]
                case = sum(1 << k for k, val in enumerate(vals) if val > level)
                if case in (0, 15):
                    continue
                edges = {
                    0: _interp(corners[0], corners[1], vals[0], vals[1], level),
                    1: _interp(corners[1], corners[2], vals[1], vals[2], level),
                    2: _interp(corners[3], corners[2], vals[3], vals[2], level),
                    3: _interp(corners[0], corners[3], vals[0], vals[3], level),
                }
                table = {
                    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
                    6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
                    11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
                }
                if case in (5, 10):
                    center_above = sum(vals) / 4.0 > level
                    if case == 5:
                        pairs = [(3, 0), (1, 2)] if center_above else [(0, 1), (2, 3)]
                    else:
                        pairs = [(0, 1), (2, 3)] if center_above else [(3, 0), (1, 2)]
                else:
                    pairs = table[case]
                for a, b in pairs:
                    segments.append((edges[a], edges[b]))
        out[level] = _stitch(segments)
    return out


def _stitch(segments, tol: float = 1e-9):
    """Join segments sharing endpoints into polylines."""
    def key(p):
        return (round(p[0] / tol), round(p[1] / tol))

    endpoint: dict = {}
    for idx, (a, b) in enumerate(segments):
        endpoint.setdefault(key(a), []).append((idx, 0))
        endpoint.setdefault(key(b), []).append((idx, 1))
    used = [False] * len(segments)
    polylines = []
    for idx, (a, b) in enumerate(segments):
        if used[idx]:
            continue
        used[idx] = True
        line = [a, b]
        for grow_end in (True, False):
            while True:
                tip = line[-1] if grow_end else line[0]
                nxt = None
                for sidx, end in endpoint.get(key(tip), []):
                    if not used[sidx]:
                        nxt = (sidx, segments[sidx][1 - end])
                        break
                if nxt is None:
                    break
                used[nxt[0]] = True
                if grow_end:
                    line.append(nxt[1])
                else:
                    line.insert(0, nxt[1])
        polylines.append(line)
    return polylines


# ---------------------------------------------------------------------------
# contour diagnostics (straightness and bow direction)


def fit_line_max_deviation(polyline) -> float:
    """Max orthogonal distance of polyline points from their total-least-
    squares line."""
    pts = np.asarray(polyline, dtype=float)
    if len(pts) < 3:
        return 0.0
    center = pts.mean(axis=0)
    d = pts - center
    _, _, vt = np.linalg.svd(d, full_matrices=False)
    normal = vt[-1]
    return float(np.max(np.abs(d @ normal)))


def matched_level_contour(grid: SliceGrid, s0: float, t0: float):
    """The contour through the reference point: level = value at (s0, t0);
    returns (level, polyline nearest the reference)."""
    level = grid.value_at(s0, t0)
    polys = marching_squares(grid, [level])[level]
    if not polys:
        raise PreconditionError("no contour at the matched level")
    def dist(poly):
        pts = np.asarray(poly)
        return float(np.min((pts[:, 0] - s0) ** 2 + (pts[:, 1] - t0) ** 2))
    return level, min(polys, key=dist)


def bow_deviations(polyline, s0: float, t0: float,
                   off_midline: float = 0.2) -> np.ndarray:
    """Signed deviations of contour points from the straight reference line
    s - t = s0 - t0, positive toward the uninformative diagonal s = t.
    Only points away from the midline s + t = 1 are reported (the contour
    crosses the line there by construction)."""
    pts = np.asarray(polyline, dtype=float)
    keep = np.abs(pts[:, 0] + pts[:, 1] - 1.0) > off_midline
    pts = pts[keep]
    c = s0 - t0
    dev = (c - (pts[:, 0] - pts[:, 1])) * np.sign(c) / math.sqrt(2.0)
    return dev


# ---------------------------------------------------------------------------
# emitters


def lower_set_overlay_stp(U: JointDistribution):
    """The binary lower-set parallelogram vertices mapped to (s, t); this is
    also the strategy parallelogram of pure strategies over U."""
    pts = []
    for vertex in lower_set_vertices_binary(U):
        c = to_stp(vertex)
        pts.append((float(c.s), float(c.t)))
    return pts


def grid_to_csv(grid: SliceGrid) -> str:
    buf = io.StringIO()
    buf.write("s,t,value\n")
    ax = grid.axis()
    for i in range(grid.n):
        for j in range(grid.n):
            buf.write(f"{ax[i]:.17g},{ax[j]:.17g},{grid.values[i, j]:.17g}\n")
    return buf.getvalue()


def grid_from_csv(text: str, p0: float = 0.5) -> SliceGrid:
    lines = [l for l in text.strip().splitlines() if l]
    if lines[0].strip() != "s,t,value":
        raise ConfigurationError("expected header 's,t,value'")
    rows = [tuple(float(x) for x in l.split(",")) for l in lines[1:]]
    n = int(round(math.sqrt(len(rows))))
    if n * n != len(rows):
        raise ConfigurationError("grid CSV is not square")
    vals = np.empty((n, n))
    for k, (_, _, v) in enumerate(rows):
        vals[k // n, k % n] = v
    return SliceGrid(p0=p0, n=n, values=vals)


def grid_to_json(grid: SliceGrid) -> dict:
    return {"p0": grid.p0, "n": grid.n, "values": grid.values.tolist(),
            "metadata": grid.metadata}


def grid_from_json(obj: dict) -> SliceGrid:
    return SliceGrid(p0=float(obj["p0"]), n=int(obj["n"]),
                     values=np.asarray(obj["values"], dtype=float),
                     metadata=obj.get("metadata", {}))


def contours_to_svg(contours: dict, size: int = 600,
                    overlay: JointDistribution | None = None,
                    title: str = "") -> str:
    """Self-contained SVG: contour polylines over the unit square, with the
    lower-set / strategy parallelogram overlay when a joint is supplied.
    x maps s rightward, y maps t upward."""
    def xy(p):
        return (p[0] * size, (1.0 - p[1]) * size)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
             f'height="{size}" viewBox="0 0 {size} {size}">']
    parts.append(f'<rect x="0" y="0" width="{size}" height="{size}" '
                 'fill="white" stroke="black"/>')
    if title:
        parts.append(f'<title>{escape(title)}</title>')
    if overlay is not None:
        pts = [xy(p) for p in lower_set_overlay_stp(overlay)]
        # vertex order is U, flip U, top, bottom; reorder to a quad perimeter
        quad = [pts[2], pts[0], pts[3], pts[1]]
        d = " ".join(f"{x:.3f},{y:.3f}" for x, y in quad)
        parts.append(f'<polygon points="{d}" fill="#fff3b0" '
                     'fill-opacity="0.6" stroke="#c8a200"/>')
    # uninformative diagonal s = t
    d0, d1 = xy((0.0, 0.0)), xy((1.0, 1.0))
    parts.append(f'<line x1="{d0[0]:.3f}" y1="{d0[1]:.3f}" x2="{d1[0]:.3f}" '
                 f'y2="{d1[1]:.3f}" stroke="#999" stroke-dasharray="6,4"/>')
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    for k, (level, polylines) in enumerate(sorted(contours.items())):
        color = palette[k % len(palette)]
        for poly in polylines:
            if len(poly) < 2:
                continue
            coords = [xy(p) for p in poly]
            d = "M " + " L ".join(f"{x:.3f} {y:.3f}" for x, y in coords)
            parts.append(f'<path d="{d}" fill="none" stroke="{color}" '
                         f'stroke-width="1.5"><title>{level:.6g}</title></path>')
    parts.append("</svg>")
    return "\n".join(parts)


def emit(obj, fmt: str, path: str, overlay: JointDistribution | None = None):
    """Write a grid, contour set, or sweep result to ``path`` as csv, json,
    or svg (contours only)."""
    from .optimizer import SweepResult, sweep_rows_to_csv

    fmt = fmt.lower()
    try:
        if isinstance(obj, SliceGrid):
            if fmt == "csv":
                text = grid_to_csv(obj)
            elif fmt == "json":
                text = json.dumps(grid_to_json(obj), indent=1)
            elif fmt == "svg":
                raise ConfigurationError("emit grids as csv/json; contours as svg")
            else:
                raise ConfigurationError(f"unknown format {fmt!r}")
        elif isinstance(obj, dict):  # contours
            if fmt == "svg":
                text = contours_to_svg(obj, overlay=overlay)
            elif fmt == "json":
                text = json.dumps({str(k): v for k, v in obj.items()}, indent=1)
            else:
                raise ConfigurationError("contours emit as svg or json")
        elif isinstance(obj, SweepResult):
            if fmt != "csv":
                raise ConfigurationError("sweep tables emit as csv")
            text = sweep_rows_to_csv(obj)
        else:
            raise ConfigurationError(f"cannot emit {type(obj).__name__}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {path}: {exc}") from exc
