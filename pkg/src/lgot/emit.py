"""CSV and SVG artifacts of a run.

CSV schemas (one header row, comma separated):

``decomposition.csv``
    ``kind,pair,sign,s0,s1,length,tv,anchor,corner``, one row per arc
``rays.csv``
    ``s_plus,s_minus,x_plus,y_plus,x_minus,y_minus,level,length,mass``
``fields.csv``
    ``i,j,x,y,sigma,vx,vy`` for cells with positive density
``u.csv``
    ``i,j,x,y,u,mask`` for cells inside the domain
``verdicts.csv``
    ``condition,verdict,margin,exhaustive,witness`` (witness as compact JSON)
``oracle.json``
    oracle cost, duality gap, cycle margin, cross-cell matrix, interior fraction
``report.json``
    the run report

Arc parameters and ray endpoints are written with the shortest repr that
round-trips, so re-parsing reproduces them exactly; every other float uses
12 significant digits.

SVG layers (``<g id=...>``): ``partition``, ``sigma``, ``u-contours``,
``boundary``, ``decomposition``, ``rays``.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

FMT = "{:.12g}"
CSV_VERSION = 1

KIND_COLORS = {"chi": "#d95f02", "gamma": "#1b9e77", "E": "#7570b3"}
CELL_FILL = {"X": ("#9e9e9e", 0.45), "C": ("#e31a1c", 0.18), "E": ("#3182bd", 0.18)}


def fmt(x) -> str:
    """12 significant digits; integers and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return FMT.format(x)
    return "" if x is None else str(x)


def exact(x) -> str:
    return "" if x is None else repr(float(x))


def _round(obj):
    """Recursively round floats to 12 significant digits for JSON."""
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt(x) if not math.isfinite(x) else float(FMT.format(x))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    return obj


def _writer(path: Path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


# -------------------------------------------------------------------- CSV
def write_decomposition(pairs, path) -> Path:
    path = Path(path)
    fh, w = _writer(path)
    with fh:
        w.writerow(["kind", "pair", "sign", "s0", "s1", "length", "tv", "anchor", "corner"])
        for i, p in enumerate(pairs):
            for sign, arc in (("+", p.plus), ("-", p.minus)):
                w.writerow([p.kind, i, sign, exact(arc.start), exact(arc.stop % arc.total),
                            exact(arc.length), exact(p.tv), p.anchor, exact(p.corner)])
    return path


def read_decomposition(path) -> list:
    """Rows of ``decomposition.csv`` with numeric fields parsed."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rec = dict(row)
            for key in ("s0", "s1", "length", "tv", "corner"):
                rec[key] = float(rec[key]) if rec[key] else None
            rec["pair"] = int(rec["pair"])
            out.append(rec)
    return out


RAY_COLUMNS = ["s_plus", "s_minus", "x_plus", "y_plus", "x_minus", "y_minus", "level", "length",
               "mass"]


def write_rays(plan, path) -> Path:
    path = Path(path)
    lengths = plan.lengths
    fh, w = _writer(path)
    with fh:
        w.writerow(RAY_COLUMNS)
        for k in range(len(plan)):
            w.writerow([exact(plan.s_plus[k]), exact(plan.s_minus[k]),
                        exact(plan.sources[k, 0]), exact(plan.sources[k, 1]),
                        exact(plan.targets[k, 0]), exact(plan.targets[k, 1]),
                        exact(plan.level[k]), exact(lengths[k]), exact(plan.mass[k])])
    return path


def read_rays(path) -> dict:
    """Columns of ``rays.csv`` as float arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in RAY_COLUMNS}


def write_fields(raster, path) -> Path:
    path = Path(path)
    X, Y = raster.centers
    fh, w = _writer(path)
    with fh:
        w.writerow(["i", "j", "x", "y", "sigma", "vx", "vy"])
        for i, j in zip(*np.nonzero(raster.sigma > 0)):
            w.writerow([i, j, fmt(X[i, j]), fmt(Y[i, j]), fmt(raster.sigma[i, j]),
                        fmt(raster.vx[i, j]), fmt(raster.vy[i, j])])
    return path


def write_u(field, path) -> Path:
    path = Path(path)
    X, Y = field.centers
    fh, w = _writer(path)
    with fh:
        w.writerow(["i", "j", "x", "y", "u", "mask"])
        for i, j in zip(*np.nonzero(field.mask >= 0)):
            w.writerow([i, j, fmt(X[i, j]), fmt(Y[i, j]), fmt(field.values[i, j]),
                        int(field.mask[i, j])])
    return path


def write_verdicts(verdicts: dict, path) -> Path:
    path = Path(path)
    fh, w = _writer(path)
    with fh:
        w.writerow(["condition", "verdict", "margin", "exhaustive", "witness"])
        for cond, v in verdicts.items():
            wit = json.dumps(_round(v["witnesses"][:1]), separators=(",", ":"), sort_keys=True)
            w.writerow([cond, v["verdict"], fmt(v["margin"]), fmt(v["exhaustive"]), wit])
    return path


def write_scan(result, path, param: str = "param") -> Path:
    """``param,verdict,margin`` rows of a threshold scan, in probe order."""
    path = Path(path)
    fh, w = _writer(path)
    with fh:
        w.writerow([param, "verdict", "margin"])
        for x, verdict, margin in result.history:
            w.writerow([fmt(x), verdict, fmt(margin)])
    return path


def write_report(rep, path) -> Path:
    path = Path(path)
    body = _round(rep.to_dict())
    # names only, so the report does not depend on the output directory
    body["artifacts"] = [Path(a).name for a in body["artifacts"]]
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


def write_oracle(rep, path) -> Path:
    """Oracle cost, duality gap, worst cycle margin, cross-cell matrix, interior fraction."""
    path = Path(path)
    r = rep.residuals
    M = rep.objects.get("cross_cell")
    body = {"cost": rep.costs.get("oracle"), "map_plan_cost": rep.costs.get("map_plan_oracle_n"),
            "duality_gap": r.get("duality_gap"), "cycle_margin": r.get("cycle_margin"),
            "interior_fraction": r.get("oracle_interior_fraction"),
            "cross_cell": None if M is None else M.tolist(),
            "atoms": len(rep.objects["oracle"])}
    path.write_text(json.dumps(_round(body), indent=2, sort_keys=True) + "\n")
    return path


# -------------------------------------------------------------------- SVG
class _Svg:
    def __init__(self, bbox, width=640):
        xmin, ymin, xmax, ymax = bbox
        pad = 0.04 * max(xmax - xmin, ymax - ymin)
        self.xmin, self.ymax = xmin - pad, ymax + pad
        self.w, self.h = xmax - xmin + 2 * pad, ymax - ymin + 2 * pad
        self.scale = width / self.w
        self.width, self.height = width, self.h * self.scale
        self.unit = 1.0 / self.scale      # one pixel in plane units
        self.parts = []

    def xy(self, P):
        P = np.atleast_2d(P)
        return (P[:, 0] - self.xmin) * self.scale, (self.ymax - P[:, 1]) * self.scale

    def path(self, P, closed=False) -> str:
        x, y = self.xy(P)
        d = "M" + " L".join(f"{fmt(a)},{fmt(b)}" for a, b in zip(x, y))
        return d + (" Z" if closed else "")

    def open(self, layer):
        self.parts.append(f'<g id="{layer}">')

    def close(self):
        self.parts.append("</g>")

    def add(self, s):
        self.parts.append(s)

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(self.width)}" '
                f'height="{fmt(self.height)}" viewBox="0 0 {fmt(self.width)} {fmt(self.height)}">')
        return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *self.parts,
                          "</svg>"]) + "\n"


def _arc_points(curve, arc, m=48):
    return curve.points(np.linspace(arc.start, arc.stop, m))


def _block_sum(a, f):
    nx, ny = a.shape
    mx, my = -(-nx // f), -(-ny // f)
    pad = np.zeros((mx * f, my * f))
    pad[:nx, :ny] = a
    return pad.reshape(mx, f, my, f).sum(axis=(1, 3))


def render_svg(rep, max_rays: int = 96, heat_cells: int = 128) -> str:
    sc = rep.objects["scenario"]
    curve = sc.curve
    svg = _Svg(curve.bbox)

    vp = rep.objects.get("validated")
    svg.open("partition")
    if vp is not None:
        for r in vp.cell_reports:
            if r.curve is None:
                continue
            color, op = CELL_FILL[r.kind]
            svg.add(f'<path d="{svg.path(r.curve.polyline(32), closed=True)}" fill="{color}" '
                    f'fill-opacity="{op}" stroke="{color}" stroke-width="0.5"/>')
    svg.close()

    svg.open("sigma")
    raster = rep.objects.get("raster")
    if raster is not None and raster.total > 0:
        f = max(1, -(-raster.shape[0] // heat_cells))
        S = _block_sum(raster.sigma, f)
        top = S.max()
        hh = raster.h * f
        for i, j in zip(*np.nonzero(S > 0)):
            x, y = svg.xy([(raster.x0 + i * hh, raster.y0 + (j + 1) * hh)])
            svg.add(f'<rect x="{fmt(x[0])}" y="{fmt(y[0])}" width="{fmt(hh * svg.scale)}" '
                    f'height="{fmt(hh * svg.scale)}" fill="#fd8d3c" '
                    f'fill-opacity="{fmt(0.85 * S[i, j] / top)}"/>')
    svg.close()

    svg.open("u-contours")
    field = rep.objects.get("u")
    if field is not None:
        for level, lines in _contours(field):
            for P in lines:
                svg.add(f'<path d="{svg.path(P)}" fill="none" stroke="#4d4d4d" '
                        f'stroke-width="0.8" data-level="{fmt(level)}"/>')
    svg.close()

    svg.open("boundary")
    svg.add(f'<path d="{svg.path(curve.polyline(64), closed=True)}" fill="none" '
            f'stroke="black" stroke-width="1.5"/>')
    svg.close()

    svg.open("decomposition")
    d = rep.objects.get("decomposition")
    for p in (d.pairs if d is not None else ()):
        color = KIND_COLORS.get(p.kind, "#000000")
        svg.add(f'<path d="{svg.path(_arc_points(curve, p.plus))}" fill="none" stroke="{color}" '
                f'stroke-width="4" data-kind="{p.kind}" data-sign="plus"/>')
        svg.add(f'<path d="{svg.path(_arc_points(curve, p.minus))}" fill="none" stroke="{color}" '
                f'stroke-width="4" stroke-dasharray="6,3" data-kind="{p.kind}" data-sign="minus"/>')
    svg.close()

    svg.open("rays")
    plan = rep.objects.get("plan")
    if plan is not None and len(plan):
        idx = np.unique(np.linspace(0, len(plan) - 1, min(max_rays, len(plan))).astype(int))
        for k in idx:
            svg.add(f'<path d="{svg.path(np.vstack([plan.sources[k], plan.targets[k]]))}" '
                    f'stroke="#2166ac" stroke-width="0.7"/>')
    svg.close()
    return svg.render()


def _contours(field, n_levels: int = 15):
    import contourpy

    V = np.where(field.mask >= 0, field.values, np.nan)
    if not np.any(np.isfinite(V)):
        return []
    lo, hi = float(np.nanmin(V)), float(np.nanmax(V))
    if hi - lo <= 0:
        return []
    X, Y = field.centers
    gen = contourpy.contour_generator(X.T, Y.T, V.T, line_type=contourpy.LineType.Separate)
    levels = lo + (hi - lo) * (np.arange(1, n_levels + 1) / (n_levels + 1))
    return [(lv, [np.asarray(P) for P in gen.lines(lv) if len(P) > 1]) for lv in levels]


# ------------------------------------------------------------------ driver
def emit_all(rep, out: Path, kinds=("csv", "svg")) -> list:
    """Write the requested artifact kinds into ``out``; returns their paths."""
    kinds = set(kinds)
    unknown = kinds - {"csv", "svg"}
    if unknown:
        raise ValueError(f"unknown output kinds: {sorted(unknown)}")
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if "csv" in kinds:
        d = rep.objects.get("decomposition")
        if d is not None:
            paths.append(write_decomposition(d.pairs, out / "decomposition.csv"))
        if rep.objects.get("plan") is not None:
            paths.append(write_rays(rep.objects["plan"], out / "rays.csv"))
        if rep.objects.get("raster") is not None:
            paths.append(write_fields(rep.objects["raster"], out / "fields.csv"))
        if rep.objects.get("u") is not None:
            paths.append(write_u(rep.objects["u"], out / "u.csv"))
        paths.append(write_verdicts(rep.verdicts, out / "verdicts.csv"))
        if rep.objects.get("oracle") is not None:
            paths.append(write_oracle(rep, out / "oracle.json"))
    if "svg" in kinds:
        p = out / f"{rep.scenario}.svg"
        p.write_text(render_svg(rep))
        paths.append(p)
    report = out / "report.json"
    paths = [str(p) for p in paths] + [str(report)]
    rep.artifacts = rep.artifacts + paths
    write_report(rep, report)
    return paths
