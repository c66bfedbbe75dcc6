"""Load documented CSV schemas and draw the three figure kinds."""

import csv
import dataclasses
import json

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "leadopt-plots"

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("curves", "trajectory", "leader_timeline")

# Required columns per plot kind; anything extra is ignored.
SCHEMAS = {
    "curves": ("rank", "trial", "method", "step", "best_f"),
    "trajectory": ("method", "iteration", "worker", "x", "y", "f_value"),
    "leader_timeline": ("total_steps", "leader_group", "leader_worker"),
}


class SchemaError(Exception):
    pass


@dataclasses.dataclass
class PlotSpec:
    inputs: list
    kind: str
    out: str
    log_scale: bool = False
    method: str = ""  # optional filter for trajectory/curves

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown plot kind {self.kind!r};"
                              f" expected one of {', '.join(KINDS)}")
        if not self.inputs:
            raise SchemaError("no input CSV given")

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            raw = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise SchemaError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**raw)


def load_rows(path, kind):
    """Rows of `path` as dicts, validated against the kind's schema."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in SCHEMAS[kind] if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing column '{missing[0]}'"
                f" (required for {kind}: {', '.join(SCHEMAS[kind])})")
        return list(reader)


def _sinc_surface(xlim, ylim):
    xs = np.linspace(*xlim, 200)
    ys = np.linspace(*ylim, 200)
    X, Y = np.meshgrid(xs, ys)
    rho = np.hypot(X, Y)
    with np.errstate(invalid="ignore"):
        Z = np.where(rho == 0.0, 1.0, np.sin(np.pi * rho) / (np.pi * rho))
    return X, Y, Z


def _draw_curves(ax, rows, spec, stats):
    series = {}
    for r in rows:
        if spec.method and r["method"] != spec.method:
            continue
        key = (r["method"], r["rank"], r["trial"])
        series.setdefault(key, []).append((int(r["step"]), float(r["best_f"])))
    colors = {}
    for (method, rank, trial), pts in sorted(series.items()):
        pts.sort()
        steps, vals = zip(*pts)
        if method not in colors:
            colors[method] = f"C{len(colors)}"
            label = method if len({k[1] for k in series}) == 1 \
                else f"{method} r={rank}"
        else:
            label = None
        ax.plot(steps, vals, color=colors[method], label=label, alpha=0.8)
        stats["lines"] += 1
    if spec.log_scale:
        ax.set_yscale("log")
    ax.set_xlabel("step")
    ax.set_ylabel("best worker f")
    if colors:
        ax.legend()
    stats["labels"] = sorted(colors)


def _draw_trajectory(ax, rows, spec, stats):
    paths = {}
    for r in rows:
        if spec.method and r["method"] != spec.method:
            continue
        key = (r["method"], r["worker"])
        paths.setdefault(key, []).append(
            (int(r["iteration"]), float(r["x"]), float(r["y"])))
    if paths:
        allx = [x for pts in paths.values() for _, x, _ in pts]
        ally = [y for pts in paths.values() for _, _, y in pts]
        pad = 2.0
        xlim = (min(allx) - pad, max(allx) + pad)
        ylim = (min(ally) - pad, max(ally) + pad)
        ax.contour(*_sinc_surface(xlim, ylim), levels=15,
                   colors="gray", linewidths=0.4)
    starts, ends = set(), set()
    for (method, worker), pts in sorted(paths.items()):
        pts.sort()
        xs = [x for _, x, _ in pts]
        ys = [y for _, _, y in pts]
        ax.plot(xs, ys, alpha=0.8,
                label=f"{method} w{worker}" if len(paths) <= 8 else None)
        starts.add((round(xs[0], 9), round(ys[0], 9)))
        ends.add((round(xs[-1], 9), round(ys[-1], 9)))
        stats["lines"] += 1
    for x, y in sorted(starts):
        ax.plot(x, y, "ko", markersize=6)
    for x, y in sorted(ends):
        ax.plot(x, y, "r*", markersize=10)
    stats["start_markers"] = len(starts)
    stats["end_markers"] = len(ends)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if paths:
        ax.legend(fontsize=7)


def _draw_leader_timeline(ax, rows, spec, stats):
    steps, ids, labels = [], [], {}
    for r in rows:
        if not r["leader_worker"]:
            continue
        tag = f"{r['leader_group']}:{r['leader_worker']}"
        labels.setdefault(tag, len(labels))
        steps.append(int(r["total_steps"]))
        ids.append(labels[tag])
    if steps:
        order = np.argsort(steps, kind="stable")
        ax.step(np.asarray(steps)[order], np.asarray(ids)[order],
                where="post")
        ax.set_yticks(range(len(labels)), list(labels))
        stats["lines"] = 1
    ax.set_xlabel("total steps")
    ax.set_ylabel("leader (group:worker)")
    stats["labels"] = list(labels)


_DRAW = {
    "curves": _draw_curves,
    "trajectory": _draw_trajectory,
    "leader_timeline": _draw_leader_timeline,
}


def render(spec):
    """Draw the figure and write PNG + SVG (or just the named format).

    Returns {"written": [paths], "lines": n, ...} for inspection.
    """
    rows = []
    for path in spec.inputs:
        rows.extend(load_rows(path, spec.kind))

    fig, ax = plt.subplots(figsize=(7, 5))
    stats = {"lines": 0}
    _DRAW[spec.kind](ax, rows, spec, stats)
    ax.set_title(spec.kind.replace("_", " "))

    out = spec.out
    if out.endswith((".png", ".svg")):
        targets = [out]
    else:
        targets = [out + ".png", out + ".svg"]
    for target in targets:
        fig.savefig(target, dpi=100, metadata={"Date": None}
                    if target.endswith(".svg") else None)
    plt.close(fig)
    stats["written"] = targets
    return stats
