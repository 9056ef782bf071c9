"""Turn exporter datasets into the standard figure set.

Five figure kinds, one function each, all driven through render(job).
Inputs are hashed into a manifest written next to the image, so a figure
can always be traced back to the exact files it was drawn from.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from .schemas import SchemaError, read_csv_columns, read_drift_report

KINDS = ("spectrum_sweep", "min_spacing", "transition_grid", "level_curves",
         "mathieu_compare")

# colorbar floor: spacings below this are shown saturated, matching the
# exporter's log10 column convention
DEFAULT_FLOOR = 1e-8


@dataclass(frozen=True)
class FigureJob:
    kind: str
    inputs: tuple
    output: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {', '.join(KINDS)}")
        if not self.inputs:
            raise SchemaError("at least one input file is required")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))

    def opt(self, name, default):
        return self.options.get(name, default)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(job):
    manifest = {
        "kind": job.kind,
        "output": job.output,
        "inputs": [{"path": p, "sha256": _sha256(p)} for p in job.inputs],
        "options": {k: job.options[k] for k in sorted(job.options)},
    }
    with open(job.output + ".manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return manifest


def _spectrum_sweep(job, fig):
    cols = read_csv_columns(job.inputs[0], "spectrum_sweep")
    floor_log = math.log10(job.opt("floor", DEFAULT_FLOOR))
    ax = fig.add_subplot(111)
    color = np.clip(cols["log10_nearest_spacing"], floor_log, None)
    sc = ax.scatter(cols["sweep_value"], cols["eigenvalue"], c=color,
                    s=4, cmap=job.opt("cmap", "viridis"))
    fig.colorbar(sc, ax=ax, label=f"log10 nearest spacing (floor {floor_log:g})")
    sep = job.opt("separatrix", None)
    if sep == "eps":
        # eps sweep at fixed amplitude: region edges are +/-(a - |eps|)
        a = abs(job.opt("a", 1.0))
        x = np.unique(cols["sweep_value"])
        for sign in (1, -1):
            ax.plot(x, sign * (a - np.abs(x)), "r:", lw=1)
    elif sep is not None:
        lo, hi = sep
        ax.axhline(lo, color="r", ls=":", lw=1)
        ax.axhline(hi, color="r", ls=":", lw=1)
    ax.set_xlabel("sweep value")
    ax.set_ylabel("eigenvalue")


def _min_spacing(job, fig):
    ax = fig.add_subplot(111)
    for path in job.inputs:
        cols = read_csv_columns(path, "min_spacing")
        by_eps = {}
        for n, eps, meas, model in zip(cols["n"], cols["eps"],
                                       cols["measured_min_spacing"],
                                       cols["model_min_spacing"]):
            by_eps.setdefault(eps, []).append((n, meas, model))
        for eps, rows in sorted(by_eps.items()):
            rows.sort()
            # exact-zero families cannot appear on a log axis
            ns = [r[0] for r in rows if r[1] > 0]
            meas = [r[1] for r in rows if r[1] > 0]
            line, = ax.semilogy(ns, meas, "o-", label=f"eps={eps:g}")
            ns_m = [r[0] for r in rows if r[2] > 0]
            model = [r[2] for r in rows if r[2] > 0]
            ax.semilogy(ns_m, model, "--", color=line.get_color(), lw=1)
    ax.set_xlabel("n")
    ax.set_ylabel("minimum spacing")
    ax.legend()


def _transition_grid(job, fig):
    reports = [read_drift_report(p) for p in job.inputs]
    reports.sort(key=lambda d: d["duration_over_hbar"])
    floor = job.opt("floor", DEFAULT_FLOOR)
    axes = fig.subplots(1, len(reports), squeeze=False)[0]
    for ax, rep in zip(axes, reports):
        amps = np.asarray(rep["amplitudes"], dtype=float)
        im = ax.imshow(np.clip(amps.T, floor, None), origin="lower",
                       norm=LogNorm(vmin=floor, vmax=1.0),
                       cmap=job.opt("cmap", "magma"))
        for v in rep["boundary_indices"]["init"]:
            ax.axvline(v, color="w", ls=":", lw=0.8)
        for v in rep["boundary_indices"]["final"]:
            ax.axhline(v, color="w", ls=":", lw=0.8)
        ax.set_title(f"T/hbar = {rep['duration_over_hbar']:g}", fontsize=9)
        ax.set_xlabel("initial")
    axes[0].set_ylabel("final")
    fig.colorbar(im, ax=list(axes), shrink=0.8)


def _level_curves(job, fig):
    cols = read_csv_columns(job.inputs[0], "level_curves")
    p = np.asarray(cols["p"])
    phi = np.asarray(cols["phi"])
    pv = np.unique(p)
    phiv = np.unique(phi)
    if len(pv) * len(phiv) != len(p):
        raise SchemaError(f"{job.inputs[0]}: rows do not form a full "
                          f"{len(pv)} x {len(phiv)} grid")
    energy = np.asarray(cols["energy"]).reshape(len(pv), len(phiv))
    ax = fig.add_subplot(111)
    cs = ax.contour(phiv, pv, energy, levels=job.opt("levels", 15),
                    cmap=job.opt("cmap", "viridis"))
    ax.clabel(cs, inline=True, fontsize=6)
    seps = sorted({cols["e_sep_lower"][0], cols["e_sep_upper"][0]})
    ax.contour(phiv, pv, energy, levels=seps, colors="r",
               linestyles="dashed", linewidths=1.5)
    ax.set_xlabel("phi")
    ax.set_ylabel("p")


def _mathieu_compare(job, fig):
    cols = read_csv_columns(job.inputs[0], "mathieu_compare")
    idx = cols["index"]
    top, bottom = fig.subplots(2, 1, sharex=True)
    top.plot(idx, cols["harper_eigenvalue"], "o", ms=3, label="operator")
    top.plot(idx, cols["mathieu_scaled_eigenvalue"], "+", ms=5,
             label="mathieu (scaled)")
    top.set_ylabel("level")
    top.legend()
    diff = np.abs(cols["difference"])
    floor = job.opt("floor", DEFAULT_FLOOR)
    bottom.semilogy(idx, np.clip(diff, floor, None), ".-")
    bottom.set_xlabel("index")
    bottom.set_ylabel("|difference|")


_RENDERERS = {
    "spectrum_sweep": _spectrum_sweep,
    "min_spacing": _min_spacing,
    "transition_grid": _transition_grid,
    "level_curves": _level_curves,
    "mathieu_compare": _mathieu_compare,
}


def render(job: FigureJob):
    """Draw one figure and its manifest; returns the manifest dict."""
    width = 4 + (3 * len(job.inputs) if job.kind == "transition_grid" else 2)
    fig = plt.figure(figsize=(width, 4.5))
    try:
        _RENDERERS[job.kind](job, fig)
        fig.savefig(job.output, dpi=job.opt("dpi", 150))
    finally:
        plt.close(fig)
    return _write_manifest(job)
