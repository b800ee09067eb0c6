"""Render campaign artifacts (rates.csv, trajectory CSVs, manifest.json) as PNGs.

Reads only the documented CSV/JSON outputs of the simulation CLI; no access to
the simulator itself.  Styles are pinned and no timestamps are embedded, so
re-rendering identical inputs yields byte-identical images.

Usage:  render_figures <manifest.json> <out_dir>
"""
from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

KINDS = ("trajectory_map", "rate_vs_beta", "rate_vs_T")

_SCHEME_STYLE = {
    "full_icsi": ("tab:purple", "D"),
    "hybrid": ("tab:blue", "o"),
    "offline_only": ("tab:green", "s"),
    "dcm": ("tab:orange", "v"),
    "heuristic_trajectory": ("tab:brown", "P"),
    "random_phase": ("tab:red", "x"),
}

_X_LABEL = {
    "rate_vs_beta": "Rician factor beta (dB)",
    "rate_vs_T": "Mission duration T (s)",
}


class RenderError(RuntimeError):
    """Missing or malformed input; the message names the offending file."""


@dataclass
class FigureSpec:
    kind: str
    out_path: Path
    rates_csv: Path | None = None
    trajectory_csvs: dict = field(default_factory=dict)  # scheme -> Path
    config: dict = field(default_factory=dict)
    title: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind: {self.kind}")


def _read_rates(path: Path):
    """Rows of (scheme, value, mean, stderr); skips cells recorded as errors."""
    if not path.is_file():
        raise RenderError(f"missing rates file: {path}")
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "scheme" not in reader.fieldnames:
                raise RenderError(f"malformed rates file (bad header): {path}")
            for row in reader:
                if row["mean_rate"] == "error":
                    continue
                rows.append((row["scheme"], float(row["sweep_value"]),
                             float(row["mean_rate"]), float(row["std_err"])))
    except (ValueError, KeyError) as e:
        raise RenderError(f"malformed rates file: {path} ({e})") from e
    if not rows:
        raise RenderError(f"no usable rows in rates file: {path}")
    return rows


def _read_trajectory(path: Path):
    if not path.is_file():
        raise RenderError(f"missing trajectory file: {path}")
    xs, ys = [], []
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                xs.append(float(row["x_m"]))
                ys.append(float(row["y_m"]))
    except (ValueError, KeyError, TypeError) as e:
        raise RenderError(f"malformed trajectory file: {path} ({e})") from e
    if not xs:
        raise RenderError(f"no waypoints in trajectory file: {path}")
    return xs, ys


def _style(scheme: str):
    return _SCHEME_STYLE.get(scheme, ("tab:gray", "."))


def build_figure(spec: FigureSpec):
    """Matplotlib figure for one spec; exposed separately so tests can count
    plot elements without decoding the PNG."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5), dpi=120)
    if spec.kind == "trajectory_map":
        if not spec.trajectory_csvs:
            raise RenderError("trajectory_map spec lists no trajectory files")
        for scheme in sorted(spec.trajectory_csvs):
            xs, ys = _read_trajectory(Path(spec.trajectory_csvs[scheme]))
            color, _ = _style(scheme)
            ax.plot(xs, ys, color=color, label=scheme, linewidth=1.6)
        for i, pos in enumerate(spec.config.get("user_pos", [])):
            ax.plot(pos[0], pos[1], marker="^", color="black", markersize=8,
                    linestyle="none", label="user" if i == 0 else None)
        ris = spec.config.get("ris_pos")
        if ris is not None:
            ax.plot(ris[0], ris[1], marker="s", color="crimson", markersize=9,
                    linestyle="none", label="RIS")
        ax.set_xlabel("x (m)")
        ax.set_ylabel("y (m)")
        ax.set_aspect("equal", adjustable="datalim")
    else:
        rows = _read_rates(Path(spec.rates_csv))
        by_scheme: dict = {}
        for scheme, value, mean, se in rows:
            by_scheme.setdefault(scheme, []).append((value, mean, se))
        for scheme in sorted(by_scheme):
            pts = sorted(by_scheme[scheme])
            color, marker = _style(scheme)
            ax.errorbar([p[0] for p in pts], [p[1] for p in pts],
                        yerr=[p[2] for p in pts], color=color, marker=marker,
                        capsize=3, label=scheme)
        ax.set_xlabel(_X_LABEL[spec.kind])
        ax.set_ylabel("average achievable rate (bits/s/Hz)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    fig = build_figure(spec)
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, format="png")
    plt.close(fig)
    return spec.out_path


def specs_from_manifest(manifest_path, out_dir) -> list:
    manifest_path = Path(manifest_path)
    out_dir = Path(out_dir)
    if not manifest_path.is_file():
        raise RenderError(f"missing manifest: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise RenderError(f"malformed manifest: {manifest_path} ({e})") from e
    base = manifest_path.parent
    param = manifest.get("param")
    config = manifest.get("config", {})
    artifacts = manifest.get("artifacts", {})

    specs = []
    rate_kind = {"beta_db": "rate_vs_beta", "T_seconds": "rate_vs_T"}.get(param)
    if rate_kind and artifacts.get("rates"):
        specs.append(FigureSpec(kind=rate_kind, out_path=out_dir / f"{rate_kind}.png",
                                rates_csv=base / artifacts["rates"], config=config))
    for value, entry in sorted(artifacts.get("values", {}).items()):
        trajs = {scheme: base / rel for scheme, rel in entry.get("trajectories", {}).items()}
        if not trajs:
            continue
        specs.append(FigureSpec(
            kind="trajectory_map",
            out_path=out_dir / f"trajectory_map_{param}_{value}.png",
            trajectory_csvs=trajs, config=config,
            title=f"{param} = {value}"))
    if not specs:
        raise RenderError(f"manifest lists no renderable artifacts: {manifest_path}")
    return specs


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: render_figures <manifest.json> <out_dir>", file=sys.stderr)
        return 2
    try:
        specs = specs_from_manifest(argv[0], argv[1])
        for spec in specs:
            path = render(spec)
            print(f"wrote {path}")
    except RenderError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
