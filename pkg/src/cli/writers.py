"""
Output writers: CSV tables, JSON documents and SVG plots.

CSV files use LF line endings and 17 significant digits so that identical runs
produce byte-identical data files. SVG plots are rendered with matplotlib's Agg
backend, with the date metadata and hash salt fixed.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src import __version__  # noqa: E402
from src.resonance.modes import PlaneSamples, RadialSamples  # noqa: E402
from src.resonance.rootfind import ResonanceRoot  # noqa: E402

logger = logging.getLogger(__name__)

plt.rcParams.update({"svg.hashsalt": "nested-resonators", "svg.fonttype": "none"})


def fmt(value: Any) -> str:
    """Format a CSV cell; floats get 17 significant digits."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """
    Write a header row and data rows.

    Args:
        path: Destination file; parent directories are created.
        headers: Column names.
        rows: Row values.

    Returns:
        The path written.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(headers)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    logger.info("Wrote %s", path)
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(
    path: Path,
    command: str,
    data: Mapping[str, Any],
    config: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Write data with a metadata object (command, version, config echo)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "metadata": {"command": command, "version": __version__, "config": _jsonable(config)},
        **_jsonable(dict(data)),
    }
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def _save(fig: plt.Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("Wrote %s", path)
    return path


def plot_spectrum(path: Path, roots: Sequence[ResonanceRoot], title: str) -> Path:
    """Roots and their mirrors -conj(omega) in the complex plane."""
    fig, ax = plt.subplots(figsize=(7, 4))
    omegas = np.array([r.omega for r in roots], dtype=complex)
    ax.scatter(omegas.real, omegas.imag, s=14, color="tab:blue", label="Re ω > 0")
    ax.scatter(-omegas.real, omegas.imag, s=14, color="tab:orange", label="mirror −ω̄")
    ax.axvline(0.0, color="0.6", linewidth=0.8)
    ax.set_xlabel("Re ω")
    ax.set_ylabel("Im ω")
    ax.set_title(title)
    ax.legend(loc="lower left", fontsize="small")
    return _save(fig, path)


def plot_mode(path: Path, radial: RadialSamples, plane: PlaneSamples, title: str) -> Path:
    """Radial cut with red dotted radius markers, and the plane heatmap with layer circles."""
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6, 9))

    extent = (plane.coords[0], plane.coords[-1], plane.coords[0], plane.coords[-1])
    image = top.imshow(plane.values, origin="lower", extent=extent, cmap="viridis")
    theta = np.linspace(0.0, 2.0 * np.pi, 256)
    for radius in plane.circles:
        top.plot(radius * np.cos(theta), radius * np.sin(theta), color="white", linewidth=0.6)
    top.set_aspect("equal")
    top.set_title(title)
    fig.colorbar(image, ax=top, label="Re u")

    r_max = radial.r[-1]
    mirrored_r = np.concatenate([-radial.r[::-1], radial.r[1:]])
    mirrored_u = np.concatenate([radial.values[::-1], radial.values[1:]]).real
    bottom.plot(mirrored_r, mirrored_u, color="tab:blue")
    for radius in radial.markers:
        for x in (-radius, radius):
            bottom.axvline(x, color="red", linestyle=":", linewidth=0.8)
    bottom.set_xlim(-r_max, r_max)
    bottom.set_xlabel("x₁")
    bottom.set_ylabel("Re u(x₁, 0, 0)")
    return _save(fig, path)


def plot_splitting(path: Path, spectra: Mapping[int, Sequence[ResonanceRoot]]) -> Path:
    """Real parts of the roots against the number of layers."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for n_layers, roots in sorted(spectra.items()):
        reals = [r.omega.real for r in roots]
        ax.scatter([n_layers] * len(reals), reals, s=12, color="tab:blue")
    ax.set_xlabel("number of layers N")
    ax.set_ylabel("Re ω")
    ax.set_title("Mode splitting")
    return _save(fig, path)


def plot_cvr_sweep(path: Path, rows: Sequence[tuple[float, float, complex]]) -> Path:
    """Real part of the shell frequency against its capacity-to-volume ratio."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([c for _, c, _ in rows], [w.real for _, _, w in rows], marker="o", markersize=3)
    ax.set_xscale("log")
    ax.set_xlabel("CVR r₁ / (r₁³ − r₂³)")
    ax.set_ylabel("Re ω")
    ax.set_title("Blueshift with CVR")
    return _save(fig, path)
