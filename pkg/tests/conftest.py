"""
Pytest configuration and shared fixtures for the nested-resonator tests.

This module provides:
- Cached root lists for the four-layer reference structure
- Run-configuration fixtures backed by temporary directories
"""

import json
from pathlib import Path
from typing import Any, Callable, Generator

import pytest

from src.config.run_loader import RunConfig, load_run_config
from src.resonance.medium import geometry_equidistant, geometry_from_radii, medium_from_delta
from src.resonance.rootfind import ResonanceRoot, find_subwavelength_roots

# =============================================================================
# REFERENCE DATA
# =============================================================================

FOUR_LAYER_RADII = (4.0, 3.0, 2.0, 1.0)

# Four-layer roots at delta = 1/100 and 1/6000, 7 decimals.
FOUR_LAYER_ROOTS = {
    1.0 / 100.0: (0.0513551 - 0.0052161j, 0.1754137 - 0.0012548j),
    1.0 / 6000.0: (0.0066797 - 0.0000875j, 0.0227810 - 0.0000206j),
}


def assert_close_components(got: complex, want: complex, tol: float = 1e-7) -> None:
    """Assert real and imaginary parts agree to an absolute tolerance."""
    assert abs(got.real - want.real) <= tol, f"re: {got.real!r} vs {want.real!r}"
    assert abs(got.imag - want.imag) <= tol, f"im: {got.imag!r} vs {want.imag!r}"


# =============================================================================
# ROOT FIXTURES
# =============================================================================


@pytest.fixture(scope="session")
def four_layer_roots() -> dict[float, list[ResonanceRoot]]:
    """Roots of the four-layer structure, computed once per session."""
    geom = geometry_from_radii(FOUR_LAYER_RADII)
    return {
        delta: find_subwavelength_roots(geom, medium_from_delta(delta))
        for delta in FOUR_LAYER_ROOTS
    }


@pytest.fixture(scope="session")
def single_ball_root() -> ResonanceRoot:
    """The one root of the unit ball at delta = 1e-4."""
    roots = find_subwavelength_roots(geometry_equidistant(1), medium_from_delta(1e-4))
    assert len(roots) == 1
    return roots[0]


# =============================================================================
# RUN CONFIGURATION FIXTURES
# =============================================================================


@pytest.fixture
def write_run_config(tmp_path: Path) -> Callable[[dict[str, Any]], Path]:
    """
    Write a run configuration into the temporary directory.

    Returns:
        Function taking the document and returning its path.
    """

    def _write(document: dict[str, Any], name: str = "run.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def run_config(tmp_path: Path) -> Generator[Callable[..., RunConfig], None, None]:
    """Factory resolving a run configuration that writes into tmp_path/out."""

    def _make(document: dict[str, Any], **overrides: Any) -> RunConfig:
        path = tmp_path / "run.json"
        output = {**document.get("output", {}), "directory": str(tmp_path / "out")}
        document = {**document, "output": output}
        path.write_text(json.dumps(document), encoding="utf-8")
        return load_run_config(path, overrides)

    yield _make


@pytest.fixture
def clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Remove RESONATOR_* variables so environment defaults do not leak into tests."""
    for name in ("RESONATOR_LOG", "RESONATOR_OMEGA_MAX", "RESONATOR_GRID", "RESONATOR_TOL"):
        monkeypatch.delenv(name, raising=False)
