"""
Characteristic values of A_N(omega, delta) in the subwavelength window.

The search scans log2|f| on a logarithmic grid along the positive real axis,
seeds Muller's method at every dip (plus the closed-form frequencies for
N <= 4), and deflates each accepted root together with its mirror -conj(omega)
before polishing the next seed. When dips yield fewer than floor((N + 1) / 2)
roots, a geometric ladder of seeds sweeps the window with all accepted roots
deflated. Roots are returned in ascending real part.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy.ndimage import uniform_filter1d
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_none

from src.resonance.dispersion import PoleError, ScaledDeterminant, dispersion_fn
from src.resonance.medium import LayeredGeometry, MediumSpec, geometry_equidistant
from src.utils.config import ConfigurationError

logger = logging.getLogger(__name__)

Evaluation = Union[ScaledDeterminant, complex]
DispersionCallable = Callable[[complex], Evaluation]

# Grid starts this fraction of omega_max above zero.
GRID_FLOOR = 1e-3
# Second-difference strides (grid cells) used to detect dips of different widths.
DIP_STRIDES = (1, 4, 16, 64)
# Minimum curvature of log2|f| counted as a dip.
DIP_THRESHOLD = 0.5
# Running-mean window (grid cells) that detrends log2|f| against log omega.
DETREND_WINDOW = 1025
# Depth below the running mean counted as a dip.
DIP_DEPTH = 1.0
# Ratio between successive rungs of the fallback seed ladder.
LADDER_RATIO = 1.05
# Cap on |Im| / Re of ladder seeds.
LADDER_DAMPING = 1e-2
# Relative spread of the three Muller seeds around a dip.
SEED_SPREAD = 5e-3
# Relative step below which a non-improving iteration counts as stagnated.
NOISE_FLOOR = 1e-7
STAGNATION_LIMIT = 3
POLE_RESTARTS = 2


class ConvergenceError(RuntimeError):
    """Raised when Muller's iteration fails to converge or leaves the search window."""

    pass


class RootShortfallError(RuntimeError):
    """Raised when fewer roots than resonators are found; carries the partial result."""

    def __init__(self, found: list["ResonanceRoot"], expected: int):
        self.found = found
        self.expected = expected
        listing = ", ".join(f"{r.omega:.7g}" for r in found) or "none"
        super().__init__(f"found {len(found)} of {expected} subwavelength roots: {listing}")


@dataclass(frozen=True)
class SearchConfig:
    """Root-search settings; None fields are derived from the structure by resolved()."""

    omega_max: Optional[float] = None
    grid_points: int = 4096
    tol_abs: float = 1e-12
    tol_rel: float = 1e-10
    max_iter: int = 100
    imag_seed_offset: Optional[float] = None
    residual_tol: float = 1e-6

    def __post_init__(self) -> None:
        """Validate search settings."""
        if self.omega_max is not None and not self.omega_max > 0:
            raise ConfigurationError("omega_max must be positive")
        if self.grid_points < 64:
            raise ConfigurationError("grid_points must be at least 64")
        for name in ("tol_abs", "tol_rel", "residual_tol"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")
        if self.imag_seed_offset is not None and not self.imag_seed_offset > 0:
            raise ConfigurationError("imag_seed_offset must be positive")

    def resolved(self, geom: LayeredGeometry, medium: MediumSpec) -> "SearchConfig":
        """Fill omega_max and imag_seed_offset from the closed-form envelope."""
        omega_max = self.omega_max or default_omega_max(geom, medium)
        offset = self.imag_seed_offset or medium.delta
        return replace(self, omega_max=omega_max, imag_seed_offset=offset)


@dataclass(frozen=True)
class ResonanceRoot:
    """A converged characteristic value with its convergence metadata."""

    omega: complex
    residual: float
    iterations: int
    seed: complex

    @property
    def mirror(self) -> complex:
        """The partner root -conj(omega), symmetric about the imaginary axis."""
        return -self.omega.conjugate()


def default_omega_max(geom: LayeredGeometry, medium: MediumSpec) -> float:
    """Safety-factored envelope of the leading-order closed-form frequencies."""
    r1 = geom.radii[0]
    r2 = geom.radii[1] if geom.n_layers >= 2 else 0.0
    return (
        8.0
        * medium.v_r
        * math.sqrt(3.0 * medium.delta)
        * math.sqrt(r1 / (r1**3 - r2**3))
        * math.sqrt(geom.n_resonators)
    )


def _as_scaled(value: Evaluation) -> ScaledDeterminant:
    if isinstance(value, ScaledDeterminant):
        return value
    return ScaledDeterminant.from_parts(complex(value), 0)


def _deflated(
    f: DispersionCallable, omega: complex, roots: Sequence[complex]
) -> ScaledDeterminant:
    value = _as_scaled(f(omega))
    if not roots:
        return value
    divisor = 1.0 + 0j
    for root in roots:
        divisor *= (omega - root) * (omega + root.conjugate())
    if divisor == 0:
        raise PoleError(f"iterate {omega} coincides with a deflated root")
    return value.scaled(1.0 / divisor)


def _muller_step(xs: Sequence[complex], fs: Sequence[ScaledDeterminant]) -> complex:
    """Root of the interpolating quadratic closest to the newest iterate."""
    common = max(v.exponent for v in fs if not v.is_zero)
    f0, f1, f2 = (v.relative_to(common) for v in fs)
    x0, x1, x2 = xs
    h1, h2 = x1 - x0, x2 - x1
    d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
    a = (d2 - d1) / (h2 + h1)
    b = a * h2 + d2
    disc = np.sqrt(complex(b * b - 4.0 * a * f2))
    denominator = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
    if denominator == 0:
        # flat quadratic: nudge by the last step
        return x2 + h2
    return x2 - 2.0 * f2 / denominator


def _muller_once(
    f: DispersionCallable,
    seeds: Sequence[complex],
    cfg: SearchConfig,
    deflate: Sequence[complex],
) -> ResonanceRoot:
    xs = [complex(s) for s in seeds]
    fs = [_deflated(f, x, deflate) for x in xs]
    scale_log2 = max(v.log2_abs() for v in fs)
    best_x, best_log = xs[-1], fs[-1].log2_abs()
    stagnant = 0

    for iteration in range(1, cfg.max_iter + 1):
        if any(v.is_zero for v in fs):
            x = xs[[v.is_zero for v in fs].index(True)]
            return ResonanceRoot(omega=x, residual=0.0, iterations=iteration - 1, seed=seeds[-1])

        x_new = _muller_step(xs, fs)
        if not np.isfinite(x_new):
            raise ConvergenceError(f"Muller step produced a non-finite iterate from {seeds[-1]}")
        if cfg.omega_max is not None and abs(x_new) > 10.0 * cfg.omega_max:
            raise ConvergenceError(
                f"iterate {x_new:.6g} left the search window (|omega| > {10.0 * cfg.omega_max:.6g})"
            )
        f_new = _deflated(f, x_new, deflate)
        step = abs(x_new - xs[-1])
        logger.debug(
            "Muller %d: omega=%s |step|=%.3e log2|f|=%.3f",
            iteration,
            x_new,
            step,
            f_new.log2_abs(),
        )

        xs = [xs[1], xs[2], x_new]
        fs = [fs[1], fs[2], f_new]

        if f_new.log2_abs() < best_log:
            best_x, best_log, stagnant = x_new, f_new.log2_abs(), 0
        elif step <= NOISE_FLOOR * abs(x_new):
            stagnant += 1

        if step <= cfg.tol_abs + cfg.tol_rel * abs(x_new) or f_new.is_zero:
            residual = 2.0 ** (f_new.log2_abs() - scale_log2)
            return ResonanceRoot(
                omega=x_new, residual=residual, iterations=iteration, seed=seeds[-1]
            )
        if stagnant >= STAGNATION_LIMIT:
            logger.debug("Muller stagnated at the evaluation noise floor near %s", best_x)
            residual = 2.0 ** (best_log - scale_log2)
            return ResonanceRoot(
                omega=best_x, residual=residual, iterations=iteration, seed=seeds[-1]
            )

    raise ConvergenceError(f"Muller did not converge in {cfg.max_iter} iterations from {seeds[-1]}")


def _jittered(seeds: Sequence[complex], attempt: int) -> list[complex]:
    if attempt <= 1:
        return list(seeds)
    twist = complex(math.cos(0.1 * attempt), math.sin(0.1 * attempt))
    return [s * (1.0 + 1e-3 * attempt) * twist for s in seeds]


def muller(
    f: DispersionCallable,
    seeds: Sequence[complex],
    cfg: Optional[SearchConfig] = None,
    deflate: Sequence[complex] = (),
) -> ResonanceRoot:
    """
    Polish a root of f with Muller's method.

    Each step fits a quadratic through the last three (omega, f) pairs and moves to
    its root with the larger-magnitude denominator. Iteration stops when the step
    falls below tol_abs + tol_rel * |omega|, or when the iterate stops improving at
    the floating-point noise floor of f.

    Args:
        f: Function returning a ScaledDeterminant or a complex value.
        seeds: Three distinct starting points.
        cfg: Search settings (tolerances, iteration cap, window).
        deflate: Roots divided out of f together with their mirrors -conj(root).

    Returns:
        The converged root. Iterates that hit a pole restart from jittered seeds.

    Raises:
        ConvergenceError: On non-convergence or divergence out of the window.
    """
    cfg = cfg or SearchConfig()
    if len(seeds) != 3 or len({complex(s) for s in seeds}) != 3:
        raise ValueError("Muller's method needs three distinct seeds")

    root = None
    for attempt in Retrying(
        retry=retry_if_exception_type(PoleError),
        stop=stop_after_attempt(POLE_RESTARTS + 1),
        wait=wait_none(),
        reraise=True,
    ):
        with attempt:
            number = attempt.retry_state.attempt_number
            if number > 1:
                logger.warning("Muller iterate hit a pole, restarting with jittered seeds")
            root = _muller_once(f, _jittered(seeds, number), cfg, deflate)
    if root.residual > cfg.residual_tol:
        raise ConvergenceError(
            f"root {root.omega:.7g} has residual {root.residual:.3e} above {cfg.residual_tol:.1e}"
        )
    return root


def _dip_centers(grid: np.ndarray, log_abs: np.ndarray) -> list[float]:
    """
    Grid points where log2|f| dips.

    Collects local minima, curvature peaks at several widths, and points lying
    DIP_DEPTH below the running mean of log2|f|. The last test keeps broad dips
    that ride on a steep power-law trend.
    """
    indices: set[int] = set()
    exact = np.flatnonzero(np.isneginf(log_abs))
    indices.update(int(i) for i in exact)
    floor = np.nanmin(log_abs[np.isfinite(log_abs)]) - 64.0
    values = np.where(np.isneginf(log_abs), floor, log_abs)

    inner = values[1:-1]
    minima = (inner < values[:-2]) & (inner <= values[2:])
    indices.update(int(i) + 1 for i in np.flatnonzero(minima))

    for stride in DIP_STRIDES:
        if 2 * stride + 2 >= values.size:
            continue
        curvature = np.full(values.size, -np.inf)
        curvature[stride:-stride] = (
            values[: -2 * stride] - 2.0 * values[stride:-stride] + values[2 * stride :]
        )
        mid = curvature[1:-1]
        peaks = (mid > DIP_THRESHOLD) & (mid >= curvature[:-2]) & (mid > curvature[2:])
        indices.update(int(i) + 1 for i in np.flatnonzero(peaks))

    if values.size >= 2 * DETREND_WINDOW:
        # grid is uniform in log omega, so the running mean is the local linear fit
        half = DETREND_WINDOW // 2
        residual = np.zeros(values.size)
        trend = uniform_filter1d(values, size=DETREND_WINDOW)
        residual[half:-half] = values[half:-half] - trend[half:-half]
        mid = residual[1:-1]
        deep = (mid < -DIP_DEPTH) & (mid < residual[:-2]) & (mid <= residual[2:])
        indices.update(int(i) + 1 for i in np.flatnonzero(deep))

    merged: list[int] = []
    for i in sorted(indices):
        if merged and i - merged[-1] <= 2:
            if values[i] < values[merged[-1]]:
                merged[-1] = i
            continue
        merged.append(i)
    return [float(grid[i]) for i in merged]


def _seed_triple(center: complex) -> tuple[complex, complex, complex]:
    return (center * (1.0 - SEED_SPREAD), center * (1.0 + SEED_SPREAD), center)


def _closed_form_seeds(geom: LayeredGeometry, medium: MediumSpec) -> list[complex]:
    from src.resonance.asymptotics import NoClosedFormError, closed_form

    try:
        return [a.omega for a in closed_form(geom, medium)]
    except NoClosedFormError:
        return []


def _polish_seeds(
    f: DispersionCallable,
    seeds: Iterable[complex],
    cfg: SearchConfig,
    accepted: list[ResonanceRoot],
    spacing: float,
    limit: Optional[int] = None,
) -> None:
    """Run Muller from each seed, deflating and appending every new in-window root."""
    for seed in seeds:
        if limit is not None and len(accepted) >= limit:
            return
        near = [
            r
            for r in accepted
            if abs(seed.real - r.omega.real) <= 3.0 * spacing * seed.real + abs(r.omega.imag)
        ]
        if near:
            continue
        try:
            root = muller(f, _seed_triple(seed), cfg, deflate=[r.omega for r in accepted])
        except ConvergenceError as e:
            logger.debug("Seed %s discarded: %s", seed, e)
            continue

        omega = root.omega
        if not (0.0 < omega.real <= cfg.omega_max and omega.imag <= 0.0):
            logger.debug("Root %s outside the subwavelength window, discarded", omega)
            continue
        if any(abs(omega - r.omega) <= 10.0 * cfg.tol_abs for r in accepted):
            logger.warning("Merged duplicate root %s", omega)
            continue
        accepted.append(root)


def _sweep_ladder(
    f: DispersionCallable,
    cfg: SearchConfig,
    accepted: list[ResonanceRoot],
    lower: float,
    expected: int,
    spacing: float,
) -> None:
    """
    Seed Muller on a geometric ladder from lower to omega_max.

    Accepted roots stay deflated, so every rung either finds a new root or
    fails. The sweep stops once expected roots are accepted.
    """
    count = math.ceil(math.log(cfg.omega_max / lower) / math.log(LADDER_RATIO)) + 1
    rungs = np.geomspace(lower, cfg.omega_max, count)
    seeds = [complex(w, -min(cfg.imag_seed_offset, LADDER_DAMPING * w)) for w in rungs]
    _polish_seeds(f, seeds, cfg, accepted, spacing, limit=expected)


def _search_window(
    f: DispersionCallable,
    geom: LayeredGeometry,
    medium: MediumSpec,
    cfg: SearchConfig,
    use_closed_form: bool,
    expected: Optional[int] = None,
) -> list[ResonanceRoot]:
    grid = np.geomspace(cfg.omega_max * GRID_FLOOR, cfg.omega_max, cfg.grid_points)
    log_abs = np.array([_as_scaled(f(w)).log2_abs() for w in grid])
    spacing = grid[1] / grid[0] - 1.0

    seeds = [complex(c, -cfg.imag_seed_offset) for c in _dip_centers(grid, log_abs)]
    if use_closed_form:
        seeds.extend(_closed_form_seeds(geom, medium))
    seeds.sort(key=lambda s: (s.real, s.imag))
    logger.info("Scanned %d grid points up to %.6g, %d seeds", grid.size, cfg.omega_max, len(seeds))

    accepted: list[ResonanceRoot] = []
    _polish_seeds(f, seeds, cfg, accepted, spacing)

    while expected is not None and len(accepted) < expected:
        before = len(accepted)
        logger.info("Dip seeds gave %d of %d roots, sweeping a seed ladder", before, expected)
        _sweep_ladder(f, cfg, accepted, grid[0], expected, spacing)
        if len(accepted) == before:
            break

    return sorted(accepted, key=lambda r: (r.omega.real, r.omega.imag))


def find_subwavelength_roots(
    geom: LayeredGeometry,
    medium: MediumSpec,
    n: int = 0,
    cfg: Optional[SearchConfig] = None,
) -> list[ResonanceRoot]:
    """
    All characteristic values with positive real part in the subwavelength window.

    For n = 0 the structure has floor((N + 1) / 2) such roots. When the dip
    seeds find fewer, a deflated seed ladder sweeps the window; if roots are
    still missing, omega_max is doubled once and the search repeated.

    Args:
        geom: Layer radii.
        medium: Material description.
        n: Angular order.
        cfg: Search settings; unset fields are derived from the structure.

    Returns:
        Roots sorted by ascending real part.

    Raises:
        RootShortfallError: If fewer than N_r roots are found at n = 0.
    """
    cfg = (cfg or SearchConfig()).resolved(geom, medium)
    f = dispersion_fn(geom, medium, n)
    expected = geom.n_resonators if n == 0 else None
    use_closed_form = n == 0 and geom.n_layers <= 4

    roots = _search_window(f, geom, medium, cfg, use_closed_form, expected)
    if expected is not None and len(roots) < expected:
        logger.warning(
            "Found %d of %d roots below %.6g, doubling the window",
            len(roots),
            expected,
            cfg.omega_max,
        )
        cfg = replace(cfg, omega_max=2.0 * cfg.omega_max)
        roots = _search_window(f, geom, medium, cfg, use_closed_form, expected)

    if expected is not None and len(roots) < expected:
        raise RootShortfallError(roots, expected)
    logger.info("Found %d roots for N=%d, n=%d", len(roots), geom.n_layers, n)
    return roots


def verify_root(
    f: DispersionCallable,
    omega: complex,
    tolerance: float = 1e-6,
) -> tuple[bool, float]:
    """
    Check that |f(omega)| is small against the local scale of f.

    The local scale is the median |f| over eight points on a circle of radius
    |omega| * 1e-2 around omega.

    Returns:
        Tuple (passed, residual) with residual = |f(omega)| / local scale.
    """
    omega = complex(omega)
    if omega == 0:
        raise PoleError("cannot verify a root at omega = 0")
    radius = abs(omega) * 1e-2
    ring = [
        _as_scaled(f(omega + radius * complex(math.cos(t), math.sin(t)))).log2_abs()
        for t in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)
    ]
    center = _as_scaled(f(omega)).log2_abs()
    residual = 2.0 ** (center - float(np.median(ring)))
    return residual <= tolerance, residual


def mode_splitting(
    n_max: int,
    medium: MediumSpec,
    cfg: Optional[SearchConfig] = None,
) -> dict[int, list[ResonanceRoot]]:
    """Root lists for the equidistant structures N = 1..n_max."""
    spectra: dict[int, list[ResonanceRoot]] = {}
    for n_layers in range(1, n_max + 1):
        spectra[n_layers] = find_subwavelength_roots(
            geometry_equidistant(n_layers), medium, 0, cfg
        )
    return spectra


def most_damped(roots: Iterable[ResonanceRoot]) -> Optional[int]:
    """Index of the root with the largest |Im omega|."""
    roots = list(roots)
    if not roots:
        return None
    return max(range(len(roots)), key=lambda i: abs(roots[i].omega.imag))
