"""
Invariant suite run by the `selftest` command.

Every check is deterministic (fixed random seeds) and returns a CheckResult; the
report is printed as JSON and the command exits with 4 if any check fails.
"""

import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from src.cli.commands import TABLE1, TABLE1_COMPONENT_TOL
from src.resonance.asymptotics import (
    hybridization_check,
    omega_general_single,
    omega_shell,
    omega_solid,
)
from src.resonance.dispersion import DispersionMatrix, assemble, scaled_det
from src.resonance.medium import (
    LayeredGeometry,
    geometry_equidistant,
    medium_from_delta,
)
from src.resonance.modes import interface_jumps, mode_profile, resonator_mass
from src.resonance.rootfind import find_subwavelength_roots
from src.resonance.specfun import (
    SERIES_SWITCH_RADIUS,
    sph_bessel_j,
    sph_bessel_j_prime,
    sph_hankel1,
    sph_hankel1_prime,
)

logger = logging.getLogger(__name__)

EXIT_SELFTEST_FAILED = 4
SEED = 20240611

WRONSKIAN_ORDERS = range(0, 9)
WRONSKIAN_MODULI = np.geomspace(1e-3, 50.0, 25)
WRONSKIAN_PHASES = (0.0, -0.1, 0.1)

Assembler = Callable[..., DispersionMatrix]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __post_init__(self) -> None:
        # numpy comparisons give np.bool_, which json cannot encode
        object.__setattr__(self, "passed", bool(self.passed))


def leibniz_det(matrix: np.ndarray) -> complex:
    """Determinant as the signed sum over all permutations."""
    size = matrix.shape[0]
    total = 0j
    for perm in itertools.permutations(range(size)):
        inversions = sum(1 for i in range(size) for j in range(i + 1, size) if perm[i] > perm[j])
        term = complex(np.prod([matrix[i, perm[i]] for i in range(size)]))
        total += -term if inversions % 2 else term
    return total


def check_wronskian() -> CheckResult:
    worst = 0.0
    for n in WRONSKIAN_ORDERS:
        for modulus in WRONSKIAN_MODULI:
            for phase in WRONSKIAN_PHASES:
                z = modulus * complex(math.cos(phase), math.sin(phase))
                w = sph_bessel_j(n, z) * sph_hankel1_prime(n, z) - sph_bessel_j_prime(
                    n, z
                ) * sph_hankel1(n, z)
                expected = 1j / z**2
                worst = max(worst, abs(w - expected) / abs(expected))
    return CheckResult("wronskian", worst <= 1e-11, f"max relative error {worst:.3e}")


def check_series_switch() -> CheckResult:
    below = SERIES_SWITCH_RADIUS * (1.0 - 1e-12)
    above = SERIES_SWITCH_RADIUS * (1.0 + 1e-12)
    worst = 0.0
    for phase in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False):
        unit = complex(math.cos(phase), math.sin(phase))
        a, b = sph_bessel_j(0, below * unit), sph_bessel_j(0, above * unit)
        worst = max(worst, abs(a - b) / abs(b))
    return CheckResult("series_switch", worst <= 1e-13, f"max relative jump {worst:.3e}")


def check_conjugation_symmetry(assembler: Assembler = assemble) -> CheckResult:
    """det A(-conj(w)) = (-1)^N conj(det A(w)) for N = 1..4."""
    rng = np.random.default_rng(SEED)
    medium = medium_from_delta(1e-3)
    worst = 0.0
    for n_layers in range(1, 5):
        geom = geometry_equidistant(n_layers)
        for _ in range(10):
            omega = complex(rng.uniform(0.005, 0.2), -rng.uniform(0.0, 0.01))
            value = scaled_det(assembler(geom, medium, omega)).value
            mirror = scaled_det(assembler(geom, medium, -omega.conjugate())).value
            expected = (-1) ** n_layers * value.conjugate()
            worst = max(worst, abs(mirror - expected) / abs(value))
    return CheckResult("conjugation_symmetry", worst <= 1e-10, f"max relative error {worst:.3e}")


def check_determinant_oracle() -> CheckResult:
    rng = np.random.default_rng(SEED)
    worst_random = 0.0
    for size in (2, 4, 6):
        for _ in range(20):
            m = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
            exact = leibniz_det(m)
            worst_random = max(worst_random, abs(scaled_det(m).value - exact) / abs(exact))

    medium = medium_from_delta(1e-3)
    worst_dispersion = 0.0
    for n_layers in (1, 2, 3):
        geom = geometry_equidistant(n_layers)
        for _ in range(20):
            omega = complex(rng.uniform(0.005, 0.2), -rng.uniform(0.0, 0.01))
            matrix = assemble(geom, medium, omega).entries
            exact = leibniz_det(matrix)
            worst_dispersion = max(
                worst_dispersion, abs(scaled_det(matrix).value - exact) / abs(exact)
            )
    passed = worst_random <= 1e-12 and worst_dispersion <= 1e-9
    return CheckResult(
        "determinant_oracle",
        passed,
        f"random {worst_random:.3e}, dispersion {worst_dispersion:.3e}",
    )


def check_limits() -> CheckResult:
    r1, delta = 2.0, 1e-4
    solid = omega_solid(r1, 1.0, 1.0, delta).omega
    shell = omega_shell(r1, 1e-6 * r1, 1.0, 1.0, delta).omega
    ball = omega_general_single(4 * math.pi * r1, 4 * math.pi * r1**3 / 3, 1.0, 1.0, delta).omega
    errors = (abs(shell - solid) / abs(solid), abs(ball - solid) / abs(solid))
    return CheckResult(
        "shell_solid_limits",
        errors[0] <= 1e-10 and errors[1] <= 1e-14,
        f"shell {errors[0]:.3e}, capacity form {errors[1]:.3e}",
    )


def check_hybridization() -> CheckResult:
    rng = np.random.default_rng(SEED)
    medium = medium_from_delta(1e-4)
    tested = failures = 0
    while tested < 100:
        radii = sorted(rng.uniform(0.1, 10.0, size=4), reverse=True)
        if len(set(radii)) < 4:
            continue
        report = hybridization_check(*radii, medium)
        if not report.precondition_met:
            continue
        tested += 1
        failures += not report.ordering_holds
    return CheckResult("hybridization_ordering", failures == 0, f"{failures} of {tested} failed")


def check_table1_roots() -> CheckResult:
    row = TABLE1[0]
    geom = LayeredGeometry(radii=(4.0, 3.0, 2.0, 1.0))
    roots = find_subwavelength_roots(geom, medium_from_delta(row.delta))
    got = [r.omega for r in roots]
    if len(got) != 2:
        return CheckResult("table1_roots", False, f"found {len(got)} roots")
    worst = max(
        max(abs(g.real - w.real), abs(g.imag - w.imag)) for g, w in zip(got, row.computed)
    )
    return CheckResult(
        "table1_roots", worst <= TABLE1_COMPONENT_TOL, f"max component error {worst:.3e}"
    )


def check_root_counts() -> CheckResult:
    counts: dict[str, int] = {}
    passed = True
    for delta in (1e-3, 1e-4):
        medium = medium_from_delta(delta)
        for n_layers in range(1, 9):
            roots = find_subwavelength_roots(geometry_equidistant(n_layers), medium)
            counts[f"N={n_layers} delta={delta:g}"] = len(roots)
            passed = passed and len(roots) == (n_layers + 1) // 2
    return CheckResult("root_counts", passed, f"roots: {counts}")


def check_mode_integrity() -> CheckResult:
    medium = medium_from_delta(1e-3)
    geom = geometry_equidistant(3)
    worst_jump, worst_mass = 0.0, 0.0
    for root in find_subwavelength_roots(geom, medium):
        profile = mode_profile(geom, medium, root.omega)
        jumps = interface_jumps(profile)
        worst_jump = max(worst_jump, *(max(j.value_jump, j.flux_jump) for j in jumps))
        worst_mass = max(worst_mass, abs(resonator_mass(profile) - 1.0))
    return CheckResult(
        "mode_integrity",
        worst_jump <= 1e-8 and worst_mass <= 1e-8,
        f"max jump {worst_jump:.3e}, mass error {worst_mass:.3e}",
    )


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_wronskian,
    check_series_switch,
    check_conjugation_symmetry,
    check_determinant_oracle,
    check_limits,
    check_hybridization,
    check_table1_roots,
    check_root_counts,
    check_mode_integrity,
)


def run_selftest(out_dir: Optional[Path] = None) -> tuple[dict, int]:
    """
    Run every check.

    Args:
        out_dir: If given, the report is also written to out_dir/selftest.json.

    Returns:
        Tuple of (report, exit code).
    """
    results = []
    for check in CHECKS:
        try:
            result = check()
        except Exception as e:
            logger.exception("Check %s raised", check.__name__)
            result = CheckResult(check.__name__.removeprefix("check_"), False, f"raised {e!r}")
        logger.info("%s: %s (%s)", result.name, "pass" if result.passed else "FAIL", result.detail)
        results.append(result)

    failed = [r.name for r in results if not r.passed]
    report = {"passed": not failed, "failed": failed, "checks": [asdict(r) for r in results]}
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "selftest.json"
        path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return report, EXIT_SELFTEST_FAILED if failed else 0
