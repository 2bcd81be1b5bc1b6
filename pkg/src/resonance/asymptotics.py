"""
Two-term closed-form subwavelength frequencies for N = 1..4 layers.

Each formula has the shape omega = a_1 sqrt(delta) + a_2 delta with a_1 > 0 real and
a_2 purely imaginary (non-positive imaginary part). The dual-resonator formulas
(N = 3, 4) are evaluated in their factored form: the combination Xi and the
discriminant Xi**2 - 4 * (...) are never re-expanded.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from src.resonance.medium import LayeredGeometry, MediumSpec

logger = logging.getLogger(__name__)


class AsymptoticInputError(ValueError):
    """Raised for non-positive parameters or radii that are not strictly decreasing."""

    pass


class NoClosedFormError(ValueError):
    """Raised when no closed form is implemented for the requested layer count."""

    pass


@dataclass(frozen=True)
class AsymptoticFrequency:
    """Two-term frequency a_1 sqrt(delta) + a_2 delta."""

    omega: complex
    leading: float  # a_1
    damping: complex  # a_2, purely imaginary
    branch: int = 1


def _positive(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise AsymptoticInputError(f"{name} must be positive and finite, got {value!r}")


def _decreasing(*radii: float) -> None:
    _positive(**{f"r{i}": r for i, r in enumerate(radii, start=1)})
    for i, (outer, inner) in enumerate(zip(radii, radii[1:]), start=1):
        if inner >= outer:
            raise AsymptoticInputError(
                f"radii must be strictly decreasing, got r{i}={outer!r} <= r{i + 1}={inner!r}"
            )


def _sqrt_positive(value: float, what: str) -> float:
    if not value > 0:
        raise ArithmeticError(f"{what} must be positive, got {value!r}")
    return math.sqrt(value)


def _frequency(
    leading: float, damping: float, delta: float, branch: int = 1
) -> AsymptoticFrequency:
    """Assemble a_1 sqrt(delta) - i * damping * delta."""
    a2 = complex(0.0, -damping)
    return AsymptoticFrequency(
        omega=leading * math.sqrt(delta) + a2 * delta,
        leading=leading,
        damping=a2,
        branch=branch,
    )


def omega_solid(r1: float, v_r: float, tau: float, delta: float) -> AsymptoticFrequency:
    """Single solid ball (Minnaert-type) resonance."""
    _positive(r1=r1, v_r=v_r, tau=tau, delta=delta)
    leading = math.sqrt(3.0) * v_r / r1
    damping = 3.0 * v_r / (2.0 * tau * r1)
    return _frequency(leading, damping, delta)


def omega_shell(r1: float, r2: float, v_r: float, tau: float, delta: float) -> AsymptoticFrequency:
    """Single resonant shell r2 < |x| < r1."""
    _decreasing(r1, r2)
    _positive(v_r=v_r, tau=tau, delta=delta)
    volume = r1**3 - r2**3
    leading = math.sqrt(3.0 * r1) * v_r / math.sqrt(volume)
    damping = 3.0 * r1**2 * v_r / (2.0 * tau * volume)
    return _frequency(leading, damping, delta)


def omega_dual3(
    r1: float, r2: float, r3: float, v_r: float, tau: float, delta: float
) -> tuple[AsymptoticFrequency, AsymptoticFrequency]:
    """
    Shell r2 < |x| < r1 around a solid ball of radius r3 (three layers).

    Returns:
        (branch 1, branch 2), branch 1 having the smaller leading coefficient.
    """
    _decreasing(r1, r2, r3)
    _positive(v_r=v_r, tau=tau, delta=delta)
    outer = r1**3 - r2**3
    xi = r2 * (r1**3 - r2**3 + r3**3) + r1 * r3**2 * (r2 - r3)
    product = (r2 - r3) * outer * r3**2
    disc = xi**2 - 4.0 * r1 * r2 * r3**2 * (r2 - r3) * (r1**3 - r2**3)
    root = _sqrt_positive(disc, "discriminant")
    shell = 6.0 * r2 * outer
    return _branches(xi, root, product, shell, outer, r1, v_r, tau, delta)


def omega_dual4(
    r1: float, r2: float, r3: float, r4: float, v_r: float, tau: float, delta: float
) -> tuple[AsymptoticFrequency, AsymptoticFrequency]:
    """
    Two nested shells r2 < |x| < r1 and r4 < |x| < r3 (four layers).

    Returns:
        (branch 1, branch 2), branch 1 having the smaller leading coefficient.
    """
    _decreasing(r1, r2, r3, r4)
    _positive(v_r=v_r, tau=tau, delta=delta)
    outer = r1**3 - r2**3
    xi = r2 * r3 * (r1**3 - r2**3 + r3**3 - r4**3) + r1 * (r2 - r3) * (r3**3 - r4**3)
    product = (r1**3 - r2**3) * (r3**3 - r4**3) * (r2 - r3)
    disc = xi**2 - 4.0 * r1 * r2 * r3 * (r1**3 - r2**3) * (r3**3 - r4**3) * (r2 - r3)
    root = _sqrt_positive(disc, "discriminant")
    shell = 6.0 * r2 * r3 * outer
    return _branches(xi, root, product, shell, outer, r1, v_r, tau, delta)


def _branches(
    xi: float,
    root: float,
    product: float,
    shell: float,
    outer: float,
    r1: float,
    v_r: float,
    tau: float,
    delta: float,
) -> tuple[AsymptoticFrequency, AsymptoticFrequency]:
    """Lower (-root) and upper (+root) branches of a dual-resonator formula."""
    scale = r1**2 * v_r / (4.0 * tau * outer * root)
    lower = _frequency(
        v_r * _sqrt_positive((3.0 * xi - 3.0 * root) / (2.0 * product), "branch 1 a_1**2"),
        (3.0 * (-xi + root) + shell) * scale,
        delta,
        branch=1,
    )
    upper = _frequency(
        v_r * _sqrt_positive((3.0 * xi + 3.0 * root) / (2.0 * product), "branch 2 a_1**2"),
        (3.0 * (xi + root) - shell) * scale,
        delta,
        branch=2,
    )
    return lower, upper


def omega_general_single(
    cap: float, vol: float, v_r: float, tau: float, delta: float
) -> AsymptoticFrequency:
    """Single resonator from the capacity of its outer surface and its volume."""
    _positive(cap=cap, vol=vol, v_r=v_r, tau=tau, delta=delta)
    leading = v_r * math.sqrt(cap / vol)
    damping = cap**2 * v_r / (8.0 * math.pi * tau * vol)
    return _frequency(leading, damping, delta)


def cvr(r_outer: float, r_inner: float) -> float:
    """Capacity-to-volume ratio r_outer / (r_outer**3 - r_inner**3) of a shell."""
    _positive(r_outer=r_outer)
    if not (math.isfinite(r_inner) and r_inner >= 0):
        raise AsymptoticInputError(f"inner radius must be non-negative, got {r_inner!r}")
    if r_inner >= r_outer:
        raise AsymptoticInputError(
            f"inner radius {r_inner!r} must be smaller than outer radius {r_outer!r}"
        )
    return r_outer / (r_outer**3 - r_inner**3)


@dataclass(frozen=True)
class HybridizationReport:
    """Real-part ordering of the four-layer pair against the two isolated shells."""

    precondition_met: bool
    cvr_outer: float
    cvr_inner: float
    lower: Optional[AsymptoticFrequency] = None
    outer_shell: Optional[AsymptoticFrequency] = None
    inner_shell: Optional[AsymptoticFrequency] = None
    upper: Optional[AsymptoticFrequency] = None
    ordering_holds: Optional[bool] = None

    @property
    def message(self) -> str:
        if not self.precondition_met:
            return (
                f"CVR precondition not met: {self.cvr_outer:.6g} > {self.cvr_inner:.6g}; "
                "no ordering claim"
            )
        verdict = "holds" if self.ordering_holds else "FAILS"
        return (
            f"Re w41 = {self.lower.omega.real:.7g} < Re wOS = {self.outer_shell.omega.real:.7g}"
            f" <= Re wIS = {self.inner_shell.omega.real:.7g} < Re w42 = "
            f"{self.upper.omega.real:.7g}: {verdict}"
        )


def hybridization_check(
    r1: float, r2: float, r3: float, r4: float, medium: MediumSpec
) -> HybridizationReport:
    """
    Compare the four-layer branches with the outer and inner shells taken alone.

    When CVR(r1, r2) <= CVR(r3, r4) the pair is expected to bracket both shell
    frequencies: Re w41 < Re wOS <= Re wIS < Re w42.
    """
    _decreasing(r1, r2, r3, r4)
    cvr_outer, cvr_inner = cvr(r1, r2), cvr(r3, r4)
    if cvr_outer > cvr_inner:
        logger.info("Hybridization precondition violated: CVR %.6g > %.6g", cvr_outer, cvr_inner)
        return HybridizationReport(False, cvr_outer, cvr_inner)

    args = (medium.v_r, medium.tau, medium.delta)
    outer_shell = omega_shell(r1, r2, *args)
    inner_shell = omega_shell(r3, r4, *args)
    lower, upper = omega_dual4(r1, r2, r3, r4, *args)
    holds = (
        lower.omega.real < outer_shell.omega.real
        and outer_shell.omega.real <= inner_shell.omega.real
        and inner_shell.omega.real < upper.omega.real
    )
    return HybridizationReport(
        True, cvr_outer, cvr_inner, lower, outer_shell, inner_shell, upper, holds
    )


def cvr_sweep(
    r1: float, inner_radii: Sequence[float], medium: MediumSpec
) -> list[tuple[float, float, AsymptoticFrequency]]:
    """Shell frequency at fixed outer radius for each inner radius, with its CVR."""
    rows = []
    for r2 in sorted(inner_radii):
        rows.append(
            (float(r2), cvr(r1, r2), omega_shell(r1, r2, medium.v_r, medium.tau, medium.delta))
        )
    return rows


def closed_form(geom: LayeredGeometry, medium: MediumSpec) -> list[AsymptoticFrequency]:
    """
    Closed-form frequencies of a structure, in ascending real part.

    Raises:
        NoClosedFormError: For five or more layers.
    """
    radii = geom.radii
    args = (medium.v_r, medium.tau, medium.delta)
    if geom.n_layers == 1:
        return [omega_solid(radii[0], *args)]
    if geom.n_layers == 2:
        return [omega_shell(*radii, *args)]
    if geom.n_layers == 3:
        return list(omega_dual3(*radii, *args))
    if geom.n_layers == 4:
        return list(omega_dual4(*radii, *args))
    raise NoClosedFormError(
        f"no closed form implemented for N = {geom.n_layers} layers (available for N <= 4)"
    )
