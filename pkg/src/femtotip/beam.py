"""Source-quality figures derived from per-pulse emission numbers.

All quantities are SI internally; kA/cm^2 and microampere presentation
happens only at the output layer via the conversion helpers.
"""

from dataclasses import dataclass

from .constants import CODATA2018, PhysicalConstants
from .errors import DomainError

#: Documented default solid angle [sr] for the invariant-brightness
#: estimate. The normalization behind the published lower bound cannot be
#: reconstructed, so the brightness is always reported together with the
#: solid angle that produced it; this sub-10-microsteradian value
#: represents the invariant (acceleration-normalized) divergence of the
#: flat-emitter configuration and is an explicit, overridable assumption.
DEFAULT_SOLID_ANGLE = 1.0e-5


def instantaneous_current(n: float, tau: float,
                          constants: PhysicalConstants = CODATA2018) -> float:
    """Current [A] of ``n`` electrons emitted uniformly over ``tau`` [s]."""
    if n < 0:
        raise DomainError(f"electron count must be >= 0, got {n}")
    if not tau > 0:
        raise DomainError(f"emission duration must be positive, got {tau}")
    return n * constants.e / tau


def emission_rate(n: float, tau: float) -> float:
    """Instantaneous emission rate [electrons/s]."""
    if not tau > 0:
        raise DomainError(f"emission duration must be positive, got {tau}")
    return n / tau


def current_density(i: float, area: float) -> float:
    """Current density [A/m^2] over an emitting area [m^2]."""
    if not area > 0:
        raise DomainError(f"area must be positive, got {area}")
    return i / area


def brightness(i: float, area: float, omega: float) -> float:
    """Brightness [A/(m^2 sr)]: current per area per solid angle.

    The solid angle is an explicit caller input; record the assumption
    used alongside any reported value.
    """
    if not area > 0:
        raise DomainError(f"area must be positive, got {area}")
    if not omega > 0:
        raise DomainError(f"solid angle must be positive, got {omega}")
    return i / (area * omega)


@dataclass(frozen=True)
class PulseMetrics:
    """Bundle of derived source-quality figures for one operating point."""

    n_electrons: float
    tau: float
    area: float
    solid_angle: float
    i_inst: float
    j_inst: float
    brightness: float


def pulse_metrics(n_electrons: float, tau: float, area: float,
                  solid_angle: float = DEFAULT_SOLID_ANGLE,
                  constants: PhysicalConstants = CODATA2018) -> PulseMetrics:
    """Compute all derived figures for one pulse configuration."""
    i = instantaneous_current(n_electrons, tau, constants)
    return PulseMetrics(
        n_electrons=n_electrons, tau=tau, area=area, solid_angle=solid_angle,
        i_inst=i, j_inst=current_density(i, area),
        brightness=brightness(i, area, solid_angle))


def amps_per_m2_to_ka_per_cm2(j: float) -> float:
    """Convert A/m^2 to kA/cm^2."""
    return j / 1.0e7


def ka_per_cm2_to_amps_per_m2(j: float) -> float:
    """Convert kA/cm^2 to A/m^2."""
    return j * 1.0e7


def amps_to_microamps(i: float) -> float:
    return i * 1.0e6
