"""Laser-source parameters and the optical field they produce at the tip.

Pulse energetics, dispersion stretching by in-vacuum focusing optics,
focused peak intensity, the equivalent free-space field, lightning-rod
enhancement, and the inverse inference of the enhancement factor from a
fitted tip field.

Conventions (documented because measured intensities rarely state theirs):

* ``peak_intensity`` is the on-axis peak of a Gaussian beam,
  I0 = 2 P_peak / (pi w0^2), with the temporal peak power
  P_peak = s E_pulse / tau_fwhm at the in-focus duration
  (s = 0.94 for a gaussian envelope, 1 for a flat-top).
* ``field_from_intensity`` returns the plane-wave peak field
  E = sqrt(2 I / (eps0 c)).
* The free-space reference field used by the enhancement pair defaults
  to the RMS normalization E = sqrt(I / (eps0 c)); the plane-wave peak
  is available via ``convention="peak"``. The RMS default is what keeps
  field-fit comparisons consistent with cycle-averaged current
  measurements.
"""

import math
from dataclasses import dataclass

from .constants import CODATA2018, PhysicalConstants
from .errors import DomainError

#: Peak-power form factor of a gaussian pulse, P_peak = s E / tau_fwhm.
GAUSSIAN_PEAK_POWER_FACTOR = 0.94

FOUR_LN2 = 4.0 * math.log(2.0)

TEMPORAL_SHAPES = ("gaussian", "flat-top")

#: Free-space field conventions for the enhancement pair.
FIELD_CONVENTIONS = ("rms", "peak")
DEFAULT_FIELD_CONVENTION = "rms"


def matched_gdd(tau_in: float, tau_out: float) -> float:
    """Group-delay dispersion [s^2] that stretches ``tau_in`` to ``tau_out``.

    Inverse of :func:`stretched_duration` for a transform-limited
    gaussian input (FWHM durations).
    """
    if not tau_in > 0:
        raise DomainError(f"input duration must be positive, got {tau_in}")
    if tau_out < tau_in:
        raise DomainError("stretched duration cannot be below the input duration")
    return tau_in**2 / FOUR_LN2 * math.sqrt((tau_out / tau_in) ** 2 - 1.0)


#: Default focusing-optics dispersion: stretches a 48 fs pulse to 65 fs.
DEFAULT_GDD = matched_gdd(48e-15, 65e-15)


@dataclass(frozen=True)
class LaserSpec:
    """Pulsed-laser source parameters.

    wavelength [m], avg_power [W], rep_rate [Hz], pulse_fwhm [s]
    (transform-limited FWHM before the focusing optics), spot_radius [m]
    (1/e^2 intensity radius in the focus), gdd [s^2] (dispersion of the
    focusing path; sign-insensitive), temporal_shape, enhancement
    (lightning-rod factor, >= 1) and theta [rad] (polarization angle to
    the tip axis).
    """

    wavelength: float = 810e-9
    avg_power: float = 0.260
    rep_rate: float = 1.0e9
    pulse_fwhm: float = 48e-15
    spot_radius: float = 3.0e-6
    gdd: float = DEFAULT_GDD
    temporal_shape: str = "gaussian"
    enhancement: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        for name in ("wavelength", "avg_power", "rep_rate", "pulse_fwhm",
                     "spot_radius"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if self.enhancement < 1.0:
            raise DomainError(
                f"enhancement must be >= 1, got {self.enhancement}")
        if self.temporal_shape not in TEMPORAL_SHAPES:
            raise DomainError(
                f"temporal_shape must be one of {TEMPORAL_SHAPES}, "
                f"got {self.temporal_shape!r}")


def pulse_energy(spec: LaserSpec) -> float:
    """Energy per pulse [J]: average power divided by repetition rate."""
    return spec.avg_power / spec.rep_rate


def stretched_duration(tau_in: float, gdd: float) -> float:
    """FWHM duration [s] of a gaussian pulse after dispersion ``gdd`` [s^2].

    tau_out = tau_in sqrt(1 + (4 ln2 gdd / tau_in^2)^2); even in the sign
    of ``gdd`` and never below ``tau_in``.
    """
    if not tau_in > 0:
        raise DomainError(f"duration must be positive, got {tau_in}")
    chirp = FOUR_LN2 * gdd / tau_in**2
    return tau_in * math.sqrt(1.0 + chirp * chirp)


def duration_at_focus(spec: LaserSpec) -> float:
    """In-focus FWHM duration [s] after the focusing-path dispersion."""
    return stretched_duration(spec.pulse_fwhm, spec.gdd)


def peak_power(spec: LaserSpec) -> float:
    """Temporal peak power [W] at the in-focus duration."""
    s = GAUSSIAN_PEAK_POWER_FACTOR if spec.temporal_shape == "gaussian" else 1.0
    return s * pulse_energy(spec) / duration_at_focus(spec)


def peak_intensity(spec: LaserSpec) -> float:
    """On-axis peak intensity [W/m^2] in the focus.

    I0 = 2 P_peak / (pi w0^2) for a gaussian transverse profile with
    1/e^2 radius w0.
    """
    return 2.0 * peak_power(spec) / (math.pi * spec.spot_radius**2)


def field_from_intensity(i, constants: PhysicalConstants = CODATA2018):
    """Plane-wave peak field [V/m] at intensity ``i`` [W/m^2]."""
    if i < 0:
        raise DomainError(f"intensity must be >= 0, got {i}")
    return math.sqrt(2.0 * i / (constants.eps0 * constants.c))


def free_space_field(spec: LaserSpec,
                     convention: str = DEFAULT_FIELD_CONVENTION,
                     constants: PhysicalConstants = CODATA2018) -> float:
    """Optical field [V/m] in the focus with no material present.

    ``convention="peak"`` gives the plane-wave peak field
    sqrt(2 I / eps0 c); the default ``"rms"`` divides by sqrt(2).
    """
    if convention not in FIELD_CONVENTIONS:
        raise DomainError(
            f"field convention must be one of {FIELD_CONVENTIONS}, "
            f"got {convention!r}")
    f = field_from_intensity(peak_intensity(spec), constants)
    return f / math.sqrt(2.0) if convention == "rms" else f


def enhanced_tip_field(spec: LaserSpec,
                       convention: str = DEFAULT_FIELD_CONVENTION,
                       constants: PhysicalConstants = CODATA2018) -> float:
    """Optical field at the apex [V/m]: enhancement times free-space field."""
    return spec.enhancement * free_space_field(spec, convention, constants)


def infer_enhancement(f_fitted: float, spec: LaserSpec,
                      convention: str = DEFAULT_FIELD_CONVENTION,
                      constants: PhysicalConstants = CODATA2018) -> float:
    """Enhancement factor implied by a fitted apex field.

    Exact inverse of :func:`enhanced_tip_field` at a fixed spec and
    convention.
    """
    reference = free_space_field(spec, convention, constants)
    if reference <= 0:
        raise DomainError("free-space field is zero; cannot infer enhancement")
    return f_fitted / reference
