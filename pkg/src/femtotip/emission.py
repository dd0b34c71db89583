"""Forward models for tunneling emission from a sharp tip.

Covers DC Fowler-Nordheim emission, photofield emission (single-photon
excitation followed by tunneling through a lowered barrier) and optical
field emission, where the instantaneous laser field adds to the DC bias
field. Fields are in V/m, work functions in eV, current densities in
A/m^2, currents in A.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .constants import CODATA2018, PhysicalConstants
from .errors import DomainError
from .quadrature import adaptive_mean

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TipSpec:
    """Emitter geometry and material.

    Parameters
    ----------
    radius: float
        Apex radius of curvature [m]; sets the field conversion.
    field_factor: float
        Geometry factor k in F = U / (k * radius).
    emit_radius: float, optional
        Radius of the emitting area [m] in I = 2 pi R^2 j. The emitting
        area is not fixed by the apex radius; it defaults to ``radius``.
    work_function: float
        Work function [eV].
    """

    radius: float
    field_factor: float = 5.7
    emit_radius: Optional[float] = None
    work_function: float = 4.5

    def __post_init__(self):
        if self.emit_radius is None:
            object.__setattr__(self, "emit_radius", self.radius)
        if not self.radius > 0:
            raise DomainError(f"tip radius must be positive, got {self.radius}")
        if not self.field_factor > 0:
            raise DomainError(f"field factor must be positive, got {self.field_factor}")
        if not self.emit_radius > 0:
            raise DomainError(f"emit radius must be positive, got {self.emit_radius}")
        if not self.work_function > 0:
            raise DomainError(
                f"work function must be positive, got {self.work_function}")


@dataclass(frozen=True)
class FieldState:
    """DC bias field, peak optical field and polarization angle at the apex.

    ``theta`` is the angle between the tip axis and the laser polarization;
    it is normalized into [0, 2 pi).
    """

    f_dc: float
    f_laser_peak: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.f_dc < 0:
            raise DomainError(f"DC field must be >= 0, got {self.f_dc}")
        if self.f_laser_peak < 0:
            raise DomainError(f"laser field must be >= 0, got {self.f_laser_peak}")
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)


@dataclass(frozen=True)
class NordheimParams:
    """Barrier-correction quantities at one operating point."""

    w: float
    v_of_w: float
    t2_of_w: float

    def in_field_emission_regime(self) -> bool:
        """True when the corrections sit in the usual field-emission band."""
        return 0.4 < self.v_of_w < 0.8 and 0.9 <= self.t2_of_w <= 1.1


def schottky_ratio(f, phi, constants: PhysicalConstants = CODATA2018):
    """Image-force barrier lowering divided by the work function.

    Parameters
    ----------
    f: float or ndarray
        Local field [V/m], >= 0.
    phi: float
        Work function [eV], > 0.
    """
    if not phi > 0:
        raise DomainError(f"work function must be positive, got {phi}")
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise DomainError("field must be >= 0")
    w = constants.schottky_prefactor * np.sqrt(f) / phi
    return float(w) if w.ndim == 0 else w


def nordheim_v(w):
    """Image-force correction to the tunneling exponent.

    Uses the standard elliptic-integral approximation
    v(w) = 1 - w^2 + (w^2/3) ln w, which is exact at both endpoints
    (v(0) = 1, v(1) = 0) and monotonically decreasing in between.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or np.any(w > 1):
        raise DomainError("barrier-lowering ratio w must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        v = 1.0 - w**2 + (w**2 / 3.0) * np.log(w)
    v = np.where(w == 0.0, 1.0, v)
    return float(v) if v.ndim == 0 else v


def nordheim_v_prime(w):
    """dv/dw for the approximation used by :func:`nordheim_v`."""
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = w * ((2.0 / 3.0) * np.log(w) - 5.0 / 3.0)
    d = np.where(w == 0.0, 0.0, d)
    return float(d) if d.ndim == 0 else d


def barrier_t(w):
    """Prefactor correction t(w) = v(w) - (2w/3) dv/dw; t(0) = 1."""
    w = np.asarray(w, dtype=float)
    t = nordheim_v(w) - (2.0 * w / 3.0) * nordheim_v_prime(w)
    return float(t) if np.ndim(t) == 0 else t


def barrier_t_prime(w):
    """dt/dw for :func:`barrier_t` (closed form for the v above)."""
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = (2.0 * w / 9.0) * (1.0 - np.log(w)) - w / 9.0
    d = np.where(w == 0.0, 0.0, d)
    return float(d) if d.ndim == 0 else d


def _unit(w):
    return np.ones_like(np.asarray(w, dtype=float))


def _zero(w):
    return np.zeros_like(np.asarray(w, dtype=float))


@dataclass(frozen=True)
class BarrierModel:
    """Pluggable barrier-correction functions and their derivatives."""

    v: Callable = field(default=nordheim_v)
    dv: Callable = field(default=nordheim_v_prime)
    t: Callable = field(default=_unit)
    dt: Callable = field(default=_zero)


#: Default: image-force corrected exponent, unit prefactor correction.
STANDARD_BARRIER = BarrierModel()

#: Optional variant with the prefactor correction t(w) enabled.
T_CORRECTED_BARRIER = BarrierModel(t=barrier_t, dt=barrier_t_prime)


def nordheim_params(f: float, phi: float,
                    barrier: BarrierModel = STANDARD_BARRIER,
                    constants: PhysicalConstants = CODATA2018) -> NordheimParams:
    """Barrier corrections at a single (field, work function) point."""
    w = schottky_ratio(f, phi, constants)
    wc = min(w, 1.0)
    return NordheimParams(w=w, v_of_w=float(barrier.v(wc)),
                          t2_of_w=float(barrier.t(wc)) ** 2)


def fn_current_density(f, phi,
                       barrier: BarrierModel = STANDARD_BARRIER,
                       constants: PhysicalConstants = CODATA2018):
    """Tunneling current density [A/m^2] at local field ``f`` [V/m].

    j = a F^2 / (phi t(w)^2) * exp(-b phi^(3/2) v(w) / F) with the
    derived constants a, b from :class:`PhysicalConstants`. Strictly
    increasing in ``f`` and strictly decreasing in ``phi``. Non-positive
    fields return exactly 0 (the vanishing-field limit). Barrier-lowering
    ratios above 1 (barrier fully suppressed) are clamped to the w = 1
    limit, where the exponent vanishes.
    """
    if not phi > 0:
        raise DomainError(f"work function must be positive, got {phi}")
    f = np.asarray(f, dtype=float)
    scalar = f.ndim == 0
    f = np.atleast_1d(f)
    pos = f > 0
    fp = np.where(pos, f, 1.0)  # placeholder field where j is forced to 0
    w = constants.schottky_prefactor * np.sqrt(fp) / phi
    wc = np.minimum(w, 1.0)
    v = barrier.v(wc)
    t = barrier.t(wc)
    a = constants.fn_prefactor
    b = constants.fn_exponent_factor
    with np.errstate(under="ignore"):
        j = (a * fp**2 / (phi * t**2)) * np.exp(-b * phi**1.5 * v / fp)
    j = np.where(pos, j, 0.0)
    return float(j[0]) if scalar else j


def fn_log_field_derivative(f, phi,
                            barrier: BarrierModel = STANDARD_BARRIER,
                            constants: PhysicalConstants = CODATA2018):
    """d ln j / dF [m/V] of :func:`fn_current_density` at field ``f`` > 0.

    Used for analytic fit-model Jacobians.
    """
    if not phi > 0:
        raise DomainError(f"work function must be positive, got {phi}")
    f = np.asarray(f, dtype=float)
    scalar = f.ndim == 0
    f = np.atleast_1d(f)
    if np.any(f <= 0):
        raise DomainError("log-derivative requires positive field")
    w = constants.schottky_prefactor * np.sqrt(f) / phi
    clamped = w >= 1.0
    wc = np.minimum(w, 1.0)
    v = barrier.v(wc)
    dv = barrier.dv(wc)
    t = barrier.t(wc)
    dt = barrier.dt(wc)
    b = constants.fn_exponent_factor
    # In the clamped (barrier suppressed) region v, t are constants of F.
    dv = np.where(clamped, 0.0, dv)
    dt = np.where(clamped, 0.0, dt)
    d = (2.0 / f
         + (b * phi**1.5 / f**2) * (v - wc * dv / 2.0)
         - (wc * dt) / (f * t))
    return float(d[0]) if scalar else d


def tip_field_from_voltage(u, tip: TipSpec):
    """Apex field magnitude [V/m] for tip bias ``u`` [V]."""
    return np.abs(u) / (tip.field_factor * tip.radius)


def emitted_current(j, tip: TipSpec):
    """Emitted current [A] from current density ``j`` over the tip's
    emitting area: I = 2 pi R^2 j."""
    return TWO_PI * tip.emit_radius**2 * j


def dc_current(u, tip: TipSpec,
               barrier: BarrierModel = STANDARD_BARRIER,
               constants: PhysicalConstants = CODATA2018):
    """DC field-emission current [A] at bias ``u`` [V]."""
    j = fn_current_density(tip_field_from_voltage(u, tip), tip.work_function,
                           barrier, constants)
    return emitted_current(j, tip)


def photofield_phi_eff(phi_w: float, wavelength: float,
                       constants: PhysicalConstants = CODATA2018) -> float:
    """Effective work function [eV] after single-photon excitation.

    ``wavelength`` may be ``math.inf`` to recover the dark value exactly.
    """
    if not phi_w > 0:
        raise DomainError(f"work function must be positive, got {phi_w}")
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    photon = constants.hc_ev_m / wavelength
    phi_eff = phi_w - photon
    if phi_eff <= 0:
        raise DomainError(
            f"photon energy {photon:.3f} eV >= work function {phi_w:.3f} eV; "
            "emission would be over the barrier, not tunneling")
    return phi_eff


def photon_energy_ev(wavelength: float,
                     constants: PhysicalConstants = CODATA2018) -> float:
    """Photon energy [eV] at the given vacuum wavelength [m]."""
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    return constants.hc_ev_m / wavelength


def photofield_current(u, tip: TipSpec, f_laser: float, wavelength: float,
                       barrier: BarrierModel = STANDARD_BARRIER,
                       constants: PhysicalConstants = CODATA2018):
    """Photofield-emission current [A] at bias ``u`` [V].

    The laser contributes twice: the photon lowers the effective work
    function, and the (cycle-peak) optical field ``f_laser`` adds to the
    DC field during the sweep.
    """
    if f_laser < 0:
        raise DomainError(f"laser field must be >= 0, got {f_laser}")
    phi_eff = photofield_phi_eff(tip.work_function, wavelength, constants)
    f_total = tip_field_from_voltage(u, tip) + f_laser
    return emitted_current(fn_current_density(f_total, phi_eff, barrier,
                                              constants), tip)


def ofe_instantaneous_density(fs: FieldState, phi: float, phase,
                              barrier: BarrierModel = STANDARD_BARRIER,
                              constants: PhysicalConstants = CODATA2018):
    """Instantaneous tunneling density [A/m^2] at an optical phase.

    The local field is F = f_dc + f_laser_peak cos(theta) cos(phase);
    emission is clamped to 0 whenever F <= 0 (forward tunneling only;
    no back-tunneling model).
    """
    f = fs.f_dc + fs.f_laser_peak * math.cos(fs.theta) * np.cos(phase)
    return fn_current_density(f, phi, barrier, constants)


def ofe_peak_field_current(theta, f_dc: float, f_laser: float,
                           g: float, h: float):
    """Two-constant optical-field-emission model, polarization resolved.

    y = g (f_dc + f_laser |cos theta|)^2 exp(-h / (...)), the
    highest-field approximation of cycle-averaged emission. Vectorized
    over ``theta``; the scale of ``g`` sets the output unit (density or
    current).
    """
    if not g > 0:
        raise DomainError(f"model constant g must be positive, got {g}")
    if not h > 0:
        raise DomainError(f"model constant h must be positive, got {h}")
    theta = np.asarray(theta, dtype=float)
    scalar = theta.ndim == 0
    total = f_dc + f_laser * np.abs(np.cos(np.atleast_1d(theta)))
    pos = total > 0
    tp = np.where(pos, total, 1.0)
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        y = g * tp**2 * np.exp(-h / tp)
    y = np.where(pos, y, 0.0)
    return float(y[0]) if scalar else y


def ofe_peak_field_model(fs: FieldState, g: float, h: float):
    """Peak-field emission model evaluated at a field state.

    Even in theta and pi-periodic by construction. Vanishing total field
    returns 0.
    """
    return ofe_peak_field_current(fs.theta, fs.f_dc, fs.f_laser_peak, g, h)


def gaussian_field_envelope(n_fwhm: float = 4.0) -> Callable:
    """Normalized Gaussian field envelope on [0, 1].

    The unit interval spans ``n_fwhm`` field FWHMs, so the envelope is
    ~1 at the center and negligible at the window edges.
    """
    def env(s):
        return np.exp(-4.0 * math.log(2.0) * ((np.asarray(s) - 0.5) * n_fwhm) ** 2)
    return env


def ofe_cycle_averaged_density(fs: FieldState, phi: float,
                               envelope: Optional[Callable] = None,
                               rel_tol: float = 1e-8,
                               max_doublings: int = 20,
                               barrier: BarrierModel = STANDARD_BARRIER,
                               constants: PhysicalConstants = CODATA2018) -> float:
    """Optically cycle-averaged emission density [A/m^2].

    Averages the instantaneous density over the optical phase; with
    ``envelope`` given (a callable on normalized time [0, 1] with values
    in [0, 1]), additionally averages over the pulse window with the
    laser amplitude scaled by the envelope. The result is bounded by the
    density at the peak field and is >= 0.

    Raises :class:`QuadratureError` with diagnostics if the adaptive
    rule does not converge.
    """
    amp = fs.f_laser_peak * math.cos(fs.theta)

    def cycle_mean(amplitude):
        if amplitude == 0.0:
            return fn_current_density(fs.f_dc, phi, barrier, constants)
        value, _ = adaptive_mean(
            lambda ph: fn_current_density(fs.f_dc + amplitude * np.cos(ph),
                                          phi, barrier, constants),
            periodic=True, rel_tol=rel_tol, max_doublings=max_doublings)
        return value

    if envelope is None:
        return cycle_mean(amp)

    def over_envelope(s):
        return np.array([cycle_mean(amp * float(envelope(si))) for si in np.atleast_1d(s)])

    value, _ = adaptive_mean(over_envelope, 0.0, 1.0, periodic=False,
                             rel_tol=rel_tol, n_start=16,
                             max_doublings=max_doublings)
    return value
