"""Damped nonlinear least squares and the sweep models fitted with it.

The engine is a Levenberg-style damped Gauss-Newton: damping is divided
by 10 on every accepted step and multiplied by 10 on every rejected one,
so the cost never increases between accepted iterates. Weighting follows
the data: 1/sigma^2 when uncertainties are supplied, log-space residuals
for current-voltage sweeps (currents span decades), linear residuals for
polarization scans.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import CODATA2018, PhysicalConstants
from .emission import (BarrierModel, STANDARD_BARRIER, emitted_current,
                       fn_current_density, fn_log_field_derivative,
                       nordheim_params, ofe_peak_field_current,
                       tip_field_from_voltage, TipSpec)
from .errors import DataError, DomainError, NumericalError

SWEEP_KINDS = ("iv", "polarization")


@dataclass
class SweepDataset:
    """Ordered (x, y, sigma_y) samples of a measured or synthetic sweep.

    ``x`` is voltage [V] for kind "iv" (strictly monotone) or angle [rad]
    for kind "polarization". ``y`` is current [A], >= 0. ``sigma_y`` is an
    optional vector of 1-sigma uncertainties [A], > 0.
    """

    x: np.ndarray
    y: np.ndarray
    sigma_y: Optional[np.ndarray] = None
    kind: str = "iv"

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.kind not in SWEEP_KINDS:
            raise DataError(f"kind must be one of {SWEEP_KINDS}, got {self.kind!r}")
        if self.x.ndim != 1 or self.y.ndim != 1:
            raise DataError("x and y must be one-dimensional")
        if len(self.x) != len(self.y):
            raise DataError(
                f"length mismatch: {len(self.x)} x values, {len(self.y)} y values")
        neg = np.nonzero(self.y < 0)[0]
        if neg.size:
            raise DataError(f"negative current at row {neg[0] + 1}")
        if self.sigma_y is not None:
            self.sigma_y = np.asarray(self.sigma_y, dtype=float)
            if len(self.sigma_y) != len(self.y):
                raise DataError("sigma_y length does not match y")
            bad = np.nonzero(~(self.sigma_y > 0))[0]
            if bad.size:
                raise DataError(f"non-positive sigma at row {bad[0] + 1}")
        if self.kind == "iv" and len(self.x) > 1:
            d = np.diff(self.x)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise DataError("voltages must be strictly monotone for iv sweeps")

    def __len__(self):
        return len(self.x)


@dataclass
class Model:
    """A parametric sweep model.

    ``fn(x, params) -> y``; ``jacobian(x, params) -> (len(x), n_params)``
    or None for central finite differences.
    """

    model_id: str
    param_names: tuple
    fn: Callable
    jacobian: Optional[Callable] = None
    kind: str = "iv"


@dataclass
class FitResult:
    """Outcome of a least-squares fit."""

    params: dict
    param_names: tuple
    covariance: np.ndarray
    residuals: np.ndarray
    chi2_reduced: float
    model_id: str
    n_iterations: int
    converged: bool
    extras: dict = field(default_factory=dict)

    def values(self) -> np.ndarray:
        return np.array([self.params[n] for n in self.param_names])

    def sigma(self, name: str) -> float:
        """1-sigma uncertainty of a named parameter."""
        i = self.param_names.index(name)
        return math.sqrt(max(self.covariance[i, i], 0.0))

    def correlation(self) -> np.ndarray:
        d = np.sqrt(np.clip(np.diag(self.covariance), 1e-300, None))
        return self.covariance / np.outer(d, d)


def fn_linearize(data: SweepDataset) -> np.ndarray:
    """Coordinates (1/U, ln(I/U^2)) of a current-voltage sweep.

    Returns an (N, 2) array with the input order preserved. All currents
    must be positive.
    """
    if data.kind != "iv":
        raise DataError("linearized tunneling plot requires an iv sweep")
    if len(data) == 0:
        raise DataError("empty dataset")
    bad = np.nonzero(data.y <= 0)[0]
    if bad.size:
        raise DataError(f"non-positive current at row {bad[0] + 1}; "
                        "cannot take the logarithm")
    u = np.abs(data.x)
    return np.column_stack([1.0 / u, np.log(data.y / u**2)])


def _residual_builder(model: Model, data: SweepDataset):
    """Weighted residual and Jacobian closures for one fit."""
    x, y = data.x, data.y
    if data.sigma_y is not None:
        sig = data.sigma_y

        def resid(p):
            return (y - model.fn(x, p)) / sig

        def jac(p, fjac):
            return -fjac / sig[:, None]
    elif data.kind == "iv":
        if np.any(y <= 0):
            raise DataError("log-space weighting requires positive currents")
        logy = np.log(y)

        def resid(p):
            f = model.fn(x, p)
            with np.errstate(divide="ignore", invalid="ignore"):
                r = logy - np.log(f)
            r = np.where(f > 0, r, np.inf)
            return r

        def jac(p, fjac):
            f = model.fn(x, p)
            return -fjac / f[:, None]
    else:
        def resid(p):
            return y - model.fn(x, p)

        def jac(p, fjac):
            return -fjac
    return resid, jac


def _numeric_jacobian(model: Model, x, p, scales):
    J = np.empty((len(x), len(p)))
    for j in range(len(p)):
        h = 1e-6 * max(abs(p[j]), 1e-3 * scales[j])
        pp = p.copy(); pp[j] += h
        pm = p.copy(); pm[j] -= h
        J[:, j] = (model.fn(x, pp) - model.fn(x, pm)) / (2.0 * h)
    return J


def least_squares(model: Model, data: SweepDataset, init: Sequence[float],
                  bounds: Optional[Sequence[tuple]] = None, *,
                  max_iterations: int = 200, cost_tol: float = 1e-10,
                  grad_tol: float = 1e-10) -> FitResult:
    """Minimize the weighted squared residuals of ``model`` on ``data``.

    Deterministic for identical inputs. ``bounds`` is an optional box
    [(lo, hi), ...]; trial steps are clipped into it. The covariance is
    the inverse Gauss-Newton curvature at the optimum scaled by the
    reduced chi-square.

    Raises :class:`NumericalError` on a singular Jacobian. Returns with
    ``converged=False`` (and diagnostics in ``extras``) if the iteration
    budget is exhausted.
    """
    p = np.asarray(init, dtype=float).copy()
    n_par = len(p)
    if len(model.param_names) != n_par:
        raise DataError("init length does not match model parameters")
    lo = np.full(n_par, -np.inf)
    hi = np.full(n_par, np.inf)
    if bounds is not None:
        lo = np.array([b[0] for b in bounds], dtype=float)
        hi = np.array([b[1] for b in bounds], dtype=float)
        if np.any(p < lo) or np.any(p > hi):
            raise DomainError("initial parameters lie outside the bounds")
    scales = np.maximum(np.abs(p), 1e-30)

    resid, weight_jac = _residual_builder(model, data)

    def model_jac(pv):
        if model.jacobian is not None:
            return np.asarray(model.jacobian(data.x, pv), dtype=float)
        return _numeric_jacobian(model, data.x, pv, scales)

    r = resid(p)
    if not np.all(np.isfinite(r)):
        raise NumericalError("residuals are not finite at the initial point")
    cost = float(r @ r)
    cost_history = [cost]
    lam = 1e-3
    n_rejected = 0
    converged = False
    it = 0

    def scaled_grad(g, pv, c):
        # Cost change per relative parameter change, normalized by the
        # cost: dimensionless, so the tolerance works at any data scale.
        s = np.maximum(np.abs(pv), scales)
        return float(np.max(np.abs(2.0 * g * s)) / max(c, 1e-300))

    for it in range(1, max_iterations + 1):
        J = weight_jac(p, model_jac(p))
        g = J.T @ r
        if scaled_grad(g, p, cost) < grad_tol:
            converged = True
            break
        A = J.T @ J
        diag = np.diag(A).copy()
        if np.any(diag == 0.0):
            dead = model.param_names[int(np.nonzero(diag == 0.0)[0][0])]
            raise NumericalError(
                f"singular Jacobian: parameter {dead!r} has no influence "
                "on the residuals")
        accepted = False
        while lam < 1e16:
            M = A + lam * np.diag(diag)
            try:
                step = np.linalg.solve(M, -g)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(f"singular normal equations: {exc}") from exc
            p_try = np.clip(p + step, lo, hi)
            r_try = resid(p_try)
            with np.errstate(over="ignore", invalid="ignore"):
                cost_try = float(r_try @ r_try) if np.all(np.isfinite(r_try)) else np.inf
            if cost_try < cost:
                p, r = p_try, r_try
                prev_cost, cost = cost, cost_try
                cost_history.append(cost)
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                if prev_cost - cost < cost_tol * max(prev_cost, 1e-300):
                    converged = True
                break
            lam *= 10.0
            n_rejected += 1
        if not accepted:
            # Damping exhausted: no downhill step exists at this scale.
            converged = True
            break
        if converged:
            break

    J = weight_jac(p, model_jac(p))
    A = J.T @ J
    dof = max(len(data) - n_par, 1)
    chi2_red = cost / dof
    try:
        cov = chi2_red * np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular curvature at the optimum: {exc}") from exc

    result = FitResult(
        params={n: float(v) for n, v in zip(model.param_names, p)},
        param_names=tuple(model.param_names),
        covariance=cov,
        residuals=r,
        chi2_reduced=chi2_red,
        model_id=model.model_id,
        n_iterations=it,
        converged=converged,
        extras={"cost_history": cost_history, "n_rejected": n_rejected,
                "lambda_final": lam,
                "scaled_grad": scaled_grad(J.T @ r, p, cost)},
    )
    return result


# ---------------------------------------------------------------------------
# Registered models
# ---------------------------------------------------------------------------

def dc_fn_model(work_function: float, field_factor: float,
                barrier: BarrierModel = STANDARD_BARRIER,
                constants: PhysicalConstants = CODATA2018) -> Model:
    """DC tunneling current vs tip bias; parameters (radius, emit_radius)."""

    def tip_of(p):
        return TipSpec(radius=p[0], field_factor=field_factor,
                       emit_radius=p[1], work_function=work_function)

    def fn(u, p):
        tip = tip_of(p)
        f = tip_field_from_voltage(u, tip)
        return emitted_current(
            fn_current_density(f, work_function, barrier, constants), tip)

    def jacobian(u, p):
        tip = tip_of(p)
        f = tip_field_from_voltage(u, tip)
        y = emitted_current(
            fn_current_density(f, work_function, barrier, constants), tip)
        dlnj_df = fn_log_field_derivative(f, work_function, barrier, constants)
        J = np.empty((len(np.atleast_1d(u)), 2))
        J[:, 0] = y * dlnj_df * (-f / p[0])   # dF/dr = -F/r
        J[:, 1] = 2.0 * y / p[1]              # I ~ R^2
        return J

    return Model("dc-fn", ("radius", "emit_radius"), fn, jacobian, kind="iv")


def photofield_model(radius: float, phi_eff: float, field_factor: float,
                     emit_radius: Optional[float] = None,
                     barrier: BarrierModel = STANDARD_BARRIER,
                     constants: PhysicalConstants = CODATA2018) -> Model:
    """Photofield current vs bias at fixed geometry; parameter (f_laser,)."""
    tip = TipSpec(radius=radius, field_factor=field_factor,
                  emit_radius=emit_radius, work_function=phi_eff)

    def fn(u, p):
        f = tip_field_from_voltage(u, tip) + p[0]
        return emitted_current(
            fn_current_density(f, phi_eff, barrier, constants), tip)

    def jacobian(u, p):
        f = tip_field_from_voltage(u, tip) + p[0]
        y = emitted_current(
            fn_current_density(f, phi_eff, barrier, constants), tip)
        J = np.empty((len(np.atleast_1d(u)), 1))
        J[:, 0] = y * fn_log_field_derivative(f, phi_eff, barrier, constants)
        return J

    return Model("photofield", ("f_laser",), fn, jacobian, kind="iv")


def cos2_model() -> Model:
    """Polarization scan model y = A cos^2(theta - theta0) + B."""

    def fn(theta, p):
        a, b, th0 = p
        return a * np.cos(theta - th0) ** 2 + b

    def jacobian(theta, p):
        a, _, th0 = p
        J = np.empty((len(np.atleast_1d(theta)), 3))
        J[:, 0] = np.cos(theta - th0) ** 2
        J[:, 1] = 1.0
        J[:, 2] = a * np.sin(2.0 * (theta - th0))
        return J

    return Model("cos2", ("amplitude", "background", "theta0"), fn, jacobian,
                 kind="polarization")


def ofe_model(f_dc: float) -> Model:
    """Optical-field-emission polarization model; parameters (g, h, f_laser)."""

    def fn(theta, p):
        return ofe_peak_field_current(theta, f_dc, p[2], p[0], p[1])

    def jacobian(theta, p):
        g, h, fl = p
        total = f_dc + fl * np.abs(np.cos(theta))
        y = ofe_peak_field_current(theta, f_dc, fl, g, h)
        J = np.empty((len(np.atleast_1d(theta)), 3))
        J[:, 0] = y / g
        J[:, 1] = -y / total
        J[:, 2] = y * (2.0 / total + h / total**2) * np.abs(np.cos(theta))
        return J

    return Model("ofe", ("g", "h", "f_laser"), fn, jacobian,
                 kind="polarization")


# ---------------------------------------------------------------------------
# High-level fits
# ---------------------------------------------------------------------------

def _wrap_half_pi(theta0: float) -> float:
    """Fold a cos^2 phase offset into (-pi/2, pi/2]."""
    t = (theta0 + math.pi / 2.0) % math.pi - math.pi / 2.0
    return math.pi / 2.0 if t == -math.pi / 2.0 else t


def fit_dc_fn(data: SweepDataset, phi_w: float, k: float,
              barrier: BarrierModel = STANDARD_BARRIER,
              constants: PhysicalConstants = CODATA2018,
              **ls_options) -> FitResult:
    """Extract the tip radius (and emitting-area radius) from a dark sweep.

    The radius is initialized from the slope of the linearized plot,
    iterating the slowly varying image-force slope correction, then
    refined by the damped least-squares engine.
    """
    pts = fn_linearize(data)
    inv_u, lny = pts[:, 0], pts[:, 1]
    slope = _line_slope(inv_u, lny)
    if slope >= 0:
        raise DataError("linearized sweep has non-negative slope; "
                        "not tunneling-like data")
    b = constants.fn_exponent_factor
    u_mid = float(np.median(np.abs(data.x)))
    r0 = -slope / (b * phi_w**1.5 * k)
    for _ in range(3):
        np_ = nordheim_params(u_mid / (k * r0), phi_w, barrier, constants)
        corr = np_.v_of_w - np_.w * _dv(np_.w, barrier) / 2.0
        r0 = -slope / (b * phi_w**1.5 * k * corr)
    model = dc_fn_model(phi_w, k, barrier, constants)
    base = model.fn(data.x, np.array([r0, r0]))
    offset = float(np.mean(np.log(data.y) - np.log(base)))
    R0 = r0 * math.exp(offset / 2.0)
    return least_squares(model, data, [r0, R0],
                         bounds=[(1e-12, np.inf), (1e-12, np.inf)],
                         **ls_options)


def _dv(w, barrier):
    return float(barrier.dv(min(w, 1.0)))


def _line_slope(x, y):
    x = np.asarray(x); y = np.asarray(y)
    xc = x - x.mean()
    return float((xc @ (y - y.mean())) / (xc @ xc))


def fit_photofield(data: SweepDataset, radius: float, phi_eff: float, k: float,
                   emit_radius: Optional[float] = None,
                   barrier: BarrierModel = STANDARD_BARRIER,
                   constants: PhysicalConstants = CODATA2018,
                   **ls_options) -> FitResult:
    """Extract the optical field added to the bias field during a sweep.

    Geometry is held fixed (radius from the dark-sweep fit). The result's
    extras carry the model curves at (1 +/- 0.25) of the fitted field for
    plotting the sensitivity band.
    """
    model = photofield_model(radius, phi_eff, k, emit_radius, barrier,
                             constants)
    i_ref = int(np.argmax(data.y))
    u_ref, y_ref = data.x[i_ref], data.y[i_ref]

    def at(fl):
        return float(model.fn(np.array([u_ref]), np.array([fl]))[0])

    f0 = 0.0
    if y_ref > at(0.0):
        f_hi = 10.0 * abs(u_ref) / (k * radius) + 1e9
        lo_f, hi_f = 0.0, f_hi
        for _ in range(200):
            mid = 0.5 * (lo_f + hi_f)
            if at(mid) < y_ref:
                lo_f = mid
            else:
                hi_f = mid
        f0 = 0.5 * (lo_f + hi_f)
    result = least_squares(model, data, [f0], bounds=[(0.0, np.inf)],
                           **ls_options)
    fl = result.params["f_laser"]
    for tag, factor in (("minus25", 0.75), ("plus25", 1.25)):
        result.extras[f"curve_{tag}"] = model.fn(data.x, np.array([fl * factor]))
    result.extras["curve_x"] = data.x.copy()
    return result


def fit_cos2_background(data: SweepDataset, **ls_options) -> FitResult:
    """Fit a squared-cosine modulation on a flat background.

    Model y = A cos^2(theta - theta0) + B with A, B >= 0. The phase
    offset is folded into (-pi/2, pi/2] to remove the period-pi
    degeneracy.
    """
    if data.kind != "polarization":
        raise DataError("cos^2 fit requires polarization data")
    span = float(np.ptp(data.x))
    if span < math.pi:
        raise DataError(
            f"polarization scan must span at least pi, got {span:.3f} rad")
    model = cos2_model()
    b0 = max(float(np.min(data.y)), 0.0)
    a0 = max(float(np.max(data.y) - b0), 1e-300)
    th0 = _wrap_half_pi(float(data.x[int(np.argmax(data.y))]))
    result = least_squares(model, data, [a0, b0, th0],
                           bounds=[(0.0, np.inf), (0.0, np.inf),
                                   (-np.inf, np.inf)], **ls_options)
    result.params["theta0"] = _wrap_half_pi(result.params["theta0"])
    return result


def _ofe_log_amplitude_model(f_dc: float) -> Model:
    """OFE model over (ln g, h, f_laser): straightens the g-h valley."""
    base = ofe_model(f_dc)

    def fn(theta, p):
        return base.fn(theta, np.array([float(np.exp(p[0])), p[1], p[2]]))

    def jacobian(theta, p):
        g = float(np.exp(p[0]))
        J = base.jacobian(theta, np.array([g, p[1], p[2]]))
        J[:, 0] *= g
        return J

    return Model("ofe-log", ("ln_g", "h", "f_laser"), fn, jacobian,
                 kind="polarization")


def fit_ofe_polarization(data: SweepDataset, f_dc: float,
                         **ls_options) -> FitResult:
    """Fit the peak-field emission model to a polarization scan.

    Parameters (g, h, f_laser) are strongly correlated through the
    exponential, so the optimization runs internally over (ln g, h,
    f_laser), started from several trial field strengths; the best local
    minimum is kept and mapped back. A |corr(g, h)| > 0.999 flag is set
    in the extras.
    """
    if data.kind != "polarization":
        raise DataError("optical-field-emission fit requires polarization data")
    if not f_dc > 0:
        raise DomainError(f"DC field must be positive, got {f_dc}")
    log_model = _ofe_log_amplitude_model(f_dc)
    y_par = float(np.max(data.y))
    y_perp = max(float(np.min(data.y)), y_par * 1e-12, 1e-300)

    best = None
    for ratio in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
        fl0 = ratio * f_dc
        f_max = f_dc + fl0
        denom = 1.0 / f_max - 1.0 / f_dc
        h0 = (2.0 * math.log(f_max / f_dc) - math.log(y_par / y_perp)) / denom
        h0 = max(h0, 1e-6 * f_dc)
        ln_g0 = math.log(y_par) - 2.0 * math.log(f_max) + h0 / f_max
        if not np.isfinite(ln_g0):
            continue
        try:
            res = least_squares(log_model, data, [ln_g0, h0, fl0],
                                bounds=[(-690.0, 690.0), (1e-300, np.inf),
                                        (0.0, np.inf)], **ls_options)
        except NumericalError:
            continue
        if best is None or res.chi2_reduced < best.chi2_reduced:
            best = res
    if best is None:
        raise NumericalError("no optical-field-emission fit start converged")

    # Map (ln g, h, f_laser) back to (g, h, f_laser); covariance by the
    # delta method (d g = g d ln g).
    g_hat = math.exp(best.params["ln_g"])
    T = np.diag([g_hat, 1.0, 1.0])
    cov = T @ best.covariance @ T
    result = FitResult(
        params={"g": g_hat, "h": best.params["h"],
                "f_laser": best.params["f_laser"]},
        param_names=("g", "h", "f_laser"),
        covariance=cov,
        residuals=best.residuals,
        chi2_reduced=best.chi2_reduced,
        model_id="ofe",
        n_iterations=best.n_iterations,
        converged=best.converged,
        extras=dict(best.extras),
    )
    corr = result.correlation()
    result.extras["gh_correlation"] = float(corr[0, 1])
    result.extras["strong_gh_correlation"] = bool(abs(corr[0, 1]) > 0.999)
    return result
