"""Run configuration: a flat ``key = value`` text file with strict keys.

Unknown keys are rejected and parse errors name the offending line and
key. Every key has a documented default (listed in the README), so all
pipelines run without a config file. Units are SI unless the key name
carries a unit suffix.
"""

import math
from dataclasses import dataclass

from .errors import DataError
from .emission import TipSpec
from .laser import DEFAULT_GDD, LaserSpec, TEMPORAL_SHAPES
from .pulsetrain import WINDOW_FUNCTIONS


def _enum(*choices):
    def convert(s):
        if s not in choices:
            raise ValueError(f"must be one of {', '.join(choices)}")
        return s
    return convert


#: key -> (attribute, converter, default)
CONFIG_SCHEMA = {
    "tip.radius_m": ("tip_radius", float, 134e-9),
    "tip.field_factor": ("tip_field_factor", float, 5.7),
    "tip.emit_radius_m": ("tip_emit_radius", float, None),
    "tip.work_function_eV": ("tip_work_function", float, 4.5),
    "laser.wavelength_m": ("laser_wavelength", float, 810e-9),
    "laser.avg_power_W": ("laser_avg_power", float, 0.260),
    "laser.rep_rate_Hz": ("laser_rep_rate", float, 1.0e9),
    "laser.pulse_fwhm_s": ("laser_pulse_fwhm", float, 48e-15),
    "laser.spot_radius_m": ("laser_spot_radius", float, 3.0e-6),
    "laser.gdd_s2": ("laser_gdd", float, DEFAULT_GDD),
    "laser.temporal_shape": ("laser_temporal_shape", _enum(*TEMPORAL_SHAPES),
                             "gaussian"),
    "laser.enhancement": ("laser_enhancement", float, 4.1),
    "laser.theta_rad": ("laser_theta", float, 0.0),
    "photofield.f_laser_Vm": ("photofield_f_laser", float, 1.1e9),
    "sweep.u_start_V": ("sweep_u_start", float, 1420.0),
    "sweep.u_stop_V": ("sweep_u_stop", float, 1520.0),
    "sweep.points": ("sweep_points", int, 15),
    "polarization.points": ("polarization_points", int, 60),
    "cos2.amplitude_A": ("cos2_amplitude", float, 1.0e-9),
    "cos2.background_A": ("cos2_background", float, 2.0e-10),
    "cos2.theta0_rad": ("cos2_theta0", float, 0.0),
    "ofe.f_dc_Vm": ("ofe_f_dc", float, 1.75e8),
    "ofe.f_laser_Vm": ("ofe_f_laser", float, 1.2e9),
    "ofe.g_A_per_V2m2": ("ofe_g", float, 1.3e-22),
    "ofe.h_Vm": ("ofe_h", float, 1.2e10),
    "noise.rel": ("noise_rel", float, 0.02),
    "pulses.mean": ("pulses_mean", float, 0.5),
    "pulses.rep_rate_Hz": ("pulses_rep_rate", float, 1.0e6),
    "pulses.window_s": ("pulses_window", float, 1.0),
    "spectrum.bin_s": ("spectrum_bin", float, 2.5e-7),
    "spectrum.window_fn": ("spectrum_window_fn", _enum(*WINDOW_FUNCTIONS),
                           "rectangular"),
    "metrics.n_electrons": ("metrics_n_electrons", float, 200.0),
    "metrics.tau_s": ("metrics_tau", float, 65e-15),
    "metrics.area_m2": ("metrics_area", float, math.pi * 1e-12),
    "metrics.solid_angle_sr": ("metrics_solid_angle", float, 1.0e-5),
    "quadrature.rel_tol": ("quadrature_rel_tol", float, 1.0e-8),
    "quadrature.max_doublings": ("quadrature_max_doublings", int, 20),
    "fit.max_iterations": ("fit_max_iterations", int, 200),
    "fit.cost_tol": ("fit_cost_tol", float, 1.0e-10),
    "fit.grad_tol": ("fit_grad_tol", float, 1.0e-10),
    "seed": ("seed", int, 12345),
    "output_dir": ("output_dir", str, "out"),
}

_DEFAULTS = {attr: default for (attr, _, default) in CONFIG_SCHEMA.values()}


@dataclass
class RunConfig:
    """Typed view of the configuration keys (attributes mirror the keys)."""

    tip_radius: float = _DEFAULTS["tip_radius"]
    tip_field_factor: float = _DEFAULTS["tip_field_factor"]
    tip_emit_radius: float = _DEFAULTS["tip_emit_radius"]
    tip_work_function: float = _DEFAULTS["tip_work_function"]
    laser_wavelength: float = _DEFAULTS["laser_wavelength"]
    laser_avg_power: float = _DEFAULTS["laser_avg_power"]
    laser_rep_rate: float = _DEFAULTS["laser_rep_rate"]
    laser_pulse_fwhm: float = _DEFAULTS["laser_pulse_fwhm"]
    laser_spot_radius: float = _DEFAULTS["laser_spot_radius"]
    laser_gdd: float = _DEFAULTS["laser_gdd"]
    laser_temporal_shape: str = _DEFAULTS["laser_temporal_shape"]
    laser_enhancement: float = _DEFAULTS["laser_enhancement"]
    laser_theta: float = _DEFAULTS["laser_theta"]
    photofield_f_laser: float = _DEFAULTS["photofield_f_laser"]
    sweep_u_start: float = _DEFAULTS["sweep_u_start"]
    sweep_u_stop: float = _DEFAULTS["sweep_u_stop"]
    sweep_points: int = _DEFAULTS["sweep_points"]
    polarization_points: int = _DEFAULTS["polarization_points"]
    cos2_amplitude: float = _DEFAULTS["cos2_amplitude"]
    cos2_background: float = _DEFAULTS["cos2_background"]
    cos2_theta0: float = _DEFAULTS["cos2_theta0"]
    ofe_f_dc: float = _DEFAULTS["ofe_f_dc"]
    ofe_f_laser: float = _DEFAULTS["ofe_f_laser"]
    ofe_g: float = _DEFAULTS["ofe_g"]
    ofe_h: float = _DEFAULTS["ofe_h"]
    noise_rel: float = _DEFAULTS["noise_rel"]
    pulses_mean: float = _DEFAULTS["pulses_mean"]
    pulses_rep_rate: float = _DEFAULTS["pulses_rep_rate"]
    pulses_window: float = _DEFAULTS["pulses_window"]
    spectrum_bin: float = _DEFAULTS["spectrum_bin"]
    spectrum_window_fn: str = _DEFAULTS["spectrum_window_fn"]
    metrics_n_electrons: float = _DEFAULTS["metrics_n_electrons"]
    metrics_tau: float = _DEFAULTS["metrics_tau"]
    metrics_area: float = _DEFAULTS["metrics_area"]
    metrics_solid_angle: float = _DEFAULTS["metrics_solid_angle"]
    quadrature_rel_tol: float = _DEFAULTS["quadrature_rel_tol"]
    quadrature_max_doublings: int = _DEFAULTS["quadrature_max_doublings"]
    fit_max_iterations: int = _DEFAULTS["fit_max_iterations"]
    fit_cost_tol: float = _DEFAULTS["fit_cost_tol"]
    fit_grad_tol: float = _DEFAULTS["fit_grad_tol"]
    seed: int = _DEFAULTS["seed"]
    output_dir: str = _DEFAULTS["output_dir"]

    def tip(self) -> TipSpec:
        return TipSpec(radius=self.tip_radius,
                       field_factor=self.tip_field_factor,
                       emit_radius=self.tip_emit_radius,
                       work_function=self.tip_work_function)

    def laser(self) -> LaserSpec:
        return LaserSpec(wavelength=self.laser_wavelength,
                         avg_power=self.laser_avg_power,
                         rep_rate=self.laser_rep_rate,
                         pulse_fwhm=self.laser_pulse_fwhm,
                         spot_radius=self.laser_spot_radius,
                         gdd=self.laser_gdd,
                         temporal_shape=self.laser_temporal_shape,
                         enhancement=self.laser_enhancement,
                         theta=self.laser_theta)

    def fit_options(self) -> dict:
        return {"max_iterations": self.fit_max_iterations,
                "cost_tol": self.fit_cost_tol,
                "grad_tol": self.fit_grad_tol}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse `key = value` lines into a :class:`RunConfig`.

    Blank lines and ``#`` comments are ignored. Raises :class:`DataError`
    naming the line and key for unknown keys, bad syntax or bad values.
    """
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{source}:{lineno}: expected 'key = value', "
                            f"got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_SCHEMA:
            raise DataError(f"{source}:{lineno}: unknown key {key!r}")
        attr, convert, _ = CONFIG_SCHEMA[key]
        if attr in overrides:
            raise DataError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            overrides[attr] = convert(value)
        except ValueError as exc:
            raise DataError(
                f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    return RunConfig(**overrides)


def load_config(path=None) -> RunConfig:
    """Load a config file, or return pure defaults when ``path`` is None."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def default_config_text() -> str:
    """The full key list with defaults, as parseable config text."""
    lines = ["# femtotip run configuration (defaults)"]
    for key, (attr, _, default) in CONFIG_SCHEMA.items():
        if default is None:
            lines.append(f"# {key} = <defaults to tip.radius_m>")
        else:
            lines.append(f"{key} = {default}")
    return "\n".join(lines) + "\n"
