"""Full reproduction pipeline: figures, tables and the acceptance scorecard.

``run_paper_report`` regenerates the synthetic analogues of the published
measurement figures (linearized current-voltage fits, polarization scans,
repetition-rate spectrum), computes the closing source-quality estimates,
evaluates every acceptance criterion at its stated tolerance, and writes
everything (CSV tables, PNG figures, pass/fail scorecard) into the output
directory.
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from . import beam, figures
from .config import RunConfig
from .datasets import (model_from_config, synthesize_sweep, write_rows,
                       write_sweep_csv, write_pulse_counts)
from .emission import (FieldState, dc_current, fn_current_density,
                       ofe_peak_field_current, photofield_phi_eff,
                       photon_energy_ev)
from .errors import NumericalError
from .fitting import (SweepDataset, cos2_model, fit_cos2_background, fit_dc_fn,
                      fit_ofe_polarization, fit_photofield, fn_linearize)
from .laser import (DEFAULT_GDD, LaserSpec, infer_enhancement,
                    stretched_duration)
from .pulsetrain import (binned_current, linewidth_at_level, periodogram,
                         power_spectrum, sample_pulse_train, snr_at_carrier)
from .quadrature import adaptive_mean, periodic_mean


@dataclass
class CriterionResult:
    """One scorecard row."""

    cid: str
    label: str
    measured: str
    target: str
    passed: bool


def _rel(x, ref):
    return abs(x - ref) / abs(ref)


def linear_r2(x, y) -> float:
    """Coefficient of determination of the best-fit line."""
    coeffs = np.polyfit(x, y, 1)
    resid = y - np.polyval(coeffs, x)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - ss_res / ss_tot


def decade_voltage_range(current_fn, u_hi: float, decades: float = 1.0):
    """Voltage range [u_lo, u_hi] spanning the given current decades."""
    target = math.log10(current_fn(u_hi)) - decades
    lo, hi = u_hi / 3.0, u_hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if math.log10(current_fn(mid)) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), u_hi


# ---------------------------------------------------------------------------
# Criterion evaluations (desk scale)
# ---------------------------------------------------------------------------

def _c1_effective_work_function(cfg):
    phi_eff = photofield_phi_eff(4.5, 810e-9)
    photon = photon_energy_ev(810e-9)
    ok = abs(phi_eff - 3.0) <= 0.05 and abs(photon - 1.53) <= 0.01
    return CriterionResult(
        "C1", "effective work function under illumination",
        f"phi_eff={phi_eff:.4f} eV, photon={photon:.4f} eV",
        "3.0 +/- 0.05 eV; 1.53 +/- 0.01 eV", ok)


def _c2_closing_estimates(cfg):
    n, tau = cfg.metrics_n_electrons, cfg.metrics_tau
    m = beam.pulse_metrics(n, tau, cfg.metrics_area, cfg.metrics_solid_angle)
    rate = beam.emission_rate(n, tau)
    j_ka = beam.amps_per_m2_to_ka_per_cm2(m.j_inst)
    ok = (_rel(m.i_inst, 500e-6) <= 0.02
          and _rel(rate, 3.1e15) <= 0.03
          and _rel(j_ka, 15.0) <= 0.05
          and m.brightness >= 1e13)
    return CriterionResult(
        "C2", "closing source-quality estimates",
        f"I={m.i_inst * 1e6:.1f} uA, rate={rate:.3e}/s, "
        f"j={j_ka:.2f} kA/cm^2, B={m.brightness:.2e}",
        "500 uA (2%); 3.1e15/s (3%); 15 kA/cm^2 (5%); B >= 1e13", ok)


def _c3_enhancement(cfg):
    spec = LaserSpec(wavelength=810e-9, avg_power=0.260, rep_rate=1e9,
                     pulse_fwhm=65e-15, spot_radius=3e-6, gdd=0.0)
    factor = infer_enhancement(1.1e9, spec)
    ok = abs(factor - 4.1) <= 0.3 * 4.1
    return CriterionResult(
        "C3", "field-enhancement inference",
        f"factor={factor:.3f} (rms free-space-field convention)",
        "4.1 +/- 30%", ok)


def _c4_stretching(cfg):
    tau = stretched_duration(48e-15, DEFAULT_GDD)
    ok = abs(tau - 65e-15) <= 1e-15
    return CriterionResult(
        "C4", "focusing-optics pulse stretching",
        f"48 fs -> {tau * 1e15:.3f} fs", "65 +/- 1 fs", ok)


def _fit_roundtrip_ensemble(cfg, model_id, noise, n_seeds=100):
    """Seeded round-trip recoveries; returns a per-seed pass list."""
    model, truth, x = model_from_config(model_id, cfg)
    opts = cfg.fit_options()
    passes = []
    for i in range(n_seeds):
        data = synthesize_sweep(model, truth, x, noise, cfg.seed + 1000 + i)
        try:
            if model_id == "dc-fn":
                res = fit_dc_fn(data, cfg.tip_work_function,
                                cfg.tip_field_factor, **opts)
                ok = _rel(res.params["radius"], truth[0]) <= 0.03
            elif model_id == "photofield":
                phi_eff = photofield_phi_eff(cfg.tip_work_function,
                                             cfg.laser_wavelength)
                res = fit_photofield(data, cfg.tip_radius, phi_eff,
                                     cfg.tip_field_factor, **opts)
                ok = _rel(res.params["f_laser"], truth[0]) <= 0.05
            elif model_id == "cos2":
                res = fit_cos2_background(data, **opts)
                ok = (_rel(res.params["amplitude"], truth[0]) <= 0.05
                      and _rel(res.params["background"], truth[1]) <= 0.05
                      and abs(res.params["theta0"] - truth[2]) <= 0.05)
            else:  # ofe
                res = fit_ofe_polarization(data, cfg.ofe_f_dc, **opts)
                ok = _rel(res.params["f_laser"], truth[2]) <= 0.10
                grid = np.linspace(0.0, math.pi, 181)
                y_true = model.fn(grid, truth)
                y_fit = model.fn(grid, res.values())
                ok = ok and (np.max(np.abs(y_fit - y_true))
                             <= 0.05 * np.max(y_true))
        except NumericalError:
            ok = False
        passes.append(ok)
    return passes


def _c5_fit_roundtrips(cfg):
    counts = {}
    for model_id, noise in (("dc-fn", 0.02), ("photofield", 0.02),
                            ("cos2", 0.03), ("ofe", 0.03)):
        counts[model_id] = sum(_fit_roundtrip_ensemble(cfg, model_id, noise))
    ok = all(c >= 95 for c in counts.values())
    detail = ", ".join(f"{k}: {v}/100" for k, v in counts.items())
    return CriterionResult(
        "C5", "seeded fit round-trips", detail,
        ">= 95/100 within stated tolerances", ok)


def _c6_fn_linearity(cfg):
    tip = cfg.tip()

    def current(u):
        return float(dc_current(u, tip))

    u_lo, u_hi = decade_voltage_range(current, cfg.sweep_u_stop, 1.0)
    u = np.linspace(u_lo, u_hi, cfg.sweep_points)
    data = SweepDataset(x=u, y=dc_current(u, tip), kind="iv")
    pts = fn_linearize(data)
    r2 = linear_r2(pts[:, 0], pts[:, 1])
    return CriterionResult(
        "C6", "linearized tunneling plot straightness",
        f"R^2 = {r2:.7f} over one current decade",
        "R^2 > 0.999", r2 > 0.999)


def _c7_polarization_structure(cfg):
    model = cos2_model()
    p = np.array([1.0, 0.2, 0.0])
    grid = np.linspace(-math.pi, math.pi, 721)
    y = model.fn(grid, p)
    y0 = model.fn(np.array([0.0]), p)[0]
    cos2_max_ok = bool(np.all(y <= y0 + 1e-12))
    per = np.max(np.abs(model.fn(grid, p) - model.fn(grid + math.pi, p)))
    cos2_periodic_ok = per <= 1e-12

    f_dc, f_l, g, h = cfg.ofe_f_dc, cfg.ofe_f_laser, cfg.ofe_g, cfg.ofe_h
    y_fwd = ofe_peak_field_current(grid, f_dc, f_l, g, h)
    y_rev = ofe_peak_field_current(-grid, f_dc, f_l, g, h)
    even_dev = float(np.max(np.abs(y_fwd - y_rev)) / np.max(y_fwd))
    dc_value = g * f_dc**2 * math.exp(-h / f_dc)
    at_perp = ofe_peak_field_current(math.pi / 2.0, f_dc, f_l, g, h)
    perp_ok = _rel(at_perp, dc_value) <= 1e-12
    ok = cos2_max_ok and cos2_periodic_ok and even_dev <= 1e-12 and perp_ok
    return CriterionResult(
        "C7", "polarization model structure",
        f"cos2 max at 0: {cos2_max_ok}, pi-periodic: {cos2_periodic_ok}, "
        f"ofe evenness dev: {even_dev:.1e}, ofe perp/dc rel dev: "
        f"{_rel(at_perp, dc_value):.1e}",
        "max at 0; pi-periodic; even; perpendicular = DC", ok)


def _c8_spectrum(cfg):
    record = sample_pulse_train(cfg.pulses_mean, cfg.pulses_rep_rate,
                                cfg.pulses_window, cfg.seed + 4)
    spec = periodogram(record, cfg.spectrum_bin,
                       window_fn=cfg.spectrum_window_fn)
    k_peak = 1 + int(np.argmax(spec.power_dbc[1:]))
    carrier_ok = abs(spec.freqs[k_peak] - cfg.pulses_rep_rate) \
        <= spec.resolution_bw / 2.0
    width = linewidth_at_level(spec, -3.0)
    width_ok = abs(width - spec.resolution_bw) <= spec.resolution_bw
    snr = snr_at_carrier(spec, cfg.pulses_rep_rate)
    ok = carrier_ok and width_ok and snr >= 30.0
    return CriterionResult(
        "C8", "repetition-rate spectrum (desk scale)",
        f"carrier bin ok: {carrier_ok}, -3 dBc width = "
        f"{width / spec.resolution_bw:.1f} RBW, SNR = {snr:.1f} dB",
        "correct bin; width = RBW within one bin; SNR >= 30 dB", ok)


def _c9_numerical_hygiene(cfg):
    # Analytic Jacobians against central finite differences.
    worst = 0.0
    rng = np.random.default_rng(cfg.seed + 9)
    for model_id in ("dc-fn", "photofield", "cos2", "ofe"):
        model, truth, x = model_from_config(model_id, cfg)
        for _ in range(3):
            u = rng.uniform(-1, 1, len(truth))
            p = np.where(truth != 0.0, truth * (1.0 + 0.1 * u), 0.1 * u)
            J = model.jacobian(x, p)
            for j in range(len(p)):
                hstep = 1e-6 * abs(p[j])
                pp = p.copy(); pp[j] += hstep
                pm = p.copy(); pm[j] -= hstep
                col = (model.fn(x, pp) - model.fn(x, pm)) / (2.0 * hstep)
                denom = max(np.max(np.abs(J[:, j])), 1e-300)
                worst = max(worst, float(np.max(np.abs(col - J[:, j])) / denom))
    jac_ok = worst <= 1e-6

    # Cycle-average self-consistency under resolution doubling.
    fs = FieldState(f_dc=1.5e9, f_laser_peak=8e8, theta=0.0)

    def integrand(ph):
        return fn_current_density(fs.f_dc + fs.f_laser_peak * np.cos(ph), 4.5)

    _, n_conv = adaptive_mean(integrand, rel_tol=cfg.quadrature_rel_tol,
                              max_doublings=cfg.quadrature_max_doublings)
    m1 = periodic_mean(integrand, n_conv)
    m2 = periodic_mean(integrand, 2 * n_conv)
    quad_dev = abs(m2 - m1) / abs(m2)
    quad_ok = quad_dev <= 1e-8

    # Poisson dispersion (Fano factor) at desk scale.
    counts = np.random.default_rng(cfg.seed + 19).poisson(1.0, 1_000_000)
    fano = counts.var() / counts.mean()
    fano_ok = abs(fano - 1.0) <= 0.05

    # Parseval identity of the spectrum normalization.
    rec = sample_pulse_train(1.0, 1e6, 4096e-6, cfg.seed + 29)
    series = binned_current(rec, 2.5e-7)
    _, power = power_spectrum(series, 2.5e-7)
    parseval_dev = abs(power.sum() - np.mean(series**2)) / np.mean(series**2)
    parseval_ok = parseval_dev <= 1e-9

    ok = jac_ok and quad_ok and fano_ok and parseval_ok
    return CriterionResult(
        "C9", "numerical hygiene",
        f"jacobian dev {worst:.1e}, quadrature dev {quad_dev:.1e}, "
        f"Fano {fano:.4f}, Parseval dev {parseval_dev:.1e}",
        "<=1e-6; <=1e-8; 1 +/- 0.05; <=1e-9", ok)


def _serialize_for_determinism(cfg, seed):
    model, truth, x = model_from_config("dc-fn", cfg)
    data = synthesize_sweep(model, truth, x, cfg.noise_rel, seed)
    fit = fit_dc_fn(data, cfg.tip_work_function, cfg.tip_field_factor,
                    **cfg.fit_options())
    rec = sample_pulse_train(cfg.pulses_mean, 1e5, 0.01, seed)
    parts = [repr(list(map(float, data.y))),
             repr(sorted(fit.params.items())),
             repr(list(map(int, rec.counts[:100])))]
    return "\n".join(parts)


def _c10_determinism(cfg):
    a = _serialize_for_determinism(cfg, cfg.seed)
    b = _serialize_for_determinism(cfg, cfg.seed)
    ok = a == b
    return CriterionResult(
        "C10", "seeded pipeline determinism",
        "identical" if ok else "MISMATCH", "byte-identical reruns", ok)


CRITERIA = [_c1_effective_work_function, _c2_closing_estimates,
            _c3_enhancement, _c4_stretching, _c5_fit_roundtrips,
            _c6_fn_linearity, _c7_polarization_structure, _c8_spectrum,
            _c9_numerical_hygiene, _c10_determinism]


def evaluate_criteria(cfg: RunConfig) -> list:
    return [fn(cfg) for fn in CRITERIA]


def format_scorecard(rows) -> str:
    lines = ["criterion  status  description",
             "-" * 72]
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.cid:<9}  {status:<6}  {r.label}")
        lines.append(f"{'':<9}          measured: {r.measured}")
        lines.append(f"{'':<9}          target:   {r.target}")
    n_pass = sum(r.passed for r in rows)
    lines.append("-" * 72)
    lines.append(f"{n_pass}/{len(rows)} criteria passed")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Figure/table pipeline
# ---------------------------------------------------------------------------

def _fit_curve_points(x_dense, y_dense):
    u = np.abs(x_dense)
    return np.column_stack([1.0 / u, np.log(y_dense / u**2)])


def run_paper_report(cfg: RunConfig, outdir: str) -> list:
    """Run the full reproduction pipeline; returns the scorecard rows."""
    os.makedirs(outdir, exist_ok=True)
    tip = cfg.tip()
    opts = cfg.fit_options()

    # Dark and laser-on current-voltage sweeps with their fits.
    dc_model, dc_truth, u_grid = model_from_config("dc-fn", cfg)
    dc_data = synthesize_sweep(dc_model, dc_truth, u_grid, cfg.noise_rel,
                               cfg.seed)
    dc_fit = fit_dc_fn(dc_data, cfg.tip_work_function, cfg.tip_field_factor,
                       **opts)
    r_hat = dc_fit.params["radius"]

    phi_eff = photofield_phi_eff(cfg.tip_work_function, cfg.laser_wavelength)
    pf_model, pf_truth, _ = model_from_config("photofield", cfg)
    pf_data = synthesize_sweep(pf_model, pf_truth, u_grid, cfg.noise_rel,
                               cfg.seed + 1)
    pf_fit = fit_photofield(pf_data, r_hat, phi_eff, cfg.tip_field_factor,
                            **opts)
    f_hat = pf_fit.params["f_laser"]
    enhancement = infer_enhancement(f_hat, cfg.laser())

    u_dense = np.linspace(u_grid[0], u_grid[-1], 200)
    dc_curve = dc_model.fn(u_dense, dc_fit.values())
    pf_curve = pf_model.fn(u_dense, pf_fit.values())
    band = [pf_model.fn(u_dense, np.array([f_hat * s])) for s in (0.75, 1.25)]

    write_sweep_csv(os.path.join(outdir, "iv_dc_data.csv"), dc_data)
    write_sweep_csv(os.path.join(outdir, "iv_photofield_data.csv"), pf_data)
    write_rows(os.path.join(outdir, "iv_fit_curves.csv"),
               ["voltage_V", "dark_fit_A", "laser_fit_A",
                "laser_fit_minus25_A", "laser_fit_plus25_A"],
               zip(u_dense, dc_curve, pf_curve, band[0], band[1]))
    figures.fn_plot_figure(
        os.path.join(outdir, "fn_plots.png"),
        dc={"points": fn_linearize(dc_data),
            "fit": _fit_curve_points(u_dense, dc_curve)},
        photo={"points": fn_linearize(pf_data),
               "fit": _fit_curve_points(u_dense, pf_curve),
               "band": [_fit_curve_points(u_dense, b) for b in band]})

    # Low-power polarization scan.
    c2_model, c2_truth, th_grid = model_from_config("cos2", cfg)
    c2_data = synthesize_sweep(c2_model, c2_truth, th_grid, 0.03, cfg.seed + 2)
    c2_fit = fit_cos2_background(c2_data, **opts)
    th_dense = np.linspace(-math.pi, math.pi, 361)
    c2_curve = c2_model.fn(th_dense, c2_fit.values())
    write_sweep_csv(os.path.join(outdir, "polarization_cos2_data.csv"), c2_data)
    write_rows(os.path.join(outdir, "polarization_cos2_fit.csv"),
               ["theta_rad", "current_A"], zip(th_dense, c2_curve))
    figures.polarization_figure(
        os.path.join(outdir, "polarization_cos2.png"),
        c2_data.x, c2_data.y, th_dense, c2_curve)

    # High-power polarization scan (optical field emission).
    ofe_m, ofe_truth, _ = model_from_config("ofe", cfg)
    ofe_data = synthesize_sweep(ofe_m, ofe_truth, th_grid, 0.03, cfg.seed + 3)
    ofe_fit = fit_ofe_polarization(ofe_data, cfg.ofe_f_dc, **opts)
    ofe_curve = ofe_m.fn(th_dense, ofe_fit.values())
    write_sweep_csv(os.path.join(outdir, "polarization_ofe_data.csv"), ofe_data)
    write_rows(os.path.join(outdir, "polarization_ofe_fit.csv"),
               ["theta_rad", "current_A"], zip(th_dense, ofe_curve))
    figures.polarization_figure(
        os.path.join(outdir, "polarization_ofe.png"),
        ofe_data.x, ofe_data.y, th_dense, ofe_curve)

    # Repetition-rate spectrum at desk scale.
    record = sample_pulse_train(cfg.pulses_mean, cfg.pulses_rep_rate,
                                cfg.pulses_window, cfg.seed + 4)
    spec = periodogram(record, cfg.spectrum_bin,
                       window_fn=cfg.spectrum_window_fn)
    write_pulse_counts(os.path.join(outdir, "pulse_counts.csv"),
                       record.counts[:10000])
    k = spec.carrier_index
    lo, hi = max(0, k - 200), min(len(spec.freqs), k + 201)
    write_rows(os.path.join(outdir, "spectrum.csv"),
               ["freq_Hz", "power_dBc"],
               zip(spec.freqs[lo:hi], spec.power_dbc[lo:hi]))
    figures.spectrum_figure(os.path.join(outdir, "rep_rate_spectrum.png"),
                            spec.freqs, spec.power_dbc, cfg.pulses_rep_rate)

    # Closing estimates.
    m = beam.pulse_metrics(cfg.metrics_n_electrons, cfg.metrics_tau,
                           cfg.metrics_area, cfg.metrics_solid_angle)
    write_rows(os.path.join(outdir, "metrics.csv"),
               ["quantity", "value", "unit"],
               [("instantaneous_current", m.i_inst, "A"),
                ("emission_rate",
                 beam.emission_rate(cfg.metrics_n_electrons, cfg.metrics_tau),
                 "1/s"),
                ("current_density", m.j_inst, "A/m^2"),
                ("current_density_kA_cm2",
                 beam.amps_per_m2_to_ka_per_cm2(m.j_inst), "kA/cm^2"),
                ("brightness", m.brightness, "A/(m^2 sr)"),
                ("solid_angle_assumed", m.solid_angle, "sr")])

    # Scorecard against the acceptance criteria.
    rows = evaluate_criteria(cfg)
    write_rows(os.path.join(outdir, "criteria.csv"),
               ["id", "label", "measured", "target", "passed"],
               [(r.cid, r.label, r.measured, r.target, r.passed)
                for r in rows])
    summary = [
        "paper-report summary",
        f"fitted tip radius: {r_hat * 1e9:.2f} +/- "
        f"{dc_fit.sigma('radius') * 1e9:.2f} nm "
        f"(truth {cfg.tip_radius * 1e9:.1f} nm)",
        f"fitted laser field: {f_hat / 1e9:.3f} +/- "
        f"{pf_fit.sigma('f_laser') / 1e9:.3f} GV/m "
        f"(truth {cfg.photofield_f_laser / 1e9:.2f} GV/m)",
        f"inferred enhancement factor: {enhancement:.2f} "
        "(rms free-space-field convention)",
        f"cos^2 fit: A={c2_fit.params['amplitude']:.3e} A, "
        f"B={c2_fit.params['background']:.3e} A, "
        f"theta0={c2_fit.params['theta0']:.4f} rad",
        f"ofe fit: f_laser={ofe_fit.params['f_laser']:.3e} V/m, "
        f"g-h correlation={ofe_fit.extras['gh_correlation']:.4f}",
        f"spectrum: SNR={snr_at_carrier(spec, cfg.pulses_rep_rate):.1f} dB, "
        f"-3 dBc width={linewidth_at_level(spec) / spec.resolution_bw:.1f} RBW",
        "",
        format_scorecard(rows),
    ]
    with open(os.path.join(outdir, "report_summary.txt"), "w",
              encoding="utf-8", newline="") as fh:
        fh.write("\n".join(summary) + "\n")
    return rows
