"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error (bad files or
physically invalid inputs), 3 numerical error (non-convergence or a
singular system).
"""

import argparse
import math
import os
import sys

import numpy as np

from . import beam, figures
from .config import load_config
from .datasets import (MODEL_IDS, ingest_sweep_csv, model_from_config,
                       read_pulse_counts, synthesize_sweep, write_pulse_counts,
                       write_rows, write_sweep_csv)
from .emission import photofield_phi_eff
from .errors import DataError, FemtotipError, NumericalError, UsageError
from .fitting import (fit_cos2_background, fit_dc_fn, fit_ofe_polarization,
                      fit_photofield, fn_linearize)
from .pulsetrain import (PulseTrainRecord, linewidth_at_level, periodogram,
                         sample_pulse_train, snr_at_carrier)
from .report import format_scorecard, run_paper_report

SUBCOMMANDS = ("simulate-iv", "simulate-polarization", "fit-iv",
               "fit-polarization", "pulse-train", "spectrum", "metrics",
               "paper-report")


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="femtotip",
                     description="Simulation and analysis toolkit for "
                                 "laser-triggered field-emission sources.")
    sub = parser.add_subparsers(dest="command")

    def add(name, help_, model=False, input_=False, noise=False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", metavar="PATH",
                       help="run configuration file (key = value lines)")
        p.add_argument("--output", metavar="DIR",
                       help="output directory (default from config)")
        p.add_argument("--seed", type=int, metavar="N",
                       help="override the config seed")
        if model:
            p.add_argument("--model", metavar="NAME", required=True,
                           help=f"model id: {', '.join(MODEL_IDS)}")
        if input_:
            p.add_argument("--input", metavar="PATH", required=True,
                           help="input CSV")
        if noise:
            p.add_argument("--noise", type=float, metavar="REL",
                           help="relative noise level (default from config)")
        return p

    add("simulate-iv", "generate a synthetic current-voltage sweep",
        model=True, noise=True)
    add("simulate-polarization", "generate a synthetic angle scan",
        model=True, noise=True)
    add("fit-iv", "fit a current-voltage sweep", model=True, input_=True)
    add("fit-polarization", "fit a polarization scan", model=True,
        input_=True)
    add("pulse-train", "simulate per-pulse electron counts")
    add("spectrum", "power spectrum of a pulse-count file", input_=True)
    add("metrics", "derived source-quality figures")
    add("paper-report", "full reproduction pipeline with scorecard")
    return parser


def _prepare(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    outdir = args.output if args.output else cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    return cfg, outdir


def _check_model(model_id, allowed):
    if model_id not in allowed:
        raise UsageError(f"model {model_id!r} not valid here; "
                         f"choose from {', '.join(allowed)}")


def _cmd_simulate(args, kinds):
    cfg, outdir = _prepare(args)
    _check_model(args.model, kinds)
    model, truth, x = model_from_config(args.model, cfg)
    noise = cfg.noise_rel if args.noise is None else args.noise
    data = synthesize_sweep(model, truth, x, noise, cfg.seed)
    prefix = "iv" if model.kind == "iv" else "pol"
    path = os.path.join(outdir, f"{prefix}_{args.model}.csv")
    write_sweep_csv(path, data)
    truth_str = ", ".join(f"{n}={v:.6g}"
                          for n, v in zip(model.param_names, truth))
    print(f"wrote {path}: {len(data)} points, model {args.model} "
          f"({truth_str}), noise {noise:g}, seed {cfg.seed}")
    return 0


def _print_fit(result, path_prefix):
    print(f"fit {result.model_id}: converged={result.converged} "
          f"after {result.n_iterations} iterations, "
          f"reduced chi^2 = {result.chi2_reduced:.4g}")
    for name in result.param_names:
        print(f"  {name} = {result.params[name]:.6g} "
              f"+/- {result.sigma(name):.2g}")
    print(f"  tables: {path_prefix}_params.csv, {path_prefix}_curve.csv; "
          f"figure: {path_prefix}.png")


def _write_fit_outputs(outdir, tag, data, model, result):
    prefix = os.path.join(outdir, f"fit_{tag}")
    write_rows(f"{prefix}_params.csv",
               ["parameter", "value", "sigma"],
               [(n, result.params[n], result.sigma(n))
                for n in result.param_names])
    if model.kind == "iv":
        x_dense = np.linspace(data.x[0], data.x[-1], 200)
    else:
        x_dense = np.linspace(-math.pi, math.pi, 361)
    y_dense = model.fn(x_dense, result.values())
    x_name = "voltage_V" if model.kind == "iv" else "theta_rad"
    write_rows(f"{prefix}_curve.csv", [x_name, "current_A"],
               zip(x_dense, y_dense))
    if model.kind == "iv":
        pts = fn_linearize(data)
        figures.fn_plot_figure(f"{prefix}.png",
                               dc={"points": pts,
                                   "fit": np.column_stack([
                                       1.0 / np.abs(x_dense),
                                       np.log(y_dense / x_dense**2)])})
    else:
        figures.polarization_figure(f"{prefix}.png", data.x, data.y,
                                    x_dense, y_dense)
    return prefix


def _cmd_fit_iv(args):
    cfg, outdir = _prepare(args)
    _check_model(args.model, ("dc-fn", "photofield"))
    data = ingest_sweep_csv(args.input, "iv")
    opts = cfg.fit_options()
    if args.model == "dc-fn":
        result = fit_dc_fn(data, cfg.tip_work_function, cfg.tip_field_factor,
                           **opts)
    else:
        phi_eff = photofield_phi_eff(cfg.tip_work_function,
                                     cfg.laser_wavelength)
        result = fit_photofield(data, cfg.tip_radius, phi_eff,
                                cfg.tip_field_factor, **opts)
    model, _, _ = model_from_config(args.model, cfg)
    prefix = _write_fit_outputs(outdir, args.model, data, model, result)
    _print_fit(result, prefix)
    if not result.converged:
        raise NumericalError(
            f"fit did not converge in {result.n_iterations} iterations")
    return 0


def _cmd_fit_polarization(args):
    cfg, outdir = _prepare(args)
    _check_model(args.model, ("cos2", "ofe"))
    data = ingest_sweep_csv(args.input, "polarization")
    opts = cfg.fit_options()
    if args.model == "cos2":
        result = fit_cos2_background(data, **opts)
    else:
        result = fit_ofe_polarization(data, cfg.ofe_f_dc, **opts)
    model, _, _ = model_from_config(args.model, cfg)
    prefix = _write_fit_outputs(outdir, args.model, data, model, result)
    _print_fit(result, prefix)
    if not result.converged:
        raise NumericalError(
            f"fit did not converge in {result.n_iterations} iterations")
    return 0


def _cmd_pulse_train(args):
    cfg, outdir = _prepare(args)
    record = sample_pulse_train(cfg.pulses_mean, cfg.pulses_rep_rate,
                                cfg.pulses_window, cfg.seed)
    path = os.path.join(outdir, "pulse_counts.csv")
    write_pulse_counts(path, record.counts)
    print(f"wrote {path}: {len(record.counts)} pulses, "
          f"mean {record.counts.mean():.4f} electrons/pulse, seed {cfg.seed}")
    return 0


def _cmd_spectrum(args):
    cfg, outdir = _prepare(args)
    counts = read_pulse_counts(args.input)
    window = len(counts) / cfg.pulses_rep_rate
    record = PulseTrainRecord(counts=counts, rep_rate=cfg.pulses_rep_rate,
                              window=window, seed=cfg.seed)
    spec = periodogram(record, cfg.spectrum_bin,
                       window_fn=cfg.spectrum_window_fn)
    path = os.path.join(outdir, "spectrum.csv")
    write_rows(path, ["freq_Hz", "power_dBc"],
               zip(spec.freqs, spec.power_dbc))
    figures.spectrum_figure(os.path.join(outdir, "spectrum.png"),
                            spec.freqs, spec.power_dbc, cfg.pulses_rep_rate)
    snr = snr_at_carrier(spec, cfg.pulses_rep_rate)
    width = linewidth_at_level(spec)
    print(f"wrote {path}: resolution {spec.resolution_bw:g} Hz, "
          f"SNR {snr:.1f} dB, -3 dBc width {width:g} Hz")
    return 0


def _cmd_metrics(args):
    cfg, outdir = _prepare(args)
    m = beam.pulse_metrics(cfg.metrics_n_electrons, cfg.metrics_tau,
                           cfg.metrics_area, cfg.metrics_solid_angle)
    rate = beam.emission_rate(cfg.metrics_n_electrons, cfg.metrics_tau)
    path = os.path.join(outdir, "metrics.csv")
    write_rows(path, ["quantity", "value", "unit"],
               [("instantaneous_current", m.i_inst, "A"),
                ("emission_rate", rate, "1/s"),
                ("current_density", m.j_inst, "A/m^2"),
                ("current_density_kA_cm2",
                 beam.amps_per_m2_to_ka_per_cm2(m.j_inst), "kA/cm^2"),
                ("brightness", m.brightness, "A/(m^2 sr)"),
                ("solid_angle_assumed", m.solid_angle, "sr")])
    print(f"wrote {path}: I_inst = {m.i_inst * 1e6:.1f} uA, "
          f"j = {beam.amps_per_m2_to_ka_per_cm2(m.j_inst):.2f} kA/cm^2, "
          f"B = {m.brightness:.3g} A/(m^2 sr) at {m.solid_angle:g} sr")
    return 0


def _cmd_paper_report(args):
    cfg, outdir = _prepare(args)
    rows = run_paper_report(cfg, outdir)
    print(format_scorecard(rows))
    print(f"artifacts written to {outdir}/")
    return 0


_HANDLERS = {
    "simulate-iv": lambda a: _cmd_simulate(a, ("dc-fn", "photofield")),
    "simulate-polarization": lambda a: _cmd_simulate(a, ("cos2", "ofe")),
    "fit-iv": _cmd_fit_iv,
    "fit-polarization": _cmd_fit_polarization,
    "pulse-train": _cmd_pulse_train,
    "spectrum": _cmd_spectrum,
    "metrics": _cmd_metrics,
    "paper-report": _cmd_paper_report,
}


def cli_dispatch(argv) -> int:
    """Run one CLI invocation; returns the process exit status."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("error: a subcommand is required "
                  f"({', '.join(SUBCOMMANDS)})", file=sys.stderr)
            return 1
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except FemtotipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
