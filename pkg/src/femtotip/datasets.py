"""CSV ingestion/serialization and synthetic-sweep generation.

CSV conventions: comma separated, UTF-8, LF line endings, one header row
naming the columns, ``#``-prefixed comment lines ignored. Numeric cells
are written with ``repr`` so finite values round-trip bit-exactly.
"""

import csv
import io
import math
import os
from typing import Optional

import numpy as np

from .config import RunConfig
from .emission import photofield_phi_eff
from .errors import DataError, UsageError
from .fitting import (Model, SweepDataset, cos2_model, dc_fn_model, ofe_model,
                      photofield_model)

IV_COLUMNS = ("voltage_V", "current_A")
POL_COLUMNS = ("theta_rad", "current_A")

MODEL_IDS = ("dc-fn", "photofield", "cos2", "ofe")


def format_cell(value) -> str:
    """Render a cell; floats use their shortest exact representation."""
    if isinstance(value, float) or isinstance(value, np.floating):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_rows(path, header, rows) -> None:
    """Write a CSV atomically (temp file + rename), LF endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)


def _data_lines(path):
    """Yield (file line number, parsed csv row), skipping comments."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            if raw.lstrip().startswith("#") or not raw.strip():
                continue
            yield lineno, next(csv.reader([raw]))


def ingest_sweep_csv(path, kind: str) -> SweepDataset:
    """Read and validate a sweep CSV.

    For ``kind="iv"`` the abscissa column is ``voltage_V``; for
    ``kind="polarization"`` it is ``theta_rad`` (or ``theta_deg``, which
    is converted at ingestion). ``current_A`` is required and
    ``sigma_A`` optional. Errors name the offending file line.
    """
    rows = _data_lines(path)
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in header]
    if kind == "iv":
        x_names = ("voltage_V",)
    elif kind == "polarization":
        x_names = ("theta_rad", "theta_deg")
    else:
        raise DataError(f"unknown sweep kind {kind!r}")
    x_col = next((n for n in x_names if n in header), None)
    if x_col is None:
        raise DataError(
            f"{path}:{header_line}: missing column "
            f"{' or '.join(x_names)} (found {header})")
    if "current_A" not in header:
        raise DataError(f"{path}:{header_line}: missing column current_A")
    ix = header.index(x_col)
    iy = header.index("current_A")
    isig = header.index("sigma_A") if "sigma_A" in header else None

    xs, ys, sigs = [], [], []
    for lineno, cells in rows:
        if len(cells) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} cells, "
                            f"got {len(cells)}")
        try:
            x = float(cells[ix])
            y = float(cells[iy])
            sig = float(cells[isig]) if isig is not None else None
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric cell: {exc}") from exc
        if y < 0:
            raise DataError(f"{path}:{lineno}: negative current {y!r}")
        if sig is not None and not sig > 0:
            raise DataError(f"{path}:{lineno}: non-positive sigma {sig!r}")
        xs.append(x)
        ys.append(y)
        if sig is not None:
            sigs.append(sig)
    if not xs:
        raise DataError(f"{path}: no data rows")
    x = np.array(xs)
    if x_col == "theta_deg":
        x = np.deg2rad(x)
    if kind == "iv" and len(x) > 1:
        d = np.diff(x)
        if not (np.all(d > 0) or np.all(d < 0)):
            bad = int(np.nonzero(~(d > 0))[0][0]) if d[0] > 0 else \
                int(np.nonzero(~(d < 0))[0][0])
            raise DataError(
                f"{path}: voltages not strictly monotone near data row {bad + 2}")
    return SweepDataset(x=x, y=np.array(ys),
                        sigma_y=np.array(sigs) if sigs else None, kind=kind)


def write_sweep_csv(path, data: SweepDataset) -> None:
    """Serialize a sweep dataset (inverse of :func:`ingest_sweep_csv`)."""
    x_name = "voltage_V" if data.kind == "iv" else "theta_rad"
    if data.sigma_y is not None:
        header = [x_name, "current_A", "sigma_A"]
        rows = zip(data.x, data.y, data.sigma_y)
    else:
        header = [x_name, "current_A"]
        rows = zip(data.x, data.y)
    write_rows(path, header, rows)


def read_pulse_counts(path) -> np.ndarray:
    """Read a pulse-count CSV (columns pulse_index, count)."""
    rows = _data_lines(path)
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in header]
    if "count" not in header:
        raise DataError(f"{path}:{header_line}: missing column 'count'")
    ic = header.index("count")
    counts = []
    for lineno, cells in rows:
        try:
            c = int(cells[ic])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-integer count: {exc}") from exc
        if c < 0:
            raise DataError(f"{path}:{lineno}: negative count {c}")
        counts.append(c)
    if not counts:
        raise DataError(f"{path}: no data rows")
    return np.array(counts, dtype=np.int64)


def write_pulse_counts(path, counts) -> None:
    write_rows(path, ["pulse_index", "count"],
               ((int(i), int(c)) for i, c in enumerate(counts)))


def model_from_config(model_id: str, cfg: RunConfig):
    """Build ``(model, truth parameter array, x grid)`` for a model id."""
    if model_id == "dc-fn":
        model = dc_fn_model(cfg.tip_work_function, cfg.tip_field_factor)
        tip = cfg.tip()
        truth = np.array([tip.radius, tip.emit_radius])
        x = np.linspace(cfg.sweep_u_start, cfg.sweep_u_stop, cfg.sweep_points)
    elif model_id == "photofield":
        tip = cfg.tip()
        phi_eff = photofield_phi_eff(tip.work_function, cfg.laser_wavelength)
        model = photofield_model(tip.radius, phi_eff, tip.field_factor,
                                 tip.emit_radius)
        truth = np.array([cfg.photofield_f_laser])
        x = np.linspace(cfg.sweep_u_start, cfg.sweep_u_stop, cfg.sweep_points)
    elif model_id == "cos2":
        model = cos2_model()
        truth = np.array([cfg.cos2_amplitude, cfg.cos2_background,
                          cfg.cos2_theta0])
        x = np.linspace(-math.pi, math.pi, cfg.polarization_points,
                        endpoint=False)
    elif model_id == "ofe":
        model = ofe_model(cfg.ofe_f_dc)
        truth = np.array([cfg.ofe_g, cfg.ofe_h, cfg.ofe_f_laser])
        x = np.linspace(-math.pi, math.pi, cfg.polarization_points,
                        endpoint=False)
    else:
        raise UsageError(f"unknown model {model_id!r}; "
                         f"choose from {', '.join(MODEL_IDS)}")
    return model, truth, x


def synthesize_sweep(model: Model, truth, x, noise_rel: float,
                     seed: int) -> SweepDataset:
    """Forward-model evaluation plus seeded multiplicative gaussian noise.

    When noise is added, the known 1-sigma level (noise_rel times the
    clean model value) is attached to the dataset, so downstream fits use
    inverse-variance weighting.
    """
    if noise_rel < 0:
        raise DataError(f"noise must be >= 0, got {noise_rel}")
    y_clean = np.asarray(model.fn(np.asarray(x, dtype=float),
                                  np.asarray(truth)), dtype=float)
    if noise_rel == 0:
        return SweepDataset(x=np.asarray(x, dtype=float), y=y_clean.copy(),
                            kind=model.kind)
    rng = np.random.default_rng(seed)
    y = np.maximum(y_clean * (1.0 + noise_rel * rng.standard_normal(len(y_clean))),
                   0.0)
    sigma = np.maximum(noise_rel * y_clean, 1e-300)
    return SweepDataset(x=np.asarray(x, dtype=float), y=y, sigma_y=sigma,
                        kind=model.kind)


def synthesize_dataset(cfg: RunConfig, model_id: str,
                       noise_rel: Optional[float] = None,
                       seed: Optional[int] = None) -> SweepDataset:
    """Config-driven synthetic dataset for a registered model."""
    model, truth, x = model_from_config(model_id, cfg)
    return synthesize_sweep(model, truth, x,
                            cfg.noise_rel if noise_rel is None else noise_rel,
                            cfg.seed if seed is None else seed)
