"""Pulsed-emission counting statistics and repetition-rate spectra.

Electron emission per laser pulse is modeled as independent Poisson
draws (the detector is treated as an ideal counter). Emission within a
pulse is collapsed to the pulse center: the pulse duration is six orders
of magnitude below the repetition period, so its effect on the
repetition-rate line is negligible.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import CODATA2018, PhysicalConstants
from .errors import DataError, DomainError

#: Hard cap on the number of simulated pulses (memory guard).
MAX_PULSES = 1 << 27

WINDOW_FUNCTIONS = ("rectangular", "hann")


@dataclass(frozen=True)
class PulseTrainRecord:
    """Per-pulse electron counts plus the timing metadata that made them."""

    counts: np.ndarray
    rep_rate: float
    window: float
    seed: int

    def __post_init__(self):
        counts = np.asarray(self.counts)
        object.__setattr__(self, "counts", counts)
        expected = int(round(self.window * self.rep_rate))
        if len(counts) != expected:
            raise DataError(
                f"counts length {len(counts)} does not match "
                f"window*rep_rate = {expected}")
        if np.any(counts < 0):
            raise DataError("counts must be nonnegative")


@dataclass(frozen=True)
class SpectrumEstimate:
    """One-sided power spectrum in dB relative to the carrier line."""

    freqs: np.ndarray
    power_dbc: np.ndarray
    resolution_bw: float
    carrier_index: int


def mean_electrons_per_pulse(i_avg: float, rep_rate: float,
                             constants: PhysicalConstants = CODATA2018) -> float:
    """Average electrons per pulse carried by a time-averaged current."""
    if i_avg < 0:
        raise DomainError(f"current must be >= 0, got {i_avg}")
    if not rep_rate > 0:
        raise DomainError(f"repetition rate must be positive, got {rep_rate}")
    return i_avg / (constants.e * rep_rate)


def sample_pulse_train(mean: float, rep_rate: float, window: float,
                       seed: int) -> PulseTrainRecord:
    """Draw per-pulse electron counts for a measurement window.

    Counts are independent Poisson draws with the given mean;
    deterministic for a fixed seed.
    """
    if mean < 0:
        raise DomainError(f"mean must be >= 0, got {mean}")
    n = int(round(window * rep_rate))
    if n < 1:
        raise DomainError("window must cover at least one pulse")
    if n > MAX_PULSES:
        raise DataError(f"{n} pulses exceeds the {MAX_PULSES} pulse cap; "
                        "use a scaled repetition rate or shorter window")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(mean, n)
    return PulseTrainRecord(counts=counts, rep_rate=rep_rate, window=window,
                            seed=seed)


def binned_current(record: PulseTrainRecord, bin: float,
                   constants: PhysicalConstants = CODATA2018):
    """Time series of the detector current [A] on a uniform bin grid.

    Each pulse deposits its charge into the bin containing the pulse
    center.
    """
    n_bins = int(round(record.window / bin))
    k = np.arange(len(record.counts))
    idx = np.floor((k + 0.5) / (record.rep_rate * bin)).astype(np.int64)
    idx = np.clip(idx, 0, n_bins - 1)
    series = np.zeros(n_bins)
    np.add.at(series, idx, record.counts * (constants.e / bin))
    return series


def power_spectrum(series: np.ndarray, dt: float):
    """One-sided mean-square power spectrum of a real series.

    Normalized so that ``sum(power)`` equals the time-domain mean-square
    power (a discrete Parseval identity). Returns ``(freqs, power)``.
    """
    n = len(series)
    spec = np.fft.rfft(series)
    power = np.abs(spec) ** 2 / n**2
    # Double the interior bins to fold the negative frequencies in.
    if n % 2 == 0:
        power[1:-1] *= 2.0
    else:
        power[1:] *= 2.0
    freqs = np.fft.rfftfreq(n, dt)
    return freqs, power


def periodogram(record: PulseTrainRecord, bin: float, *,
                window_fn: str = "rectangular",
                constants: PhysicalConstants = CODATA2018) -> SpectrumEstimate:
    """Power spectrum of the binned current around the repetition rate.

    ``bin`` must satisfy the Nyquist condition bin <= 1/(2 rep_rate) so
    that the repetition-rate line is resolvable. The spectrum is
    normalized to 0 dBc at the carrier bin.
    """
    if bin > (1.0 + 1e-12) / (2.0 * record.rep_rate):
        raise DomainError(
            f"bin {bin:g} s violates the Nyquist condition for the "
            f"{record.rep_rate:g} Hz line (need <= {1.0 / (2 * record.rep_rate):g} s)")
    if window_fn not in WINDOW_FUNCTIONS:
        raise DomainError(f"window_fn must be one of {WINDOW_FUNCTIONS}")
    series = binned_current(record, bin, constants)
    if window_fn == "hann":
        taper = np.hanning(len(series))
        series = series * (taper / math.sqrt(np.mean(taper**2)))
    freqs, power = power_spectrum(series, bin)
    carrier = int(np.argmin(np.abs(freqs - record.rep_rate)))
    if power[carrier] <= 0.0:
        raise DataError("carrier power is zero; cannot normalize to dBc")
    with np.errstate(divide="ignore"):
        power_dbc = 10.0 * np.log10(power / power[carrier])
    return SpectrumEstimate(freqs=freqs, power_dbc=power_dbc,
                            resolution_bw=1.0 / (len(series) * bin),
                            carrier_index=carrier)


def snr_at_carrier(spec: SpectrumEstimate, rep_rate: float,
                   guard_bins: int = 2) -> float:
    """Carrier power above the median off-carrier noise floor [dB].

    Bins within ``guard_bins`` of the carrier and the lowest few bins
    (DC leakage) are excluded from the floor estimate.
    """
    k = int(np.argmin(np.abs(spec.freqs - rep_rate)))
    if not (spec.freqs[0] <= rep_rate <= spec.freqs[-1]):
        raise DomainError("repetition rate lies outside the spectrum range")
    mask = np.ones(len(spec.freqs), dtype=bool)
    mask[:3] = False
    mask[max(0, k - guard_bins):k + guard_bins + 1] = False
    floor = float(np.median(spec.power_dbc[mask][np.isfinite(spec.power_dbc[mask])]))
    return float(spec.power_dbc[k] - floor)


def linewidth_at_level(spec: SpectrumEstimate, level_dbc: float = -3.0) -> float:
    """Width [Hz] of the carrier line at a level below the carrier.

    Counts the contiguous bins around the carrier that stay at or above
    ``level_dbc`` and multiplies by the resolution bandwidth.
    """
    k = spec.carrier_index
    lo = k
    while lo - 1 >= 0 and spec.power_dbc[lo - 1] >= level_dbc:
        lo -= 1
    hi = k
    while hi + 1 < len(spec.power_dbc) and spec.power_dbc[hi + 1] >= level_dbc:
        hi += 1
    return (hi - lo + 1) * spec.resolution_bw


def photo_fraction(i_laser_on: float, i_laser_off: float) -> float:
    """Fraction of the emitted current attributable to the laser."""
    if i_laser_on <= 0:
        raise DomainError("laser-on current must be positive")
    if i_laser_off < 0 or i_laser_off > i_laser_on:
        raise DomainError("need i_laser_on >= i_laser_off >= 0")
    return (i_laser_on - i_laser_off) / i_laser_on
