"""femtotip: forward models, fits and statistics for laser-triggered
field-emission electron sources."""

from .constants import CODATA2018, PhysicalConstants
from .emission import (BarrierModel, FieldState, NordheimParams,
                       STANDARD_BARRIER, T_CORRECTED_BARRIER, TipSpec,
                       dc_current, emitted_current, fn_current_density,
                       nordheim_params, nordheim_v, ofe_cycle_averaged_density,
                       ofe_instantaneous_density, ofe_peak_field_current,
                       ofe_peak_field_model, photofield_current,
                       photofield_phi_eff, photon_energy_ev, schottky_ratio,
                       tip_field_from_voltage)
from .errors import (DataError, DomainError, FemtotipError, NumericalError,
                     QuadratureError, UsageError)
from .fitting import (FitResult, Model, SweepDataset, cos2_model, dc_fn_model,
                      fit_cos2_background, fit_dc_fn, fit_ofe_polarization,
                      fit_photofield, fn_linearize, least_squares, ofe_model,
                      photofield_model)
from .laser import (DEFAULT_GDD, LaserSpec, enhanced_tip_field,
                    field_from_intensity, free_space_field, infer_enhancement,
                    matched_gdd, peak_intensity, pulse_energy,
                    stretched_duration)
from .pulsetrain import (PulseTrainRecord, SpectrumEstimate,
                         linewidth_at_level, mean_electrons_per_pulse,
                         periodogram, photo_fraction, sample_pulse_train,
                         snr_at_carrier)
from .beam import (PulseMetrics, brightness, current_density, emission_rate,
                   instantaneous_current, pulse_metrics)

__version__ = "0.1.0"
