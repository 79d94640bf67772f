"""Lipschitz interpolation regression under bounded noise, LACKI estimation and online control."""
from .core import (HolderMetric, LipschitzInterpolator, MultiOutputSampleSet, SampleSet, add_sample,
                   boundary_estimators, ceiling, envelope, floor, holder_distance, predict, predict_multi,
                   sup_error)
from .errors import (CapabilityError, ConfigurationError, DegenerateDataError, DimensionError, EmptyDataError,
                     InputError, LipInterpError)
from .lacki import LackiState, lacki_full, lacki_predict, lacki_update
from .noise import NoiseModel, boundary_mass, empirical_eta_check, make_power_boundary, make_uniform, sample_noise

__version__ = "0.1.0"
