"""Removal of chirp-like radio interference from complex SAR images.

The interference is modelled as a sum of 2-D linear-FM components that
share one azimuth FM rate. Rates are estimated by sparse recovery over chirp
dictionaries, then each component is focused by deramping and removed by
notch filtering in the 2-D spectrum.
"""
from .baselines import RpcaConfig, pca_removal, rpca_removal, rpca_scene
from .core import (ConfigError, DataError, DimensionError, FormatError, LfmComponent, LfmMixture,
                   ParameterError, RfiScrubError, energy)
from .dictionary import DictionaryOperator, ParameterGrid, default_grid
from .estimator import EstimationResult, EstimatorConfig, estimate_fm_rates
from .image_io import read_cimg, render_png, write_cimg
from .metrics import average_gradient, relative_recovery_error, sir_db
from .simulator import SimulationSpec, simulate
from .solver import SolverConfig, solve_l1
from .suppressor import BlockSpec, NotchConfig, process_blocks, suppress_component, suppress_rfi

__version__ = "0.1.0"
