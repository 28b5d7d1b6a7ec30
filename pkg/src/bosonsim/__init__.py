"""Exact boson-sampling simulation, lossy-circuit modelling, and photonic
circuit tomography at desk scale."""

from .exceptions import (BosonSimError, ConvergenceError, DimensionError,
                         EmptyDistributionError, MatrixTooLargeError,
                         NotSubunitaryError, PhotonNumberMismatchError,
                         UndefinedVisibilityError,
                         UnderdeterminedPhaseSystemError)
from .fock import enumerate_outcomes, multiplicity_factor, submatrix
from .lossy import (BeamSplitterElement, CircuitTopology, DilationUnitary,
                    LossBudget, LossFitConfig, dilate, fit_loss_budget,
                    postselected_distribution, survival_probability,
                    topology_to_matrix, topology_unitary)
from .noise import (NoiseParams, PdcSource, build_p_mod, click_distribution,
                    dark_count_adjust, distinguishable_distribution,
                    higher_order_mixture, ideal_click_distribution,
                    partial_distinguishability_mixture)
from .permanent import (determinant, permanent_batch, permanent_naive,
                        permanent_ryser, permanent_ryser_reference)
from .sampling import (OutcomeDistribution, SampleRecord, distribution,
                       empirical_distribution, fermionic_distribution,
                       finite_sample_curve, l1_distance, sample)
from .tomography import (OnePhotonData, TransferMatrixEstimator,
                         TwoPhotonData, VisibilityRecord,
                         assemble_transfer_matrix, recover_magnitudes,
                         recover_phases, resample_lambda,
                         simulate_one_photon, simulate_two_photon,
                         simulate_two_photon_data)

__version__ = "0.1.0"
