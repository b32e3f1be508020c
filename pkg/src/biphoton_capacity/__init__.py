"""Mutual-information channel capacity of a pixel-detected SPDC biphoton source."""
from .state import Basis, GaussianBiphotonState, PairCovariance, fedorov_ratio, mi_continuous, pair_covariance
from .geometry import DetectorGrid, PlaneMapping, build_grid, default_extent, roi_pixels
from .joint import (
    JointDistribution,
    bivariate_rectangle_probability,
    joint_matrix,
    matrix_from_samples,
    sample_pairs,
)
from .information import (
    SEPARABILITY_BOUND,
    Direction,
    MIEstimate,
    WitnessResult,
    conditional_entropy,
    max_detectable_mi,
    mi_poisson_uncertainty,
    mutual_information,
    separability_sum,
    shannon_entropy,
)
from .experiment import (
    JointCountMatrix,
    SweepResult,
    counts_to_distribution,
    run_resolution_sweep,
    scan_time,
    simulate_counts,
)

__version__ = "0.1.0"
