"""Elastic shape distance and registration of curves in d-dimensional space."""
from .curve_model import (
    Curve,
    PartitionSpec,
    build_common_partition,
    load_curve,
    load_curve_file,
    normalize,
    polyline_length,
    resample,
    reverse_direction,
)
from .dp_registration import (
    Diffeomorphism,
    DpConfig,
    GridPointSet,
    adapt_dp,
    backtrack_opt_diffeom,
    procedure_dp,
    segment_energy,
)
from .errors import EsdError
from .fft_rotation import ShiftRotationCandidate, circular_cross_matrices, ku2
from .pipeline import (
    PipelineConfig,
    RegistrationResult,
    compute_esd,
    evaluate_energy,
    procedure1,
    procedure1_prime,
    procedure2,
    procedure3,
    starting_point_set,
)
from .rotation_alignment import RigidMotion, cross_matrix, fit_rigid_motion, is_rotation, ku_rotation
from .srvf import ShapeFunction, compute_srvf, shift

__version__ = "0.1.0"
