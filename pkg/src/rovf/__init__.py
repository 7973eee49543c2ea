"""Random operator-valued frames built from i.i.d. random positive contractions."""

from .analysis import (
    TrialSummary,
    borel_cantelli_diagnostic,
    check_frame_bounds,
    check_mean_square_bound,
    residual_plateau,
    run_trials,
    verify_operator_identity,
)
from .dilation import Dilation, halmos_dilate, verify_dilation
from .iteration import IterationPath, StoppingRule, frame_energy, parseval_defect, run_path
from .kaczmarz import LinearSystem, error_process_equivalence, rate, solve_rk
from .linalg import apply, is_positive_contraction, lemma2_gap, make_projection, spectral
from .oracle import (
    TransferMap,
    apply_transfer,
    brute_force_paths,
    expected_frame_energy,
    expected_residual_sq,
    oracle_curve,
)
from .samplers import (
    Deterministic,
    DiscreteMixture,
    FusionFrameProjection,
    KaczmarzRow,
    RandomSpectral,
    RngStream,
    coercivity_constant,
    estimate_coercivity_mc,
    fusion_frame_bounds,
    sample,
    second_moment,
)

__version__ = "0.1.0"
