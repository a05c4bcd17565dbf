"""Joint, limb, and hierarchy recovery from world-transform streams."""

from .capture import (
    BodyTrack,
    CaptureSession,
    load_labels,
    load_session,
    with_labels,
    write_labels,
    write_session,
)
from .errors import (
    AllZeroError,
    DegenerateInputError,
    DuplicateCellError,
    IncompleteMatrixError,
    InvalidSpecError,
    LengthMismatchError,
    MissingCellError,
    MissingRotationError,
    NotAdjacentError,
    ParseError,
    SingularRotationError,
    SkelfitError,
)
from .hierarchy import (
    DEFAULT_LOOP_FACTOR,
    FitMatrix,
    HierarchyResult,
    build_fit_matrix,
    infer_hierarchy,
    load_parent_map,
    write_fit_matrix_csv,
    write_parent_map,
)
from .rigid import (
    Transform,
    apply,
    compose,
    invert,
    orthonormality_error,
    relative,
    rotation_about_axis,
)
from .skeleton import (
    Joint,
    SkeletonModel,
    adjacent_joint_pairs,
    fit_skeleton,
    forward_kinematics,
    joint_gaps,
    limb_length,
    load_skeleton,
    reconstruct,
    save_skeleton,
)
from .solver import (
    DEFAULT_RANK_TOL,
    NOISELESS_RANK_TOL,
    Classification,
    JointFit,
    ResidualHistogram,
    ResidualSummary,
    assemble_system,
    classify_rank,
    residual_histogram,
    residual_summary,
    residual_timeline,
    solve_joint,
)
from .synth import (
    PRESETS,
    Excitation,
    NoiseSpec,
    PairCalibration,
    RootMotion,
    SynthBody,
    SynthSpec,
    calibrate_pair,
    figure16_spec,
    generate,
    linkage_spec,
    load_spec,
    rigid_pair_spec,
    rotational_dof,
    save_spec,
    truth_model,
)

__version__ = "0.1.0"

__all__ = [
    "AllZeroError",
    "BodyTrack",
    "CaptureSession",
    "Classification",
    "DEFAULT_LOOP_FACTOR",
    "DEFAULT_RANK_TOL",
    "DegenerateInputError",
    "DuplicateCellError",
    "Excitation",
    "FitMatrix",
    "HierarchyResult",
    "IncompleteMatrixError",
    "InvalidSpecError",
    "Joint",
    "JointFit",
    "LengthMismatchError",
    "MissingCellError",
    "MissingRotationError",
    "NOISELESS_RANK_TOL",
    "NoiseSpec",
    "NotAdjacentError",
    "PRESETS",
    "PairCalibration",
    "ParseError",
    "ResidualHistogram",
    "ResidualSummary",
    "RootMotion",
    "SingularRotationError",
    "SkeletonModel",
    "SkelfitError",
    "SynthBody",
    "SynthSpec",
    "Transform",
    "adjacent_joint_pairs",
    "apply",
    "assemble_system",
    "build_fit_matrix",
    "calibrate_pair",
    "classify_rank",
    "compose",
    "figure16_spec",
    "fit_skeleton",
    "forward_kinematics",
    "generate",
    "infer_hierarchy",
    "invert",
    "joint_gaps",
    "limb_length",
    "linkage_spec",
    "load_labels",
    "load_parent_map",
    "load_session",
    "load_skeleton",
    "load_spec",
    "orthonormality_error",
    "reconstruct",
    "relative",
    "residual_histogram",
    "residual_summary",
    "residual_timeline",
    "rigid_pair_spec",
    "rotation_about_axis",
    "rotational_dof",
    "save_skeleton",
    "save_spec",
    "solve_joint",
    "truth_model",
    "with_labels",
    "write_fit_matrix_csv",
    "write_labels",
    "write_parent_map",
    "write_session",
]
