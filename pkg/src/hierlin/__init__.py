"""Variable selection for high-dimensional linear regression with two-way interactions."""

__version__ = "0.1.0"

from .criteria import BIC, CriterionKind, coefficient_mse, criterion_value, r_squared_oos
from .data_gen import (
    Dataset,
    DesignConfig,
    ar1_covariance,
    generate_response,
    interaction_column,
    make_dataset,
    sample_design,
    table1_spec,
    turlach_spec,
)
from .estimators import (
    IFORMLassoRegressor,
    IFORMRegressor,
    InteractionExpander,
    TwoStageForwardRegressor,
    TwoStageLassoRegressor,
)
from .forward import CandidatePolicy, SelectionResult, forward_path, iform, oracle_fit, two_stage_forward
from .lasso import coordinate_descent, iform_lasso, soft_threshold, two_stage_lasso
from .linalg import NotPositiveDefinite, RankDeficient, cholesky, least_squares
from .model_space import (
    CodingTransform,
    EffectId,
    QuadraticModelSpec,
    apply_transform,
    check_heredity,
    importance_sets,
)

__all__ = [
    "BIC",
    "CandidatePolicy",
    "CodingTransform",
    "CriterionKind",
    "Dataset",
    "DesignConfig",
    "EffectId",
    "IFORMLassoRegressor",
    "IFORMRegressor",
    "InteractionExpander",
    "NotPositiveDefinite",
    "QuadraticModelSpec",
    "RankDeficient",
    "SelectionResult",
    "TwoStageForwardRegressor",
    "TwoStageLassoRegressor",
    "apply_transform",
    "ar1_covariance",
    "check_heredity",
    "cholesky",
    "coefficient_mse",
    "coordinate_descent",
    "criterion_value",
    "forward_path",
    "generate_response",
    "iform",
    "iform_lasso",
    "importance_sets",
    "interaction_column",
    "least_squares",
    "make_dataset",
    "oracle_fit",
    "r_squared_oos",
    "sample_design",
    "soft_threshold",
    "table1_spec",
    "turlach_spec",
    "two_stage_forward",
    "two_stage_lasso",
]
