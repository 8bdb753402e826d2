"""Finite-domain classification with a reject option.

Exact risks on finite distributions, abstaining aggregation over almost
empirical risk minimizers, its conversions to binary improper learners, the
combinatorial quantities they depend on, and Monte Carlo rate experiments.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    STAR,
    AbstainingHypothesis,
    FiniteDistribution,
    Hypothesis,
    HypothesisClass,
    LabeledSample,
    abstention_mass,
    bayes_classifier,
    bayes_risk,
    combinatorial_diameter,
    empirical_l1_distance,
    empirical_reject_risk,
    empirical_risk,
    growth_function,
    lq_risk,
    margin_parameter,
    population_l1_distance,
    population_minimizer,
    population_reject_risk,
    population_risk,
    sample,
    vc_dimension,
)
from .erm import AlmostErmSet, almost_erm_set, alpha, erm  # noqa: E402
from .errors import (  # noqa: E402
    BudgetExceededError,
    NoiseDetectedError,
    RejectLabError,
    ValidationError,
)
from .experiments import (  # noqa: E402
    Construction,
    LearnerSpec,
    LearningCurve,
    TwoFunctionFamily,
    fit_rate_slope,
    make_sparse_class,
    make_two_function_construction,
    make_wellspecified_massart,
    monte_carlo_curve,
    scaled_theorem_statistic,
    threshold_class,
)
from .misspecified import (  # noqa: E402
    CoverSpec,
    MajorityTable,
    distribution_dependent_learner,
    dpx_diameter,
    finite_diameter_learner,
    l1_cover,
    loo_error,
    majority_vote,
    memorizing_learner,
)
from .reject import (  # noqa: E402
    AbstainerModel,
    abstaining_learner,
    aggregate_lq,
    midpoint,
    q_from_p,
    reject_excess_risk,
)
from .theory import (  # noqa: E402
    DeviationStatistic,
    bernstein_estimate,
    excess_loss_deviation_check,
    identity_check_rp_lq,
    ratio_bound_check,
    target_membership_check,
)
