"""Influence diffusion on enhanced configuration-model networks.

Three cross-validating tracks for the size of a viral campaign: direct
simulation on realized graphs, plug-in estimation from pioneer degree
data, and closed-form analysis of the population law; plus a staged
decision procedure for evaluating an ongoing campaign.
"""

from .analytic import (
    AnalyticResult,
    BranchingCheck,
    GenFnBundle,
    RootBracketingError,
    SizeBiasedLaw,
    analyze,
    bernoulli_threshold,
    branching_crosscheck,
    build_genfns,
    eval_H,
    eval_H0,
    eval_Hbar,
    find_root,
    fractions,
    giant_condition,
    size_biased_law,
    viral_condition,
)
from .diffusion import (
    DiffusionOutcome,
    all_reach,
    classify_good_pioneers,
    influenced_set,
    reverse_reach,
    sampled_reach,
)
from .estimators import (
    ConditionTest,
    EstimationReport,
    EvalConfig,
    FractionEstimates,
    effectiveness_test,
    estimate_fractions,
    evaluate_campaign,
    fragmentation_test,
    load_sample_csv,
    write_sample_csv,
)
from .graph import EnhancedGraph, build, degree_checksums, write_edgelist
from .populations import (
    BernoulliTransmission,
    CouponCollector,
    DegreeSample,
    EmpiricalDegree,
    JointDegreeLaw,
    JointMoments,
    NodePercolation,
    PoissonDegree,
    PowerLawDegree,
    conditional_transmitter_pmf,
    moments,
    sample_joint,
)
from .special import (
    DiscretePmf,
    pgf_derivative,
    pgf_eval,
    poisson_pmf,
    polylog,
    stirling2,
    zeta,
    zipf_pmf,
)

__version__ = "0.1.0"
