"""Sumset and entropy-inequality workbench over finite abelian groups.

The package computes sumset quantities (including restricted sums and the
flattening map to the integers), maximizes pushforward entropies over
couplings with certified duality gaps, relates the magnification ratio of
bipartite graphs to an entropic optimization, constructs Markov chains of
linked copies with exact entropy identities, counts types for exact
large-deviation and sumset-growth computations, and fuzzes the whole
inequality catalogue on seeded random instances.
"""

__version__ = "0.1.0"

from .coupling import (
    Coupling,
    SolveResult,
    d_hr,
    grid_oracle,
    max_pushforward_entropy,
    pushforward_dist,
    pushforward_entropy,
    transport_lmo,
)
from .dist import Dist, shannon_entropy
from .groups import (
    Element,
    FiniteSet,
    GroupSpec,
    LinearForm,
    choose_q,
    flatten,
    linear_image,
    restricted_sumset,
    ruzsa_distance,
    sumset,
)
from .harness import (
    HarnessConfig,
    SuiteReport,
    WitnessReport,
    generate_instance,
    ordering_witnesses,
    registry_ids,
    run_suite,
)
from .magnification import (
    BipartiteGraph,
    Channel,
    ClassPartition,
    EquivClass,
    InnerMaxResult,
    KktCertificate,
    LambdaResult,
    MuResult,
    equivalence_classes,
    inner_max,
    kkt_check,
    lambda_entropic,
    mu_combinatorial,
    neighborhood,
    reweight_path,
)
from .markov import (
    ChainSpec,
    FourCopyChain,
    JointDist,
    build_four_copy_chain,
    build_sum_diff_coupling,
    chain_joint,
    chain_rule_residual,
    independent_sum_diff_slack,
    markov_chain_joint,
    sum_diff_slack,
    verify_chain_rule_identity,
    verify_copy_identity,
)
from .types_sanov import (
    TypeVector,
    TypicalSetConfig,
    count_types,
    enumerate_types,
    kl_bits,
    nearest_type,
    sanov_exact,
    sumset_growth_rate,
    sumset_typical_count,
    type_class_size,
    type_log_probability,
    typical_counts_band,
    typical_set_size,
)

__all__ = [
    "__version__",
    "BipartiteGraph",
    "ChainSpec",
    "Channel",
    "ClassPartition",
    "Coupling",
    "Dist",
    "Element",
    "EquivClass",
    "FiniteSet",
    "FourCopyChain",
    "GroupSpec",
    "HarnessConfig",
    "InnerMaxResult",
    "JointDist",
    "KktCertificate",
    "LambdaResult",
    "LinearForm",
    "MuResult",
    "SolveResult",
    "SuiteReport",
    "TypeVector",
    "TypicalSetConfig",
    "WitnessReport",
    "build_four_copy_chain",
    "build_sum_diff_coupling",
    "chain_joint",
    "chain_rule_residual",
    "choose_q",
    "count_types",
    "d_hr",
    "enumerate_types",
    "equivalence_classes",
    "flatten",
    "generate_instance",
    "grid_oracle",
    "independent_sum_diff_slack",
    "inner_max",
    "kkt_check",
    "kl_bits",
    "lambda_entropic",
    "linear_image",
    "markov_chain_joint",
    "max_pushforward_entropy",
    "mu_combinatorial",
    "nearest_type",
    "neighborhood",
    "ordering_witnesses",
    "pushforward_dist",
    "pushforward_entropy",
    "registry_ids",
    "restricted_sumset",
    "reweight_path",
    "run_suite",
    "ruzsa_distance",
    "sanov_exact",
    "shannon_entropy",
    "sum_diff_slack",
    "sumset",
    "sumset_growth_rate",
    "sumset_typical_count",
    "transport_lmo",
    "type_class_size",
    "type_log_probability",
    "typical_counts_band",
    "typical_set_size",
    "verify_chain_rule_identity",
    "verify_copy_identity",
]
