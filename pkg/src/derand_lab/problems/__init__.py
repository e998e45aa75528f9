from .balancing import (
    balancing_system,
    failure_rate,
    gen_binary_matrix,
    threshold,
    verify_balancing,
)
from .bounds import success_probability_bounds
from .graphs import (
    Partition,
    RegularGraph,
    component_count,
    cycles_system,
    gen_regular_graph,
    neighbor_condition_rate,
    stronger_neighbor_condition,
    verify_cycle_partition,
)
from .ksat import (
    BoundedKSatFormula,
    gen_bounded_ksat,
    ksat_system,
    occurrence_cap,
    satisfaction_rate,
    verify_ksat,
)

__all__ = [
    "BoundedKSatFormula",
    "Partition",
    "RegularGraph",
    "balancing_system",
    "component_count",
    "cycles_system",
    "failure_rate",
    "gen_binary_matrix",
    "gen_bounded_ksat",
    "gen_regular_graph",
    "ksat_system",
    "neighbor_condition_rate",
    "occurrence_cap",
    "satisfaction_rate",
    "stronger_neighbor_condition",
    "success_probability_bounds",
    "threshold",
    "verify_balancing",
    "verify_cycle_partition",
    "verify_ksat",
]
