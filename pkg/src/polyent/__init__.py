"""Polynomial-entropy counting experiments.

Bowen orbit metrics over rotation towers and subshifts, closed-form witness
families with verifiers, greedy count tables, and growth-exponent fits.
"""

from .bowen import (
    BOUND_EXACT,
    BOUND_SEPARATED_LOWER,
    BOUND_SPANNING_UPPER,
    CountRecord,
    SeparationCheck,
    SpanningCheck,
    bowen_dist,
    greedy_separated,
    greedy_spanning,
    max_separated_exact,
    verify_separated,
    verify_spanning,
)
from .constructions import (
    ConstructionReport,
    backward_orbit,
    certified_factor_shifts,
    certified_separated_witness,
    certified_spanning_witness,
    drift_cutoff,
    floor_reciprocal,
    separated_shift_family,
    separated_witness,
    separation_depth,
    separation_levels,
    spanning_witness,
)
from .diagnostics import (
    RecurrenceReport,
    distality_gap,
    return_time,
    uniform_recurrence_check,
    word_complexity,
)
from .estimation import (
    COUNT_METHODS,
    EntropyEstimate,
    SlopeFit,
    count_table,
    eps_sweep,
    fit_exp_rate,
    fit_poly_slope,
)
from .systems import (
    CustomHeights,
    ExpHeights,
    PowerHeights,
    SymbolicPoint,
    SymbolicWord,
    SystemHandle,
    TowerPoint,
    circle_dist,
    circle_rotation,
    full_shift,
    make_system,
    one_defect_point,
    periodic_point,
    product_system,
    shift_metric,
    sturmian_generate,
    sturmian_point,
    sturmian_system,
    tower_dist,
    tower_iterate,
    tower_map,
    tower_sample,
    tower_system,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BOUND_EXACT",
    "BOUND_SEPARATED_LOWER",
    "BOUND_SPANNING_UPPER",
    "COUNT_METHODS",
    "ConstructionReport",
    "CountRecord",
    "CustomHeights",
    "EntropyEstimate",
    "ExpHeights",
    "PowerHeights",
    "RecurrenceReport",
    "SeparationCheck",
    "SlopeFit",
    "SpanningCheck",
    "SymbolicPoint",
    "SymbolicWord",
    "SystemHandle",
    "TowerPoint",
    "backward_orbit",
    "bowen_dist",
    "certified_factor_shifts",
    "certified_separated_witness",
    "certified_spanning_witness",
    "circle_dist",
    "circle_rotation",
    "count_table",
    "distality_gap",
    "drift_cutoff",
    "eps_sweep",
    "fit_exp_rate",
    "fit_poly_slope",
    "floor_reciprocal",
    "full_shift",
    "greedy_separated",
    "greedy_spanning",
    "make_system",
    "max_separated_exact",
    "one_defect_point",
    "periodic_point",
    "product_system",
    "return_time",
    "separated_shift_family",
    "separated_witness",
    "separation_depth",
    "separation_levels",
    "shift_metric",
    "spanning_witness",
    "sturmian_generate",
    "sturmian_point",
    "sturmian_system",
    "tower_dist",
    "tower_iterate",
    "tower_map",
    "tower_sample",
    "tower_system",
    "uniform_recurrence_check",
    "verify_separated",
    "verify_spanning",
    "word_complexity",
]
