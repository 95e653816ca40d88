"""hardylab: exact growth calculus and a numerical ergodic-averages laboratory."""

from .hardy import (
    HardyExpr,
    HardyError,
    PrecisionExhausted,
    combine,
    compare_growth,
    degree,
    derivative,
    different_growth,
    equivalent,
    floor_eval,
    in_good_class,
    leading_term,
    shift,
    shift_combo_coefficients,
)
from .grammar import format_expr, parse_expr, parse_family
from .families import (
    TupleFamily,
    TypeMatrix,
    choose_reduction_tuple,
    is_nice,
    prime_subfamily,
    reduce_fully,
    type_less,
    type_matrix,
    vdc_operation,
)

__version__ = "0.1.0"
