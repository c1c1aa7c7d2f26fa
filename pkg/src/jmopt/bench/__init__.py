"""Problem catalog, instance generators, oracles and reports."""
from .maxcut import MaxcutInstance, SplitMix64, brute_force_maxcut, gen_maxcut
from .oracle import SampledValueFunction, brute_force_value_function
from .problems import (
    BoxMap,
    CatalogEntry,
    ProblemFile,
    ProblemSyntaxError,
    catalog,
    disconnected,
    format_problem,
    parse_problem,
    random_concave_qp,
    rescale_to_unit_box,
    unit_disk,
)
from .reports import (
    MaxcutRow,
    MaxcutSummary,
    ValueFunctionRow,
    report_maxcut_batch,
    report_value_function,
    to_csv,
)
