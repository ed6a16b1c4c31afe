"""Complete EFX allocations of indivisible goods on multigraphs.

Goods are edges and agents are vertices; each agent only values the edges
at its own endpoints. Three structural regimes are supported: bipartite
multigraphs, multigraphs with few neighbors per vertex, and multigraphs
whose simple projection has girth at least six.
"""

from efxmulti.errors import (
    EfxError, FormatError, InstanceError, InvariantBreach, NoApplicableRegime,
    NonMonotoneError, PreconditionError, ValuationError,
)
from efxmulti.instance import (
    BIPARTITE, BOUNDED, GIRTH6, REGIMES, MultigraphInstance, RegimeReport,
    build_instance, detect_regimes, format_instance, generate, parse_instance,
)
from efxmulti.valuation import (
    ValuationProfile, additive_profile, audit_monotone, format_valuation, make_additive,
    make_seeded_monotone, parse_valuation, table_profile, value,
)
from efxmulti.cuts import (
    BundleTable, build_bundle_table, choose_bundles, efx_cut, find_common_cut, three_partition,
)
from efxmulti.state import AllocationState, check_property, envy_report, is_efx, unpb
from efxmulti.pipeline import Solution, solve
from efxmulti.trace import PipelineTrace
from efxmulti.verify import audit_trace, brute_force_efx, check_allocation
from efxmulti.kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "AllocationState", "BACKEND", "BIPARTITE", "BOUNDED", "BundleTable", "EfxError",
    "FormatError", "GIRTH6", "InstanceError", "InvariantBreach", "MultigraphInstance",
    "NoApplicableRegime", "NonMonotoneError", "PipelineTrace", "PreconditionError", "REGIMES",
    "RegimeReport", "Solution", "ValuationError", "ValuationProfile", "additive_profile",
    "audit_monotone", "audit_trace", "brute_force_efx", "build_bundle_table", "build_instance",
    "check_allocation", "check_property", "choose_bundles", "detect_regimes", "efx_cut",
    "envy_report", "find_common_cut", "format_instance", "format_valuation", "generate",
    "is_efx", "make_additive", "make_seeded_monotone", "parse_instance", "parse_valuation",
    "solve", "table_profile", "three_partition", "unpb", "value",
]
