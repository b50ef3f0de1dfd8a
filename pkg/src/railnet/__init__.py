"""Railway network resilience toolkit.

Models a railway network as a weighted directed graph with station
reversal penalties, quantifies its sensitivity to line-section disruptions
via flow redistribution, robustness and redundancy indices, and compares
what-if scenarios such as candidate new lines.
"""

from .expand import Arc, ExpandedGraph, PortNode, PortRole, expand, remove_sections, to_dot
from .flows import (
    FlowDelta,
    RedistributionRow,
    RedistributionTable,
    SectionUsage,
    flow_delta,
    flows_csv,
    flows_geojson,
    redistribution,
    section_flows,
)
from .metrics import (
    NriResult,
    PairNriResult,
    RedundancyResult,
    RedundancyTerm,
    nri,
    nri_pair,
    redundancy_plain,
    redundancy_reciprocal,
    redundancy_sweep,
)
from .model import (
    DEFAULT_REVERSAL_PENALTY_MIN,
    NetworkFormatError,
    RawNetwork,
    SectionEnd,
    SectionSpec,
    Side,
    StationKind,
    StationSpec,
    UnknownIdError,
    ValidationReport,
    WeightKind,
    build_network,
    contract_joint_nodes,
    parse_network,
    render_network,
    section_weight,
    travel_time_minutes,
    validate,
)
from .report import ConfigError, ReportBundle, run_report
from .routing import (
    DisconnectedNetworkError,
    PathMatrix,
    PathResult,
    ZeroCostPairError,
    all_pairs,
    reciprocal_total,
    shortest_path,
    total_cost,
)
from .scenario import (
    ComparisonReport,
    ScenarioMetrics,
    ScenarioOutcome,
    ScenarioSpec,
    apply_scenario,
    compare_scenarios,
    parse_scenario,
)

__version__ = "0.1.0"
