"""Survivable elastic optical network planning with XOR-coded partial protection."""

from ncpp.coding import (
    CodingGroup,
    FailureScenario,
    ProtectionSignal,
    RoutedDemand,
    build_coded_channels,
    build_plan,
    coding_feasible,
    failure_sweep,
    find_encode_node,
    simulate_failure,
)
from ncpp.optimizer import GroupShape, ProtectionConfig, enumerate_configs, evaluate_config, optimize, sweep_targets
from ncpp.report import emit, parse_jsonl, run
from ncpp.scenario import load_scenario, parse_scenario
from ncpp.slices import GridSpec, ModulationFormat, QAM16_PM, QPSK_PM, coded_slices, slice_capacity, slices_for_rate
from ncpp.topology import Link, Topology, links_on_path, load_topology

__version__ = "0.1.0"
