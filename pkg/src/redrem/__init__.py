"""Redundancy identification and removal for combinational netlists."""

from .netlist import Circuit, Kind, validate, topo_index, topo_order
from .bench_io import parse_bench, write_bench
from .remover import RemovalConfig, RemovalReport, remove_redundancy
from .oracle import (simulate, equivalent, truth_table, undetectable_faults,
                     line_observable_under, random_circuit)

__all__ = [
    "Circuit", "Kind", "validate", "topo_index", "topo_order",
    "parse_bench", "write_bench",
    "RemovalConfig", "RemovalReport", "remove_redundancy",
    "simulate", "equivalent", "truth_table", "undetectable_faults",
    "line_observable_under", "random_circuit",
]
