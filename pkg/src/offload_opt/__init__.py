"""Joint task offloading and uplink power optimization for mobile call graphs."""
from .errors import (GraphValidationError, InfeasibleError, NotATreeError, OffloadError,
                     StalledScheduleError, UnsupportedStructureError)
from .graph import CallGraph, Edge, TaskNode, decompose, validate_graph
from .io import fixture_path, load_graph, load_plan, load_profile
from .parallel import (QuantGrid, evaluate_parallel, latency_recursion, solve_parallel,
                       solve_parallel_general, solve_parallel_tree, sweep_deadline)
from .physical import ConcurrencyProfile, PlatformProfile
from .plan import EnergyLatency, OffloadPlan
from .serial import evaluate_serial, solve_serial_general, solve_serial_tree, sweep_lambda
from .simulator import run as simulate

__version__ = "0.1.0"
