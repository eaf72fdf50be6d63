"""Class-based interference management simulator for a 7-cell cluster."""

from .assignment import (
    AssignmentDecision,
    AssignmentEngine,
    BorrowPolicy,
    Outcome,
    TrafficRequest,
    borrow_channels,
)
from .geometry import ClusterLayout, Zone, build_cluster, cochannel_interferers, distance, zone_of
from .propagation import (
    InterferenceSet,
    RadioEnvironment,
    antenna_correction,
    capacity,
    outage_probability,
    path_loss,
    received_power,
    sinr,
)
from .scenarios import MetricsRecord, ScenarioKind, evaluate, run_sweep
from .spectrum import SpectrumPlan, TrafficClass, init_spectrum

__version__ = "0.1.0"
