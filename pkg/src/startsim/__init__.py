"""startsim: a deterministic, packet-level discrete-event network simulator
with pluggable TCP startup congestion control and a reproduction harness for
startup-phase experiments on long fat networks."""

from .controllers import (CONTROLLERS, BacklogProbe, PacketPairEstimate,
                          estimate_backlog, hoe_init_ssthresh,
                          make_controller)
from .engine import (Event, RngStream, RunStats, SchedulingInPastError,
                     SimulationError, Simulator)
from .metrics import (MetricsReport, TraceRecord, compute_link_utilization,
                      jain_fairness)
from .network import (DropTailQueue, Link, Packet, Port, Topology,
                      build_dumbbell)
from .presets import PRESET_NAMES, all_presets, preset, single_flow_config
from .run import RunResult, run_scenario, sweep
from .scenario import (ConfigError, CrossTrafficConfig, FlowConfig,
                       ScenarioConfig, dump_scenario, load_scenario,
                       parse_scenario)
from .tcp import RttEstimator, TcpReceiver, TcpSender
from .traffic import UdpCbrSource, UdpSink, udp_next_emission

__version__ = "0.1.0"

__all__ = [
    "BacklogProbe", "CONTROLLERS", "ConfigError", "CrossTrafficConfig",
    "DropTailQueue", "Event", "FlowConfig", "Link", "MetricsReport",
    "Packet", "PacketPairEstimate", "Port", "PRESET_NAMES", "RngStream",
    "RunResult", "RunStats", "ScenarioConfig", "SchedulingInPastError",
    "SimulationError", "Simulator", "TcpReceiver", "TcpSender", "Topology",
    "TraceRecord", "UdpCbrSource", "UdpSink", "all_presets",
    "build_dumbbell", "compute_link_utilization", "dump_scenario",
    "estimate_backlog", "hoe_init_ssthresh", "jain_fairness",
    "load_scenario", "make_controller", "parse_scenario", "preset",
    "run_scenario", "single_flow_config", "sweep", "udp_next_emission",
]
