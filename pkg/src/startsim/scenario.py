"""Scenario configuration: dataclasses, validation and the plain-text
scenario file format (key = value lines with repeatable [flow] sections;
unknown keys are errors)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .controllers import CONTROLLERS


class ConfigError(Exception):
    """Invalid scenario configuration; the message names the bad field."""


UDP_FLOW_ID = 1000   # cross-traffic id, kept clear of TCP flow ids


@dataclass
class FlowConfig:
    controller: str
    flow_id: int = 0
    start_s: float = 0.0
    initial_cwnd: float = 1.0
    max_packets: int | None = None
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.controller not in CONTROLLERS:
            raise ConfigError(
                f"flow {self.flow_id}: unknown controller {self.controller!r} "
                f"(expected one of {sorted(CONTROLLERS)})")
        if self.start_s < 0:
            raise ConfigError(f"flow {self.flow_id}: start_s must be >= 0")
        if not 1 <= self.initial_cwnd <= 4:
            raise ConfigError(
                f"flow {self.flow_id}: initial_cwnd must be within [1, 4]")
        unknown = set(self.params) - set(CONTROLLERS[self.controller].PARAM_KEYS)
        if unknown:
            raise ConfigError(
                f"flow {self.flow_id}: unknown parameter(s) {sorted(unknown)} "
                f"for controller {self.controller!r}")


@dataclass
class CrossTrafficConfig:
    rate_bps: float
    pkt_bytes: int = 1000
    start_s: float = 0.0
    stop_s: float = math.inf
    flow_id: int = UDP_FLOW_ID

    def validate(self):
        if self.rate_bps <= 0:
            raise ConfigError("cross_traffic.rate_bps must be positive")
        if self.pkt_bytes <= 0:
            raise ConfigError("cross_traffic.pkt_bytes must be positive")
        if self.stop_s <= self.start_s:
            raise ConfigError("cross_traffic.stop_s must exceed start_s")


@dataclass
class ScenarioConfig:
    scenario_id: str = "scenario"
    bottleneck_bw_bps: float = 40e6
    bottleneck_oneway_delay_s: float = 0.05
    side_bw_bps: float = 500e6
    side_delay_s: float = 1e-4
    buffer_pkts: int = 250
    pkt_bytes: int = 1000
    ack_bytes: int = 40
    horizon_s: float = 10.0
    seed: int = 1
    min_rto_s: float = 0.2
    max_burst: int | None = 4
    trace_interval_s: float = 0.01
    measurement_windows: list = field(default_factory=lambda: [(0.0, 10.0)])
    flows: list = field(default_factory=list)
    cross_traffic: CrossTrafficConfig | None = None

    def bdp_pkts(self) -> float:
        """Pipe size in packets over the full round trip."""
        rtt = 2.0 * self.bottleneck_oneway_delay_s
        return self.bottleneck_bw_bps * rtt / (8.0 * self.pkt_bytes)

    def validate(self):
        for name in ("bottleneck_bw_bps", "bottleneck_oneway_delay_s",
                     "side_bw_bps", "side_delay_s", "pkt_bytes", "ack_bytes",
                     "trace_interval_s", "min_rto_s"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.buffer_pkts <= 0:
            raise ConfigError("buffer_pkts must be positive")
        if self.horizon_s < 0:
            raise ConfigError("horizon_s must be >= 0")
        if not self.flows:
            raise ConfigError("at least one [flow] is required")
        seen = set()
        for flow in self.flows:
            flow.validate()
            if flow.flow_id in seen:
                raise ConfigError(f"duplicate flow_id {flow.flow_id}")
            seen.add(flow.flow_id)
        for a, b in self.measurement_windows:
            if b <= a or a < 0:
                raise ConfigError(f"bad measurement window ({a}, {b})")
            if b > self.horizon_s:
                raise ConfigError(
                    f"measurement window ({a}, {b}) exceeds horizon "
                    f"{self.horizon_s}")
        if self.cross_traffic is not None:
            self.cross_traffic.validate()
        return self


# ---------------------------------------------------------------------------
# scenario file format

_TOP_KEYS = {
    "scenario_id": str,
    "bottleneck_bw_bps": float,
    "bottleneck_oneway_delay_s": float,
    "side_bw_bps": float,
    "side_delay_s": float,
    "buffer_pkts": int,
    "pkt_bytes": int,
    "ack_bytes": int,
    "horizon_s": float,
    "seed": int,
    "min_rto_s": float,
    "max_burst": int,
    "trace_interval_s": float,
    "measurement_windows": None,   # parsed specially: "a:b, c:d"
}

_FLOW_KEYS = {
    "controller": str,
    "start_s": float,
    "initial_cwnd": float,
    "max_packets": int,
    # everything else must be a declared controller parameter
}

_CROSS_KEYS = {
    "rate_bps": float,
    "pkt_bytes": int,
    "start_s": float,
    "stop_s": float,
}


def _coerce(raw: str, typ, where: str):
    try:
        if typ is int:
            return int(float(raw)) if ("e" in raw or "." in raw) else int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse value {raw!r}") from None


def _parse_windows(raw: str, where: str):
    windows = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            a, b = part.split(":")
            windows.append((float(a), float(b)))
        except ValueError:
            raise ConfigError(
                f"{where}: windows must look like 'a:b, c:d', got {part!r}"
            ) from None
    return windows


def parse_scenario(text: str, scenario_id: str | None = None) -> ScenarioConfig:
    """Parse the scenario file format. Strict: any key outside the schema is
    a configuration error, so typos never silently change a run."""
    cfg = ScenarioConfig()
    cfg.measurement_windows = []
    section = None        # None | flow dict | cross dict
    flows_raw = []
    cross_raw = None

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{where}: malformed section header {line!r}")
            name = line[1:-1].strip()
            if name == "flow":
                section = {}
                flows_raw.append(section)
            elif name == "cross_traffic":
                if cross_raw is not None:
                    raise ConfigError(f"{where}: duplicate [cross_traffic]")
                cross_raw = section = {}
            else:
                raise ConfigError(f"{where}: unknown section [{name}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if section is not None:
            if key in section:
                raise ConfigError(f"{where}: duplicate key {key!r}")
            section[key] = (raw, where)
        else:
            if key not in _TOP_KEYS:
                raise ConfigError(f"{where}: unknown key {key!r}")
            if key == "measurement_windows":
                cfg.measurement_windows = _parse_windows(raw, where)
            else:
                setattr(cfg, key, _coerce(raw, _TOP_KEYS[key], where))

    for i, raw_flow in enumerate(flows_raw):
        if "controller" not in raw_flow:
            raise ConfigError(f"[flow] #{i + 1} is missing 'controller'")
        name = raw_flow.pop("controller")[0]
        flow = FlowConfig(controller=name, flow_id=i)
        allowed_params = CONTROLLERS.get(name, type("x", (), {"PARAM_KEYS": ()})).PARAM_KEYS
        for key, (raw, where) in raw_flow.items():
            if key in _FLOW_KEYS:
                setattr(flow, key, _coerce(raw, _FLOW_KEYS[key], where))
            elif key in allowed_params:
                flow.params[key] = _coerce(raw, float, where)
            else:
                raise ConfigError(f"{where}: unknown flow key {key!r}")
        cfg.flows.append(flow)

    if cross_raw is not None:
        cross = CrossTrafficConfig(rate_bps=0.0)
        for key, (raw, where) in cross_raw.items():
            if key not in _CROSS_KEYS:
                raise ConfigError(f"{where}: unknown cross_traffic key {key!r}")
            setattr(cross, key, _coerce(raw, _CROSS_KEYS[key], where))
        cfg.cross_traffic = cross

    if not cfg.measurement_windows:
        cfg.measurement_windows = [(0.0, cfg.horizon_s)] if cfg.horizon_s > 0 else []
    if scenario_id is not None:
        cfg.scenario_id = scenario_id
    return cfg.validate()


def dump_scenario(cfg: ScenarioConfig) -> str:
    """Serialize a config in the scenario file format (parse round-trips)."""
    lines = [f"scenario_id = {cfg.scenario_id}"]
    for key in ("bottleneck_bw_bps", "bottleneck_oneway_delay_s",
                "side_bw_bps", "side_delay_s"):
        lines.append(f"{key} = {getattr(cfg, key)!r}")
    for key in ("buffer_pkts", "pkt_bytes", "ack_bytes", "seed"):
        lines.append(f"{key} = {getattr(cfg, key)}")
    for key in ("horizon_s", "min_rto_s", "trace_interval_s"):
        lines.append(f"{key} = {getattr(cfg, key)!r}")
    windows = ", ".join(f"{a!r}:{b!r}" for a, b in cfg.measurement_windows)
    lines.append(f"measurement_windows = {windows}")
    for flow in cfg.flows:
        lines.append("")
        lines.append("[flow]")
        lines.append(f"controller = {flow.controller}")
        lines.append(f"start_s = {flow.start_s!r}")
        if flow.initial_cwnd != 1.0:
            lines.append(f"initial_cwnd = {flow.initial_cwnd!r}")
        if flow.max_packets is not None:
            lines.append(f"max_packets = {flow.max_packets}")
        for key, val in flow.params.items():
            lines.append(f"{key} = {val!r}")
    if cfg.cross_traffic is not None:
        ct = cfg.cross_traffic
        lines.append("")
        lines.append("[cross_traffic]")
        lines.append(f"rate_bps = {ct.rate_bps!r}")
        lines.append(f"pkt_bytes = {ct.pkt_bytes}")
        lines.append(f"start_s = {ct.start_s!r}")
        lines.append(f"stop_s = {ct.stop_s!r}")
    return "\n".join(lines) + "\n"


def load_scenario(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())
