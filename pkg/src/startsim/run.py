"""Scenario runner: wires a config into engine + topology + endpoints,
collects traces and windowed metrics, and drives parameter sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .controllers import make_controller
from .engine import SOURCE_START, Simulator, RunStats
from .metrics import (MetricsReport, TraceRecord, compute_link_utilization,
                      jain_fairness, trace_to_text)
from .network import build_dumbbell
from .scenario import ScenarioConfig
from .tcp import TcpReceiver, TcpSender
from .traffic import UdpCbrSource, UdpSink


class _WindowAcc:
    """Per-measurement-window counters, fed by hooks during the run."""

    __slots__ = ("a", "b", "delivered_pkts", "max_seq", "drops")

    def __init__(self, a, b, flow_ids):
        self.a = a
        self.b = b
        self.delivered_pkts = {fid: 0 for fid in flow_ids}
        self.max_seq = {fid: -1 for fid in flow_ids}
        self.drops = 0


class _TraceSampler:
    """Samples every flow at a fixed interval; extra rows are appended by
    the loss / phase-change hooks."""

    def __init__(self, sim, interval_s, senders, queue, records):
        self.sim = sim
        self.interval_s = interval_s
        self.senders = senders
        self.queue = queue
        self.records = records

    def begin(self):
        self.sim.schedule_at(0.0, SOURCE_START, self)

    def row(self, now, sender):
        est = sender.controller.backlog_estimate()
        self.records.append(TraceRecord(
            time_s=now, flow_id=sender.flow_id, cwnd=sender.cwnd,
            ssthresh=sender.ssthresh, phase=sender.phase,
            highest_seq_sent=sender.max_seq_sent + 1,
            highest_acked=sender.highest_acked,
            queue_pkts=self.queue.occupancy_pkts, n_est=est))

    def handle_event(self, sim, event):
        now = sim.now
        for sender in self.senders.values():
            self.row(now, sender)
        sim.schedule_at(now + self.interval_s, SOURCE_START, self)


@dataclass
class RunResult:
    cfg: ScenarioConfig
    stats: RunStats
    trace_records: list
    reports: list
    events: list                      # (time_s, flow_id, what)
    senders: dict
    receivers: dict
    fwd_queue: object = None
    rev_queue: object = None
    udp_sink: object = None
    backlog_pairs: dict = field(default_factory=dict)

    def trace_text(self) -> str:
        return trace_to_text(self.trace_records)

    def report_for(self, a, b) -> MetricsReport:
        for rep in self.reports:
            if rep.window_start_s == a and rep.window_end_s == b:
                return rep
        raise KeyError(f"no measurement window ({a}, {b})")


def run_scenario(cfg: ScenarioConfig, collect_backlog_pairs=False) -> RunResult:
    """Deterministic run of one scenario to its horizon."""
    cfg.validate()
    sim = Simulator(seed=cfg.seed, horizon_s=cfg.horizon_s)
    flow_ids = [f.flow_id for f in cfg.flows]
    windows = [_WindowAcc(a, b, flow_ids) for a, b in cfg.measurement_windows]
    trace_records = []
    events = []
    backlog_pairs = {fid: [] for fid in flow_ids} if collect_backlog_pairs else {}

    if cfg.horizon_s <= 0:
        return RunResult(cfg, RunStats(), [], [], [], {}, {})

    topo = build_dumbbell(cfg)
    senders, receivers = {}, {}

    for flow in cfg.flows:
        fid = flow.flow_id
        controller = make_controller(flow.controller, flow.params,
                                     cfg.pkt_bytes)

        def deliver_hook(now, n, fid=fid):
            for w in windows:
                if w.a <= now < w.b:
                    w.delivered_pkts[fid] += n

        def send_hook(now, seq, fid=fid):
            for w in windows:
                if now < w.b and seq > w.max_seq[fid]:
                    w.max_seq[fid] = seq

        receiver = TcpReceiver(fid, ack_bytes=cfg.ack_bytes,
                               deliver_hook=deliver_hook)
        sender = TcpSender(sim, fid, controller, pkt_bytes=cfg.pkt_bytes,
                           initial_cwnd=flow.initial_cwnd,
                           min_rto_s=cfg.min_rto_s,
                           max_packets=flow.max_packets,
                           max_burst=cfg.max_burst,
                           send_hook=send_hook)
        sender.out_port = topo.attach_source(fid, sender)
        receiver.out_port = topo.attach_sink(fid, receiver)
        senders[fid] = sender
        receivers[fid] = receiver
        sim.schedule_at(flow.start_s, SOURCE_START, sender)

    udp_sink = None
    if cfg.cross_traffic is not None:
        ct = cfg.cross_traffic
        udp = UdpCbrSource(sim, ct.flow_id, ct.rate_bps, ct.pkt_bytes,
                           ct.start_s, ct.stop_s)
        udp_sink = UdpSink(ct.flow_id)
        udp.out_port = topo.attach_source(ct.flow_id, udp)
        topo.attach_sink(ct.flow_id, udp_sink)
        udp.begin()

    sampler = _TraceSampler(sim, cfg.trace_interval_s, senders,
                            topo.fwd_bottleneck.queue, trace_records)
    sampler.begin()

    def phase_hook(now, sender, reason):
        events.append((now, sender.flow_id, reason))
        sampler.row(now, sender)

    def ack_hook(now, ack, sender):
        probe = getattr(sender.controller, "probe", None)
        if probe is None:
            return
        count = probe.congestion_event_no
        if count != sender._last_event_count:
            sender._last_event_count = count
            events.append((now, sender.flow_id, "congestive-event"))
        if (collect_backlog_pairs and ack.bneck_occupancy >= 0
                and sender.fast_recoveries == 0 and sender.timeouts == 0):
            backlog_pairs[sender.flow_id].append(
                (probe.n_est, ack.bneck_occupancy))

    for sender in senders.values():
        sender.phase_hook = phase_hook
        sender.ack_hook = ack_hook
        sender._last_event_count = 0

    def drop_hook(sim_, port, packet):
        for w in windows:
            if sim_.now < w.b:
                w.drops += 1
        fid = packet.flow_id
        events.append((sim_.now, fid, "drop"))
        if fid in senders:
            sampler.row(sim_.now, senders[fid])

    topo.fwd_bottleneck.drop_hook = drop_hook
    topo.rev_bottleneck.drop_hook = drop_hook

    stats = sim.run_until(cfg.horizon_s)

    reports = []
    pkt_bits = cfg.pkt_bytes * 8.0
    for w in windows:
        delivered_bits = {fid: n * pkt_bits
                          for fid, n in w.delivered_pkts.items()}
        tcp_bits = sum(delivered_bits.values())
        span = w.b - w.a
        started = [f.flow_id for f in cfg.flows if f.start_s < w.b]
        reports.append(MetricsReport(
            scenario_id=cfg.scenario_id,
            window_start_s=w.a,
            window_end_s=w.b,
            link_utilization=compute_link_utilization(
                tcp_bits, cfg.bottleneck_bw_bps, span),
            highest_seq_sent={fid: seq + 1 for fid, seq in w.max_seq.items()},
            throughput_bps={fid: bits / span
                            for fid, bits in delivered_bits.items()},
            jain_fairness=jain_fairness(
                [w.delivered_pkts[fid] for fid in started]),
            drops_total=w.drops,
            controllers={f.flow_id: f.controller for f in cfg.flows},
            udp_delivered_bits=(udp_sink.received_bytes * 8.0
                                if udp_sink else 0.0),
        ))

    return RunResult(cfg, stats, trace_records, reports, events,
                     senders, receivers,
                     fwd_queue=topo.fwd_bottleneck.queue,
                     rev_queue=topo.rev_bottleneck.queue,
                     udp_sink=udp_sink, backlog_pairs=backlog_pairs)


# ---------------------------------------------------------------------------
# sweeps

SWEEP_AXES = ("buffer", "delay", "bandwidth")

# the comparison set used throughout the throughput studies; SS(A) tracks
# the accurate per-point BDP and only joins the buffer sweep
SWEEP_CONTROLLERS = [
    ("ssthreshless", "ssthreshless", {}),
    ("hoe", "hoe", {}),
    ("lss", "lss", {}),
    ("ss_s", "slowstart", {"ssthresh": 32.0}),
    ("ss_a", "slowstart", {"ssthresh": "bdp"}),
    ("ss_l", "slowstart", {"ssthresh": 5000.0}),
    ("vegas", "vegas", {}),
]


def _point_config(base, axis, value, label, ctrl_name, params, horizon_s):
    from .scenario import FlowConfig   # local to avoid cycles in tooling
    cfg = ScenarioConfig(
        scenario_id=f"{axis}_{value:g}_{label}",
        bottleneck_bw_bps=base.bottleneck_bw_bps,
        bottleneck_oneway_delay_s=base.bottleneck_oneway_delay_s,
        side_bw_bps=base.side_bw_bps,
        side_delay_s=base.side_delay_s,
        buffer_pkts=base.buffer_pkts,
        pkt_bytes=base.pkt_bytes,
        ack_bytes=base.ack_bytes,
        horizon_s=horizon_s,
        seed=base.seed,
        min_rto_s=base.min_rto_s,
        trace_interval_s=base.trace_interval_s,
        measurement_windows=[(0.0, horizon_s)],
    )
    if axis == "buffer":
        cfg.buffer_pkts = int(value)
    elif axis == "delay":
        cfg.bottleneck_oneway_delay_s = value
        cfg.buffer_pkts = max(int(round(cfg.bdp_pkts() / 2.0)), 1)
    elif axis == "bandwidth":
        cfg.bottleneck_bw_bps = value
        cfg.buffer_pkts = max(int(round(cfg.bdp_pkts() / 2.0)), 1)
    else:
        raise ValueError(f"unknown sweep axis {axis!r}; expected {SWEEP_AXES}")
    params = dict(params)
    if params.get("ssthresh") == "bdp":
        params["ssthresh"] = float(round(cfg.bdp_pkts()))
    cfg.flows = [FlowConfig(controller=ctrl_name, flow_id=0, params=params)]
    return cfg


@dataclass
class SweepPoint:
    axis: str
    value: float
    label: str
    report: MetricsReport | None
    error: str | None = None


def sweep(base: ScenarioConfig, axis: str, values, controllers=None,
          horizon_s=20.0) -> list:
    """One run per (value x controller); 20 s horizon by default. Throughput
    ratio is ssthreshless over each variant at the same point. Per-point
    failures are recorded and the sweep continues."""
    if not values:
        raise ValueError("sweep values must be non-empty")
    if controllers is None:
        controllers = SWEEP_CONTROLLERS
        if axis != "buffer":
            controllers = [c for c in controllers if c[0] != "ss_a"]
    points = []
    for value in values:
        by_label = {}
        for label, ctrl_name, params in controllers:
            try:
                cfg = _point_config(base, axis, value, label, ctrl_name,
                                    params, horizon_s)
                result = run_scenario(cfg)
                report = result.reports[0]
                by_label[label] = report
                points.append(SweepPoint(axis, value, label, report))
            except Exception as exc:   # record, keep sweeping
                points.append(SweepPoint(axis, value, label, None,
                                         error=f"{type(exc).__name__}: {exc}"))
        ref = by_label.get("ssthreshless")
        if ref is not None:
            ref_tput = ref.throughput_bps.get(0, 0.0)
            for label, report in by_label.items():
                tput = report.throughput_bps.get(0, 0.0)
                report.throughput_ratio[0] = (ref_tput / tput if tput > 0
                                              else math.inf)
    return points
