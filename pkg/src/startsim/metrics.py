"""Trace records, windowed metrics and bit-exact CSV emission."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TRACE_HEADER = ("time_s,flow_id,cwnd,ssthresh,phase,highest_seq_sent,"
                "highest_acked,queue_pkts,n_est")

METRICS_HEADER = ("scenario_id,controller,window_start_s,window_end_s,"
                  "utilization,highest_seq_sent,throughput_bps,"
                  "throughput_ratio,jain,drops")


def fmt6(value) -> str:
    """Fixed 6-decimal float formatting; identical bytes across runs."""
    if value == math.inf:
        return "inf"
    return f"{value:.6f}"


@dataclass
class TraceRecord:
    time_s: float
    flow_id: int
    cwnd: float
    ssthresh: float
    phase: str
    highest_seq_sent: int
    highest_acked: int
    queue_pkts: int
    n_est: float | None = None

    def to_line(self) -> str:
        n = "" if self.n_est is None else fmt6(self.n_est)
        return (f"{fmt6(self.time_s)},{self.flow_id},{fmt6(self.cwnd)},"
                f"{fmt6(self.ssthresh)},{self.phase},{self.highest_seq_sent},"
                f"{self.highest_acked},{self.queue_pkts},{n}")


def trace_to_text(records) -> str:
    lines = [TRACE_HEADER]
    lines.extend(r.to_line() for r in records)
    return "\n".join(lines) + "\n"


def write_trace(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trace_to_text(records))


def compute_link_utilization(delivered_payload_bits, bw_bps, window_s) -> float:
    """Delivered payload over capacity for the window, clamped to [0, 1]."""
    if window_s <= 0:
        raise ValueError(f"window must be positive, got {window_s}")
    util = delivered_payload_bits / (bw_bps * window_s)
    return min(max(util, 0.0), 1.0)


def jain_fairness(values) -> float:
    """(sum x)^2 / (n * sum x^2); 1.0 for a perfectly even split."""
    values = list(values)
    total_sq = sum(v * v for v in values)
    if total_sq == 0:
        return 1.0
    total = sum(values)
    return (total * total) / (len(values) * total_sq)


@dataclass
class MetricsReport:
    scenario_id: str
    window_start_s: float
    window_end_s: float
    link_utilization: float
    highest_seq_sent: dict            # flow_id -> packets released by then
    throughput_bps: dict              # flow_id -> delivered payload rate
    jain_fairness: float
    drops_total: int
    controllers: dict = field(default_factory=dict)   # flow_id -> name
    throughput_ratio: dict = field(default_factory=dict)
    udp_delivered_bits: float = 0.0

    def flow_utilization(self, flow_id, bw_bps) -> float:
        return min(self.throughput_bps.get(flow_id, 0.0) / bw_bps, 1.0)

    def csv_rows(self) -> list:
        rows = []
        for fid in sorted(self.throughput_bps):
            ratio = self.throughput_ratio.get(fid, "")
            rows.append(",".join([
                self.scenario_id,
                self.controllers.get(fid, "?"),
                fmt6(self.window_start_s),
                fmt6(self.window_end_s),
                fmt6(self.link_utilization),
                str(self.highest_seq_sent.get(fid, 0)),
                fmt6(self.throughput_bps.get(fid, 0.0)),
                fmt6(ratio) if ratio != "" else "",
                fmt6(self.jain_fairness),
                str(self.drops_total),
            ]))
        return rows


def write_metrics(reports, path) -> None:
    lines = [METRICS_HEADER]
    for report in reports:
        lines.extend(report.csv_rows())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def render_metrics_table(rows, columns) -> str:
    """Aligned text table for terminal reports."""
    widths = [len(c) for c in columns]
    str_rows = []
    for row in rows:
        cells = [str(c) for c in row]
        widths = [max(w, len(c)) for w, c in zip(widths, cells)]
        str_rows.append(cells)
    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(columns), line(["-" * w for w in widths])]
    out.extend(line(cells) for cells in str_rows)
    return "\n".join(out)
