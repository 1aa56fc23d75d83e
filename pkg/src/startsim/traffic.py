"""Constant-bit-rate UDP cross-traffic: jitter-free emissions through the
same droptail bottleneck as the TCP data, unidirectional and unreliable."""

from __future__ import annotations

import math

from .engine import SOURCE_START, Simulator
from .network import Packet, Port, UDP


def udp_next_emission(rate_bps, pkt_bytes, start_s, stop_s, now):
    """Time of the first scheduled emission strictly after `now`, or None.
    Emissions sit on the exact grid start_s + k * interval for k >= 0 and
    stop at stop_s (exclusive)."""
    interval = pkt_bytes * 8.0 / rate_bps
    if now < start_s:
        t = start_s
    else:
        k = math.floor((now - start_s) / interval) + 1
        t = start_s + k * interval
    return t if t < stop_s else None


class UdpCbrSource:
    """Emits fixed-size datagrams at an exact inter-packet interval inside
    [start_s, stop_s); never adapts to congestion."""

    def __init__(self, sim: Simulator, flow_id, rate_bps, pkt_bytes=1000,
                 start_s=0.0, stop_s=math.inf):
        if rate_bps <= 0 or pkt_bytes <= 0:
            raise ValueError("UDP rate and packet size must be positive")
        self.sim = sim
        self.flow_id = flow_id
        self.rate_bps = rate_bps
        self.pkt_bytes = pkt_bytes
        self.start_s = start_s
        self.stop_s = stop_s
        self.interval_s = pkt_bytes * 8.0 / rate_bps
        self.out_port: Port | None = None
        self.emitted = 0

    def begin(self) -> None:
        self.sim.schedule_at(self.start_s, SOURCE_START, self)

    def handle_event(self, sim, event) -> None:
        now = sim.now
        if now >= self.stop_s:
            return
        pkt = Packet(sim.new_id(), self.flow_id, UDP, self.pkt_bytes,
                     self.emitted, sent_at=now)
        self.emitted += 1
        self.out_port.offer(sim, pkt)
        nxt = now + self.interval_s
        if nxt < self.stop_s:
            sim.schedule_at(nxt, SOURCE_START, self)


class UdpSink:
    """Counts cross-traffic deliveries; nothing is acknowledged."""

    def __init__(self, flow_id):
        self.flow_id = flow_id
        self.received = 0
        self.received_bytes = 0

    def handle_event(self, sim, event) -> None:
        self.received += 1
        self.received_bytes += event.packet.size_bytes
