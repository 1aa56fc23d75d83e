"""Packet, link, droptail-queue and dumbbell topology model.

Packets move hop by hop: each outgoing interface is a Port owning a FIFO
droptail queue and a serializing link. The packet being serialized does not
occupy a buffer slot.
"""

from __future__ import annotations

import math
from collections import deque

from .engine import PACKET_ARRIVAL, TX_COMPLETE, Simulator

DATA = "data"
ACK = "ack"
UDP = "udp"


class Packet:
    __slots__ = ("packet_id", "flow_id", "kind", "size_bytes", "seq",
                 "sent_at", "is_retransmit", "echo_seq", "bneck_occupancy")

    def __init__(self, packet_id, flow_id, kind, size_bytes, seq,
                 sent_at=0.0, is_retransmit=False):
        self.packet_id = packet_id
        self.flow_id = flow_id
        self.kind = kind
        self.size_bytes = size_bytes
        self.seq = seq              # data: packet sequence; ack: cumulative ack
        self.sent_at = sent_at
        self.is_retransmit = is_retransmit
        self.echo_seq = -1          # ack only: data seq that triggered it
        self.bneck_occupancy = -1   # queue depth seen at the bottleneck

    def __repr__(self):
        return (f"Packet({self.kind} id={self.packet_id} flow={self.flow_id} "
                f"seq={self.seq})")


class Link:
    """Point-to-point link with serialization and propagation delay.

    Packets depart in the order they began transmission (FIFO).
    """

    __slots__ = ("bandwidth_bps", "prop_delay_s", "busy_until")

    def __init__(self, bandwidth_bps: float, prop_delay_s: float):
        if bandwidth_bps <= 0:
            raise ValueError(f"bandwidth must be positive, got {bandwidth_bps}")
        if prop_delay_s < 0:
            raise ValueError(f"propagation delay must be >= 0, got {prop_delay_s}")
        self.bandwidth_bps = bandwidth_bps
        self.prop_delay_s = prop_delay_s
        self.busy_until = 0.0

    def serialization_s(self, size_bytes: int) -> float:
        return size_bytes * 8.0 / self.bandwidth_bps

    def transmit(self, packet: Packet, now: float) -> float:
        """Start serializing at max(now, busy_until); return far-end arrival
        time and advance busy_until past this packet."""
        start = now if now >= self.busy_until else self.busy_until
        self.busy_until = start + packet.size_bytes * 8.0 / self.bandwidth_bps
        return self.busy_until + self.prop_delay_s


class DropTailQueue:
    """FIFO queue that discards arrivals when occupancy hits capacity.

    Conservation holds at every instant:
    enqueued_total == delivered + drops_total + occupancy.
    """

    __slots__ = ("capacity_pkts", "_q", "enqueued_total", "drops_total",
                 "delivered")

    def __init__(self, capacity_pkts):
        if capacity_pkts is not None and capacity_pkts <= 0:
            raise ValueError(f"queue capacity must be positive, got {capacity_pkts}")
        self.capacity_pkts = math.inf if capacity_pkts is None else capacity_pkts
        self._q = deque()
        self.enqueued_total = 0   # every offered packet, dropped or not
        self.drops_total = 0
        self.delivered = 0        # dequeued to begin service

    @property
    def occupancy_pkts(self) -> int:
        return len(self._q)

    def enqueue(self, packet: Packet) -> bool:
        """Offer a packet; True if accepted, False if tail-dropped."""
        self.enqueued_total += 1
        if len(self._q) >= self.capacity_pkts:
            self.drops_total += 1
            return False
        self._q.append(packet)
        return True

    def pop(self):
        if not self._q:
            return None
        self.delivered += 1
        return self._q.popleft()


class Port:
    """Outgoing interface: droptail queue feeding a serializing link.

    The head-of-line packet leaves the queue when it begins serialization;
    an idle link serves arrivals immediately (they still pass the queue
    counters so conservation stays exact).
    """

    __slots__ = ("name", "link", "queue", "dest", "stamp_occupancy",
                 "drop_hook", "_wake_pending")

    def __init__(self, name, link, queue, dest=None, stamp_occupancy=False):
        self.name = name
        self.link = link
        self.queue = queue
        self.dest = dest
        self.stamp_occupancy = stamp_occupancy
        self.drop_hook = None
        self._wake_pending = False

    def offer(self, sim: Simulator, packet: Packet) -> None:
        if self.stamp_occupancy and packet.kind != ACK:
            packet.bneck_occupancy = self.queue.occupancy_pkts
        if sim.now >= self.link.busy_until and not self._wake_pending:
            # idle link: zero queueing, serve at once
            self.queue.enqueue(packet)
            self.queue.pop()
            arrival = self.link.transmit(packet, sim.now)
            sim.schedule_at(arrival, PACKET_ARRIVAL, self.dest, packet)
            return
        if self.queue.enqueue(packet):
            if not self._wake_pending:
                self._wake_pending = True
                sim.schedule_at(self.link.busy_until, TX_COMPLETE, self)
        elif self.drop_hook is not None:
            self.drop_hook(sim, self, packet)

    def handle_event(self, sim: Simulator, event) -> None:
        # TX_COMPLETE: previous serialization finished, serve the queue head.
        self._wake_pending = False
        packet = self.queue.pop()
        if packet is None:
            return
        arrival = self.link.transmit(packet, sim.now)
        sim.schedule_at(arrival, PACKET_ARRIVAL, self.dest, packet)
        if self.queue.occupancy_pkts:
            self._wake_pending = True
            sim.schedule_at(self.link.busy_until, TX_COMPLETE, self)


class Router:
    """Static dumbbell routing: listed kinds go to the bottleneck port,
    everything else is delivered on the per-flow side port."""

    __slots__ = ("name", "bottleneck_port", "bottleneck_kinds", "side_ports")

    def __init__(self, name, bottleneck_kinds):
        self.name = name
        self.bottleneck_port = None
        self.bottleneck_kinds = bottleneck_kinds
        self.side_ports = {}

    def handle_event(self, sim: Simulator, event) -> None:
        packet = event.packet
        if packet.kind in self.bottleneck_kinds:
            self.bottleneck_port.offer(sim, packet)
        else:
            self.side_ports[packet.flow_id].offer(sim, packet)


class Topology:
    """Dumbbell: per-host side links in both directions, one bottleneck link
    per direction between the two routers, droptail buffers on both."""

    def __init__(self):
        self.router_a = Router("A", bottleneck_kinds=(DATA, UDP))
        self.router_b = Router("B", bottleneck_kinds=(ACK,))
        self.fwd_bottleneck = None   # A -> B, carries data/udp
        self.rev_bottleneck = None   # B -> A, carries acks
        self.src_uplinks = {}        # flow_id -> source-side port into A
        self.dst_uplinks = {}        # flow_id -> sink-side port into B

    def attach_source(self, flow_id, endpoint) -> Port:
        """Wire a source host: returns the port the endpoint sends into,
        and routes reverse-path packets for this flow back to it."""
        self.router_a.side_ports[flow_id].dest = endpoint
        return self.src_uplinks[flow_id]

    def attach_sink(self, flow_id, endpoint) -> Port:
        self.router_b.side_ports[flow_id].dest = endpoint
        return self.dst_uplinks[flow_id]


def build_dumbbell(cfg) -> Topology:
    """Build the dumbbell for a scenario config (one side link pair per flow
    plus one for cross traffic when configured)."""
    if cfg.bottleneck_bw_bps <= 0 or cfg.side_bw_bps <= 0:
        raise ValueError("link bandwidths must be positive")
    if cfg.bottleneck_oneway_delay_s <= 0 or cfg.side_delay_s < 0:
        raise ValueError("link delays must be positive")
    if cfg.buffer_pkts <= 0:
        raise ValueError("buffer_pkts must be positive")
    if not cfg.flows:
        raise ValueError("at least one flow is required")

    topo = Topology()
    topo.fwd_bottleneck = Port(
        "A->B",
        Link(cfg.bottleneck_bw_bps, cfg.bottleneck_oneway_delay_s),
        DropTailQueue(cfg.buffer_pkts),
        dest=topo.router_b,
        stamp_occupancy=True,
    )
    topo.rev_bottleneck = Port(
        "B->A",
        Link(cfg.bottleneck_bw_bps, cfg.bottleneck_oneway_delay_s),
        DropTailQueue(cfg.buffer_pkts),
        dest=topo.router_a,
    )
    topo.router_a.bottleneck_port = topo.fwd_bottleneck
    topo.router_b.bottleneck_port = topo.rev_bottleneck

    flow_ids = [flow.flow_id for flow in cfg.flows]
    if cfg.cross_traffic is not None:
        flow_ids.append(cfg.cross_traffic.flow_id)
    for fid in flow_ids:
        side = lambda: Link(cfg.side_bw_bps, cfg.side_delay_s)
        topo.src_uplinks[fid] = Port(f"src{fid}->A", side(), DropTailQueue(None),
                                     dest=topo.router_a)
        topo.dst_uplinks[fid] = Port(f"dst{fid}->B", side(), DropTailQueue(None),
                                     dest=topo.router_b)
        # router-to-host delivery ports; dest filled by attach_*()
        topo.router_a.side_ports[fid] = Port(f"A->src{fid}", side(),
                                             DropTailQueue(None))
        topo.router_b.side_ports[fid] = Port(f"B->dst{fid}", side(),
                                             DropTailQueue(None))
    return topo
