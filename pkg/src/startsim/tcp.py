"""TCP sender/receiver mechanics independent of the congestion controller:
sequencing, cumulative ACKs, dupACK counting, NewReno fast recovery,
retransmission timeout, RTT sampling.

Sequence numbers count packets. The receiver acks every data packet with the
next expected sequence (no delayed ACK); the sender keeps cwnd and ssthresh
in real-valued packet units and releases new data up to floor(cwnd).
"""

from __future__ import annotations

import math

from .engine import (PACKET_ARRIVAL, SOURCE_START, TIMER_EXPIRY,
                     SimulationError, Simulator)
from .network import ACK, DATA, Packet, Port

STARTUP = "Startup"
CONGESTION_AVOIDANCE = "CongestionAvoidance"
FAST_RECOVERY = "FastRecovery"


class ProtocolError(SimulationError):
    """Impossible transport state, e.g. an ACK for a never-sent sequence."""


class RttEstimator:
    """RFC 6298 style smoothing with Karn's rule enforced by the caller.

    base_rtt_s is the minimum over all valid samples and never increases.
    The effective RTO is clamped to [min_rto_s, max_rto_s] and scaled by the
    current backoff multiplier; backoff resets when a fresh sample arrives.
    """

    __slots__ = ("base_rtt_s", "last_rtt_s", "srtt_s", "rttvar_s",
                 "min_rto_s", "max_rto_s", "backoff")

    def __init__(self, min_rto_s=0.2, max_rto_s=60.0):
        self.base_rtt_s = math.inf
        self.last_rtt_s = 0.0
        self.srtt_s = 0.0
        self.rttvar_s = 0.0
        self.min_rto_s = min_rto_s
        self.max_rto_s = max_rto_s
        self.backoff = 1.0

    def sample(self, rtt_s: float) -> None:
        if rtt_s <= 0:
            raise ProtocolError(f"non-positive RTT sample {rtt_s}")
        self.last_rtt_s = rtt_s
        if rtt_s < self.base_rtt_s:
            self.base_rtt_s = rtt_s
        if self.srtt_s == 0.0:
            self.srtt_s = rtt_s
            self.rttvar_s = rtt_s / 2.0
        else:
            err = self.srtt_s - rtt_s
            self.rttvar_s = 0.75 * self.rttvar_s + 0.25 * abs(err)
            self.srtt_s = 0.875 * self.srtt_s + 0.125 * rtt_s
        self.backoff = 1.0

    @property
    def rto_s(self) -> float:
        base = self.srtt_s + 4.0 * self.rttvar_s
        if base < self.min_rto_s:
            base = self.min_rto_s
        rto = base * self.backoff
        return rto if rto < self.max_rto_s else self.max_rto_s

    def back_off(self) -> None:
        self.backoff = min(self.backoff * 2.0, 64.0)


class TcpReceiver:
    """Cumulative-ack receiver with an out-of-order buffer. Every received
    data packet triggers exactly one ACK carrying the current cumack."""

    def __init__(self, flow_id, ack_bytes=40, deliver_hook=None):
        self.flow_id = flow_id
        self.ack_bytes = ack_bytes
        self.cumack = 0
        self.ooo = set()
        self.out_port: Port | None = None
        self.deliver_hook = deliver_hook  # called (now, newly_delivered_pkts)
        self.received_total = 0

    def handle_event(self, sim: Simulator, event) -> None:
        data = event.packet
        self.received_total += 1
        advanced = 0
        if data.seq == self.cumack:
            self.cumack += 1
            advanced += 1
            while self.cumack in self.ooo:
                self.ooo.remove(self.cumack)
                self.cumack += 1
                advanced += 1
        elif data.seq > self.cumack:
            self.ooo.add(data.seq)
        # else: duplicate below cumack, re-ack only
        if advanced and self.deliver_hook is not None:
            self.deliver_hook(sim.now, advanced)
        ack = Packet(sim.new_id(), self.flow_id, ACK, self.ack_bytes,
                     self.cumack, sent_at=sim.now)
        ack.echo_seq = data.seq
        ack.bneck_occupancy = data.bneck_occupancy
        self.out_port.offer(sim, ack)


class TcpSender:
    """NewReno sender with a pluggable startup controller.

    Recovery behavior nailed down here (all standard, all deterministic):
    * fast recovery inflates cwnd by one per extra dupACK and new packets
      obey the inflated window;
    * a partial ACK retransmits the next hole and deflates the window
      without leaving recovery;
    * timeout rewinds next_seq to the cumack point (go-back-N) and re-enters
      the controller's startup mode below the new ssthresh;
    * one fast-recovery episode per window of data (RFC 3782 style guard
      against spurious re-entry on duplicate ACKs of retransmitted data).
    """

    def __init__(self, sim, flow_id, controller, pkt_bytes=1000,
                 initial_cwnd=1.0, min_rto_s=0.2, max_packets=None,
                 fr_protection=True, impatient_fr_timer=True, max_burst=None,
                 send_hook=None, phase_hook=None):
        self.sim = sim
        self.flow_id = flow_id
        self.controller = controller
        self.pkt_bytes = pkt_bytes
        self.fr_protection = fr_protection
        self.impatient_fr_timer = impatient_fr_timer
        self.max_burst = max_burst    # release cap per ACK (None: window only)
        self.out_port: Port | None = None

        self.cwnd = float(initial_cwnd)
        self.ssthresh = controller.initial_ssthresh()
        self.phase = STARTUP
        self.next_seq = 0
        self.highest_acked = 0
        self.dup_ack_count = 0
        self.recover_point = -1
        self.max_seq_sent = -1
        self.rtt = RttEstimator(min_rto_s=min_rto_s)
        self.max_packets = max_packets

        self.timeouts = 0
        self.fast_recoveries = 0
        self.send_hook = send_hook    # called (now, seq) on every release
        self.phase_hook = phase_hook  # called (now, sender, reason)
        self.ack_hook = None          # called (now, ack, sender) on advances

        self._records = {}            # seq -> (sent_at, is_retransmit, burst_id)
        self._burst_counter = 0
        self._timer_deadline = None
        self._timer_scheduled = False
        self._fr_partial_acks = 0

    # -- accounting ---------------------------------------------------------

    @property
    def inflight(self) -> int:
        return self.next_seq - self.highest_acked

    def _available_data(self) -> float:
        if self.max_packets is None:
            return math.inf
        return self.max_packets - self.next_seq

    # -- event entry points -------------------------------------------------

    def handle_event(self, sim, event) -> None:
        kind = event.kind
        if kind == PACKET_ARRIVAL:
            self.on_ack_received(event.packet, sim.now)
        elif kind == TIMER_EXPIRY:
            self._timer_scheduled = False
            self._check_timer(sim.now)
        elif kind == SOURCE_START:
            self.try_send(sim.now)

    # -- sending ------------------------------------------------------------

    def try_send(self, now) -> int:
        """Release new packets permitted by cwnd; returns the count."""
        released = 0
        limit = math.floor(self.cwnd)
        self._burst_counter += 1
        while (self.next_seq - self.highest_acked) < limit and self._available_data() > 0:
            if self.max_burst is not None and released >= self.max_burst:
                break   # window keeps opening on later ACKs
            self._send_seq(now, self.next_seq)
            self.next_seq += 1
            released += 1
        return released

    def _send_seq(self, now, seq) -> None:
        is_retx = seq <= self.max_seq_sent
        pkt = Packet(self.sim.new_id(), self.flow_id, DATA, self.pkt_bytes,
                     seq, sent_at=now, is_retransmit=is_retx)
        self._records[seq] = (now, is_retx, self._burst_counter)
        if seq > self.max_seq_sent:
            self.max_seq_sent = seq
        if self._timer_deadline is None:
            self._restart_timer(now)
        if self.send_hook is not None:
            self.send_hook(now, seq)
        self.out_port.offer(self.sim, pkt)

    def _retransmit(self, now, seq) -> None:
        # Out-of-band resend of one hole; next_seq and inflight are unchanged.
        self._burst_counter += 1
        pkt = Packet(self.sim.new_id(), self.flow_id, DATA, self.pkt_bytes,
                     seq, sent_at=now, is_retransmit=True)
        self._records[seq] = (now, True, self._burst_counter)
        if self.send_hook is not None:
            self.send_hook(now, seq)
        self.out_port.offer(self.sim, pkt)

    # -- ACK processing -----------------------------------------------------

    def on_ack_received(self, ack: Packet, now) -> None:
        cum = ack.seq
        if cum > self.next_seq and cum > self.max_seq_sent + 1:
            raise ProtocolError(
                f"flow {self.flow_id}: ack {cum} for never-sent data "
                f"(next_seq={self.next_seq})")
        if cum > self.highest_acked:
            self._on_window_advance(ack, cum, now)
        elif cum == self.highest_acked and self.inflight > 0:
            self._on_dupack(now)
        # acks below the window are stale; ignore

    def _on_window_advance(self, ack, cum, now) -> None:
        newly = cum - self.highest_acked
        self.highest_acked = cum
        self.dup_ack_count = 0
        if self.next_seq < cum:
            # go-back-N resend already covered by buffered receiver data
            self.next_seq = cum
        self._sample_rtt(ack, cum, now)
        acked_records = [(seq, self._records.pop(seq, None))
                         for seq in range(cum - newly, cum)]

        restart_timer = True
        if self.phase == FAST_RECOVERY:
            if cum > self.recover_point:
                # full ACK: recovery complete
                self.cwnd = self.ssthresh
                self._set_phase(CONGESTION_AVOIDANCE, "recovery-complete")
            else:
                # NewReno partial ACK: repair the next hole, stay in recovery
                self.cwnd = max(self.cwnd - newly + 1.0, 1.0)
                self._retransmit(now, cum)
                self._fr_partial_acks += 1
                # impatient variant: only the first partial ACK defers the
                # timer, so a many-loss episode falls back to timeout
                restart_timer = (not self.impatient_fr_timer
                                 or self._fr_partial_acks == 1)
        else:
            self._grow_cwnd(now, newly, acked_records)

        if self.highest_acked >= self.next_seq and self._available_data() <= 0:
            self._timer_deadline = None   # everything delivered
        elif restart_timer:
            self._restart_timer(now)
        self.try_send(now)
        if self.ack_hook is not None:
            self.ack_hook(now, ack, self)

    def _grow_cwnd(self, now, newly, acked_records) -> None:
        controller = self.controller
        in_startup = self.phase == STARTUP
        if not in_startup and not controller.owns_ca:
            # shared NewReno congestion avoidance
            self.cwnd += newly / self.cwnd
            return
        for seq, rec in acked_records:
            view = ControllerView(
                now_s=now, cwnd=self.cwnd, ssthresh=self.ssthresh,
                base_rtt_s=self.rtt.base_rtt_s, last_rtt_s=self.rtt.last_rtt_s,
                phase=self.phase, acked_seq=seq,
                burst_id=rec[2] if rec is not None else -1,
                highest_acked=self.highest_acked, next_seq=self.next_seq,
                newly_acked=1)
            action = controller.on_ack(view)
            if action.ssthresh is not None:
                self.ssthresh = action.ssthresh
            self.cwnd += action.cwnd_delta
            if self.cwnd < 1.0:
                self.cwnd = 1.0
            if action.exit_startup and self.phase == STARTUP:
                self._set_phase(CONGESTION_AVOIDANCE, "startup-exit")

    def _on_dupack(self, now) -> None:
        self.dup_ack_count += 1
        if self.phase == FAST_RECOVERY:
            self.cwnd += 1.0   # window inflation per extra dupACK
            self.try_send(now)
        elif self.dup_ack_count == 3:
            if self.highest_acked > self.recover_point or not self.fr_protection:
                self.enter_fast_recovery(now)

    # -- loss handling ------------------------------------------------------

    def enter_fast_recovery(self, now) -> None:
        if self.phase == FAST_RECOVERY:
            return
        self.fast_recoveries += 1
        self.ssthresh = max(self.cwnd / 2.0, 2.0)
        self.cwnd = self.ssthresh + 3.0
        self.recover_point = self.next_seq - 1
        self._fr_partial_acks = 0
        self._set_phase(FAST_RECOVERY, "triple-dupack")
        self.controller.on_loss_exit()
        self._retransmit(now, self.highest_acked)
        self._restart_timer(now)

    def on_timeout(self, now) -> None:
        self.timeouts += 1
        window = self.inflight
        if self.phase == FAST_RECOVERY:
            # the pre-inflation window is what the connection was actually
            # using; inflation releases must not raise the post-timeout base
            window = min(window, self.ssthresh)
        self.ssthresh = max(window / 2.0, 2.0)
        self.cwnd = 1.0
        self.dup_ack_count = 0
        self.recover_point = self.next_seq - 1
        self.next_seq = self.highest_acked   # go-back-N rewind
        resume_startup = self.controller.on_timeout()
        self._set_phase(STARTUP if resume_startup else CONGESTION_AVOIDANCE,
                        "timeout")
        self.rtt.back_off()
        self._restart_timer(now)
        self.try_send(now)   # sends exactly the first missing segment

    # -- RTT / timer --------------------------------------------------------

    def _sample_rtt(self, ack, cum, now) -> None:
        seq = ack.echo_seq
        if seq < 0 or seq >= cum:
            seq = cum - 1
        rec = self._records.get(seq)
        if rec is None or rec[1]:
            return   # Karn: no samples from retransmitted packets
        self.rtt.sample(now - rec[0])

    def _restart_timer(self, now) -> None:
        self._timer_deadline = now + self.rtt.rto_s
        if not self._timer_scheduled:
            self._timer_scheduled = True
            self.sim.schedule_at(self._timer_deadline, TIMER_EXPIRY, self)

    def _check_timer(self, now) -> None:
        deadline = self._timer_deadline
        if deadline is None:
            return   # stale timer: everything acked meanwhile
        if now < deadline - 1e-12:
            self._timer_scheduled = True
            self.sim.schedule_at(deadline, TIMER_EXPIRY, self)
            return
        if self.highest_acked >= self.next_seq and self._available_data() <= 0:
            self._timer_deadline = None
            return
        self.on_timeout(now)

    def _set_phase(self, phase, reason) -> None:
        self.phase = phase
        if self.phase_hook is not None:
            self.phase_hook(self.sim.now, self, reason)


class ControllerView:
    """Read-only snapshot handed to controllers; they return updates and
    never mutate transport state directly."""

    __slots__ = ("now_s", "cwnd", "ssthresh", "base_rtt_s", "last_rtt_s",
                 "phase", "acked_seq", "burst_id", "highest_acked",
                 "next_seq", "newly_acked")

    def __init__(self, now_s, cwnd, ssthresh, base_rtt_s, last_rtt_s, phase,
                 acked_seq, highest_acked, next_seq, newly_acked,
                 burst_id=-1):
        self.now_s = now_s
        self.cwnd = cwnd
        self.ssthresh = ssthresh
        self.base_rtt_s = base_rtt_s
        self.last_rtt_s = last_rtt_s
        self.phase = phase
        self.acked_seq = acked_seq
        self.burst_id = burst_id
        self.highest_acked = highest_acked
        self.next_seq = next_seq
        self.newly_acked = newly_acked
