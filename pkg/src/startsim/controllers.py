"""Startup congestion controllers: backlog-driven two-mode probing
(ssthreshless), traditional slow start, limited slow start, Vegas startup
and Hoe's packet-pair ssthresh estimate.

Controllers are pure per-connection state machines. The transport hands them
a read-only view per newly acked packet and applies the returned update;
after the first triple-dupACK loss every controller (except Vegas, which
keeps its own congestion avoidance) delegates to the shared NewReno
machinery in tcp.py.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import SimulationError
from .tcp import ControllerView, STARTUP


def estimate_backlog(cwnd: float, base_rtt_s: float, rtt_s: float) -> float:
    """Estimated packets of this connection delayed at the bottleneck buffer:

        n = (cwnd / base_rtt - cwnd / rtt) * base_rtt

    which is the expected-minus-actual rate difference expressed in packets.
    RTT samples below base_rtt clamp to zero backlog.
    """
    if base_rtt_s <= 0 or rtt_s <= 0:
        raise SimulationError(
            f"non-positive RTT in backlog estimate (base={base_rtt_s}, rtt={rtt_s})")
    if cwnd <= 0:
        raise SimulationError(f"non-positive cwnd {cwnd}")
    if rtt_s < base_rtt_s:
        rtt_s = base_rtt_s
    return (cwnd / base_rtt_s - cwnd / rtt_s) * base_rtt_s


@dataclass
class BacklogProbe:
    """Per-connection backlog-probing state for the two-mode controller."""
    beta: float = 3.0
    n_est: float = 0.0
    congestive_status: int = 0
    congestion_event_no: int = 0


@dataclass
class PacketPairEstimate:
    ack_gap_s: float
    bw_est_bps: float
    ssthresh_est: float


def hoe_init_ssthresh(ack_gap_s: float, base_rtt_s: float,
                      pkt_bytes: int) -> PacketPairEstimate:
    """Packet-pair bandwidth measurement: the ACK pair's inter-arrival time
    gives the bottleneck rate, and rate times the measured delay gives the
    initial ssthresh in packets."""
    if ack_gap_s <= 0:
        raise ValueError(f"ack gap must be positive, got {ack_gap_s}")
    bits = pkt_bytes * 8.0
    bw_est_bps = bits / ack_gap_s
    ssthresh_est = bw_est_bps * base_rtt_s / bits
    return PacketPairEstimate(ack_gap_s, bw_est_bps, ssthresh_est)


class Action:
    """Controller verdict for one acked packet."""

    __slots__ = ("cwnd_delta", "ssthresh", "exit_startup")

    def __init__(self, cwnd_delta=0.0, ssthresh=None, exit_startup=False):
        self.cwnd_delta = cwnd_delta
        self.ssthresh = ssthresh
        self.exit_startup = exit_startup


class Controller:
    name = "base"
    owns_ca = False
    PARAM_KEYS = ()

    def initial_ssthresh(self) -> float:
        return math.inf

    def on_ack(self, view: ControllerView) -> Action:
        raise NotImplementedError

    def on_loss_exit(self) -> None:
        """Triple dupACK: startup is over for good."""

    def on_timeout(self) -> bool:
        """Return True to re-enter exponential startup below the new
        ssthresh (the traditional behavior)."""
        return True

    def backlog_estimate(self):
        return None


class SlowStart(Controller):
    """Traditional slow start with a blind, fixed initial ssthresh."""

    name = "slowstart"
    PARAM_KEYS = ("ssthresh",)

    def __init__(self, ssthresh=math.inf):
        self._initial_ssthresh = float(ssthresh)

    def initial_ssthresh(self) -> float:
        return self._initial_ssthresh

    def on_ack(self, view) -> Action:
        if view.cwnd < view.ssthresh:
            return Action(cwnd_delta=1.0)
        return Action(cwnd_delta=1.0 / view.cwnd, exit_startup=True)


class SSthreshlessStart(Controller):
    """Backlog-driven two-mode rate probing; no ssthresh at all.

    Every ACK re-estimates the bottleneck backlog n from the freshest RTT
    sample. While n >= beta (queue building up) the window grows by 1/cwnd
    per ACK: Linear Increase Mode, one packet per RTT. When the backlog
    clears below beta one congestive event completes, and growth turns
    aggressive again at max(1/cwnd, 1/2^events) per ACK: Adjustive Increase
    Mode, halving its rate after each congestive event. With no congestive
    event yet the adjustive increment is 1, the plain binary-exponential
    opening. The first loss ends startup permanently.
    """

    name = "ssthreshless"
    PARAM_KEYS = ("beta",)

    def __init__(self, beta=3.0):
        if beta <= 0:
            raise ValueError(f"beta must be positive, got {beta}")
        self.probe = BacklogProbe(beta=float(beta))
        self.exited = False

    def on_ack(self, view) -> Action:
        if self.exited:
            # post-timeout restarts after the dupACK exit behave traditionally
            if view.cwnd < view.ssthresh:
                return Action(cwnd_delta=1.0)
            return Action(cwnd_delta=1.0 / view.cwnd, exit_startup=True)
        probe = self.probe
        if view.last_rtt_s > 0 and view.base_rtt_s < math.inf:
            probe.n_est = estimate_backlog(view.cwnd, view.base_rtt_s,
                                           view.last_rtt_s)
        else:
            probe.n_est = 0.0
        if probe.n_est >= probe.beta:
            probe.congestive_status = 1
            return Action(cwnd_delta=1.0 / view.cwnd)
        if probe.congestive_status == 1:
            probe.congestion_event_no += 1
            probe.congestive_status = 0
        delta = max(1.0 / view.cwnd, 2.0 ** -probe.congestion_event_no)
        return Action(cwnd_delta=delta)

    def on_loss_exit(self) -> None:
        self.exited = True
        self.probe.congestion_event_no = 0
        self.probe.congestive_status = 0

    def on_timeout(self) -> bool:
        if not self.exited:
            # restart the probing machine with fresh counters
            self.probe.congestion_event_no = 0
            self.probe.congestive_status = 0
        return True

    def backlog_estimate(self):
        return self.probe.n_est if not self.exited else None


class LimitedSlowStart(Controller):
    """Slow start whose per-RTT growth is capped at max_ssthresh/2 packets
    once cwnd exceeds max_ssthresh (cwnd == max_ssthresh still doubles)."""

    name = "lss"
    PARAM_KEYS = ("ssthresh", "max_ssthresh")

    def __init__(self, ssthresh=math.inf, max_ssthresh=100.0):
        if max_ssthresh <= 0:
            raise ValueError(f"max_ssthresh must be positive, got {max_ssthresh}")
        self._initial_ssthresh = float(ssthresh)
        self.max_ssthresh = float(max_ssthresh)

    def initial_ssthresh(self) -> float:
        return self._initial_ssthresh

    def on_ack(self, view) -> Action:
        if view.cwnd >= view.ssthresh:
            return Action(cwnd_delta=1.0 / view.cwnd, exit_startup=True)
        if view.cwnd <= self.max_ssthresh:
            return Action(cwnd_delta=1.0)
        k = math.ceil(view.cwnd / (self.max_ssthresh / 2.0))
        return Action(cwnd_delta=1.0 / k)


class VegasStartup(Controller):
    """Delay-based startup: double cwnd every other RTT and leave startup as
    soon as the backlog estimate exceeds gamma, then run Vegas congestion
    avoidance (diff < alpha grows, diff > beta_ca shrinks, else hold)."""

    name = "vegas"
    owns_ca = True
    PARAM_KEYS = ("gamma", "alpha", "beta_ca", "ssthresh")

    def __init__(self, gamma=1.0, alpha=1.0, beta_ca=3.0, ssthresh=math.inf):
        self.gamma = float(gamma)
        self.alpha = float(alpha)
        self.beta_ca = float(beta_ca)
        self._initial_ssthresh = float(ssthresh)
        self.round_mark = 0
        self.growth_round = True
        self.diff = 0.0

    def initial_ssthresh(self) -> float:
        return self._initial_ssthresh

    def _round_boundary(self, view) -> bool:
        if view.highest_acked >= self.round_mark:
            self.round_mark = view.next_seq
            return True
        return False

    def _measure(self, view) -> None:
        if view.last_rtt_s > 0 and view.base_rtt_s < math.inf:
            self.diff = estimate_backlog(view.cwnd, view.base_rtt_s,
                                         view.last_rtt_s)

    def on_ack(self, view) -> Action:
        self._measure(view)
        if view.phase == STARTUP:
            if self._round_boundary(view):
                if self.diff > self.gamma or view.cwnd >= view.ssthresh:
                    return Action(exit_startup=True)
                self.growth_round = not self.growth_round
            return Action(cwnd_delta=1.0 if self.growth_round else 0.0)
        # Vegas congestion avoidance: adjust once per RTT round
        if self._round_boundary(view):
            if self.diff < self.alpha:
                return Action(cwnd_delta=1.0)
            if self.diff > self.beta_ca and view.cwnd > 2.0:
                return Action(cwnd_delta=-1.0)
        return Action()

    def on_timeout(self) -> bool:
        self.round_mark = 0
        self.growth_round = True
        return True

    def backlog_estimate(self):
        return self.diff


class HoeStartup(Controller):
    """Hoe's change: estimate the path BDP once from the earliest ACK pair
    of back-to-back packets, set ssthresh to it, then behave as traditional
    slow start. The estimate is never revised."""

    name = "hoe"
    PARAM_KEYS = ("ssthresh",)

    def __init__(self, ssthresh=math.inf, pkt_bytes=1000):
        self._initial_ssthresh = float(ssthresh)
        self.pkt_bytes = pkt_bytes
        self.estimate: PacketPairEstimate | None = None
        self._last_ack = None   # (acked_seq, burst_id, time)

    def initial_ssthresh(self) -> float:
        return self._initial_ssthresh

    def _try_estimate(self, view) -> float | None:
        prev = self._last_ack
        self._last_ack = (view.acked_seq, view.burst_id, view.now_s)
        if prev is None:
            return None
        prev_seq, prev_burst, prev_time = prev
        if view.acked_seq != prev_seq + 1 or view.burst_id != prev_burst:
            return None   # not a back-to-back pair
        gap = view.now_s - prev_time
        if gap <= 0 or view.base_rtt_s == math.inf:
            return None   # degenerate gap: defer to the next pair
        self.estimate = hoe_init_ssthresh(gap, view.base_rtt_s, self.pkt_bytes)
        return self.estimate.ssthresh_est

    def on_ack(self, view) -> Action:
        ssthresh = None
        if self.estimate is None:
            ssthresh = self._try_estimate(view)
        bound = ssthresh if ssthresh is not None else view.ssthresh
        if view.cwnd < bound:
            return Action(cwnd_delta=1.0, ssthresh=ssthresh)
        return Action(cwnd_delta=1.0 / view.cwnd, ssthresh=ssthresh,
                      exit_startup=True)


CONTROLLERS = {
    "slowstart": SlowStart,
    "ssthreshless": SSthreshlessStart,
    "lss": LimitedSlowStart,
    "vegas": VegasStartup,
    "hoe": HoeStartup,
}


def make_controller(name: str, params: dict, pkt_bytes: int = 1000) -> Controller:
    """Instantiate a controller by its scenario name; unknown names and
    unknown parameter keys are configuration errors."""
    if name not in CONTROLLERS:
        raise ValueError(
            f"unknown controller {name!r}; expected one of {sorted(CONTROLLERS)}")
    cls = CONTROLLERS[name]
    unknown = set(params) - set(cls.PARAM_KEYS)
    if unknown:
        raise ValueError(
            f"unknown parameter(s) {sorted(unknown)} for controller {name!r}; "
            f"allowed: {sorted(cls.PARAM_KEYS)}")
    if name == "hoe":
        return cls(pkt_bytes=pkt_bytes, **params)
    return cls(**params)
