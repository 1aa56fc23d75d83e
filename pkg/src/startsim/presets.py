"""Named experiment presets encoding the startup-study parameter sets:
dumbbell with 500 Mbps / 0.1 ms side links, a 40 Mbps / 50 ms droptail
bottleneck by default (BDP 500 packets, buffer BDP/2), 1000 B data packets
and 40 B acks."""

from __future__ import annotations

from .scenario import CrossTrafficConfig, FlowConfig, ScenarioConfig

PRESET_NAMES = ("table1", "table2_beta", "table3", "table4", "table5",
                "table6", "table7_udp", "fig9_fairness")


def single_flow_config(scenario_id, controller, params=None, *,
                       bottleneck_bw_bps=40e6, bottleneck_oneway_delay_s=0.05,
                       buffer_pkts=250, horizon_s=10.0, windows=None,
                       seed=1) -> ScenarioConfig:
    cfg = ScenarioConfig(
        scenario_id=scenario_id,
        bottleneck_bw_bps=bottleneck_bw_bps,
        bottleneck_oneway_delay_s=bottleneck_oneway_delay_s,
        buffer_pkts=buffer_pkts,
        horizon_s=horizon_s,
        seed=seed,
        measurement_windows=windows or [(0.0, horizon_s)],
        flows=[FlowConfig(controller=controller, flow_id=0,
                          params=dict(params or {}))],
    )
    return cfg.validate()


def _table1():
    # blind-ssthresh demonstration: one ssthresh above, at, and below BDP
    out = {}
    for label, ssthresh in (("ss_l", 5000.0), ("ss_a", 500.0), ("ss_s", 32.0)):
        out[label] = single_flow_config(
            f"table1/{label}", "slowstart", {"ssthresh": ssthresh})
    return out


def _table2_beta():
    # switch-threshold sensitivity at 2/5 BDP buffering
    return {
        f"beta{int(beta)}": single_flow_config(
            f"table2_beta/beta{int(beta)}", "ssthreshless", {"beta": beta},
            buffer_pkts=200)
        for beta in (3.0, 10.0, 20.0)
    }


def _table3():
    # ramping-up comparison, buffer 2/5 BDP, first 10 s
    specs = {
        "sls": ("ssthreshless", {"beta": 3.0}),
        "ss_a": ("slowstart", {"ssthresh": 500.0}),
        "vegas": ("vegas", {}),
    }
    return {label: single_flow_config(f"table3/{label}", name, params,
                                      buffer_pkts=200)
            for label, (name, params) in specs.items()}


_FULL_SET = (
    ("sls", "ssthreshless", {"beta": 3.0}),
    ("hoe", "hoe", {}),
    ("lss", "lss", {"max_ssthresh": 100.0}),
    ("ss_s", "slowstart", {"ssthresh": 32.0}),
    ("ss_a", "slowstart", {"ssthresh": 500.0}),
    ("ss_l", "slowstart", {"ssthresh": 5000.0}),
    ("vegas", "vegas", {}),
)


def _table4():
    # small buffer: BDP/5 at the default 40 Mbps / 50 ms path, first 20 s
    return {label: single_flow_config(f"table4/{label}", name, params,
                                      buffer_pkts=100, horizon_s=20.0)
            for label, name, params in _FULL_SET}


def _table5():
    # long delay point: 100 ms one-way, buffer BDP/2 (1000-packet pipe)
    return {label: single_flow_config(
                f"table5/{label}", name, params,
                bottleneck_oneway_delay_s=0.1, buffer_pkts=500,
                horizon_s=20.0)
            for label, name, params in _FULL_SET if label != "ss_a"}


def _table6():
    # high bandwidth point: 150 Mbps, buffer BDP/2 (1875-packet pipe)
    return {label: single_flow_config(
                f"table6/{label}", name, params,
                bottleneck_bw_bps=150e6, buffer_pkts=938, horizon_s=20.0)
            for label, name, params in _FULL_SET if label != "ss_a"}


def _table7_udp():
    # 10 Mbps cross traffic from t=1 s to t=5 s, first 10 s
    specs = {
        "sls": ("ssthreshless", {"beta": 3.0}),
        "ss_s": ("slowstart", {"ssthresh": 32.0}),
        "vegas": ("vegas", {}),
    }
    out = {}
    for label, (name, params) in specs.items():
        cfg = single_flow_config(f"table7_udp/{label}", name, params)
        cfg.cross_traffic = CrossTrafficConfig(rate_bps=10e6, pkt_bytes=1000,
                                               start_s=1.0, stop_s=5.0)
        out[label] = cfg.validate()
    return out


def _fig9_fairness():
    # five coexisting flows: two traditional (ssthresh 32) and three
    # ssthreshless; the fifth joins at t=30 s
    flows = [
        FlowConfig(controller="slowstart", flow_id=0,
                   params={"ssthresh": 32.0}),
        FlowConfig(controller="slowstart", flow_id=1,
                   params={"ssthresh": 32.0}),
        FlowConfig(controller="ssthreshless", flow_id=2,
                   params={"beta": 3.0}),
        FlowConfig(controller="ssthreshless", flow_id=3,
                   params={"beta": 3.0}),
        FlowConfig(controller="ssthreshless", flow_id=4,
                   params={"beta": 3.0}, start_s=30.0),
    ]
    cfg = ScenarioConfig(
        scenario_id="fig9_fairness",
        horizon_s=60.0,
        measurement_windows=[(25.0, 30.0), (30.0, 35.0), (50.0, 60.0)],
        flows=flows,
    )
    return {"five_flows": cfg.validate()}


_BUILDERS = {
    "table1": _table1,
    "table2_beta": _table2_beta,
    "table3": _table3,
    "table4": _table4,
    "table5": _table5,
    "table6": _table6,
    "table7_udp": _table7_udp,
    "fig9_fairness": _fig9_fairness,
}


def preset(name: str) -> dict:
    """Return {label: ScenarioConfig} for one preset; fresh objects each
    call so callers may mutate freely."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    return _BUILDERS[name]()


def all_presets() -> dict:
    return {name: preset(name) for name in PRESET_NAMES}
