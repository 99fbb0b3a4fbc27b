"""Monte-Carlo estimation of multi-resolution saturation probability.

A replication runs the (i, j) process with competing exponential clocks:
arrivals at lambda1 and lambda2 (discarded when the boundary forbids them)
and departures at i*mu and j*mu. The estimate is the fraction of measured
simulated time spent in saturated states.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mr_chain import MrConfig, StateSpace, build_state_space

_BATCH = 1 << 16


@dataclass(frozen=True)
class SimPlan:
    config: MrConfig
    measured_events: int = 100_000
    replications: int = 20
    master_seed: int = 0
    warmup_events: int | None = None  # None -> 10% of measured_events

    def __post_init__(self) -> None:
        if self.config.scheme not in ("urs", "crs"):
            raise ValueError("simulation needs a URS or CRS configuration")
        if self.measured_events < 1 or self.replications < 1:
            raise ValueError("measured_events and replications must be >= 1")
        if self.warmup_events is not None and self.warmup_events < 0:
            raise ValueError("warmup_events must be >= 0")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")

    @property
    def warmup(self) -> int:
        if self.warmup_events is None:
            return self.measured_events // 10
        return self.warmup_events


@dataclass(frozen=True)
class SimEstimate:
    p_s_mean: float
    std_error: float
    per_replication: tuple[float, ...] = field(repr=False)
    time_weighted: bool = True

    @property
    def replications(self) -> int:
        return len(self.per_replication)


def replication_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))


def _transition_tables(space: StateSpace, cfg: MrConfig):
    idx = space.index
    mu2 = cfg.mu / 2 if cfg.type2_half_rate else cfg.mu
    l1, l2 = cfg.lambda1, cfg.lambda2
    table = []
    for k, (i, j) in enumerate(space.states):
        d1, d2 = i * cfg.mu, j * mu2
        total = l1 + l2 + d1 + d2
        table.append(
            (
                total,
                l1,
                l1 + l2,
                l1 + l2 + d1,
                idx.get((i + 1, j), k),
                idx.get((i, j + 1), k),
                idx.get((i - 1, j), k),
                idx.get((i, j - 1), k),
            )
        )
    return table


def _run_replication(
    space: StateSpace,
    cfg: MrConfig,
    warmup: int,
    measured: int,
    seed: np.random.SeedSequence,
    check_states: bool = False,
) -> float:
    rng = np.random.default_rng(seed)
    table = _transition_tables(space, cfg)
    sat = space.saturated.tolist()
    state = space.index[(0, 0)]
    if table[state][0] == 0.0:
        # no arrivals ever: the empty system is absorbing
        return 1.0 if sat[state] else 0.0

    total_time = 0.0
    sat_time = 0.0
    remaining = warmup + measured
    event = 0
    while remaining:
        n = min(_BATCH, remaining)
        holds = rng.standard_exponential(n).tolist()
        picks = rng.random(n).tolist()
        for e, u in zip(holds, picks):
            total, c1, c2, c3, up1, up2, dn1, dn2 = table[state]
            if event >= warmup:
                dt = e / total
                total_time += dt
                if sat[state]:
                    sat_time += dt
            event += 1
            x = u * total
            if x < c1:
                state = up1
            elif x < c2:
                state = up2
            elif x < c3:
                state = dn1
            else:
                state = dn2
            if check_states:
                i, j = space.states[state]
                assert i <= space.global_max_type1 and j <= space.boundary[i]
        remaining -= n
    return sat_time / total_time


def _replication_task(args) -> float:
    cfg, warmup, measured, master_seed, index, check = args
    space = build_state_space(cfg)
    return _run_replication(
        space, cfg, warmup, measured, replication_seed(master_seed, index), check
    )


def simulate(plan: SimPlan, workers: int | None = None, check_states: bool = False) -> SimEstimate:
    """Run all replications of ``plan`` and aggregate them.

    Replication k is seeded from (master_seed, k) only, so the result does not
    depend on ``workers`` or on the order replications finish.
    """
    cfg = plan.config
    tasks = [
        (cfg, plan.warmup, plan.measured_events, plan.master_seed, k, check_states)
        for k in range(plan.replications)
    ]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(_replication_task, tasks))
    else:
        space = build_state_space(cfg)
        per_rep = [
            _run_replication(
                space, cfg, plan.warmup, plan.measured_events,
                replication_seed(plan.master_seed, k), check_states,
            )
            for k in range(plan.replications)
        ]
    values = np.asarray(per_rep)
    mean = float(values.mean())
    if len(values) > 1:
        se = float(values.std(ddof=1) / math.sqrt(len(values)))
    else:
        se = math.nan
    return SimEstimate(mean, se, tuple(float(v) for v in per_rep))


FIG8_BASE_DRIVES = 8
FIG8_REFINEMENT_DRIVES = 4
FIG8_LAYER_SLOTS = 2
FIG8_OPERATING_LOAD = 6.0


def symmetric_config(load: float, scheme: str, mu: float = 1.0, **overrides) -> MrConfig:
    """Config with lambda1 = lambda2 = load*mu/2 at the Fig. 8 drive split."""
    params = dict(
        base_drives=FIG8_BASE_DRIVES,
        refinement_drives=FIG8_REFINEMENT_DRIVES,
        layer_slots=FIG8_LAYER_SLOTS,
        mu=mu,
        scheme=scheme,
    )
    params.update(overrides)
    lam = load * params["mu"] / 2
    return MrConfig(lambda1=lam, lambda2=lam, **params)


def sweep_load(plan: SimPlan, load_grid, workers: int | None = None) -> list[SimEstimate]:
    """One estimate per total load lambda/mu, with symmetric arrivals.

    Drive split, slots, scheme and mu come from ``plan.config``; only the
    arrival rates are replaced.
    """
    out = []
    for load in load_grid:
        lam = load * plan.config.mu / 2
        cfg = plan.config.with_(lambda1=lam, lambda2=lam)
        out.append(
            simulate(
                SimPlan(cfg, plan.measured_events, plan.replications,
                        plan.master_seed, plan.warmup_events),
                workers,
            )
        )
    return out
