"""Plant-in-the-loop tuning trial: ramp, windowed measurement, LSPI updates.

One trial walks the simulated wearer while the controller adjusts the two
torque timing parameters.  Assistance ramps up over a fixed number of
cycles, then every action update measures a window of gait cycles, maps
the averaged work ratio to the scalar state, takes a (possibly exploring)
greedy action, and records a transition sample.  The policy weights are
re-solved every fixed number of samples.  The trial succeeds when the
stage cost stays within the stopping bound for a run of consecutive
updates, and is abandoned when the gait-cycle budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import lspi
from .lspi import CostWeights, IllConditionedError, Sample
from .plant import PlantConfig, simulate_cycle, simulate_window
from .torque_profile import (
    MIN_SEPARATION,
    OFFSET_TIMING_RANGE,
    PEAK_TIMING_RANGE,
    ProfileParams,
)


@dataclass(frozen=True)
class TimingBounds:
    """Clamp rectangle for the two tunable timings, percent of gait cycle."""

    peak_min: float = PEAK_TIMING_RANGE[0]
    peak_max: float = PEAK_TIMING_RANGE[1]
    offset_min: float = OFFSET_TIMING_RANGE[0]
    offset_max: float = OFFSET_TIMING_RANGE[1]
    delta_min: float = MIN_SEPARATION

    def __post_init__(self):
        if not (self.peak_min < self.peak_max and self.offset_min < self.offset_max):
            raise ValueError("timing bounds must be non-empty intervals")
        if self.peak_min + self.delta_min > self.offset_max:
            raise ValueError("bounds leave no feasible (t_peak, t_offset) pair")


@dataclass(frozen=True)
class LspiConfig:
    """Learner settings: discount, regularization, cost weights, action box,
    and the exploration schedule (Gaussian, halved after each policy update)."""

    gamma: float = 0.9
    ridge: float = 1e-6
    r_x: float = 1.0
    r_u_diag: tuple[float, float] = (0.01, 0.01)
    max_step: float = 2.0
    explore_sigma: float = 1.0
    explore_decay: float = 0.5

    def cost_weights(self) -> CostWeights:
        return CostWeights(r_x=self.r_x, r_u=np.diag(self.r_u_diag))


@dataclass(frozen=True)
class TrialConfig:
    """Protocol constants of one tuning trial plus the embedded plant and
    learner configurations."""

    eta_target: float = 0.16
    alpha: float = 7.0                    # state scaling x = alpha*(eta - eta_target)
    window_cycles: int = 5                # gait cycles averaged per action update
    samples_per_policy_update: int = 15
    stop_bound: float = 0.01              # stage-cost bound of the stopping rule
    stop_consecutive: int = 10
    cycle_budget: int = 820               # total gait cycles (~15 min at 1.1 s/cycle)
    ramp_steps: int = 15                  # cycles to ramp assistance from zero
    peak_torque: float = 24.0             # N·m (30 % body weight for an 80 kg wearer)
    t_onset: float = 0.0
    initial_t_peak: float | None = None   # random inside bounds when unset
    initial_t_offset: float | None = None
    seed: int = 0
    bounds: TimingBounds = field(default_factory=TimingBounds)
    plant: PlantConfig = field(default_factory=PlantConfig)
    lspi: LspiConfig = field(default_factory=LspiConfig)

    def __post_init__(self):
        if not 0.0 < self.eta_target < 1.0:
            raise ValueError(f"eta_target must be in (0,1), got {self.eta_target}")
        if self.stop_bound <= 0:
            raise ValueError(f"stop_bound must be > 0, got {self.stop_bound}")
        for name in ("window_cycles", "samples_per_policy_update", "stop_consecutive",
                     "ramp_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.cycle_budget < 0:
            raise ValueError(f"cycle_budget must be >= 0, got {self.cycle_budget}")
        for name, lo, hi in (
            ("initial_t_peak", self.bounds.peak_min, self.bounds.peak_max),
            ("initial_t_offset", self.bounds.offset_min, self.bounds.offset_max),
        ):
            v = getattr(self, name)
            if v is not None and not lo <= v <= hi:
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class UpdateRecord:
    """State of the trial after one action update."""

    k: int
    t_peak: float
    t_offset: float
    eta: float
    x: float
    d_peak: float
    d_offset: float
    cost: float
    policy_version: int


@dataclass(frozen=True)
class TrialLog:
    """Full history of one trial."""

    records: tuple[UpdateRecord, ...]
    outcome: str                        # "success" | "budget_exceeded"
    updates_to_converge: int | None
    final_eta: float
    final_t_peak: float
    final_t_offset: float
    policy_update_indices: tuple[int, ...]
    solver_events: tuple[str, ...]      # ill-conditioned solves that were skipped
    cycles_used: int
    seed: int


def ramp_schedule(target_peak: float, steps: int) -> np.ndarray:
    """Peak torques for the assistance ramp: linear from target/steps to target."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if target_peak < 0:
        raise ValueError(f"target_peak must be >= 0, got {target_peak}")
    return target_peak * np.arange(1, steps + 1) / steps


def state_from_eta(eta: float, cfg: TrialConfig) -> float:
    """Scalar tuning state: alpha * (eta - eta_target)."""
    return cfg.alpha * (eta - cfg.eta_target)


def measure_state(
    params: ProfileParams, cfg: TrialConfig, rng: np.random.Generator
) -> tuple[float, float]:
    """Measure one action-update window: returns (eta, state)."""
    m = simulate_window(params, cfg.plant, cfg.window_cycles, rng)
    return m.work_ratio, state_from_eta(m.work_ratio, cfg)


def apply_action(params: ProfileParams, u, bounds: TimingBounds) -> ProfileParams:
    """Increment the timings by the action, clamped to the bound rectangle.

    After clamping, an offset closer than delta_min to the peak is raised to
    keep the falling half non-degenerate (and the peak lowered if the raise
    would leave the offset range).
    """
    t_peak = min(bounds.peak_max, max(bounds.peak_min, params.t_peak + float(u[0])))
    t_offset = min(bounds.offset_max, max(bounds.offset_min, params.t_offset + float(u[1])))
    if t_offset < t_peak + bounds.delta_min:
        t_offset = min(bounds.offset_max, t_peak + bounds.delta_min)
        if t_offset < t_peak + bounds.delta_min:
            t_peak = t_offset - bounds.delta_min
    return replace(params, t_peak=t_peak, t_offset=t_offset)


def stopping_check(recent_costs, bound: float, consecutive: int) -> bool:
    """True when the last `consecutive` costs all lie within the bound."""
    if bound <= 0:
        raise ValueError(f"bound must be > 0, got {bound}")
    costs = list(recent_costs)
    if len(costs) < consecutive:
        return False
    return all(c <= bound for c in costs[-consecutive:])


def _draw_initial_params(cfg: TrialConfig, rng: np.random.Generator) -> ProfileParams:
    b = cfg.bounds
    t_peak, t_offset = cfg.initial_t_peak, cfg.initial_t_offset
    if t_peak is not None and t_offset is not None:
        return ProfileParams(cfg.peak_torque, t_peak, t_offset, cfg.t_onset)
    # rejection-sample the feasible part of the rectangle for unset timings
    for _ in range(1000):
        tp = t_peak if t_peak is not None else rng.uniform(b.peak_min, b.peak_max)
        to = t_offset if t_offset is not None else rng.uniform(b.offset_min, b.offset_max)
        if to >= tp + b.delta_min:
            return ProfileParams(cfg.peak_torque, tp, to, cfg.t_onset)
    raise ValueError("could not draw feasible initial timings inside the bounds")


def run_trial(cfg: TrialConfig) -> TrialLog:
    """Run one tuning trial to convergence or until the cycle budget is spent.

    Deterministic given the config: a single seeded generator drives the
    initial timing draw, the initial policy, the exploration noise and the
    plant measurement noise, in that order.
    """
    rng = np.random.default_rng(cfg.seed)
    params = _draw_initial_params(cfg, rng)
    w = lspi.initial_weights(rng)
    cost_weights = cfg.lspi.cost_weights()
    sigma = cfg.lspi.explore_sigma

    records: list[UpdateRecord] = []
    samples: list[Sample] = []
    costs: list[float] = []
    policy_update_indices: list[int] = []
    solver_events: list[str] = []
    policy_version = 0
    cycles_used = 0
    outcome = "budget_exceeded"
    updates_to_converge = None
    eta = float("nan")

    def budget_allows(n_cycles: int) -> bool:
        return cycles_used + n_cycles <= cfg.cycle_budget

    # assistance ramp: timings fixed, torque grows, nothing is learned
    if not budget_allows(cfg.ramp_steps):
        return _finish(cfg, records, outcome, updates_to_converge, eta, params,
                       policy_update_indices, solver_events, cycles_used)
    noiseless_plant = replace(cfg.plant, work_noise_std=0.0)
    for peak in ramp_schedule(cfg.peak_torque, cfg.ramp_steps):
        simulate_cycle(replace(params, peak_torque=peak), noiseless_plant)
    cycles_used += cfg.ramp_steps

    # reference measurement before the first action
    if not budget_allows(cfg.window_cycles):
        return _finish(cfg, records, outcome, updates_to_converge, eta, params,
                       policy_update_indices, solver_events, cycles_used)
    eta, x_prev = measure_state(params, cfg, rng)
    cycles_used += cfg.window_cycles

    k = 0
    while budget_allows(cfg.window_cycles):
        k += 1
        u = lspi.explore_action(
            lspi.greedy_action(w, x_prev, cfg.lspi.max_step),
            sigma, cfg.lspi.max_step, rng,
        )
        params = apply_action(params, u, cfg.bounds)
        eta, x = measure_state(params, cfg, rng)
        cycles_used += cfg.window_cycles
        # cost pairs the action with the state it produced, so the stopping
        # rule bounds how far the final ratio sits from the target
        cost = lspi.stage_cost(x, u, cost_weights)
        samples.append(Sample(x=x_prev, u=(float(u[0]), float(u[1])), cost=cost, x_next=x))
        costs.append(cost)
        records.append(
            UpdateRecord(
                k=k, t_peak=params.t_peak, t_offset=params.t_offset, eta=eta, x=x,
                d_peak=float(u[0]), d_offset=float(u[1]), cost=cost,
                policy_version=policy_version,
            )
        )
        if stopping_check(costs, cfg.stop_bound, cfg.stop_consecutive):
            outcome = "success"
            updates_to_converge = k
            break
        if len(samples) % cfg.samples_per_policy_update == 0:
            try:
                w = lspi.lstdq_solve(
                    samples, w, cfg.lspi.gamma, cfg.lspi.ridge, cfg.lspi.max_step
                )
                policy_version += 1
                sigma *= cfg.lspi.explore_decay
            except IllConditionedError as err:
                solver_events.append(f"update {k}: {err}")
            policy_update_indices.append(len(samples))
        x_prev = x

    return _finish(cfg, records, outcome, updates_to_converge, eta, params,
                   policy_update_indices, solver_events, cycles_used)


def _finish(cfg, records, outcome, updates_to_converge, eta, params,
            policy_update_indices, solver_events, cycles_used) -> TrialLog:
    return TrialLog(
        records=tuple(records),
        outcome=outcome,
        updates_to_converge=updates_to_converge,
        final_eta=eta,
        final_t_peak=params.t_peak,
        final_t_offset=params.t_offset,
        policy_update_indices=tuple(policy_update_indices),
        solver_events=tuple(solver_events),
        cycles_used=cycles_used,
        seed=cfg.seed,
    )
