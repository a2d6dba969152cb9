"""Simulated human-exoskeleton gait plant.

Stands in for the unknown coupled human-robot dynamics: given commanded
torque profile parameters it produces per-gait-cycle torque and velocity
traces plus noisy work measurements.  The commanded torque passes through
a first-order lag (abstracting the admittance control loop) and picks up a
small residual interaction torque; hip velocity follows a time-warped sine
that reverses from extension to flexion partway through the cycle.

The residual-phase, residual-amplitude, work-noise and phase-reversal
defaults are frozen outputs of the calibration routines at the bottom of
this module (also reachable through the ``calibrate`` CLI command):

* ``residual_phase`` places the zero-torque work ratio at 0.3396 (the
  zero-torque ratio is invariant to the residual amplitude, since both
  work signs scale together, so the waveform shift is the knob),
* ``residual_torque_amp`` floors the noiseless work-ratio map over the
  feasible timing rectangle at about 0.017, keeping the map's span wide
  while the 0.16 level stays well inside the rectangle,
* ``phase_reversal`` and ``lag_time_constant`` were picked so the map
  spans at least [0.02, 0.45] and rises monotonically with offset timing
  past the reversal,
* ``work_noise_std`` gives the 5-cycle-averaged work ratio a standard
  deviation of roughly 0.007 near the 0.16 level.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .energetics import WorkSplit, power_series, work_ratio, work_split
from .torque_profile import ProfileParams, torque_at

ZERO_TORQUE_ETA = 0.3396


@dataclass(frozen=True)
class PlantConfig:
    """Plant parameters.  Defaults are the calibrated desk-scale values."""

    cycle_duration: float = 1.1        # s per gait cycle
    omega_amplitude: float = 2.0       # rad/s peak hip angular velocity
    phase_reversal: float = 0.33       # cycle fraction where extension flips to flexion
    lag_time_constant: float = 0.05    # s, first-order lag of the torque loop
    residual_torque_amp: float = 0.25  # N·m residual interaction torque (calibrated)
    residual_phase: float = 0.12708268845453852  # cycle fraction, residual shift (calibrated)
    work_noise_std: float = 0.075      # relative per-cycle noise on W+ and |W-| (calibrated)
    samples_per_cycle: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.cycle_duration <= 0:
            raise ValueError(f"cycle_duration must be > 0, got {self.cycle_duration}")
        if not 0.0 < self.phase_reversal < 1.0:
            raise ValueError(f"phase_reversal must be in (0,1), got {self.phase_reversal}")
        if self.lag_time_constant < 0:
            raise ValueError(f"lag_time_constant must be >= 0, got {self.lag_time_constant}")
        if self.work_noise_std < 0:
            raise ValueError(f"work_noise_std must be >= 0, got {self.work_noise_std}")
        if self.samples_per_cycle < 100:
            raise ValueError(f"samples_per_cycle must be >= 100, got {self.samples_per_cycle}")


@dataclass(frozen=True)
class CycleMeasurement:
    """One (possibly window-averaged) gait-cycle measurement."""

    torque_trace: np.ndarray     # N·m, measured at the joint
    velocity_trace: np.ndarray   # rad/s
    positive_work: float         # J, W+ transferred by the motor
    negative_work: float         # J, W- (<= 0)
    work_ratio: float            # eta in [0, 1]
    degenerate: bool = False     # True when no work moved in either direction


def make_rng(config: PlantConfig) -> np.random.Generator:
    """Fresh generator seeded from the plant config."""
    return np.random.default_rng(config.seed)


def extension_velocity(config: PlantConfig, phase):
    """Hip angular velocity (rad/s) at a cycle phase given as fraction in [0, 1).

    A sine in warped time: positive (extension) up to phase_reversal, negative
    (flexion) after it, zero at 0, at the reversal, and at 1.  Accepts scalars
    or arrays.
    """
    phi = np.asarray(phase, dtype=float)
    rev = config.phase_reversal
    warped = np.where(
        phi <= rev,
        phi / (2.0 * rev),
        0.5 + (phi - rev) / (2.0 * (1.0 - rev)),
    )
    v = config.omega_amplitude * np.sin(2.0 * np.pi * warped)
    if np.isscalar(phase) or np.ndim(phase) == 0:
        return float(v)
    return v


def residual_torque(config: PlantConfig, phase):
    """Smooth zero-mean interaction torque left over by the admittance loop."""
    phi = np.asarray(phase, dtype=float)
    r = config.residual_torque_amp * np.sin(2.0 * np.pi * (phi - config.residual_phase))
    if np.isscalar(phase) or np.ndim(phase) == 0:
        return float(r)
    return r


def _first_order_lag(x: np.ndarray, dt: float, tau: float) -> np.ndarray:
    """Exponential smoothing with time constant tau; identity for tau = 0."""
    if tau <= 0.0:
        return x
    a = 1.0 - np.exp(-dt / tau)
    from scipy.signal import lfilter

    return lfilter([a], [1.0, a - 1.0], x)


def _cycle_phases(config: PlantConfig) -> np.ndarray:
    # closed cycle: samples_per_cycle intervals, both endpoints included
    n = config.samples_per_cycle
    return np.arange(n + 1) / n


def simulate_cycle(
    params: ProfileParams, config: PlantConfig, rng: np.random.Generator | None = None
) -> CycleMeasurement:
    """Simulate one gait cycle under the commanded profile.

    The measured torque is the lagged commanded profile plus the residual
    interaction torque.  W+ and W- are trapezoidal integrals of the
    sign-split power; multiplicative Gaussian noise (1 + eps) is applied
    independently to W+ and |W-| before the work ratio is recomputed and
    clipped to [0, 1].  With work_noise_std == 0 no random numbers are drawn.
    """
    phases = _cycle_phases(config)
    dt = config.cycle_duration / config.samples_per_cycle

    commanded = torque_at(params, 100.0 * phases)
    lagged = _first_order_lag(commanded, dt, config.lag_time_constant)
    torque = lagged + residual_torque(config, phases)
    velocity = extension_velocity(config, phases)

    split = work_split(power_series(torque, velocity), dt)
    wp, wn_mag = split.positive_work, abs(split.negative_work)

    if config.work_noise_std > 0.0:
        if rng is None:
            rng = make_rng(config)
        wp = max(0.0, wp * (1.0 + rng.normal(0.0, config.work_noise_std)))
        wn_mag = max(0.0, wn_mag * (1.0 + rng.normal(0.0, config.work_noise_std)))

    noisy = WorkSplit(positive_work=wp, negative_work=-wn_mag)
    eta = min(1.0, max(0.0, work_ratio(noisy)))
    return CycleMeasurement(
        torque_trace=torque,
        velocity_trace=velocity,
        positive_work=wp,
        negative_work=-wn_mag,
        work_ratio=eta,
        degenerate=noisy.is_degenerate,
    )


def simulate_window(
    params: ProfileParams,
    config: PlantConfig,
    n_cycles: int,
    rng: np.random.Generator | None = None,
) -> CycleMeasurement:
    """Average W+ and W- over n_cycles consecutive cycles.

    The work ratio is recomputed from the averaged works; the traces of the
    last cycle are kept for inspection.
    """
    if n_cycles < 1:
        raise ValueError(f"n_cycles must be >= 1, got {n_cycles}")
    if rng is None and config.work_noise_std > 0.0:
        rng = make_rng(config)

    wp_sum = 0.0
    wn_sum = 0.0
    last = None
    for _ in range(n_cycles):
        last = simulate_cycle(params, config, rng)
        wp_sum += last.positive_work
        wn_sum += last.negative_work

    wp = wp_sum / n_cycles
    wn = wn_sum / n_cycles
    split = WorkSplit(positive_work=wp, negative_work=wn)
    eta = min(1.0, max(0.0, work_ratio(split)))
    return CycleMeasurement(
        torque_trace=last.torque_trace,
        velocity_trace=last.velocity_trace,
        positive_work=wp,
        negative_work=wn,
        work_ratio=eta,
        degenerate=split.is_degenerate,
    )


def noiseless(config: PlantConfig) -> PlantConfig:
    """Copy of config with measurement noise switched off."""
    return replace(config, work_noise_std=0.0)


def zero_torque_eta(config: PlantConfig) -> float:
    """Noiseless work ratio with the assistance commanded to zero torque."""
    params = ProfileParams(peak_torque=0.0, t_peak=25.0, t_offset=45.0)
    return simulate_cycle(params, noiseless(config)).work_ratio


def calibrate_residual_phase(
    config: PlantConfig,
    target: float = ZERO_TORQUE_ETA,
    lo: float = 0.0,
    hi: float = 0.3,
    tol: float = 1e-6,
) -> float:
    """Bisect the residual waveform shift until zero-torque eta hits target.

    Zero-torque eta is invariant to the residual amplitude (both work signs
    scale together), so the waveform shift is the knob that sets it.
    """

    def f(psi: float) -> float:
        return zero_torque_eta(replace(config, residual_phase=psi)) - target

    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        raise ValueError(
            f"zero-torque eta does not bracket {target} on [{lo}, {hi}]: "
            f"{f_lo + target:.4f} .. {f_hi + target:.4f}"
        )
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if abs(hi - lo) < tol:
            break
        if f(mid) * f_lo <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f(mid)
    return 0.5 * (lo + hi)


def sweep_eta_map(
    config: PlantConfig,
    peak_torque: float = 24.0,
    n_peak: int = 26,
    n_offset: int = 26,
) -> list[dict]:
    """Noiseless work-ratio map over the timing bound rectangle.

    One row per grid cell with keys t_peak, t_offset, Wp, Wn, eta, feasible.
    Cells violating the minimum peak-to-offset separation are emitted with
    feasible=False and NaN works.  This map is the oracle the calibrated
    defaults were checked against.
    """
    from .torque_profile import MIN_SEPARATION, OFFSET_TIMING_RANGE, PEAK_TIMING_RANGE

    cfg = noiseless(config)
    peaks = np.linspace(*PEAK_TIMING_RANGE, n_peak)
    offsets = np.linspace(*OFFSET_TIMING_RANGE, n_offset)
    rows = []
    for tp in peaks:
        for to in offsets:
            if to < tp + MIN_SEPARATION:
                rows.append(
                    dict(t_peak=tp, t_offset=to, Wp=np.nan, Wn=np.nan,
                         eta=np.nan, feasible=False)
                )
                continue
            m = simulate_cycle(ProfileParams(peak_torque, tp, to), cfg)
            rows.append(
                dict(t_peak=tp, t_offset=to, Wp=m.positive_work, Wn=m.negative_work,
                     eta=m.work_ratio, feasible=True)
            )
    return rows


def calibrate_residual_amp(
    config: PlantConfig,
    target_floor: float = 0.017,
    peak_torque: float = 24.0,
    lo: float = 1e-3,
    hi: float = 2.0,
    tol: float = 1e-3,
    grid: int = 26,
) -> float:
    """Bisect the residual amplitude until the grid minimum of the noiseless
    work-ratio map reaches target_floor.

    The floor grows with the residual amplitude (more braking work
    everywhere); keeping it just under 0.02 preserves the required span of
    the map while leaving the residual visible in every cell.
    """

    def floor(amp: float) -> float:
        rows = sweep_eta_map(
            replace(config, residual_torque_amp=amp), peak_torque, grid, grid
        )
        return min(r["eta"] for r in rows if r["feasible"])

    f_lo, f_hi = floor(lo) - target_floor, floor(hi) - target_floor
    if f_lo * f_hi > 0:
        raise ValueError(
            f"eta floor does not bracket {target_floor} for amplitudes "
            f"[{lo}, {hi}]: {f_lo + target_floor:.4f} .. {f_hi + target_floor:.4f}"
        )
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if abs(hi - lo) < tol:
            break
        if (floor(mid) - target_floor) * f_lo <= 0:
            hi = mid
        else:
            lo = mid
            f_lo = floor(mid) - target_floor
    return 0.5 * (lo + hi)
