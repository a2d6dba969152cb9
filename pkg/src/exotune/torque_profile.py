"""Two-parameter assistive torque profile built from minimum-jerk halves.

The curve rises from zero at onset to a single peak and returns to zero at
offset, with zero slope at all three landmarks.  Peak timing and offset
timing are expressed in percent of a gait cycle that starts at maximum hip
flexion; they are the two knobs the tuning loop adjusts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Protocol bounds for the tunable timings, percent of gait cycle.
PEAK_TIMING_RANGE = (15.0, 40.0)
OFFSET_TIMING_RANGE = (30.0, 55.0)

# Minimum peak-to-offset separation (percentage points) so the falling half
# never degenerates; the bound rectangles alone would allow t_peak > t_offset.
MIN_SEPARATION = 5.0


@dataclass(frozen=True)
class ProfileParams:
    """Parameters of one assistive torque curve.

    peak_torque is in N·m (0 is allowed and means transparent / zero-torque
    mode); the three timing fields are percent of the gait cycle.
    """

    peak_torque: float
    t_peak: float
    t_offset: float
    t_onset: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.peak_torque) or self.peak_torque < 0:
            raise ValueError(f"peak_torque must be >= 0 N·m, got {self.peak_torque}")
        lo, hi = PEAK_TIMING_RANGE
        if not lo <= self.t_peak <= hi:
            raise ValueError(f"t_peak {self.t_peak} outside [{lo}, {hi}] %")
        lo, hi = OFFSET_TIMING_RANGE
        if not lo <= self.t_offset <= hi:
            raise ValueError(f"t_offset {self.t_offset} outside [{lo}, {hi}] %")
        if not self.t_onset < self.t_peak:
            raise ValueError(f"t_onset {self.t_onset} must precede t_peak {self.t_peak}")
        if self.t_offset < self.t_peak + MIN_SEPARATION:
            raise ValueError(
                f"t_offset {self.t_offset} must be at least {MIN_SEPARATION} points "
                f"past t_peak {self.t_peak}"
            )


def min_jerk(s: float) -> float:
    """Normalized minimum-jerk rise on [0, 1].

    Quintic 10s^3 - 15s^4 + 6s^5: value goes 0 -> 1 while first and second
    derivatives vanish at both endpoints.

    Raises ValueError if s is outside [0, 1].
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"normalized time {s} outside [0, 1]")
    return _quintic(s)


def _quintic(s):
    # no domain check: internal callers guarantee s in [0, 1]
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


def torque_at(params: ProfileParams, phase):
    """Assistive torque (N·m) at a gait phase given in percent.

    Accepts a scalar or an ndarray of phases.  Zero outside the
    [t_onset, t_offset] support; two minimum-jerk halves joined at t_peak
    inside it, so the curve is C1 with zero slope at onset, peak and offset.
    """
    phi = np.asarray(phase, dtype=float)
    out = np.zeros_like(phi)

    rising = (phi > params.t_onset) & (phi <= params.t_peak)
    falling = (phi > params.t_peak) & (phi < params.t_offset)

    if np.any(rising):
        s = (phi[rising] - params.t_onset) / (params.t_peak - params.t_onset)
        out[rising] = params.peak_torque * _quintic(s)
    if np.any(falling):
        s = (params.t_offset - phi[falling]) / (params.t_offset - params.t_peak)
        out[falling] = params.peak_torque * _quintic(s)

    if np.isscalar(phase) or np.ndim(phase) == 0:
        return float(out)
    return out


def sample_profile(params: ProfileParams, n: int) -> np.ndarray:
    """Sample the torque curve at n evenly spaced phases over one cycle.

    Element i is the torque at phase 100*i/n percent.  Requires n >= 2.
    """
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    phases = 100.0 * np.arange(n) / n
    return torque_at(params, phases)
