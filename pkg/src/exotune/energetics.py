"""Transferred power, signed work split, and work ratio over joint traces.

Power is the pointwise product of measured torque and angular velocity;
work integrates power over a gait cycle, split into the positive part
(motor pushing the limb) and the negative part (motor braking it).  The
transferred work ratio eta = |W-| / (W+ + |W-|) is the quantity the
tuning loop regulates: lower means the exoskeleton delivers mostly
positive work.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

_trapz = getattr(np, "trapezoid", np.trapz)


@dataclass(frozen=True)
class WorkSplit:
    """Signed work over one cycle: positive_work >= 0, negative_work <= 0 (J)."""

    positive_work: float
    negative_work: float

    def __post_init__(self):
        if self.positive_work < 0:
            raise ValueError(f"positive_work must be >= 0, got {self.positive_work}")
        if self.negative_work > 0:
            raise ValueError(f"negative_work must be <= 0, got {self.negative_work}")

    @property
    def is_degenerate(self) -> bool:
        """True when no work was transferred in either direction."""
        return self.positive_work + abs(self.negative_work) == 0.0


def power_series(torque, velocity) -> np.ndarray:
    """Pointwise product of torque (N·m) and velocity (rad/s) traces, in W."""
    tq = np.asarray(torque, dtype=float)
    vel = np.asarray(velocity, dtype=float)
    if tq.shape != vel.shape:
        raise ValueError(f"trace length mismatch: {tq.shape} vs {vel.shape}")
    if tq.size < 2:
        raise ValueError(f"need at least 2 samples, got {tq.size}")
    return tq * vel


def work_split(power, dt: float) -> WorkSplit:
    """Trapezoidal integrals of the positive- and negative-clipped power trace.

    Clipping happens before integration so each sample contributes to
    exactly one side according to its sign.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    p = np.asarray(power, dtype=float)
    if p.size < 2:
        raise ValueError(f"need at least 2 samples, got {p.size}")
    wp = float(_trapz(np.clip(p, 0.0, None), dx=dt))
    wn = float(_trapz(np.clip(p, None, 0.0), dx=dt))
    return WorkSplit(positive_work=wp, negative_work=wn)


def work_ratio(split: WorkSplit) -> float:
    """Transferred work ratio |W-| / (W+ + |W-|), or 0 for a degenerate split."""
    if split.is_degenerate:
        return 0.0
    wn = abs(split.negative_work)
    return wn / (split.positive_work + wn)


def load_trace_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a logged trace CSV with columns time_s, torque_Nm, velocity_rad_s.

    Returns (time, torque, velocity) arrays.  Raises ValueError naming the
    offending row on malformed input.
    """
    times, torques, velocities = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != [
            "time_s",
            "torque_Nm",
            "velocity_rad_s",
        ]:
            raise ValueError(f"{path}: row 1: expected header time_s,torque_Nm,velocity_rad_s")
        for i, row in enumerate(reader, start=2):
            if len(row) < 3:
                raise ValueError(f"{path}: row {i}: expected 3 columns, got {len(row)}")
            try:
                times.append(float(row[0]))
                torques.append(float(row[1]))
                velocities.append(float(row[2]))
            except ValueError:
                raise ValueError(f"{path}: row {i}: non-numeric value") from None
    if len(times) < 2:
        raise ValueError(f"{path}: need at least 2 data rows")
    return np.asarray(times), np.asarray(torques), np.asarray(velocities)
