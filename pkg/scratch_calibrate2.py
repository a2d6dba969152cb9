"""Second calibration pass: small residual amplitude, 0.16 level from flexion overlap."""
import numpy as np
from dataclasses import replace
import exotune.plant as P
from exotune.torque_profile import ProfileParams, MIN_SEPARATION

PEAKS = np.arange(15.0, 40.0 + 1e-9, 1.0)
OFFS = np.arange(30.0, 55.0 + 1e-9, 1.0)


def sweep(cfg, peak_torque=24.0):
    cfgn = P.noiseless(cfg)
    out = {}
    for tp in PEAKS:
        for to in OFFS:
            if to < tp + MIN_SEPARATION:
                continue
            out[(tp, to)] = P.simulate_cycle(ProfileParams(peak_torque, tp, to), cfgn).work_ratio
    return out


def report(cfg, label):
    etas = sweep(cfg)
    vals = np.array(list(etas.values()))
    emin, emax = vals.min(), vals.max()
    rev_pct = 100.0 * cfg.phase_reversal

    crossings = {}  # t_peak -> t_offset where row crosses 0.16
    interior_cross = 0
    for tp in PEAKS:
        row = [(to, etas[(tp, to)]) for to in OFFS if (tp, to) in etas]
        for (to1, e1), (to2, e2) in zip(row, row[1:]):
            if (e1 - 0.16) * (e2 - 0.16) <= 0:
                crossings.setdefault(tp, to1)
                if 15.0 < tp < 40.0 and 30.0 < to1 and to2 < 55.0:
                    interior_cross += 1
    viol = 0.0
    for tp in PEAKS:
        row = [(to, etas[(tp, to)]) for to in OFFS if (tp, to) in etas and to >= rev_pct]
        for (to1, e1), (to2, e2) in zip(row, row[1:]):
            viol = max(viol, e1 - e2)
    grad_min = np.inf
    for tp in PEAKS:
        row = [(to, etas[(tp, to)]) for to in OFFS if (tp, to) in etas and to <= rev_pct]
        for (to1, e1), (to2, e2) in zip(row, row[1:]):
            grad_min = min(grad_min, abs(e2 - e1))
    optima = [
        P.simulate_cycle(ProfileParams(24.0, tp, to), P.noiseless(cfg)).work_ratio
        for tp, to in [(22.67, 38.86), (15.27, 39.39), (20.78, 41.28)]
    ]
    c_lo = min(crossings.values()) if crossings else None
    c_hi = max(crossings.values()) if crossings else None
    print(
        f"{label}: span=[{emin:.4f},{emax:.4f}] cross_rows={len(crossings)} "
        f"interior={interior_cross} cross_toff=[{c_lo},{c_hi}] monoviol={viol:.2e} "
        f"plateau_grad={grad_min:.1e} optima={[f'{e:.3f}' for e in optima]}"
    )


for rev in [0.33, 0.36, 0.40]:
    for tau in [0.05, 0.07]:
        psi = P.calibrate_residual_phase(P.PlantConfig(phase_reversal=rev, lag_time_constant=tau))
        for amp in [0.2, 0.4, 0.8, 1.5]:
            cfg = P.PlantConfig(
                phase_reversal=rev, lag_time_constant=tau,
                residual_phase=psi, residual_torque_amp=amp,
            )
            report(cfg, f"rev={rev:.2f} tau={tau:.2f} amp={amp:.1f} psi={psi:.4f}")
