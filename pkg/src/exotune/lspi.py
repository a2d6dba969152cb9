"""Least-squares policy iteration over a scalar state and a 2-D action.

The Q-function is a pure quadratic in z = (x, u1, u2): six monomial
features (x^2, x*u1, x*u2, u1^2, u1*u2, u2^2) and a 6-D weight vector.
Policy evaluation is a single regularized LSTD-Q solve over the collected
transition samples; policy improvement extracts the greedy (cost-minimizing)
action over a box of per-component step limits, in closed form when the
action block of the quadratic is positive definite and by grid search
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

WEIGHT_DIM = 6

# LSTD-Q needs strictly more than twice the weight dimension in samples.
MIN_SAMPLES = 2 * WEIGHT_DIM + 1

# fallback grid resolution per action component for indefinite action blocks
GRID_POINTS = 201


class IllConditionedError(RuntimeError):
    """LSTD-Q system is numerically singular even after regularization."""

    def __init__(self, condition: float):
        super().__init__(f"LSTD-Q system ill-conditioned (cond ~ {condition:.3e})")
        self.condition = condition


@dataclass(frozen=True)
class CostWeights:
    """Quadratic stage-cost weights: scalar state penalty and 2x2 SPD action penalty."""

    r_x: float = 1.0
    r_u: np.ndarray = field(default_factory=lambda: np.diag([0.01, 0.01]))

    def __post_init__(self):
        object.__setattr__(self, "r_u", np.asarray(self.r_u, dtype=float))
        if self.r_x <= 0:
            raise ValueError(f"r_x must be > 0, got {self.r_x}")
        r = self.r_u
        if r.shape != (2, 2) or not np.allclose(r, r.T):
            raise ValueError("r_u must be a symmetric 2x2 matrix")
        if r[0, 0] <= 0 or np.linalg.det(r) <= 0:
            raise ValueError("r_u must be positive definite")


@dataclass(frozen=True)
class Sample:
    """One transition: state, action, observed stage cost, next state."""

    x: float
    u: tuple[float, float]
    cost: float
    x_next: float


def features(x: float, u) -> np.ndarray:
    """Quadratic feature vector (x^2, x*u1, x*u2, u1^2, u1*u2, u2^2)."""
    u1, u2 = float(u[0]), float(u[1])
    return np.array([x * x, x * u1, x * u2, u1 * u1, u1 * u2, u2 * u2])


def stage_cost(x: float, u, weights: CostWeights) -> float:
    """Quadratic stage cost r_x*x^2 + u' R_u u; zero only at the origin."""
    uv = np.asarray(u, dtype=float)
    return float(weights.r_x * x * x + uv @ weights.r_u @ uv)


def q_value(w: np.ndarray, x: float, u) -> float:
    """Q estimate: dot product of the weight vector with the features."""
    return float(np.asarray(w) @ features(x, u))


def quadratic_matrix(w) -> np.ndarray:
    """Symmetric 3x3 matrix P with z' P z = w . features for z = (x, u1, u2)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (WEIGHT_DIM,):
        raise ValueError(f"weight vector must have {WEIGHT_DIM} entries, got {w.shape}")
    return np.array(
        [
            [w[0], w[1] / 2.0, w[2] / 2.0],
            [w[1] / 2.0, w[3], w[4] / 2.0],
            [w[2] / 2.0, w[4] / 2.0, w[5]],
        ]
    )


def _action_box(max_step) -> np.ndarray:
    b = np.broadcast_to(np.asarray(max_step, dtype=float), (2,)).copy()
    if np.any(b <= 0):
        raise ValueError(f"max_step must be > 0 per component, got {max_step}")
    return b


def greedy_action(w, x: float, max_step=2.0) -> np.ndarray:
    """Action minimizing the quadratic Q over the box |u_i| <= max_step_i.

    When the action block P_uu of the quadratic is positive definite the
    unconstrained minimizer -P_uu^-1 P_ux x is used; if it violates the box,
    the box edges are searched in closed form (the constrained minimum of a
    convex quadratic lies on the boundary).  For indefinite P_uu the box is
    scanned on a 201x201 grid.
    """
    box = _action_box(max_step)
    p = quadratic_matrix(w)
    p_uu = p[1:, 1:]
    p_ux = p[1:, 0]

    det = p_uu[0, 0] * p_uu[1, 1] - p_uu[0, 1] ** 2
    if p_uu[0, 0] > 0 and det > 0:
        u_star = np.linalg.solve(p_uu, -p_ux * x)
        if np.all(np.abs(u_star) <= box):
            return u_star
        return _best_edge_action(p_uu, p_ux, x, box)
    return _grid_action(w, x, box)


def _best_edge_action(p_uu, p_ux, x, box):
    # minimize 0.5-free convex quadratic u'P_uu u + 2 x p_ux . u on the box
    # boundary: fix one component at a bound, solve the remaining 1-D problem
    candidates = []
    for i in (0, 1):
        j = 1 - i
        for s in (-box[i], box[i]):
            # dQ/du_j = 2 p_uu[j,j] u_j + 2 p_uu[i,j] s + 2 p_ux[j] x = 0
            uj = -(p_uu[i, j] * s + p_ux[j] * x) / p_uu[j, j]
            uj = min(box[j], max(-box[j], uj))
            u = np.empty(2)
            u[i], u[j] = s, uj
            candidates.append(u)

    def q_of(u):
        return u @ p_uu @ u + 2.0 * x * (p_ux @ u)

    return min(candidates, key=q_of)


def _grid_action(w, x, box):
    g1 = np.linspace(-box[0], box[0], GRID_POINTS)
    g2 = np.linspace(-box[1], box[1], GRID_POINTS)
    u1, u2 = np.meshgrid(g1, g2, indexing="ij")
    q = (
        w[0] * x * x
        + w[1] * x * u1
        + w[2] * x * u2
        + w[3] * u1 * u1
        + w[4] * u1 * u2
        + w[5] * u2 * u2
    )
    i, j = np.unravel_index(np.argmin(q), q.shape)
    return np.array([g1[i], g2[j]])


def explore_action(greedy, sigma: float, max_step=2.0, rng=None) -> np.ndarray:
    """Greedy action plus independent Gaussian perturbation, clipped to the box."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    box = _action_box(max_step)
    u = np.asarray(greedy, dtype=float).copy()
    if sigma > 0:
        if rng is None:
            rng = np.random.default_rng()
        u = u + rng.normal(0.0, sigma, size=2)
    return np.clip(u, -box, box)


def lstdq_solve(
    samples,
    policy_weights,
    gamma: float = 0.9,
    ridge: float = 1e-6,
    max_step=2.0,
) -> np.ndarray:
    """One regularized LSTD-Q solve under the supplied evaluation policy.

    Solves (A + ridge*I) w = b with
    A = sum phi_i (phi_i - gamma * phi'_i)',  b = sum phi_i cost_i,
    where phi_i are the features of (x_i, u_i) and phi'_i the features of
    (x'_i, pi(x'_i)) for the greedy policy of policy_weights.
    """
    samples = list(samples)
    if len(samples) < MIN_SAMPLES:
        raise ValueError(
            f"need at least {MIN_SAMPLES} samples "
            f"(more than twice the weight dimension), got {len(samples)}"
        )
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")

    a = np.zeros((WEIGHT_DIM, WEIGHT_DIM))
    b = np.zeros(WEIGHT_DIM)
    for s in samples:
        phi = features(s.x, s.u)
        u_next = greedy_action(policy_weights, s.x_next, max_step)
        phi_next = features(s.x_next, u_next)
        a += np.outer(phi, phi - gamma * phi_next)
        b += phi * s.cost

    m = a + ridge * np.eye(WEIGHT_DIM)
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > 1e14:
        raise IllConditionedError(cond)
    try:
        w = np.linalg.solve(m, b)
    except np.linalg.LinAlgError:
        raise IllConditionedError(cond) from None
    if not np.all(np.isfinite(w)):
        raise IllConditionedError(cond)
    return w


def initial_weights(rng, min_eigenvalue: float = 0.1) -> np.ndarray:
    """Random starting policy: uniform weights with the action block nudged
    positive definite so the greedy action is well defined."""
    w = rng.uniform(-1.0, 1.0, size=WEIGHT_DIM)
    p_uu = quadratic_matrix(w)[1:, 1:]
    smallest = np.linalg.eigvalsh(p_uu)[0]
    if smallest < min_eigenvalue:
        bump = min_eigenvalue - smallest
        w[3] += bump
        w[5] += bump
    return w
