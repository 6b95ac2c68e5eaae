"""Power allocation over the scalar subchannels for the Gaussian-input
objective, with optional per-subchannel caps (used to keep finite-alphabet
rates from collapsing at high power).

The problem solved is

    max  sum_i [ log2(1 + a_i q_i) - log2(1 + b_i q_i) ]
    s.t. sum_i c_i q_i <= P0,   0 <= q_i <= cap_i.

Each term is increasing and concave, so the optimum either exhausts the
budget or hits every cap.  Stationarity at a multiplier mu gives a closed
form per subchannel (a quadratic for b_i > 0, plain water-filling for
b_i = 0), and mu is found by bisection on the monotone budget map.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InputError
from .gsvd import SubchannelSet, reassemble_covariance
from .model import LOG2E


@dataclass
class AllocationProblem:
    """Subchannels plus budget, with optional per-subchannel power caps
    (entries may be +inf; caps=None means unbounded)."""

    subchannels: SubchannelSet
    p0: float
    caps: np.ndarray = None

    def __post_init__(self):
        self.p0 = float(self.p0)
        if not np.isfinite(self.p0) or self.p0 <= 0:
            raise InputError(f"P0 must be positive and finite, got {self.p0}")
        s = self.subchannels
        if not (np.all(np.isfinite(s.a)) and np.all(np.isfinite(s.b)) and np.all(np.isfinite(s.c))):
            raise InputError("subchannel coefficients must be finite")
        if self.caps is not None:
            self.caps = np.asarray(self.caps, dtype=np.float64)
            if self.caps.shape != (s.l,):
                raise InputError(f"caps must have length l={s.l}, got shape {self.caps.shape}")
            if np.any(np.isnan(self.caps)) or np.any(self.caps <= 0):
                raise InputError("caps must be positive (or +inf)")


@dataclass
class AllocationResult:
    """Solution: subchannel powers, reassembled covariance, the Gaussian
    objective value in bits per channel use, the KKT multiplier, and whether
    the budget constraint is tight."""

    q: np.ndarray
    Q: np.ndarray = field(repr=False)
    objective_gaussian: float = 0.0
    mu: float = 0.0
    active_budget: bool = False


def subchannel_objective(a, b, q) -> float:
    """sum_i [log2(1 + a_i q_i) - log2(1 + b_i q_i)] in bits."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.sum(np.log2(1.0 + a * q) - np.log2(1.0 + b * q)))


def marginal_rate(a, b, q):
    """Derivative of one subchannel term, bits per unit power."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    q = np.asarray(q, dtype=float)
    return (a / (1.0 + a * q) - b / (1.0 + b * q)) * LOG2E


def _q_of_mu(a, b, c, mu, caps):
    """Per-subchannel optimal power at multiplier mu, clipped to [0, cap].

    For b > 0 the interior stationary point is the positive root of
    a b q^2 + (a + b) q + (1 - (a - b) log2 e / (mu c)) = 0, evaluated with
    the cancellation-free quadratic form; for b = 0 it is water-filling.
    """
    g = mu * c / LOG2E
    q = np.zeros_like(a)
    pos = b > 0.0
    if np.any(pos):
        ap, bp, gp = a[pos], b[pos], g[pos]
        C = 1.0 - (ap - bp) / gp
        disc = (ap + bp) ** 2 - 4.0 * ap * bp * C
        denom = -(ap + bp) - np.sqrt(np.maximum(disc, 0.0))
        q[pos] = np.where(C < 0.0, 2.0 * C / denom, 0.0)
    if np.any(~pos):
        az, gz = a[~pos], g[~pos]
        q[~pos] = 1.0 / gz - 1.0 / az
    return np.clip(q, 0.0, caps)


def _zero_result(s: SubchannelSet) -> AllocationResult:
    q = np.zeros(0)
    return AllocationResult(
        q=q,
        Q=reassemble_covariance(s, q, s.n_s),
        objective_gaussian=0.0,
        mu=0.0,
        active_budget=False,
    )


def solve_gaussian(p: AllocationProblem) -> AllocationResult:
    """Maximize the Gaussian-input subchannel sum under the budget and caps.

    mu is bracketed by [1e-18, max_i (a_i - b_i) log2 e / c_i] (the largest
    marginal value at q = 0) and bisected until the spent budget matches P0
    to 1e-10 relative or 200 iterations.  If the caps alone cost no more
    than P0, the capped point is returned directly (every term is
    increasing, so it is globally optimal there).
    """
    s = p.subchannels
    if s.l == 0:
        return _zero_result(s)
    a, b, c = s.a, s.b, s.c
    caps = p.caps if p.caps is not None else np.full(s.l, np.inf)

    cap_cost = float(np.sum(c * np.where(np.isinf(caps), np.inf, caps)))
    if cap_cost <= p.p0:
        q = caps.copy()
        spent = cap_cost
        mu = 0.0
    else:
        mu_hi = float(np.max((a - b) * LOG2E / c))
        mu_lo = 1e-18
        q = _q_of_mu(a, b, c, mu_hi, caps)
        mu = mu_hi
        for _ in range(200):
            mu = 0.5 * (mu_lo + mu_hi)
            q = _q_of_mu(a, b, c, mu, caps)
            spent = float(np.sum(c * q))
            if abs(spent - p.p0) <= 1e-10 * p.p0:
                break
            if spent > p.p0:
                mu_lo = mu
            else:
                mu_hi = mu
        spent = float(np.sum(c * q))

    return AllocationResult(
        q=q,
        Q=reassemble_covariance(s, q, s.n_s),
        objective_gaussian=subchannel_objective(a, b, q),
        mu=mu,
        active_budget=bool(abs(spent - p.p0) <= 1e-9 * p.p0),
    )


def solve_equal_weight(p: AllocationProblem) -> AllocationResult:
    """Suboptimal allocation assigning the same power to every subchannel:
    the largest feasible equal value under the budget and caps."""
    s = p.subchannels
    if s.l < 1:
        raise InputError("equal-weight allocation needs at least one subchannel")
    caps = p.caps if p.caps is not None else np.full(s.l, np.inf)
    q_eq = min(p.p0 / float(np.sum(s.c)), float(np.min(caps)))
    q = np.full(s.l, q_eq)
    spent = float(np.sum(s.c * q))
    return AllocationResult(
        q=q,
        Q=reassemble_covariance(s, q, s.n_s),
        objective_gaussian=subchannel_objective(s.a, s.b, q),
        mu=0.0,
        active_budget=bool(abs(spent - p.p0) <= 1e-9 * p.p0),
    )


def budget_sweep(p: AllocationProblem, p0_grid) -> list:
    """Solve the same problem at every budget in a strictly increasing
    positive grid; objectives are nondecreasing along the grid."""
    grid = np.asarray(p0_grid, dtype=float)
    if grid.size == 0:
        raise InputError("P0 grid is empty")
    if np.any(~np.isfinite(grid)) or np.any(grid <= 0):
        raise InputError("P0 grid must be positive and finite")
    if np.any(np.diff(grid) <= 0):
        raise InputError("P0 grid must be strictly increasing")
    return [solve_gaussian(replace(p, p0=float(g))) for g in grid]


def kkt_residual(p: AllocationProblem, res: AllocationResult) -> float:
    """Largest violation of the optimality conditions at a solution.

    Checks stationarity on interior coordinates, the sign conditions at
    q_i = 0 and at capped coordinates, budget feasibility, and (when the
    budget is reported tight) how far the spent power is from P0.
    Scale: bits per unit power for the gradient terms, relative for budget.
    """
    s = p.subchannels
    if s.l == 0:
        return 0.0
    caps = p.caps if p.caps is not None else np.full(s.l, np.inf)
    grad = marginal_rate(s.a, s.b, res.q)
    target = res.mu * s.c
    worst = 0.0
    for i in range(s.l):
        at_zero = res.q[i] <= 1e-14 * max(1.0, caps[i] if np.isfinite(caps[i]) else 1.0)
        at_cap = np.isfinite(caps[i]) and res.q[i] >= caps[i] * (1.0 - 1e-12)
        if at_zero:
            worst = max(worst, grad[i] - target[i])
        elif at_cap:
            worst = max(worst, target[i] - grad[i])
        else:
            worst = max(worst, abs(grad[i] - target[i]))
    spent = float(np.sum(s.c * res.q))
    worst = max(worst, (spent - p.p0) / p.p0)
    if res.active_budget:
        worst = max(worst, abs(spent - p.p0) / p.p0)
    cap_violation = np.max(np.maximum(res.q - caps, 0.0) / np.where(np.isfinite(caps), caps, 1.0))
    return float(max(worst, cap_violation))
