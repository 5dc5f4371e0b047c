"""Truncated CMDP solver: relative value iteration plus multiplier search.

The constrained problem (minimize average age subject to a per-slot collision
budget) is relaxed with a multiplier on the collision cost.  For each fixed
multiplier the unconstrained average-cost problem is solved by relative value
iteration on a truncated age grid; the greedy policies are threshold-shaped,
so a deterministic bisection on the multiplier brackets the budget with two
consecutive thresholds, and a boundary randomization closes the gap exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import SystemParams
from .channel import BUSY, IDLE, slot_transition_matrix

NO_TRANSMIT = 0
TRANSMIT = 1


class RviConvergenceError(RuntimeError):
    def __init__(self, span: float, max_iter: int):
        super().__init__(f"RVI span {span:.3e} after {max_iter} iterations")
        self.span = span


class ThresholdStructureError(ValueError):
    def __init__(self, offending: list[int]):
        super().__init__(f"policy is not monotone in age; offending idle ages: {offending}")
        self.offending = offending


class BisectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class AoiState:
    delta: int
    occupancy: int

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError(f"age must be >= 1, got {self.delta}")
        if self.occupancy not in (IDLE, BUSY):
            raise ValueError(f"occupancy must be IDLE or BUSY, got {self.occupancy}")


def reward(state: AoiState, action: int) -> float:
    """Per-slot age penalty; independent of the action."""
    return float(state.delta)


def collision_cost(state: AoiState, action: int, params: SystemParams) -> float:
    """Expected collisions caused by the action in this state."""
    if action == NO_TRANSMIT:
        return 0.0
    if state.occupancy == BUSY:
        return 1.0
    return 1.0 - math.exp(-params.rates.alpha)


def transition_kernel(
    state: AoiState, action: int, params: SystemParams, delta_max: int
) -> dict[AoiState, float]:
    """One-step distribution over successor states, age clamped at delta_max."""
    if action == TRANSMIT and state.occupancy == BUSY:
        raise ValueError("transmit is not allowed from a busy-sensed state")
    sig = slot_transition_matrix(params.rates)
    nxt = min(state.delta + 1, delta_max)
    if action == NO_TRANSMIT:
        row = (sig.p_II, sig.p_IB) if state.occupancy == IDLE else (sig.p_BI, sig.p_BB)
        return {AoiState(nxt, IDLE): row[0], AoiState(nxt, BUSY): row[1]}
    ok = params.success_prob
    return {
        AoiState(1, IDLE): ok,
        AoiState(nxt, IDLE): sig.p_II - ok,
        AoiState(nxt, BUSY): sig.p_IB,
    }


@dataclass(frozen=True)
class TruncatedModel:
    """Finite-age CMDP with self-clamping at delta_max."""

    params: SystemParams
    delta_max: int = 200

    def __post_init__(self):
        if self.delta_max < 2:
            raise ValueError(f"delta_max must be >= 2, got {self.delta_max}")

    @property
    def deltas(self) -> np.ndarray:
        return np.arange(1, self.delta_max + 1)


@dataclass(frozen=True)
class SolvedPolicy:
    """RVI output: average Lagrangian reward, bias values, greedy decisions."""

    gain: float
    bias_idle: np.ndarray
    bias_busy: np.ndarray
    transmit: np.ndarray  # bool per idle age 1..delta_max
    lam: float
    iterations: int


def rvi_solve(
    model: TruncatedModel,
    lam: float,
    span_tol: float = 1e-10,
    max_iter: int = 100_000,
    h_init: tuple[np.ndarray, np.ndarray] | None = None,
    damping: float = 0.5,
) -> SolvedPolicy:
    """Relative value iteration on age + lam * collision cost, minimizing.

    Reference state is (age 1, idle).  Greedy ties break toward no-transmit,
    which is the conservative choice for the collision constraint.  The
    iterate is damped by the aperiodicity transformation
    h <- (1 - damping) h + damping T(h): the renewal chain induced by a
    threshold policy is nearly periodic, and the undamped span contracts
    orders of magnitude more slowly.  The fixed point is unchanged; the gain
    is rescaled back before returning.
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if span_tol <= 0:
        raise ValueError("span_tol must be positive")
    if not (0.0 < damping <= 1.0):
        raise ValueError(f"damping must be in (0, 1], got {damping}")
    sig = slot_transition_matrix(model.params.rates)
    ok = model.params.success_prob
    dmax = model.delta_max
    deltas = np.arange(1, dmax + 1, dtype=float)
    nxt = np.minimum(np.arange(1, dmax + 1), dmax - 1)  # 0-based row of age+1, clamped
    tx_cost = lam * (1.0 - math.exp(-model.params.rates.alpha))

    if h_init is not None:
        h0 = np.array(h_init[0], dtype=float)
        h1 = np.array(h_init[1], dtype=float)
    else:
        h0 = np.zeros(dmax)
        h1 = np.zeros(dmax)

    span = math.inf
    for it in range(1, max_iter + 1):
        q_no_idle = deltas + sig.p_II * h0[nxt] + sig.p_IB * h1[nxt]
        q_no_busy = deltas + sig.p_BI * h0[nxt] + sig.p_BB * h1[nxt]
        q_tx = deltas + tx_cost + ok * h0[0] + (sig.p_II - ok) * h0[nxt] + sig.p_IB * h1[nxt]
        new0 = (1.0 - damping) * h0 + damping * np.minimum(q_no_idle, q_tx)
        new1 = (1.0 - damping) * h1 + damping * q_no_busy
        gain = new0[0]
        new0 -= gain
        new1 -= gain
        diff = np.concatenate((new0 - h0, new1 - h1))
        span = float(diff.max() - diff.min())
        h0, h1 = new0, new1
        if span < span_tol:
            transmit = q_tx < q_no_idle
            return SolvedPolicy(
                gain=float(gain) / damping,
                bias_idle=h0,
                bias_busy=h1,
                transmit=transmit,
                lam=lam,
                iterations=it,
            )
    raise RviConvergenceError(span, max_iter)


def extract_threshold(policy: SolvedPolicy) -> int:
    """Smallest idle age at which the policy transmits, after a monotonicity check.

    A policy that never transmits is vacuously monotone and yields
    delta_max + 1 (no finite threshold).
    """
    tx = np.asarray(policy.transmit, dtype=bool)
    idx = np.flatnonzero(tx)
    if idx.size == 0:
        return tx.size + 1
    first = int(idx[0])
    if not tx[first:].all():
        offending = [int(i) + 1 for i in np.flatnonzero(~tx[first:]) + first]
        raise ThresholdStructureError(offending)
    return first + 1


@dataclass(frozen=True)
class PolicyMetrics:
    avg_aoi: float
    avg_cost: float
    divergent: bool = False


def _transmit_probs(policy) -> np.ndarray:
    if isinstance(policy, SolvedPolicy):
        return np.asarray(policy.transmit, dtype=float)
    return np.asarray(policy, dtype=float)


def policy_cost_evaluate(policy, model: TruncatedModel) -> PolicyMetrics:
    """Stationary average age and collision cost of a (possibly randomized) policy.

    ``policy`` is a SolvedPolicy or an array of transmit probabilities per
    idle age.  A policy that never transmits has no age renewal; under the
    clamp its age sits at delta_max, reported as a divergent-age result.
    """
    p_tx = _transmit_probs(policy)
    if p_tx.shape != (model.delta_max,):
        raise ValueError(f"expected {model.delta_max} transmit probabilities, got {p_tx.shape}")
    if not p_tx.any():
        return PolicyMetrics(avg_aoi=math.inf, avg_cost=0.0, divergent=True)
    sig = slot_transition_matrix(model.params.rates)
    ok = model.params.success_prob
    dmax = model.delta_max
    n = 2 * dmax
    P = np.zeros((n, n))
    for i, d in enumerate(range(1, dmax + 1)):
        dn = min(d + 1, dmax) - 1
        s_idle, s_busy = 2 * i, 2 * i + 1
        p = p_tx[i]
        P[s_idle, 0] += p * ok
        P[s_idle, 2 * dn] += p * (sig.p_II - ok) + (1.0 - p) * sig.p_II
        P[s_idle, 2 * dn + 1] += sig.p_IB
        P[s_busy, 2 * dn] += sig.p_BI
        P[s_busy, 2 * dn + 1] += sig.p_BB
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    dist = np.linalg.solve(A, rhs)
    dist = np.where(np.abs(dist) < 1e-15, 0.0, dist)
    if dist.min() < -1e-10 or abs(dist.sum() - 1.0) > 1e-12:
        raise RuntimeError("stationary solve produced an invalid distribution")
    idle = dist[0::2]
    busy = dist[1::2]
    deltas = np.arange(1, dmax + 1)
    avg_aoi = float((deltas * (idle + busy)).sum())
    avg_cost = float((idle * p_tx).sum() * (1.0 - math.exp(-model.params.rates.alpha)))
    return PolicyMetrics(avg_aoi=avg_aoi, avg_cost=avg_cost)


@dataclass(frozen=True)
class ConstrainedSolution:
    """Output of the multiplier search: bracketing policies and the mixture."""

    lambda_low: float
    lambda_high: float
    policy_low: SolvedPolicy
    policy_high: SolvedPolicy
    gamma1: int
    gamma2: int
    mu: float
    achieved_cost: float
    achieved_aoi: float

    def mixed_transmit_probs(self, delta_max: int) -> np.ndarray:
        p = np.zeros(delta_max)
        p[self.gamma1 - 1] = self.mu
        p[self.gamma1:] = 1.0
        return p


def lambda_bisection(
    model: TruncatedModel,
    eta_s: float | None = None,
    span_tol: float = 1e-10,
    max_expand: int = 60,
    max_bisect: int = 200,
) -> ConstrainedSolution:
    """Deterministic multiplier search for the constrained optimum.

    Bisects the multiplier until the two bracketing greedy policies have
    consecutive (or equal) thresholds, then sets the boundary randomization so
    the stationary collision cost of the mixed policy equals the budget (the
    reciprocal cost is linear in the mixing probability).  Warm-starts each
    RVI from the previous bias to keep the search cheap.
    """
    if eta_s is None:
        eta_s = model.params.eta_s
    if not (0.0 < eta_s < 1.0):
        raise ValueError(f"eta_s must be in (0, 1), got {eta_s}")

    def solve(lam, warm):
        pol = rvi_solve(model, lam, span_tol=span_tol, h_init=warm)
        gamma = extract_threshold(pol)
        if gamma <= model.delta_max and gamma > model.delta_max // 2:
            raise BisectionError(
                f"threshold {gamma} exceeds delta_max/2 = {model.delta_max // 2}; "
                "increase delta_max for a trustworthy truncation"
            )
        cost = policy_cost_evaluate(pol, model).avg_cost if gamma <= model.delta_max else 0.0
        return pol, gamma, cost

    pol0, gamma0, cost0 = solve(0.0, None)
    warm = (pol0.bias_idle, pol0.bias_busy)
    if cost0 <= eta_s:
        metrics = policy_cost_evaluate(pol0, model)
        return ConstrainedSolution(
            lambda_low=0.0,
            lambda_high=0.0,
            policy_low=pol0,
            policy_high=pol0,
            gamma1=gamma0,
            gamma2=gamma0,
            mu=1.0,
            achieved_cost=metrics.avg_cost,
            achieved_aoi=metrics.avg_aoi,
        )

    lam_lo, pol_lo, gamma_lo, cost_lo = 0.0, pol0, gamma0, cost0
    lam_hi = 1.0
    pol_hi = gamma_hi = cost_hi = None
    for _ in range(max_expand):
        pol_hi, gamma_hi, cost_hi = solve(lam_hi, warm)
        warm = (pol_hi.bias_idle, pol_hi.bias_busy)
        if cost_hi <= eta_s:
            break
        lam_lo, pol_lo, gamma_lo, cost_lo = lam_hi, pol_hi, gamma_hi, cost_hi
        lam_hi *= 2.0
    else:
        raise BisectionError(f"no multiplier up to {lam_hi} satisfies the budget {eta_s}")

    for _ in range(max_bisect):
        if gamma_hi - gamma_lo <= 1:
            break
        mid = 0.5 * (lam_lo + lam_hi)
        pol_m, gamma_m, cost_m = solve(mid, warm)
        warm = (pol_m.bias_idle, pol_m.bias_busy)
        if cost_m > eta_s:
            lam_lo, pol_lo, gamma_lo, cost_lo = mid, pol_m, gamma_m, cost_m
        else:
            lam_hi, pol_hi, gamma_hi, cost_hi = mid, pol_m, gamma_m, cost_m
    else:
        raise BisectionError(
            f"bracket did not shrink to consecutive thresholds within {max_bisect} bisections"
        )

    if gamma_lo == gamma_hi:
        mu = 1.0
        gamma1 = gamma2 = gamma_lo
    else:
        gamma1, gamma2 = gamma_lo, gamma_hi
        if cost_lo == eta_s:
            mu = 1.0
        else:
            mu = (1.0 / eta_s - 1.0 / cost_hi) / (1.0 / cost_lo - 1.0 / cost_hi)
    probs = np.zeros(model.delta_max)
    probs[gamma1 - 1] = mu
    probs[gamma1:] = 1.0
    mixed = policy_cost_evaluate(probs, model)
    return ConstrainedSolution(
        lambda_low=lam_lo,
        lambda_high=lam_hi,
        policy_low=pol_lo,
        policy_high=pol_hi,
        gamma1=gamma1,
        gamma2=gamma2,
        mu=float(mu),
        achieved_cost=mixed.avg_cost,
        achieved_aoi=mixed.avg_aoi,
    )
