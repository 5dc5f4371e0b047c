"""Shared oracles and parameter grids for the test suite.

The oracles here are deliberately independent of the package internals: the
slot transition matrix comes from a matrix exponential, stationary
distributions come from power iteration on an explicitly assembled sparse
chain, and thresholds come from brute-force scans.  Closed forms in the
package are correct exactly when they agree with these.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
import scipy.sparse

from craoi import PuRates, SystemParams


def expm_transition(rates: PuRates, t: float = 1.0) -> np.ndarray:
    """Slot occupancy transition matrix via the matrix exponential of the generator."""
    q = np.array([[-rates.alpha, rates.alpha], [rates.beta, -rates.beta]])
    return scipy.linalg.expm(q * t)


def build_chain(params: SystemParams, tx_probs, delta_max: int) -> scipy.sparse.csr_matrix:
    """Assemble the age/occupancy chain for per-age idle transmit probabilities.

    States are indexed 2*(delta-1) + occupancy for delta = 1..delta_max; the
    age self-clamps at delta_max.  Built from first principles (matrix
    exponential plus the literal one-step dynamics), not from package code.
    """
    sig = expm_transition(params.rates)
    succ = (1.0 - params.phi_s) * math.exp(-params.rates.alpha)
    rows, cols, vals = [], [], []

    def idx(d, u):
        return 2 * (d - 1) + u

    for d in range(1, delta_max + 1):
        dn = min(d + 1, delta_max)
        p = float(tx_probs[d - 1]) if d - 1 < len(tx_probs) else float(tx_probs[-1])
        # idle-sensed slot: transmit with probability p
        rows += [idx(d, 0)] * 3
        cols += [idx(1, 0), idx(dn, 0), idx(dn, 1)]
        vals += [p * succ, sig[0, 0] - p * succ, sig[0, 1]]
        # busy-sensed slot: never transmit
        rows += [idx(d, 1)] * 2
        cols += [idx(dn, 0), idx(dn, 1)]
        vals += [sig[1, 0], sig[1, 1]]
    n = 2 * delta_max
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def power_iteration(
    P: scipy.sparse.csr_matrix, tol: float = 1e-13, max_iter: int = 500_000
) -> np.ndarray:
    """Stationary distribution by power iteration on the lazy chain (P + I) / 2.

    The lazy chain shares the stationary distribution of P and is aperiodic,
    so the iteration converges even when P itself is nearly periodic.
    """
    n = P.shape[0]
    v = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        v2 = 0.5 * (v @ P) + 0.5 * v
        if np.abs(v2 - v).max() < tol:
            v = v2
            break
        v = v2
    v = np.asarray(v).ravel()
    return v / v.sum()


def oracle_stationary(params: SystemParams, tx_probs, delta_max: int) -> np.ndarray:
    """Stationary distribution of the assembled chain, shape (delta_max, 2)."""
    dist = power_iteration(build_chain(params, tx_probs, delta_max))
    return dist.reshape(delta_max, 2)


def oracle_metrics(params: SystemParams, tx_probs, delta_max: int):
    """(average age, per-slot collision probability) from the oracle chain."""
    dist = oracle_stationary(params, tx_probs, delta_max)
    deltas = np.arange(1, delta_max + 1)
    probs = np.asarray(
        [tx_probs[min(d, len(tx_probs)) - 1] for d in deltas], dtype=float
    )
    aoi = float((deltas * dist.sum(axis=1)).sum())
    psi = float((dist[:, 0] * probs).sum() * (1.0 - math.exp(-params.rates.alpha)))
    return aoi, psi


def threshold_probs(gamma: int, delta_max: int) -> np.ndarray:
    p = np.zeros(delta_max)
    p[gamma - 1 :] = 1.0
    return p


def mixed_probs(gamma1: int, mu: float, delta_max: int) -> np.ndarray:
    p = np.zeros(delta_max)
    p[gamma1 - 1] = mu
    p[gamma1:] = 1.0
    return p


def brute_threshold_scan(params: SystemParams, psi_of_gamma, g_max: int = 10_000):
    """Largest gamma with psi >= eta and smallest with psi <= eta, by linear scan."""
    eta = params.eta_s
    g1 = g2 = None
    for g in range(1, g_max + 1):
        psi = psi_of_gamma(g)
        if psi >= eta:
            g1 = g
        if psi <= eta and g2 is None:
            g2 = g
        if g1 is not None and g2 is not None and g > g2:
            break
    return g1, g2


# (alpha, beta, phi_s, gamma): grid for steady-state oracle comparisons
STEADY_STATE_GRID = [
    (0.02, 0.4, 0.2, 1),
    (0.02, 0.4, 0.2, 5),
    (0.02, 0.4, 0.2, 20),
    (0.02, 0.4, 0.2, 50),
    (0.02, 0.4, 0.0, 10),
    (0.02, 0.4, 0.35, 10),
    (0.005, 0.1, 0.2, 3),
    (0.005, 0.1, 0.1, 15),
    (0.005, 0.3, 0.2, 30),
    (0.01, 0.03, 0.2, 8),
    (0.01, 0.2, 0.3, 12),
    (0.01, 1.0, 0.2, 25),
    (0.05, 0.2, 0.2, 4),
    (0.05, 0.5, 0.1, 18),
    (0.05, 1.5, 0.0, 7),
    (0.1, 0.3, 0.2, 2),
    (0.1, 0.9, 0.25, 9),
    (0.2, 0.6, 0.2, 6),
    (0.3, 1.2, 0.15, 3),
    (0.002, 0.006, 0.2, 40),
    (0.002, 0.05, 0.3, 60),
]

# (alpha, beta, phi_s, budget fraction of psi_s(1)): binding-constraint grid.
# The fractions keep the optimal thresholds well inside the delta_max = 200
# truncation used by the solver cross-checks.
BINDING_GRID = [
    (0.02, 0.4, 0.2, 0.03),
    (0.02, 0.4, 0.2, 0.08),
    (0.02, 0.4, 0.2, 0.20),
    (0.02, 0.4, 0.0, 0.05),
    (0.02, 0.4, 0.35, 0.10),
    (0.02, 0.8, 0.2, 0.06),
    (0.01, 0.2, 0.2, 0.04),
    (0.01, 0.2, 0.3, 0.12),
    (0.01, 0.5, 0.1, 0.07),
    (0.005, 0.1, 0.2, 0.05),
    (0.005, 0.3, 0.2, 0.15),
    (0.05, 0.5, 0.2, 0.03),
    (0.05, 0.5, 0.3, 0.09),
    (0.05, 1.0, 0.1, 0.05),
    (0.1, 0.4, 0.2, 0.04),
    (0.1, 0.9, 0.2, 0.11),
    (0.2, 0.8, 0.2, 0.06),
    (0.2, 1.5, 0.3, 0.10),
    (0.3, 1.2, 0.2, 0.05),
    (0.002, 0.05, 0.2, 0.07),
    (0.03, 0.3, 0.25, 0.08),
]


def binding_instance(alpha, beta, phi_s, fraction) -> SystemParams:
    """Instance whose budget is a fraction of the loosest achievable psi_s."""
    from craoi import collision_probability

    probe = SystemParams(rates=PuRates(alpha, beta), phi_s=phi_s, eta_s=0.5)
    psi1 = collision_probability(1, probe)
    return SystemParams(rates=PuRates(alpha, beta), phi_s=phi_s, eta_s=fraction * psi1)
