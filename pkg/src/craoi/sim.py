"""Discrete-event Monte-Carlo ground truth for any access policy.

The PU trajectory is generated in continuous time (exponential sojourns), the
device is replayed slot by slot on top of it: sense at the slot start, decide
from (age, sensed occupancy), collide iff the PU enters busy strictly inside a
transmitting slot, succeed iff the PU stays idle for the whole slot and an
independent outage draw clears.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import SystemParams
from .channel import BUSY, IDLE, PuRates, expected_cycle_length

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def split_seed(base_seed: int, index: int) -> int:
    """Derive a child seed from (base_seed, index) via a splitmix64 round.

    Documented splitting rule: z = (base_seed + (index + 1) * golden) mod 2^64
    pushed through the splitmix64 finalizer.  Independent implementations can
    reproduce replication aggregates from this rule alone.
    """
    z = (base_seed + (index + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


@dataclass(frozen=True)
class PuTrajectory:
    """Alternating exponential sojourns of the PU, in continuous time."""

    initial_occupancy: int
    durations: np.ndarray
    total_cycles: int

    def __post_init__(self):
        if np.any(self.durations <= 0):
            raise ValueError("sojourn durations must be positive")

    def occupancy_of_segment(self, k: int) -> int:
        return (self.initial_occupancy + k) % 2

    @property
    def boundaries(self) -> np.ndarray:
        return np.cumsum(self.durations)


def generate_pu_trajectory(
    rates: PuRates, n_cycles: int, seed: int, initial_occupancy: int = IDLE
) -> PuTrajectory:
    """Draw 2*n_cycles + 1 alternating sojourns, deterministic under the seed."""
    if n_cycles < 1:
        raise ValueError(f"n_cycles must be >= 1, got {n_cycles}")
    if initial_occupancy not in (IDLE, BUSY):
        raise ValueError("initial_occupancy must be IDLE or BUSY")
    rng = np.random.Generator(np.random.PCG64(seed))
    n_seg = 2 * n_cycles + 1
    u = rng.random(n_seg)
    occ = (initial_occupancy + np.arange(n_seg)) % 2
    rate = np.where(occ == IDLE, rates.alpha, rates.beta)
    durations = -np.log1p(-u) / rate
    return PuTrajectory(
        initial_occupancy=initial_occupancy, durations=durations, total_cycles=n_cycles
    )


@dataclass(frozen=True)
class SimResult:
    avg_aoi: float
    psi_s_hat: float
    psi_p_hat: float
    success_count: int
    transmit_count: int
    collision_count: int
    slots: int
    cycles: int
    idle_sensed_count: int
    aoi_divergence_flag: bool
    collision_slots: tuple[int, ...] = ()

    @property
    def throughput_hat(self) -> float:
        return self.transmit_count / self.slots


def _slot_arrays(trajectory: PuTrajectory, n_slots: int):
    bounds = trajectory.boundaries
    starts = np.arange(n_slots, dtype=float)
    seg = np.searchsorted(bounds, starts, side="right")
    sensed = (trajectory.initial_occupancy + seg) % 2
    # busy-entry instants are the right ends of idle segments
    n_seg = len(trajectory.durations)
    seg_occ = (trajectory.initial_occupancy + np.arange(n_seg)) % 2
    entries = bounds[seg_occ == IDLE]
    # a busy entry strictly inside (n, n+1) makes the slot collision-prone
    lo = np.searchsorted(entries, starts, side="right")
    hi = np.searchsorted(entries, starts + 1.0, side="left")
    collision_prone = hi > lo
    cycles_walked = int(np.searchsorted(entries, float(n_slots)))
    return sensed, collision_prone, cycles_walked


def run_policy(
    trajectory: PuTrajectory,
    params: SystemParams,
    policy,
    seed: int,
    max_slots: int | None = None,
    age_ceiling: int = 10**7,
) -> SimResult:
    """Replay the policy over the trajectory, one unit slot at a time.

    The trailing partial slot is discarded; metrics divide by whole slots.
    Randomized policy decisions and outage draws use child seeds derived from
    ``seed`` (indices 1 and 2 of the splitting rule).
    """
    total_time = float(trajectory.boundaries[-1])
    n_slots = int(math.floor(total_time))
    if max_slots is not None:
        if n_slots < max_slots:
            raise ValueError(f"trajectory covers only {n_slots} slots, need {max_slots}")
        n_slots = max_slots
    if n_slots < 1:
        raise ValueError("trajectory is shorter than one slot")

    sensed, collision_prone, cycles = _slot_arrays(trajectory, n_slots)
    cycles = max(cycles, 1)  # busy-idle cycles begun within the walked span
    policy_u = np.random.Generator(np.random.PCG64(split_seed(seed, 1))).random(n_slots)
    outage_u = np.random.Generator(np.random.PCG64(split_seed(seed, 2))).random(n_slots)

    phi_s = params.phi_s
    p_of = policy.transmit_probability
    age = 1
    age_sum = 0
    transmit_count = 0
    success_count = 0
    idle_count = 0
    collisions: list[int] = []
    divergent = False
    sensed_l = sensed.tolist()
    prone_l = collision_prone.tolist()
    policy_l = policy_u.tolist()
    outage_l = outage_u.tolist()
    for n in range(n_slots):
        age_sum += age
        if age > age_ceiling:
            divergent = True
        if sensed_l[n] == IDLE:
            idle_count += 1
            p = p_of(age)
            if p > 0.0 and (p >= 1.0 or policy_l[n] < p):
                transmit_count += 1
                if prone_l[n]:
                    collisions.append(n)
                    age += 1
                elif outage_l[n] >= phi_s:
                    success_count += 1
                    age = 1
                    continue
                else:
                    age += 1
            else:
                age += 1
        else:
            age += 1

    n_coll = len(collisions)
    return SimResult(
        avg_aoi=age_sum / n_slots,
        psi_s_hat=n_coll / n_slots,
        psi_p_hat=n_coll / cycles,
        success_count=success_count,
        transmit_count=transmit_count,
        collision_count=n_coll,
        slots=n_slots,
        cycles=cycles,
        idle_sensed_count=idle_count,
        aoi_divergence_flag=divergent,
        collision_slots=tuple(collisions),
    )


@dataclass(frozen=True)
class SimConfig:
    """One reproducible simulation setup; horizon is slots or cycles."""

    params: SystemParams
    policy: object
    seed: int
    slots: int | None = None
    cycles: int | None = None
    initial_occupancy: int = IDLE

    def __post_init__(self):
        if (self.slots is None) == (self.cycles is None):
            raise ValueError("specify exactly one of slots or cycles")
        horizon = self.slots if self.slots is not None else self.cycles
        if horizon < 1:
            raise ValueError("horizon must be >= 1")


def _cycles_for_slots(rates: PuRates, slots: int) -> int:
    # oversize so the trajectory covers the slot horizon with high probability
    return max(int(slots / expected_cycle_length(rates) * 1.5) + 64, 8)


def run_config(config: SimConfig, rep_index: int = 0) -> SimResult:
    """Run one replication; the replication index selects the child seed."""
    rep_seed = config.seed if rep_index == 0 else split_seed(config.seed, 1000 + rep_index)
    traj_seed = split_seed(rep_seed, 0)
    if config.cycles is not None:
        traj = generate_pu_trajectory(
            config.params.rates, config.cycles, traj_seed, config.initial_occupancy
        )
        return run_policy(traj, config.params, config.policy, rep_seed)
    n_cycles = _cycles_for_slots(config.params.rates, config.slots)
    while True:
        traj = generate_pu_trajectory(
            config.params.rates, n_cycles, traj_seed, config.initial_occupancy
        )
        if traj.boundaries[-1] >= config.slots + 1:
            break
        n_cycles *= 2
    return run_policy(traj, config.params, config.policy, rep_seed, max_slots=config.slots)


_AGG_FIELDS = ("avg_aoi", "psi_s_hat", "psi_p_hat", "throughput_hat")


@dataclass(frozen=True)
class ReplicatedResult:
    """Order-independent aggregate over independent replications."""

    n_reps: int
    mean: dict[str, float]
    stderr: dict[str, float]
    results: tuple[SimResult, ...]


def replicate(config: SimConfig, n_reps: int, n_workers: int = 1) -> ReplicatedResult:
    """Run n_reps independent replications and aggregate mean and standard error.

    Replication i runs under split_seed(config.seed, 1000 + i) (replication 0
    uses the base seed itself), so parallel and serial execution agree.
    """
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")
    indices = list(range(n_reps))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run_config, [config] * n_reps, indices))
    else:
        results = [run_config(config, i) for i in indices]
    mean = {}
    stderr = {}
    for name in _AGG_FIELDS:
        vals = np.array([getattr(r, name) for r in results], dtype=float)
        mean[name] = float(vals.mean())
        stderr[name] = float(vals.std(ddof=1) / math.sqrt(n_reps)) if n_reps > 1 else 0.0
    return ReplicatedResult(n_reps=n_reps, mean=mean, stderr=stderr, results=tuple(results))
