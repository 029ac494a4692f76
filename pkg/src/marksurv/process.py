"""Continuous-time survival-process engine.

The observable object is a risk-set trajectory: an initial count plus a
time-ordered list of events, each removing failed and/or censored
individuals.  Given a characteristic index this module simulates such
trajectories under arbitrary fixed right censoring, evaluates their exact
log density, computes the predictive survival curve for the next
individual, draws from it, extends a seed trajectory, and applies monotone
time changes.

Trajectories are immutable value objects; every stochastic function takes an
explicit ``numpy.random.Generator``, so Monte Carlo parallelizes by handing
each worker its own spawned generator.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .index import CharacteristicIndex, ParameterError
from .ranking import sample_first_block_size

__all__ = [
    "Event",
    "RiskSetTrajectory",
    "CensoringPlan",
    "TimeTransform",
    "simulate",
    "log_density",
    "predictive_survival",
    "sample_next",
    "simulate_seeded",
    "residual_trajectory",
    "transform_times",
    "log_density_semimarkov",
    "trajectory_to_csv",
    "trajectory_from_csv",
]


@dataclass(frozen=True)
class Event:
    """Failures and/or censorings sharing one timestamp.

    When both occur at the same time the failures are counted first, so the
    censored individuals still belong to the risk set at the event time.
    """

    time: float
    n_failures: int = 0
    n_censored: int = 0
    failed: Optional[tuple] = None
    censored: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "time", float(self.time))
        if not (self.time > 0.0):
            raise ParameterError(f"event time must be positive, got {self.time}")
        if self.n_failures < 0 or self.n_censored < 0:
            raise ParameterError("event counts must be non-negative")
        if self.n_failures + self.n_censored < 1:
            raise ParameterError("an event must remove at least one individual")
        if self.failed is not None and len(self.failed) != self.n_failures:
            raise ParameterError("failed ids inconsistent with n_failures")
        if self.censored is not None and len(self.censored) != self.n_censored:
            raise ParameterError("censored ids inconsistent with n_censored")


@dataclass(frozen=True)
class RiskSetTrajectory:
    """Initial risk-set size plus strictly time-ordered events."""

    n_initial: int
    events: tuple

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.n_initial < 0:
            raise ParameterError("initial risk-set size must be >= 0")
        last = 0.0
        removed = 0
        for e in self.events:
            if not e.time > last:
                raise ParameterError("event times must be strictly increasing")
            last = e.time
            removed += e.n_failures + e.n_censored
        if removed > self.n_initial:
            raise ParameterError("events remove more individuals than exist")

    @cached_property
    def _alive_before(self) -> tuple:
        """Risk-set size just before each event."""
        out = []
        alive = self.n_initial
        for e in self.events:
            out.append(alive)
            alive -= e.n_failures + e.n_censored
        return tuple(out)

    @property
    def n_deaths(self) -> int:
        return sum(e.n_failures for e in self.events)

    @property
    def n_censored(self) -> int:
        return sum(e.n_censored for e in self.events)

    @property
    def num_failure_times(self) -> int:
        """Number of distinct failure times (tied blocks count once)."""
        return sum(1 for e in self.events if e.n_failures > 0)

    @property
    def last_time(self) -> float:
        return self.events[-1].time if self.events else 0.0

    @property
    def final_risk_size(self) -> int:
        return self.n_initial - self.n_deaths - self.n_censored

    def segments(self):
        """Yield (t_start, t_end, risk size) over the piecewise-constant
        stretch up to the last event."""
        t = 0.0
        alive = self.n_initial
        for e in self.events:
            yield t, e.time, alive
            alive -= e.n_failures + e.n_censored
            t = e.time

    def risk_size(self, t: float) -> int:
        """Risk-set size at t: failures at t are excluded, individuals
        censored exactly at t are still included."""
        alive = self.n_initial
        for e in self.events:
            if e.time < t:
                alive -= e.n_failures + e.n_censored
            elif e.time == t:
                alive -= e.n_failures
            else:
                break
        return alive


@dataclass(frozen=True)
class CensoringPlan:
    """Fixed per-individual censoring times; inf means never censored and
    zero removes the individual before observation starts."""

    times: tuple

    def __post_init__(self):
        times = tuple(float(c) for c in self.times)
        object.__setattr__(self, "times", times)
        if any(c < 0.0 for c in times):
            raise ParameterError("censoring times must be >= 0")

    @classmethod
    def none(cls, n: int) -> "CensoringPlan":
        return cls((math.inf,) * n)


def simulate(n: int, index: CharacteristicIndex,
             plan: Optional[CensoringPlan] = None, rng=None) -> RiskSetTrajectory:
    """Simulate the trajectory of n individuals under the given index.

    Holding times are exponential at the total rate of the current risk-set
    size; at each failure epoch the block of failures is drawn from the
    splitting distribution.  Censoring removes individuals at their planned
    times without a failure event.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if rng is None:
        raise ParameterError("an explicit random generator is required")
    censor = list(plan.times) if plan is not None else [math.inf] * n
    if len(censor) != n:
        raise ParameterError("censoring plan length must equal n")

    alive = [i for i in range(n) if censor[i] > 0.0]
    n_initial = len(alive)
    pending = sorted((censor[i], i) for i in alive if math.isfinite(censor[i]))
    p_next = 0

    events = []
    t = 0.0
    alive_set = set(alive)
    while alive_set:
        m = len(alive_set)
        hold = rng.exponential(1.0 / index.total_rate(m))
        while p_next < len(pending) and pending[p_next][1] not in alive_set:
            p_next += 1
        next_censor = pending[p_next][0] if p_next < len(pending) else math.inf
        if t + hold >= next_censor:
            t = next_censor
            ids = []
            while p_next < len(pending) and pending[p_next][0] == t:
                i = pending[p_next][1]
                if i in alive_set:
                    ids.append(i)
                    alive_set.remove(i)
                p_next += 1
            events.append(Event(t, 0, len(ids), censored=tuple(sorted(ids))))
            continue
        t = t + hold
        d = sample_first_block_size(m, index, rng)
        order = sorted(alive_set)
        picked = rng.choice(m, size=d, replace=False)
        ids = tuple(sorted(order[i] for i in picked))
        alive_set.difference_update(ids)
        events.append(Event(t, d, 0, failed=ids))
    return RiskSetTrajectory(n_initial, tuple(events))


def log_density(traj: RiskSetTrajectory, index: CharacteristicIndex) -> float:
    """Exact log density of a trajectory: minus the integrated total rate
    plus one block-rate term per failure time.

    Censorings alter the integral through the risk-set path but contribute
    no product term.  A structurally impossible trajectory (a tied block the
    index forbids) returns -inf rather than raising, so optimizers can
    reject the parameter point.
    """
    integral = 0.0
    logprod = 0.0
    log_scale = math.log(index.scale)
    alive = traj.n_initial
    t_prev = 0.0
    for e in traj.events:
        integral += index.total_rate(alive) * (e.time - t_prev)
        if e.n_failures > 0:
            r = alive - e.n_failures
            lr = index.log_unit_block_rate(r, e.n_failures)
            if lr == -math.inf:
                return -math.inf
            logprod += log_scale + lr
        alive -= e.n_failures + e.n_censored
        t_prev = e.time
    return -integral + logprod


def _survival_pieces(history: RiskSetTrajectory, index: CharacteristicIndex):
    """Knots, per-segment hazards, cumulative hazard and cumulative atom
    log-survival factors for the next individual's predictive law."""
    knots = [0.0]
    haz = []
    log_atoms = []
    alive = history.n_initial
    for e in history.events:
        haz.append(index.block_rate(alive, 1))
        knots.append(e.time)
        if e.n_failures > 0:
            r = alive - e.n_failures
            log_atoms.append(index.log_unit_block_rate(r + 1, e.n_failures)
                             - index.log_unit_block_rate(r, e.n_failures))
        else:
            log_atoms.append(0.0)
        alive -= e.n_failures + e.n_censored
    haz.append(index.block_rate(alive, 1))
    knots = np.asarray(knots)
    haz = np.asarray(haz)
    cum_h = np.concatenate([[0.0], np.cumsum(haz[:-1] * np.diff(knots))])
    cum_atoms = np.concatenate([[0.0], np.cumsum(log_atoms)])
    return knots, haz, cum_h, cum_atoms


def predictive_survival(t, history: RiskSetTrajectory,
                        index: CharacteristicIndex):
    """P(next lifetime > t) given the observed trajectory.

    Right-continuous and non-increasing, with an atom at each observed
    failure time and a continuous hazard between events that never shuts
    off, so the curve decays to zero.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0.0):
        raise ParameterError("t must be >= 0")
    knots, haz, cum_h, cum_atoms = _survival_pieces(history, index)
    idx = np.searchsorted(knots, t_arr, side="right") - 1
    h = cum_h[idx] + haz[idx] * (t_arr - knots[idx])
    out = np.exp(-h + cum_atoms[idx])
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(out[0])
    return out


def sample_next(history: RiskSetTrajectory, index: CharacteristicIndex,
                rng) -> float:
    """Draw the next lifetime from the predictive distribution.

    The continuous hazard component is inverted with a single standard
    exponential, and each failure atom is survived by an independent
    Bernoulli; the draw is the minimum of the two mechanisms, which matches
    the predictive survival product exactly.
    """
    e_cont = rng.exponential()
    alive = history.n_initial
    t_prev = 0.0
    for e in history.events:
        h = index.block_rate(alive, 1)
        span = e.time - t_prev
        if h * span >= e_cont:
            return t_prev + e_cont / h
        e_cont -= h * span
        if e.n_failures > 0:
            r = alive - e.n_failures
            keep = math.exp(index.log_unit_block_rate(r + 1, e.n_failures)
                            - index.log_unit_block_rate(r, e.n_failures))
            if rng.random() >= keep:
                return e.time
        alive -= e.n_failures + e.n_censored
        t_prev = e.time
    h = index.block_rate(alive, 1)
    return t_prev + e_cont / h


def simulate_seeded(seed_traj: RiskSetTrajectory, m_new: int,
                    index: CharacteristicIndex, rng) -> RiskSetTrajectory:
    """Generate m_new further lifetimes conditionally on a seed trajectory.

    Each new lifetime is drawn from the current predictive distribution and
    merged into the trajectory, joining an existing failure block when it
    lands exactly on an observed failure time.
    """
    if m_new < 0:
        raise ParameterError("m_new must be >= 0")
    times = [e.time for e in seed_traj.events]
    rows = [[e.time, e.n_failures, e.n_censored] for e in seed_traj.events]
    n0 = seed_traj.n_initial

    def current() -> RiskSetTrajectory:
        return RiskSetTrajectory(
            n0, tuple(Event(t, d, c) for t, d, c in rows))

    for _ in range(m_new):
        t = sample_next(current(), index, rng)
        n0 += 1
        pos = bisect.bisect_left(times, t)
        if pos < len(times) and times[pos] == t:
            rows[pos][1] += 1
        else:
            times.insert(pos, t)
            rows.insert(pos, [t, 1, 0])
    return current()


def residual_trajectory(traj: RiskSetTrajectory, t: float) -> RiskSetTrajectory:
    """Trajectory of the individuals still at risk after time t, with the
    clock restarted at t."""
    if t < 0.0:
        raise ParameterError("t must be >= 0")
    removed = 0
    kept = []
    for e in traj.events:
        if e.time <= t:
            removed += e.n_failures + e.n_censored
        else:
            kept.append(Event(e.time - t, e.n_failures, e.n_censored,
                              e.failed, e.censored))
    return RiskSetTrajectory(traj.n_initial - removed, tuple(kept))


@dataclass(frozen=True)
class TimeTransform:
    """Strictly increasing continuous time change with g(0+) = 0."""

    forward: Callable[[float], float]
    inverse: Callable[[float], float]
    derivative: Callable[[float], float]

    def inverted(self) -> "TimeTransform":
        fwd, inv, der = self.forward, self.inverse, self.derivative
        return TimeTransform(
            forward=inv,
            inverse=fwd,
            derivative=lambda t: 1.0 / der(inv(t)),
        )


def transform_times(traj: RiskSetTrajectory, tf: TimeTransform) -> RiskSetTrajectory:
    """Map every event time through the transform."""
    events = tuple(Event(tf.forward(e.time), e.n_failures, e.n_censored,
                         e.failed, e.censored) for e in traj.events)
    return RiskSetTrajectory(traj.n_initial, events)


def log_density_semimarkov(traj: RiskSetTrajectory,
                           index: CharacteristicIndex,
                           tf: TimeTransform) -> float:
    """Log density of a time-changed trajectory: pull the times back to the
    homogeneous scale and add one log-Jacobian term per failure time."""
    base = transform_times(traj, tf.inverted())
    jac = 0.0
    for e in traj.events:
        if e.n_failures > 0:
            jac -= math.log(tf.derivative(tf.inverse(e.time)))
    return log_density(base, index) + jac


def trajectory_to_csv(traj: RiskSetTrajectory) -> str:
    """Serialize as CSV; times use repr so the round trip is exact."""
    lines = ["time,n_failures,n_censored"]
    for e in traj.events:
        lines.append(f"{e.time!r},{e.n_failures},{e.n_censored}")
    return "\n".join(lines) + "\n"


def trajectory_from_csv(text: str,
                        n_initial: Optional[int] = None) -> RiskSetTrajectory:
    """Parse :func:`trajectory_to_csv` output.  When n_initial is omitted the
    trajectory is assumed complete (everyone fails or is censored)."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "time,n_failures,n_censored":
        raise ParameterError("expected header 'time,n_failures,n_censored'")
    events = []
    total = 0
    for ln in lines[1:]:
        t_str, d_str, c_str = ln.split(",")
        d, c = int(d_str), int(c_str)
        events.append(Event(float(t_str), d, c))
        total += d + c
    return RiskSetTrajectory(n_initial if n_initial is not None else total,
                             tuple(events))
