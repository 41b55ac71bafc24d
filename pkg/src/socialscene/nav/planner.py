"""Receding-horizon unicycle planner over a social cost field.

The optimiser is deterministic shooting: a fixed lattice of constant
(v, omega) primitives (plus the time-shifted previous solution and an
explicit braking sequence) is rolled out through the cost field, and the
best candidate is polished with a fixed number of coordinate-descent
passes over the per-step controls. Only the first control of the result
should be executed; callers replan every tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import kernels
from ..scene import wrap_angle
from .social_cost import CostField

DEFAULT_HORIZON = 2.0
DEFAULT_DT = 0.1

# Refinement step sizes per pass: coarse, then halved.
_REFINE_PASSES = ((0.1, 0.25), (0.05, 0.125))
_LATTICE_V_POINTS = 5
_LATTICE_OMEGA_POINTS = 7


class NoFeasiblePlan(RuntimeError):
    """Every candidate trajectory hits an obstacle; the base must stop."""


@dataclass(frozen=True)
class PlannerBounds:
    v_min: float = -0.2
    v_max: float = 0.6
    omega_min: float = -1.0
    omega_max: float = 1.0

    def __post_init__(self) -> None:
        if self.v_min >= self.v_max:
            raise ValueError("v_min must be below v_max")
        if self.omega_min >= self.omega_max:
            raise ValueError("omega_min must be below omega_max")

    def holds(self, v: float, omega: float, tol: float = 1e-9) -> bool:
        return (
            self.v_min - tol <= v <= self.v_max + tol
            and self.omega_min - tol <= omega <= self.omega_max + tol
        )


@dataclass(frozen=True)
class PlannerWeights:
    """Objective weights, calibrated so a person blocking the straight line
    to the goal forces a detour that stays out of their personal space."""

    goal: float = 2.0
    social: float = 11.0
    effort: float = 0.1
    terminal: float = 10.0

    def __post_init__(self) -> None:
        for name in ("goal", "social", "effort", "terminal"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} weight must be non-negative")


@dataclass(frozen=True)
class ControlSequence:
    controls: tuple[tuple[float, float], ...]
    dt: float

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if not self.controls:
            raise ValueError("control sequence may not be empty")
        object.__setattr__(
            self, "controls", tuple((float(v), float(w)) for v, w in self.controls)
        )

    @property
    def horizon(self) -> float:
        return len(self.controls) * self.dt

    def as_array(self) -> np.ndarray:
        return np.array(self.controls, dtype=np.float64)

    def shifted(self) -> "ControlSequence":
        """Drop the executed first control and pad with a zero at the tail."""
        return ControlSequence(controls=self.controls[1:] + ((0.0, 0.0),), dt=self.dt)


def forward_model(
    state: tuple[float, float, float], control: tuple[float, float], dt: float
) -> tuple[float, float, float]:
    """Exact unicycle step: straight line below |omega| = 1e-6, else an arc."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    x, y, theta = state
    v, omega = control
    if abs(omega) < 1e-6:
        x += v * dt * math.cos(theta)
        y += v * dt * math.sin(theta)
    else:
        radius = v / omega
        x += radius * (math.sin(theta + omega * dt) - math.sin(theta))
        y += radius * (math.cos(theta) - math.cos(theta + omega * dt))
    return (x, y, wrap_angle(theta + omega * dt))


def _batch_costs(
    state: tuple[float, float, float],
    batch: np.ndarray,
    dt: float,
    field: CostField,
    goal: tuple[float, float],
    weights: PlannerWeights,
) -> np.ndarray:
    return kernels.rollout_costs(
        np.asarray(state, dtype=np.float64),
        np.ascontiguousarray(batch, dtype=np.float64),
        float(dt),
        field.total,
        field.grid.occupied,
        np.asarray(field.grid.origin, dtype=np.float64),
        float(field.grid.resolution),
        np.asarray(goal, dtype=np.float64),
        weights.goal,
        weights.social,
        weights.effort,
        weights.terminal,
    )


def rollout_cost(
    state: tuple[float, float, float],
    sequence: ControlSequence,
    field: CostField,
    goal: tuple[float, float],
    weights: Optional[PlannerWeights] = None,
) -> float:
    """Objective of one control sequence; inf when the path hits an obstacle.

    Per step: goal-distance squared, field cost at the integrated position,
    and control effort; plus a terminal goal-distance term.
    """
    weights = weights or PlannerWeights()
    batch = sequence.as_array()[None, :, :]
    return float(_batch_costs(state, batch, sequence.dt, field, goal, weights)[0])


def plan(
    state: tuple[float, float, float],
    goal: tuple[float, float],
    field: CostField,
    *,
    bounds: Optional[PlannerBounds] = None,
    weights: Optional[PlannerWeights] = None,
    horizon: float = DEFAULT_HORIZON,
    dt: float = DEFAULT_DT,
    previous: Optional[ControlSequence] = None,
) -> ControlSequence:
    """Plan a bounded control sequence toward the goal through the field.

    Raises NoFeasiblePlan when every candidate (including braking in place)
    is infinite-cost, which the caller must treat as a stop order.
    """
    bounds = bounds or PlannerBounds()
    weights = weights or PlannerWeights()
    if horizon <= 0.0 or dt <= 0.0:
        raise ValueError("horizon and dt must be positive")
    steps = max(1, int(round(horizon / dt)))

    candidates = [np.zeros((steps, 2))]  # braking first so ties stop the base
    for v in np.linspace(bounds.v_min, bounds.v_max, _LATTICE_V_POINTS):
        for omega in np.linspace(bounds.omega_min, bounds.omega_max, _LATTICE_OMEGA_POINTS):
            constant = np.empty((steps, 2))
            constant[:, 0] = v
            constant[:, 1] = omega
            candidates.append(constant)
    if previous is not None and len(previous.controls) == steps and previous.dt == dt:
        shifted = previous.shifted().as_array()
        shifted[:, 0] = np.clip(shifted[:, 0], bounds.v_min, bounds.v_max)
        shifted[:, 1] = np.clip(shifted[:, 1], bounds.omega_min, bounds.omega_max)
        candidates.append(shifted)

    batch = np.stack(candidates)
    costs = _batch_costs(state, batch, dt, field, goal, weights)
    best_index = int(np.argmin(costs))
    best_cost = float(costs[best_index])
    if not math.isfinite(best_cost):
        raise NoFeasiblePlan("all candidate trajectories are infeasible")
    best = batch[best_index].copy()

    limits = ((bounds.v_min, bounds.v_max), (bounds.omega_min, bounds.omega_max))
    for step_v, step_omega in _REFINE_PASSES:
        deltas = (step_v, step_omega)
        for t in range(steps):
            for axis in (0, 1):
                lo, hi = limits[axis]
                current = best[t, axis]
                trials = []
                for candidate_value in (current + deltas[axis], current - deltas[axis]):
                    clipped = min(max(candidate_value, lo), hi)
                    if clipped != current:
                        trial = best.copy()
                        trial[t, axis] = clipped
                        trials.append(trial)
                if not trials:
                    continue
                trial_costs = _batch_costs(state, np.stack(trials), dt, field, goal, weights)
                pick = int(np.argmin(trial_costs))
                if trial_costs[pick] < best_cost - 1e-12:
                    best = trials[pick]
                    best_cost = float(trial_costs[pick])

    controls = tuple((float(v), float(w)) for v, w in best)
    assert all(bounds.holds(v, w) for v, w in controls)
    return ControlSequence(controls=controls, dt=dt)
