"""Social-space cost fields over occupancy grids, and approach-pose selection.

The navigation stack scores positions with a single scalar field: a hard
obstacle layer (peak cost on occupied cells, linear decay out to an
inflation radius) plus a soft social layer (asymmetric Gaussians around
each person, isotropic Gaussians around multi-person group centres).
Obstacles are the only hard constraint; social cost stays finite so the
planner may cross it when there is no alternative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .. import kernels
from ..scene import EntityId, SceneSnapshot, wrap_angle

DEFAULT_INTERACTION_RADIUS = 1.2
OBSTACLE_PEAK = 4.0
INFLATION_RADIUS = 0.4

# Candidate poses on the approach circle are spaced this many degrees apart;
# costs within this tolerance count as tied and fall through to the
# distance-to-robot tie-break (grid interpolation jitter is ~5e-4).
APPROACH_STEP_DEG = 5.0
APPROACH_COST_TOL = 1e-3


class Unreachable(Exception):
    """Every candidate approach pose is occupied or off the map."""


@dataclass(frozen=True)
class SocialCostParams:
    """Shape of the personal/group space cost model.

    The front lobe stretches with walking speed (sigma_front grows by
    velocity_gain per m/s) and every sigma widens by seated_scale for a
    seated person, since chairs extend the space people consider theirs.
    """

    sigma_front: float = 0.45
    sigma_side: float = 0.45
    sigma_rear: float = 0.30
    velocity_gain: float = 0.8
    seated_scale: float = 1.2
    group_sigma: float = 0.9
    peak: float = 1.0

    def __post_init__(self) -> None:
        for name in ("sigma_front", "sigma_side", "sigma_rear", "group_sigma"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.peak <= 0.0:
            raise ValueError("peak must be positive")
        if self.seated_scale < 1.0:
            raise ValueError("seated_scale must be >= 1")
        if self.velocity_gain < 0.0:
            raise ValueError("velocity_gain must be non-negative")


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Axis-aligned binary grid. Row 0 of ``occupied`` is the lowest y band."""

    resolution: float
    origin: tuple[float, float]
    occupied: np.ndarray

    def __post_init__(self) -> None:
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        occ = np.ascontiguousarray(self.occupied, dtype=np.uint8)
        if occ.ndim != 2 or occ.size == 0:
            raise ValueError("occupied must be a non-empty 2-d array")
        occ.flags.writeable = False
        object.__setattr__(self, "occupied", occ)

    @property
    def nx(self) -> int:
        return self.occupied.shape[1]

    @property
    def ny(self) -> int:
        return self.occupied.shape[0]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        ox, oy = self.origin
        return (ox, oy, ox + self.nx * self.resolution, oy + self.ny * self.resolution)

    @classmethod
    def empty(
        cls, width: float, height: float, resolution: float, origin: tuple[float, float] = (0.0, 0.0)
    ) -> "OccupancyGrid":
        nx = max(1, int(round(width / resolution)))
        ny = max(1, int(round(height / resolution)))
        return cls(resolution=resolution, origin=origin, occupied=np.zeros((ny, nx), dtype=np.uint8))

    @classmethod
    def from_text(
        cls, text: str, resolution: float, origin: tuple[float, float] = (0.0, 0.0)
    ) -> "OccupancyGrid":
        """Parse a map drawn with '#' (occupied) and '.' (free) characters.

        The first text line is the top of the map (highest y), matching how
        the map reads on screen, so rows are reversed into storage order.
        """
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise ValueError("map text has no rows")
        width = len(lines[0])
        rows = []
        for line in lines:
            if len(line) != width:
                raise ValueError("map rows must all have the same length")
            bad = set(line) - {"#", "."}
            if bad:
                raise ValueError(f"map may only contain '#' and '.', got {sorted(bad)}")
            rows.append([1 if ch == "#" else 0 for ch in line])
        return cls(
            resolution=resolution,
            origin=origin,
            occupied=np.array(rows[::-1], dtype=np.uint8),
        )

    def cell_index(self, x: float, y: float) -> tuple[int, int]:
        ox, oy = self.origin
        return (int(math.floor((x - ox) / self.resolution)), int(math.floor((y - oy) / self.resolution)))

    def contains(self, x: float, y: float) -> bool:
        ix, iy = self.cell_index(x, y)
        return 0 <= ix < self.nx and 0 <= iy < self.ny

    def is_occupied(self, x: float, y: float) -> bool:
        """Occupancy at a world point; anything off the map counts occupied."""
        if not self.contains(x, y):
            return True
        ix, iy = self.cell_index(x, y)
        return bool(self.occupied[iy, ix])

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        ox, oy = self.origin
        xs = ox + (np.arange(self.nx) + 0.5) * self.resolution
        ys = oy + (np.arange(self.ny) + 0.5) * self.resolution
        return np.meshgrid(xs, ys)


@dataclass(frozen=True, eq=False)
class CostField:
    """Obstacle and social layers on a grid, kept separable for display."""

    grid: OccupancyGrid
    obstacle: np.ndarray
    social: np.ndarray

    def __post_init__(self) -> None:
        shape = (self.grid.ny, self.grid.nx)
        for name in ("obstacle", "social"):
            layer = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if layer.shape != shape:
                raise ValueError(f"{name} layer shape {layer.shape} != grid shape {shape}")
            if np.any(layer < 0.0):
                raise ValueError(f"{name} layer must be non-negative")
            layer.flags.writeable = False
            object.__setattr__(self, name, layer)
        total = np.ascontiguousarray(self.obstacle + self.social)
        total.flags.writeable = False
        object.__setattr__(self, "_total", total)

    @property
    def total(self) -> np.ndarray:
        return self._total

    def sample(self, x: float, y: float) -> float:
        """Bilinear interpolation over cell centers, clamped at the border.

        Mirrors the sampling used inside the rollout kernel so the planner
        and pose selection score positions identically.
        """
        grid = self.grid
        fx = (x - grid.origin[0]) / grid.resolution - 0.5
        fy = (y - grid.origin[1]) / grid.resolution - 0.5
        ix = int(math.floor(fx))
        iy = int(math.floor(fy))
        ax = fx - ix
        ay = fy - iy
        ix0 = min(max(ix, 0), grid.nx - 1)
        ix1 = min(max(ix + 1, 0), grid.nx - 1)
        iy0 = min(max(iy, 0), grid.ny - 1)
        iy1 = min(max(iy + 1, 0), grid.ny - 1)
        t = self._total
        return float(
            t[iy0, ix0] * (1 - ax) * (1 - ay)
            + t[iy0, ix1] * ax * (1 - ay)
            + t[iy1, ix0] * (1 - ax) * ay
            + t[iy1, ix1] * ax * ay
        )


def person_cost(
    point: tuple[float, float],
    pose: tuple[float, float, float],
    velocity: tuple[float, float] = (0.0, 0.0),
    seated: bool = False,
    params: Optional[SocialCostParams] = None,
) -> float:
    """Asymmetric Gaussian social cost of a point in one person's frame."""
    params = params or SocialCostParams()
    px, py, theta = pose
    speed = math.hypot(velocity[0], velocity[1])
    scale = params.seated_scale if seated else 1.0
    dx = point[0] - px
    dy = point[1] - py
    ct = math.cos(theta)
    st = math.sin(theta)
    along = ct * dx + st * dy
    lateral = -st * dx + ct * dy
    if along >= 0.0:
        sigma_along = params.sigma_front * (1.0 + params.velocity_gain * speed) * scale
    else:
        sigma_along = params.sigma_rear * scale
    sigma_lat = params.sigma_side * scale
    return params.peak * math.exp(-0.5 * ((along / sigma_along) ** 2 + (lateral / sigma_lat) ** 2))


def _person_rows(snapshot: SceneSnapshot) -> np.ndarray:
    """Stack (x, y, vx, vy, theta, seated) rows for persons with known poses."""
    bodies = {b.id: b for b in snapshot.bodies}
    rows = []
    for person in snapshot.persons:
        body = bodies.get(person.body) if person.body is not None else None
        if body is None or body.ground_pos is None or body.orientation is None:
            continue
        vx, vy = body.ground_vel if body.ground_vel is not None else (0.0, 0.0)
        rows.append(
            [body.ground_pos[0], body.ground_pos[1], vx, vy, body.orientation, 1.0 if body.seated else 0.0]
        )
    return np.array(rows, dtype=np.float64).reshape(-1, 6)


def build_cost_field(
    snapshot: SceneSnapshot,
    grid: OccupancyGrid,
    params: Optional[SocialCostParams] = None,
    *,
    obstacle_peak: float = OBSTACLE_PEAK,
    inflation_radius: float = INFLATION_RADIUS,
) -> CostField:
    """Evaluate obstacle + social cost at every cell center of the grid.

    Persons enter through their body ground pose; groups with two or more
    members add an isotropic Gaussian at the group centre (singleton groups
    already cost through their one member's personal space).
    """
    params = params or SocialCostParams()
    occ = grid.occupied.astype(bool)
    if occ.any():
        free_dist = ndimage.distance_transform_edt(~occ) * grid.resolution
        obstacle = obstacle_peak * np.clip(1.0 - free_dist / inflation_radius, 0.0, 1.0)
    else:
        obstacle = np.zeros(occ.shape, dtype=np.float64)

    xx, yy = grid.cell_centers()
    bodies = _person_rows(snapshot)
    social = params.peak * kernels.social_field(
        xx,
        yy,
        bodies,
        params.sigma_front,
        params.sigma_side,
        params.sigma_rear,
        params.velocity_gain,
        params.seated_scale,
    )
    centres = np.array(
        [g.center for g in snapshot.groups if len(g.members) >= 2 and g.center is not None],
        dtype=np.float64,
    ).reshape(-1, 2)
    social = social + kernels.gaussian_field(xx, yy, centres, params.group_sigma, params.peak)
    return CostField(grid=grid, obstacle=obstacle, social=social)


def _target_geometry(
    target: EntityId, snapshot: SceneSnapshot
) -> tuple[tuple[float, float], Optional[float]]:
    """Centre of the approach circle and the facing restriction, if any."""
    if target.kind == "person":
        for person in snapshot.persons:
            if person.id == target:
                bodies = {b.id: b for b in snapshot.bodies}
                body = bodies.get(person.body) if person.body is not None else None
                if body is None or body.ground_pos is None:
                    raise ValueError(f"person {target} has no ground position")
                facing = body.orientation if body.orientation is not None else None
                return (body.ground_pos, facing)
        raise KeyError(f"person {target} not in snapshot")
    if target.kind == "group":
        for group in snapshot.groups:
            if group.id == target:
                if group.center is None:
                    raise ValueError(f"group {target} has no centre")
                return (group.center, None)
        raise KeyError(f"group {target} not in snapshot")
    raise ValueError(f"approach target must be a person or group, got {target.kind}")


def approach_pose(
    target: EntityId,
    snapshot: SceneSnapshot,
    field: CostField,
    r_int: float = DEFAULT_INTERACTION_RADIUS,
) -> tuple[float, float, float]:
    """Pick the least-interfering pose on the interaction circle of a target.

    Persons are approached from within a 120 degree frontal sector so the
    robot never sneaks up from behind; group centres accept the whole
    circle. Cost ties (within interpolation noise) resolve to the candidate
    nearest the robot, then to the lowest candidate index. The returned
    pose faces the target.
    """
    if r_int <= 0.0:
        raise ValueError("r_int must be positive")
    centre, facing = _target_geometry(target, snapshot)
    if facing is None:
        offsets = np.deg2rad(np.arange(0.0, 360.0, APPROACH_STEP_DEG))
        angles = offsets
    else:
        offsets = np.deg2rad(np.arange(-60.0, 60.0 + APPROACH_STEP_DEG / 2, APPROACH_STEP_DEG))
        angles = facing + offsets

    robot_x, robot_y = snapshot.robot.pose[0], snapshot.robot.pose[1]
    feasible = []
    for index, angle in enumerate(angles):
        x = centre[0] + r_int * math.cos(angle)
        y = centre[1] + r_int * math.sin(angle)
        if field.grid.is_occupied(x, y):
            continue
        cost = field.sample(x, y)
        dist = math.hypot(x - robot_x, y - robot_y)
        feasible.append((cost, dist, index, x, y))
    if not feasible:
        raise Unreachable(f"all approach candidates around {target} are occupied")

    best_cost = min(item[0] for item in feasible)
    tied = [item for item in feasible if item[0] <= best_cost + APPROACH_COST_TOL]
    _, _, _, x, y = min(tied, key=lambda item: (item[1], item[2]))
    heading = wrap_angle(math.atan2(centre[1] - y, centre[0] - x))
    return (x, y, heading)
