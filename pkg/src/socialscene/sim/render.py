"""SVG rendering of one tick: map, cost contours, agents, plan trajectory.

Output is a deterministic function of the tick entry and the cost field:
floats are formatted to fixed precision and elements are emitted in a fixed
order, so identical inputs produce identical bytes.
"""

from __future__ import annotations

import numpy as np
from skimage import measure

from ..nav import CostField, OccupancyGrid, SocialCostParams, build_cost_field
from ..scene import (
    BodyObservation,
    GroupRecord,
    PersonRecord,
    RobotState,
    SceneSnapshot,
    body_id,
    group_id,
    person_id,
)
from .scenario import parse_map

CONTOUR_LEVELS = (0.2, 0.5, 0.8)
CONTOUR_COLORS = ("#74c476", "#fd8d3c", "#de2d26")
SCALE = 70.0  # px per metre

_EMB = None


def _embedding():
    global _EMB
    if _EMB is None:
        v = np.zeros(8)
        v[0] = 1.0
        _EMB = v
    return _EMB


def snapshot_from_entry(header: dict, entry: dict) -> tuple[SceneSnapshot, OccupancyGrid]:
    """Rebuild the scene a log entry describes, enough to recreate its field."""
    grid = parse_map(header["map_text"])
    bodies = []
    for track in entry["tracks"]:
        if track["status"] != "confirmed" or track.get("orientation") is None:
            continue
        bodies.append(
            BodyObservation(
                id=body_id(track["id"]),
                embedding=_embedding(),
                ground_pos=(track["x"], track["y"]),
                ground_vel=(track["vx"], track["vy"]),
                orientation=track["orientation"],
            )
        )
    body_ids = {b.id.token for b in bodies}
    persons = tuple(
        PersonRecord(
            id=person_id(p["id"]),
            body=body_id(p["body"]) if p["body"] in body_ids else None,
        )
        for p in entry["partition"]["persons"]
        if p["body"] in body_ids
    )
    groups = tuple(
        GroupRecord(
            id=group_id(g["id"]),
            members=frozenset(person_id(m) for m in g["members"]),
            center=None if g["center"] is None else tuple(g["center"]),
        )
        for g in entry["groups"]
    )
    robot = RobotState(pose=tuple(entry["truth"]["robot"]))
    snapshot = SceneSnapshot(
        time=entry["time"],
        robot=robot,
        bodies=tuple(bodies),
        persons=persons,
        groups=groups,
    )
    return snapshot, grid


def field_from_entry(header: dict, entry: dict) -> CostField:
    snapshot, grid = snapshot_from_entry(header, entry)
    return build_cost_field(snapshot, grid, SocialCostParams(**header["social_params"]))


def render_svg(entry: dict, field: CostField) -> str:
    grid = field.grid
    ox, oy = grid.origin
    width_m = grid.nx * grid.resolution
    height_m = grid.ny * grid.resolution

    def px(x: float, y: float) -> tuple[float, float]:
        return ((x - ox) * SCALE, (oy + height_m - y) * SCALE)

    def fmt(v: float) -> str:
        return f"{v:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="0 0 {fmt(width_m * SCALE)} {fmt(height_m * SCALE)}" '
        f'width="{fmt(width_m * SCALE)}" height="{fmt(height_m * SCALE)}">',
        f'<rect x="0" y="0" width="{fmt(width_m * SCALE)}" '
        f'height="{fmt(height_m * SCALE)}" fill="#fbfbf8"/>',
    ]

    cell = grid.resolution * SCALE
    occupied = np.argwhere(grid.occupied != 0)
    for iy, ix in occupied:
        x, y = px(ox + ix * grid.resolution, oy + (int(iy) + 1) * grid.resolution)
        parts.append(
            f'<rect x="{fmt(x)}" y="{fmt(y)}" width="{fmt(cell)}" '
            f'height="{fmt(cell)}" fill="#4a4a4a"/>'
        )

    for level, color in zip(CONTOUR_LEVELS, CONTOUR_COLORS):
        for contour in measure.find_contours(field.social, level):
            points = []
            for row, col in contour:
                x, y = px(ox + (col + 0.5) * grid.resolution, oy + (row + 0.5) * grid.resolution)
                points.append(f"{fmt(x)},{fmt(y)}")
            parts.append(
                f'<path class="contour" d="M {" L ".join(points)}" fill="none" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )

    for group in entry.get("groups", []):
        if group.get("center") is None:
            continue
        x, y = px(group["center"][0], group["center"][1])
        r = 0.12 * SCALE
        parts.append(
            f'<g class="group-center"><line x1="{fmt(x - r)}" y1="{fmt(y - r)}" '
            f'x2="{fmt(x + r)}" y2="{fmt(y + r)}" stroke="#6a51a3" stroke-width="2"/>'
            f'<line x1="{fmt(x - r)}" y1="{fmt(y + r)}" x2="{fmt(x + r)}" '
            f'y2="{fmt(y - r)}" stroke="#6a51a3" stroke-width="2"/></g>'
        )

    for agent in entry["truth"]["agents"]:
        x, y = px(agent["pos"][0], agent["pos"][1])
        theta = agent["orientation"]
        tip = px(
            agent["pos"][0] + 0.35 * np.cos(theta), agent["pos"][1] + 0.35 * np.sin(theta)
        )
        fill = "#2171b5" if not agent.get("speaking") else "#e6550d"
        parts.append(
            f'<g class="agent"><circle cx="{fmt(x)}" cy="{fmt(y)}" r="{fmt(0.2 * SCALE)}" '
            f'fill="{fill}" fill-opacity="0.75"/>'
            f'<line x1="{fmt(x)}" y1="{fmt(y)}" x2="{fmt(tip[0])}" y2="{fmt(tip[1])}" '
            f'stroke="#08306b" stroke-width="2"/>'
            f'<text x="{fmt(x + 0.25 * SCALE)}" y="{fmt(y - 0.25 * SCALE)}" '
            f'font-size="11" font-family="sans-serif">{agent["id"]}</text></g>'
        )

    robot = entry["truth"]["robot"]
    rx, ry = px(robot[0], robot[1])
    theta = robot[2]
    nose = px(robot[0] + 0.25 * np.cos(theta), robot[1] + 0.25 * np.sin(theta))
    left = px(
        robot[0] + 0.16 * np.cos(theta + 2.4), robot[1] + 0.16 * np.sin(theta + 2.4)
    )
    right = px(
        robot[0] + 0.16 * np.cos(theta - 2.4), robot[1] + 0.16 * np.sin(theta - 2.4)
    )
    parts.append(
        f'<polygon class="robot" points="{fmt(nose[0])},{fmt(nose[1])} '
        f'{fmt(left[0])},{fmt(left[1])} {fmt(right[0])},{fmt(right[1])}" fill="#111"/>'
    )

    plan_entry = entry.get("plan")
    if plan_entry:
        if plan_entry.get("goal"):
            gx, gy = px(plan_entry["goal"][0], plan_entry["goal"][1])
            r = 0.1 * SCALE
            parts.append(
                f'<g class="goal"><line x1="{fmt(gx - r)}" y1="{fmt(gy)}" '
                f'x2="{fmt(gx + r)}" y2="{fmt(gy)}" stroke="#238b45" stroke-width="2"/>'
                f'<line x1="{fmt(gx)}" y1="{fmt(gy - r)}" x2="{fmt(gx)}" '
                f'y2="{fmt(gy + r)}" stroke="#238b45" stroke-width="2"/></g>'
            )
        if plan_entry.get("trajectory"):
            points = [f"{fmt(rx)},{fmt(ry)}"]
            for wx, wy in plan_entry["trajectory"]:
                sx, sy = px(wx, wy)
                points.append(f"{fmt(sx)},{fmt(sy)}")
            parts.append(
                f'<polyline class="plan" points="{" ".join(points)}" fill="none" '
                f'stroke="#111" stroke-width="2" stroke-dasharray="6,4"/>'
            )

    parts.append("</svg>")
    return "\n".join(parts)
