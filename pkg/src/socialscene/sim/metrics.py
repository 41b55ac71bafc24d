"""Run metrics computed from tick logs plus the scenario ground truth.

Agent-to-person matching is purely positional: per tick, agents greedily
claim the nearest confirmed track within a gate, and the track's person
binding (from the partition) names the PersonId for that agent-tick.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Optional

MATCH_GATE = 0.75


def _match_agents_to_persons(entry: dict) -> dict[str, str]:
    """agent id -> person token for one tick, greedy nearest-track."""
    tracks = [t for t in entry["tracks"] if t["status"] == "confirmed"]
    body_to_person = {
        p["body"]: p["id"] for p in entry["partition"]["persons"] if p["body"]
    }
    pairs = []
    for agent in entry["truth"]["agents"]:
        ax, ay = agent["pos"]
        for track in tracks:
            d = math.hypot(track["x"] - ax, track["y"] - ay)
            if d <= MATCH_GATE:
                pairs.append((d, agent["id"], track["id"]))
    pairs.sort()
    out: dict[str, str] = {}
    used_tracks: set[str] = set()
    for _, agent_id, track_id in pairs:
        if agent_id in out or track_id in used_tracks:
            continue
        person = body_to_person.get(track_id)
        if person is None:
            continue
        out[agent_id] = person
        used_tracks.add(track_id)
    return out


def _pair_f1(truth_pairs: set[frozenset], predicted_pairs: set[frozenset]) -> float:
    if not truth_pairs and not predicted_pairs:
        return 1.0
    tp = len(truth_pairs & predicted_pairs)
    fp = len(predicted_pairs - truth_pairs)
    fn = len(truth_pairs - predicted_pairs)
    denom = 2 * tp + fp + fn
    return (2 * tp / denom) if denom else 1.0


def compute_metrics(entries: list[dict], scenario: dict) -> dict:
    """All run metrics; see the per-key comments for definitions."""
    agent_ids = [a["id"] for a in scenario.get("agents", [])]
    for entry in entries:
        for agent in entry["truth"]["agents"]:
            if agent["id"] not in agent_ids:
                agent_ids.append(agent["id"])

    truth_pairs = set()
    for group in scenario.get("groups", []):
        members = sorted(group)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                truth_pairs.add(frozenset((members[i], members[j])))

    histories: dict[str, list[str]] = {a: [] for a in agent_ids}
    f1_per_tick: list[float] = []
    distances: list[float] = []
    time_to_engage: Optional[float] = None
    goal_success = False
    stop_events = 0

    mode = scenario.get("robot", {}).get("mode", "goal")
    goal = scenario.get("robot", {}).get("goal")

    for entry in entries:
        matched = _match_agents_to_persons(entry)
        for agent_id, person in matched.items():
            histories.setdefault(agent_id, []).append(person)

        person_to_agent = {p: a for a, p in matched.items()}
        predicted_pairs = set()
        for group in entry["groups"]:
            members = [person_to_agent.get(m) for m in group["members"]]
            members = sorted(m for m in members if m is not None)
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    predicted_pairs.add(frozenset((members[i], members[j])))
        f1_per_tick.append(_pair_f1(truth_pairs, predicted_pairs))

        rx, ry = entry["truth"]["robot"][:2]
        for agent in entry["truth"]["agents"]:
            distances.append(math.hypot(agent["pos"][0] - rx, agent["pos"][1] - ry))

        if entry["supervisor"]["phase"] == "engaged" and time_to_engage is None:
            time_to_engage = entry["time"]
        if entry.get("plan") and entry["plan"].get("stopped"):
            stop_events += 1

    if mode == "goal" and goal is not None and entries:
        # Final pose is one control step past the last logged truth pose;
        # use the last tick's planned end distance when available, else truth.
        rx, ry = entries[-1]["truth"]["robot"][:2]
        plan_entry = entries[-1].get("plan")
        if plan_entry and plan_entry.get("trajectory"):
            rx, ry = plan_entry["trajectory"][0]
        goal_success = math.hypot(rx - goal[0], ry - goal[1]) <= 0.3
    elif mode == "attend":
        goal_success = time_to_engage is not None

    stabilities = []
    id_switches = 0
    for agent_id in agent_ids:
        history = histories.get(agent_id, [])
        if not history:
            continue
        counts = Counter(history)
        stabilities.append(counts.most_common(1)[0][1] / len(history))
        id_switches += sum(1 for a, b in zip(history, history[1:]) if a != b)

    return {
        "association_accuracy": (
            sum(stabilities) / len(stabilities) if stabilities else 1.0
        ),
        "id_switches": id_switches,
        "group_f1": sum(f1_per_tick) / len(f1_per_tick) if f1_per_tick else 1.0,
        "min_human_distance": min(distances) if distances else None,
        "mean_human_distance": (
            sum(distances) / len(distances) if distances else None
        ),
        "goal_success": goal_success,
        "time_to_engage": time_to_engage,
        "stop_events": stop_events,
        "ticks": len(entries),
    }
