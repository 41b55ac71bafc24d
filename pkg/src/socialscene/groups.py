"""Conversational-group (F-formation) detection from person poses.

Each standing person claims a point in front of them (the o-space
candidate); people talking together aim their candidates at roughly the
same spot.  Detection is posed as a clustering problem over candidates:
partition persons so that the summed squared distance of each candidate
to its group's mean, scaled by the position-noise variance, plus a
per-group existence penalty, is minimal.

For small scenes the optimum is found by exhaustive enumeration of set
partitions; larger scenes fall back to a deterministic hill-climb over
merge/move/swap moves started from the all-singletons partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .scene import EntityId, GroupRecord, group_id

# Above this head count Bell-number enumeration gets expensive and the
# local-move optimiser takes over (Bell(7) = 877, Bell(8) = 4140).
EXHAUSTIVE_LIMIT = 7

Pose = tuple[float, float, float]


@dataclass(frozen=True)
class GcffParams:
    """Tuning knobs for the F-formation objective.

    ``stride`` is how far in front of a person their o-space candidate
    sits.  ``mdl`` is the per-group existence penalty; together with
    ``position_noise`` (the candidate position noise, in metres) it sets
    the merge radius: two persons merge when their candidates are closer
    than ``position_noise * sqrt(2 * mdl)`` (about 0.84 m at defaults).
    """

    stride: float = 0.7
    mdl: float = 3500.0
    position_noise: float = 0.01

    def __post_init__(self) -> None:
        if self.stride <= 0.0:
            raise ValueError("stride must be positive")
        if self.mdl <= 0.0:
            raise ValueError("mdl penalty must be positive")
        if self.position_noise <= 0.0:
            raise ValueError("position_noise must be positive")


def o_space_candidate(pose: Pose, stride: float) -> tuple[float, float]:
    """Project a pose forward by ``stride`` metres onto its o-space point."""
    x, y, theta = pose
    return (x + stride * math.cos(theta), y + stride * math.sin(theta))


def _objective(blocks: Sequence[Sequence[int]], candidates: np.ndarray, params: GcffParams) -> float:
    var = params.position_noise**2
    total = params.mdl * len(blocks)
    for block in blocks:
        pts = candidates[list(block)]
        centre = pts.mean(axis=0)
        total += float(np.sum((pts - centre) ** 2)) / var
    return total


def _partitions(n: int) -> Iterator[list[list[int]]]:
    """Yield every set partition of range(n), one block list at a time."""
    if n == 0:
        yield []
        return

    def extend(i: int, blocks: list[list[int]]) -> Iterator[list[list[int]]]:
        if i == n:
            yield [list(b) for b in blocks]
            return
        for block in blocks:
            block.append(i)
            yield from extend(i + 1, blocks)
            block.pop()
        blocks.append([i])
        yield from extend(i + 1, blocks)
        blocks.pop()

    yield from extend(1, [[0]])


def _canonical(blocks: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


def _solve_exhaustive(candidates: np.ndarray, params: GcffParams) -> list[list[int]]:
    best: list[list[int]] | None = None
    best_cost = math.inf
    best_key: tuple | None = None
    for blocks in _partitions(len(candidates)):
        cost = _objective(blocks, candidates, params)
        if cost < best_cost - 1e-9:
            best, best_cost, best_key = blocks, cost, None
        elif cost <= best_cost + 1e-9:
            # Tie on cost: prefer fewer groups, then the lexicographically
            # smallest canonical block list, so output is deterministic.
            if best_key is None:
                assert best is not None
                best_key = (len(best), _canonical(best))
            key = (len(blocks), _canonical(blocks))
            if key < best_key:
                best, best_key = blocks, key
                best_cost = min(best_cost, cost)
    assert best is not None
    return best


def _solve_hill_climb(candidates: np.ndarray, params: GcffParams) -> list[list[int]]:
    """Deterministic first-improvement local search from singletons.

    Move order is fixed (merge pairs, then single-person moves, then
    pairwise swaps, each scanned in index order) so repeated runs on the
    same input walk the same path.
    """
    n = len(candidates)
    blocks = [[i] for i in range(n)]
    cost = _objective(blocks, candidates, params)

    improved = True
    while improved:
        improved = False
        # Merge any two groups.
        for a in range(len(blocks)):
            for b in range(a + 1, len(blocks)):
                trial = [blk for k, blk in enumerate(blocks) if k not in (a, b)]
                trial.append(sorted(blocks[a] + blocks[b]))
                trial_cost = _objective(trial, candidates, params)
                if trial_cost < cost - 1e-9:
                    blocks, cost, improved = trial, trial_cost, True
                    break
            if improved:
                break
        if improved:
            continue
        # Move one person into another group (or out into a new singleton).
        for a in range(len(blocks)):
            if len(blocks[a]) == 1:
                targets = range(len(blocks))
            else:
                targets = range(len(blocks) + 1)  # last slot = new singleton
            for i in blocks[a]:
                for b in targets:
                    if b == a:
                        continue
                    trial = [list(blk) for blk in blocks]
                    trial[a].remove(i)
                    if b == len(blocks):
                        trial.append([i])
                    else:
                        trial[b] = sorted(trial[b] + [i])
                    trial = [blk for blk in trial if blk]
                    trial_cost = _objective(trial, candidates, params)
                    if trial_cost < cost - 1e-9:
                        blocks, cost, improved = trial, trial_cost, True
                        break
                if improved:
                    break
            if improved:
                break
        if improved:
            continue
        # Swap two persons across groups.
        for a in range(len(blocks)):
            for b in range(a + 1, len(blocks)):
                for i in blocks[a]:
                    for j in blocks[b]:
                        trial = [list(blk) for blk in blocks]
                        trial[a] = sorted([k for k in blocks[a] if k != i] + [j])
                        trial[b] = sorted([k for k in blocks[b] if k != j] + [i])
                        trial_cost = _objective(trial, candidates, params)
                        if trial_cost < cost - 1e-9:
                            blocks, cost, improved = trial, trial_cost, True
                            break
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break
    return blocks


def partition_objective(
    poses: Mapping[EntityId, Pose],
    blocks: Sequence[Sequence[EntityId]],
    params: GcffParams | None = None,
) -> float:
    """Objective value of an explicit partition, for diagnostics and tests."""
    params = params or GcffParams()
    ids = sorted(poses)
    index = {pid: k for k, pid in enumerate(ids)}
    candidates = np.array([o_space_candidate(poses[pid], params.stride) for pid in ids], dtype=float)
    int_blocks = [[index[pid] for pid in block] for block in blocks]
    return _objective(int_blocks, candidates, params)


def detect_groups(poses: Mapping[EntityId, Pose], params: GcffParams | None = None) -> list[GroupRecord]:
    """Partition persons into conversational groups.

    ``poses`` maps person ids to (x, y, theta) ground poses.  Every person
    lands in exactly one returned group; people with no partner come back
    as singleton groups.  Group ids are transient, minted per call in
    order of each group's smallest member id.
    """
    params = params or GcffParams()
    ids = sorted(poses)
    if not ids:
        return []

    candidates = np.array([o_space_candidate(poses[pid], params.stride) for pid in ids], dtype=float)
    if len(ids) <= EXHAUSTIVE_LIMIT:
        blocks = _solve_exhaustive(candidates, params)
    else:
        blocks = _solve_hill_climb(candidates, params)

    blocks = sorted((sorted(block) for block in blocks), key=lambda b: ids[b[0]])
    records = []
    for k, block in enumerate(blocks):
        centre = candidates[block].mean(axis=0)
        records.append(
            GroupRecord(
                id=group_id(f"g{k + 1}"),
                members=frozenset(ids[i] for i in block),
                center=(float(centre[0]), float(centre[1])),
            )
        )
    return records
