"""Probabilistic relation graph between features, persons and groups.

Sensors broadcast weighted match candidates (face-body, body-voice,
feature-person, body-group). This module keeps them in a simple weighted
graph and computes the most probable conflict-free partition: every feature
owned by at most one person, at most one feature per modality per person,
total kept likelihood maximised, ties broken toward fewer kept edges and
lexicographically smaller edge ids. Bodies with no surviving owner spawn
anonymous persons.

The stateful wrapper :class:`PersonManager` adds persistent person ids and
stability edges so an id, once bound to a body, sticks to it for as long as
that body is alive.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .scene import (
    BODY,
    FACE,
    GROUP,
    PERSON,
    VOICE,
    EntityId,
    GroupRecord,
    PersonRecord,
    person_id,
)

log = logging.getLogger(__name__)

ADMISSIBLE_PAIRS = frozenset(
    {
        frozenset({FACE, BODY}),
        frozenset({BODY, VOICE}),
        frozenset({BODY, GROUP}),
        frozenset({FACE, PERSON}),
        frozenset({BODY, PERSON}),
        frozenset({VOICE, PERSON}),
    }
)

STABILITY_LIKELIHOOD = 0.95


class InadmissiblePairError(ValueError):
    """Raised when a match candidate pairs two kinds that never associate."""


class InfeasibleAssignment(ValueError):
    """Strict-mode assignment with a row whose entries are all forbidden."""


@dataclass(frozen=True)
class MatchCandidate:
    a: EntityId
    b: EntityId
    likelihood: float
    time: float

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("candidate must relate two distinct entities")
        if not (0.0 <= self.likelihood <= 1.0):
            raise ValueError(f"likelihood {self.likelihood} outside [0,1]")
        if frozenset({self.a.kind, self.b.kind}) not in ADMISSIBLE_PAIRS:
            raise InadmissiblePairError(
                f"no admissible association between {self.a.kind} and {self.b.kind}"
            )


def edge_key(a: EntityId, b: EntityId) -> tuple[EntityId, EntityId]:
    return (a, b) if a <= b else (b, a)


def edge_name(key: tuple[EntityId, EntityId]) -> str:
    return f"{key[0]}|{key[1]}"


@dataclass(frozen=True)
class Edge:
    likelihood: float
    last_updated: float


@dataclass(frozen=True)
class RelationGraph:
    """Simple weighted graph; resubmitting an edge overwrites it."""

    nodes: frozenset[EntityId] = frozenset()
    edges: Mapping[tuple[EntityId, EntityId], Edge] = field(default_factory=dict)

    def neighbours(self, n: EntityId) -> list[EntityId]:
        out = []
        for (a, b) in self.edges:
            if a == n:
                out.append(b)
            elif b == n:
                out.append(a)
        return sorted(out)

    def likelihood(self, a: EntityId, b: EntityId) -> float:
        e = self.edges.get(edge_key(a, b))
        return 0.0 if e is None else e.likelihood


def submit_match(g: RelationGraph, c: MatchCandidate) -> RelationGraph:
    """Insert or overwrite the candidate's edge; returns the updated graph."""
    edges = dict(g.edges)
    edges[edge_key(c.a, c.b)] = Edge(likelihood=c.likelihood, last_updated=c.time)
    return RelationGraph(nodes=g.nodes | {c.a, c.b}, edges=edges)


def add_person_node(g: RelationGraph, pid: EntityId) -> RelationGraph:
    if pid.kind != PERSON:
        raise ValueError(f"{pid} is not a person id")
    return RelationGraph(nodes=g.nodes | {pid}, edges=dict(g.edges))


def prune_stale(g: RelationGraph, now: float, ttl: float) -> RelationGraph:
    """Drop edges older than ttl and feature/group nodes left isolated.

    Person nodes are never removed: identity survives sensor gaps.
    """
    if ttl <= 0:
        raise ValueError("ttl must be positive")
    edges = {
        k: e for k, e in g.edges.items() if now - e.last_updated <= ttl
    }
    touched = {n for k in edges for n in k}
    nodes = frozenset(
        n for n in g.nodes if n.kind == PERSON or n in touched
    )
    return RelationGraph(nodes=nodes, edges=edges)


# --- assignment solver --------------------------------------------------------


def _solve_square(a: np.ndarray) -> list[int]:
    """Minimum-cost perfect matching on a finite square matrix.

    Potentials / shortest-augmenting-path formulation, O(n^3). Returns the
    column assigned to each row.
    """
    n = a.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    match_row = np.zeros(n + 1, dtype=np.int64)  # 1-indexed row per column
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        match_row[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = int(match_row[j0])
            cur = a[i0 - 1, :] - u[i0] - v[1:]
            unused = ~used[1:]
            improve = unused & (cur < minv[1:])
            if improve.any():
                idx = np.flatnonzero(improve)
                minv[idx + 1] = cur[idx]
                way[idx + 1] = j0
            cand = np.where(unused, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1
            delta = float(cand[j1 - 1])
            used_idx = np.flatnonzero(used)
            u[match_row[used_idx]] += delta
            v[used_idx] -= delta
            minv[1:][unused] -= delta
            j0 = j1
            if match_row[j0] == 0:
                break
        while j0:
            j1 = int(way[j0])
            match_row[j0] = match_row[j1]
            j0 = j1
    ans = [0] * n
    for j in range(1, n + 1):
        ans[int(match_row[j]) - 1] = j - 1
    return ans


def _square_with_drops(
    cost: np.ndarray, locks: Mapping[int, Optional[int]]
) -> tuple[np.ndarray, float]:
    """Embed an R x C matrix with forbidden entries into a finite square.

    Extra columns let rows stay unassigned and extra rows absorb columns, each
    at a uniform drop cost larger than any achievable real total, so the
    solver maximises the number of real pairs first and minimises their cost
    second. Forbidden entries get a still-larger sentinel that no optimal
    perfect matching ever uses. Locks pin a row to one column (or to a drop).
    """
    rows, cols = cost.shape
    size = rows + cols
    finite = cost[np.isfinite(cost)]
    drop = float(np.abs(finite).sum()) + 1.0 if finite.size else 1.0
    big = drop * (size + 1) + 1.0
    m = np.full((size, size), big)
    m[:rows, :cols] = np.where(np.isfinite(cost), cost, big)
    m[:rows, cols:] = drop
    m[rows:, :cols] = drop
    m[rows:, cols:] = 0.0
    for i, j in locks.items():
        if j is None:
            m[i, :cols] = big
        else:
            kept = m[i, j]
            m[i, :] = big
            m[i, j] = kept
    return m, big


def _assignment_value(
    cost: np.ndarray, locks: Mapping[int, Optional[int]]
) -> tuple[int, float, list[Optional[int]]]:
    rows, cols = cost.shape
    m, big = _square_with_drops(cost, locks)
    ans = _solve_square(m)
    assign: list[Optional[int]] = [None] * rows
    pairs = 0
    total = 0.0
    for i in range(rows):
        j = ans[i]
        if j < cols and np.isfinite(cost[i, j]):
            assign[i] = j
            pairs += 1
            total += float(cost[i, j])
    return pairs, total, assign


def hungarian_assign(
    cost, strict: bool = False
) -> tuple[list[Optional[int]], float]:
    """Minimum-cost one-to-one assignment with np.inf marking forbidden pairs.

    Assigns as many pairs as the forbidden structure allows (min(n, m) when
    everything is admissible), minimising total cost among those. Ties are
    broken toward the lowest row index taking the lowest admissible column.
    With strict=True a row with no admissible column raises instead of staying
    unassigned.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError("cost must be a 2-d matrix")
    rows, cols = cost.shape
    if strict:
        for i in range(rows):
            if cols == 0 or not np.isfinite(cost[i]).any():
                raise InfeasibleAssignment(f"row {i} has no admissible column")
    if rows == 0 or cols == 0:
        return [None] * rows, 0.0

    base_pairs, base_total, best = _assignment_value(cost, {})
    locks: dict[int, Optional[int]] = {}
    tol = 1e-9 * max(1.0, abs(base_total))
    for i in range(rows):
        # Columns lexicographically before the current witness, if any keeps
        # the optimum, take the smallest; otherwise the witness column stands.
        witness = best[i]
        limit = cols if witness is None else witness
        chosen = witness
        for j in range(limit):
            if not np.isfinite(cost[i, j]) or j in locks.values():
                continue
            locks[i] = j
            pairs, total, assign = _assignment_value(cost, locks)
            if pairs == base_pairs and abs(total - base_total) <= tol:
                chosen = j
                best = assign
                break
            del locks[i]
        locks[i] = chosen
    total = sum(float(cost[i, j]) for i, j in locks.items() if j is not None)
    return [locks[i] for i in range(rows)], total


def _max_weight_matching(weights: np.ndarray) -> list[Optional[int]]:
    """Maximum-total-weight matching; only strictly positive weights pair up.

    Equal-weight alternatives resolve toward fewer pairs (a vanishing per-pair
    penalty), which is what the partition objective's fewer-kept-edges
    tie-break needs.
    """
    rows, cols = weights.shape
    if rows == 0 or cols == 0:
        return [None] * rows
    cost = np.where(weights > 0.0, -weights + 1e-12, np.inf)
    if not np.isfinite(cost).any():
        return [None] * rows
    size = rows + cols
    big = float(np.abs(weights).sum()) * (size + 1) + 1.0
    m = np.full((size, size), big)
    m[:rows, :cols] = np.where(np.isfinite(cost), cost, big)
    m[:rows, cols:] = 0.0
    m[rows:, :cols] = 0.0
    m[rows:, cols:] = 0.0
    ans = _solve_square(m)
    out: list[Optional[int]] = [None] * rows
    for i in range(rows):
        j = ans[i]
        if j < cols and weights[i, j] > 0.0:
            out[i] = j
    return out


# --- partition ----------------------------------------------------------------


@dataclass(frozen=True)
class PartitionResult:
    persons: tuple[PersonRecord, ...]
    groups: tuple[GroupRecord, ...]
    affinity: float
    kept_edges: tuple[tuple[EntityId, EntityId], ...]
    discarded_edges: tuple[tuple[EntityId, EntityId], ...]

    def to_dict(self) -> dict:
        return {
            "persons": [
                {
                    "id": str(p.id),
                    "face": None if p.face is None else str(p.face),
                    "body": None if p.body is None else str(p.body),
                    "voice": None if p.voice is None else str(p.voice),
                    "anonymous": p.anonymous,
                }
                for p in self.persons
            ],
            "groups": [
                {
                    "id": str(g.id),
                    "members": sorted(str(m) for m in g.members),
                    "center": None if g.center is None else list(g.center),
                }
                for g in self.groups
            ],
            "affinity": self.affinity,
            "kept_edges": [edge_name(k) for k in self.kept_edges],
            "discarded_edges": [edge_name(k) for k in self.discarded_edges],
        }


def check_partition(result: PartitionResult, g: RelationGraph) -> list[str]:
    """Assert PartitionResult invariants; returns violation strings."""
    out = []
    seen: dict[EntityId, EntityId] = {}
    for p in result.persons:
        for f in p.features():
            if f in seen:
                out.append(f"feature {f} owned by {seen[f]} and {p.id}")
            seen[f] = p.id
    total = sum(g.edges[k].likelihood for k in result.kept_edges if k in g.edges)
    if abs(total - result.affinity) > 1e-9:
        out.append(
            f"affinity {result.affinity} != kept-edge sum {total}"
        )
    return out


def _components(g: RelationGraph) -> list[list[EntityId]]:
    adj: dict[EntityId, list[EntityId]] = {n: [] for n in g.nodes}
    for (a, b) in g.edges:
        adj[a].append(b)
        adj[b].append(a)
    for n in adj:
        adj[n].sort()
    seen: set[EntityId] = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        stack = [start]
        comp = []
        seen.add(start)
        while stack:
            n = stack.pop()
            comp.append(n)
            for nb in reversed(adj[n]):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        comps.append(sorted(comp))
    return comps


def anonymous_placeholder(body: EntityId) -> EntityId:
    return person_id(f"anon[{body.token}]")


def _component_partition(
    g: RelationGraph,
    comp: list[EntityId],
    pinned: Mapping[EntityId, EntityId],
):
    bodies = [n for n in comp if n.kind == BODY]
    faces = [n for n in comp if n.kind == FACE]
    voices = [n for n in comp if n.kind == VOICE]
    persons = [n for n in comp if n.kind == PERSON]

    def w(a, b):
        return g.likelihood(a, b)

    def person_domain(b: EntityId) -> list[EntityId]:
        out = []
        for p in persons:
            if p in pinned and pinned[p] != b:
                continue
            profitable = w(b, p) > 0.0
            if not profitable:
                profitable = any(
                    w(f, b) > 0.0 and w(f, p) > 0.0 for f in faces
                ) or any(w(v, b) > 0.0 and w(v, p) > 0.0 for v in voices)
            if profitable:
                out.append(p)
        return out

    domains = {b: person_domain(b) for b in bodies}

    best_key = None
    best = None

    def evaluate(mapping: dict[EntityId, Optional[EntityId]]):
        # owner of each body: existing person or a synthesised placeholder
        owner = {
            b: (p if p is not None else anonymous_placeholder(b))
            for b, p in mapping.items()
        }
        body_of: dict[EntityId, EntityId] = {o: b for b, o in owner.items()}
        targets = sorted(set(persons) | set(owner.values()))

        kept: list[tuple[EntityId, EntityId]] = []
        affinity = 0.0
        for b, p in mapping.items():
            if p is not None and w(b, p) > 0.0:
                kept.append(edge_key(b, p))
                affinity += w(b, p)

        def match(features: list[EntityId]):
            gains = np.zeros((len(features), len(targets)))
            for i, f in enumerate(features):
                for j, t in enumerate(targets):
                    gain = 0.0
                    if t.kind == PERSON and t in persons and w(f, t) > 0.0:
                        gain += w(f, t)
                    tb = body_of.get(t)
                    if tb is not None and w(f, tb) > 0.0:
                        gain += w(f, tb)
                    gains[i, j] = gain
            picks = _max_weight_matching(gains)
            bound: dict[EntityId, EntityId] = {}
            for i, j in enumerate(picks):
                if j is None:
                    continue
                f, t = features[i], targets[j]
                bound[f] = t
                if t in persons and w(f, t) > 0.0:
                    kept.append(edge_key(f, t))
                tb = body_of.get(t)
                if tb is not None and w(f, tb) > 0.0:
                    kept.append(edge_key(f, tb))
            return bound

        face_bind = match(faces)
        voice_bind = match(voices)
        for f, t in list(face_bind.items()) + list(voice_bind.items()):
            if t in persons and w(f, t) > 0.0:
                affinity += w(f, t)
            tb = body_of.get(t)
            if tb is not None and w(f, tb) > 0.0:
                affinity += w(f, tb)

        kept_names = tuple(sorted(edge_name(k) for k in kept))
        bindings = tuple(
            sorted((str(b), str(p)) for b, p in mapping.items() if p is not None)
        )
        key = (-affinity, len(kept), kept_names, len(bindings), bindings)
        return key, (owner, face_bind, voice_bind, kept, affinity)

    def enumerate_maps(idx: int, used: set[EntityId], mapping: dict):
        nonlocal best_key, best
        if idx == len(bodies):
            key, payload = evaluate(dict(mapping))
            if best_key is None or key < best_key:
                best_key = key
                best = payload
            return
        b = bodies[idx]
        for p in [None] + domains[b]:
            if p is not None and p in used:
                continue
            mapping[b] = p
            if p is not None:
                used.add(p)
            enumerate_maps(idx + 1, used, mapping)
            if p is not None:
                used.discard(p)
        del mapping[b]

    enumerate_maps(0, set(), {})
    assert best is not None
    owner, face_bind, voice_bind, kept, affinity = best

    records: list[PersonRecord] = []
    emitted: set[EntityId] = set()
    for t in sorted(set(persons) | set(owner.values())):
        body = next((b for b, o in owner.items() if o == t), None)
        face = next((f for f, o in face_bind.items() if o == t), None)
        voice = next((v for v, o in voice_bind.items() if o == t), None)
        records.append(
            PersonRecord(id=t, face=face, body=body, voice=voice, anonymous=True)
        )
        emitted.add(t)
    return records, kept, affinity, owner


def solve_partition(
    g: RelationGraph,
    *,
    pinned: Optional[Mapping[EntityId, EntityId]] = None,
    group_centers: Optional[Mapping[EntityId, tuple[float, float]]] = None,
) -> PartitionResult:
    """Most probable conflict-free assignment of features to persons.

    pinned maps a person id to the only body feature allowed to claim it
    (the stability constraint used by PersonManager). group_centers supplies
    o-space centres for the produced GroupRecords when known.
    """
    pinned = pinned or {}
    group_centers = group_centers or {}

    persons: list[PersonRecord] = []
    kept: list[tuple[EntityId, EntityId]] = []
    affinity = 0.0
    body_owner: dict[EntityId, EntityId] = {}

    for comp in _components(g):
        recs, comp_kept, comp_aff, owner = _component_partition(g, comp, pinned)
        persons.extend(recs)
        kept.extend(comp_kept)
        affinity += comp_aff
        body_owner.update(owner)

    # groups attach after persons: per body, its strongest group edge wins
    group_members: dict[EntityId, set[EntityId]] = {}
    for b, owner in sorted(body_owner.items()):
        linked = [
            (n, g.likelihood(b, n))
            for n in g.neighbours(b)
            if n.kind == GROUP and g.likelihood(b, n) > 0.0
        ]
        if not linked:
            continue
        # argmax likelihood, ties toward the lexicographically smaller id
        best_like = max(it[1] for it in linked)
        best_g = min(n for n, lk in linked if lk == best_like)
        kept.append(edge_key(b, best_g))
        affinity += g.likelihood(b, best_g)
        group_members.setdefault(best_g, set()).add(owner)

    groups = tuple(
        GroupRecord(
            id=gid,
            members=frozenset(members),
            center=group_centers.get(gid),
        )
        for gid, members in sorted(group_members.items())
    )

    kept_set = set(kept)
    discarded = tuple(sorted(k for k in g.edges if k not in kept_set))
    persons.sort(key=lambda p: p.id)
    return PartitionResult(
        persons=tuple(persons),
        groups=groups,
        affinity=affinity,
        kept_edges=tuple(sorted(kept_set)),
        discarded_edges=discarded,
    )


# --- voice signatures ---------------------------------------------------------


def voice_match(
    embedding: np.ndarray,
    db: Mapping[EntityId, np.ndarray],
    threshold: float,
) -> Optional[tuple[EntityId, float]]:
    """Best stored person by cosine similarity, or None below the threshold.

    Embeddings are unit vectors so the similarity is a plain dot product.
    Ties resolve to the lexicographically smaller person id.
    """
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must lie in (0, 1)")
    best: Optional[tuple[EntityId, float]] = None
    for pid in sorted(db):
        sim = float(np.dot(embedding, db[pid]))
        if best is None or sim > best[1] + 1e-12:
            best = (pid, sim)
    if best is None or best[1] < threshold:
        return None
    return best


# --- diagnostics --------------------------------------------------------------


def graph_diagnostics(
    g: RelationGraph,
    source: Optional[EntityId] = None,
    target: Optional[EntityId] = None,
) -> dict:
    """Connectivity summary: DFS components, Kruskal forest on cost
    1 - likelihood, and (optionally) the most likely path between two nodes
    under additive -log(likelihood) cost."""
    comps = _components(g)

    # Kruskal over all components (a spanning forest)
    parent = {n: n for n in g.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    forest = []
    weight = 0.0
    ranked = sorted(
        g.edges.items(), key=lambda kv: (1.0 - kv[1].likelihood, edge_name(kv[0]))
    )
    for key, e in ranked:
        ra, rb = find(key[0]), find(key[1])
        if ra == rb:
            continue
        parent[ra] = rb
        forest.append(key)
        weight += 1.0 - e.likelihood

    out = {
        "components": comps,
        "mst_edges": sorted(forest),
        "mst_weight": weight,
    }

    if source is not None and target is not None:
        out["path_cost"], out["path"] = _dijkstra(g, source, target)
    return out


def _dijkstra(
    g: RelationGraph, source: EntityId, target: EntityId
) -> tuple[float, list[EntityId]]:
    if source not in g.nodes or target not in g.nodes:
        return math.inf, []
    adj: dict[EntityId, list[tuple[EntityId, float]]] = {n: [] for n in g.nodes}
    for (a, b), e in g.edges.items():
        if e.likelihood <= 0.0:
            continue
        c = -math.log(e.likelihood)
        adj[a].append((b, c))
        adj[b].append((a, c))
    dist = {source: 0.0}
    prev: dict[EntityId, EntityId] = {}
    pq = [(0.0, source)]
    seen = set()
    while pq:
        d, n = heapq.heappop(pq)
        if n in seen:
            continue
        seen.add(n)
        if n == target:
            break
        for nb, c in adj[n]:
            nd = d + c
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                prev[nb] = n
                heapq.heappush(pq, (nd, nb))
    if target not in seen:
        return math.inf, []
    path = [target]
    while path[-1] != source:
        path.append(prev[path[-1]])
    path.reverse()
    return dist[target], path


# --- stateful person manager ----------------------------------------------


class PersonManager:
    """Owns the relation graph and mints persistent person ids.

    Submissions queue up between resolves; resolve prunes, partitions, turns
    placeholder anonymous persons into numbered persistent ones, and writes
    back stability edges so identities survive sensor gaps.
    """

    def __init__(self, ttl: float = 2.0):
        self.ttl = ttl
        self.graph = RelationGraph()
        self.voice_db: dict[EntityId, np.ndarray] = {}
        self._next_person = 1
        self._bindings: dict[EntityId, EntityId] = {}  # person -> body

    def submit(self, c: MatchCandidate) -> None:
        self.graph = submit_match(self.graph, c)

    def enroll_voice(self, pid: EntityId, embedding: np.ndarray) -> None:
        emb = np.asarray(embedding, dtype=np.float64)
        n = float(np.linalg.norm(emb))
        if n > 0:
            self.voice_db[pid] = emb / n

    def _pins(self) -> dict[EntityId, EntityId]:
        pins = {}
        for pid, body in self._bindings.items():
            if body in self.graph.nodes and edge_key(body, pid) in self.graph.edges:
                pins[pid] = body
        return pins

    def resolve(
        self,
        now: float,
        group_centers: Optional[Mapping[EntityId, tuple[float, float]]] = None,
        bodies: Iterable[EntityId] = (),
    ) -> PartitionResult:
        """Partition the current graph into persons.

        bodies lists body features that are currently alive upstream (e.g.
        confirmed tracks); they join the graph even without edges so a body
        with no face or voice evidence still spawns an anonymous person.
        """
        self.graph = prune_stale(self.graph, now, self.ttl)
        live = frozenset(bodies) - self.graph.nodes
        if live:
            self.graph = RelationGraph(
                nodes=self.graph.nodes | live, edges=dict(self.graph.edges)
            )
        result = solve_partition(
            self.graph, pinned=self._pins(), group_centers=group_centers
        )

        renames: dict[EntityId, EntityId] = {}
        for p in result.persons:
            if p.id.token.startswith("anon[") and p.body is not None:
                pid = person_id(f"person_{self._next_person}")
                self._next_person += 1
                renames[p.id] = pid

        persons = tuple(
            replace(p, id=renames.get(p.id, p.id)) for p in result.persons
        )
        groups = tuple(
            GroupRecord(
                id=grp.id,
                members=frozenset(renames.get(m, m) for m in grp.members),
                center=grp.center,
            )
            for grp in result.groups
        )
        result = PartitionResult(
            persons=persons,
            groups=groups,
            affinity=result.affinity,
            kept_edges=result.kept_edges,
            discarded_edges=result.discarded_edges,
        )

        for p in persons:
            if p.body is None:
                continue
            self.graph = add_person_node(self.graph, p.id)
            self.graph = submit_match(
                self.graph,
                MatchCandidate(
                    a=p.body, b=p.id, likelihood=STABILITY_LIKELIHOOD, time=now
                ),
            )
            self._bindings[p.id] = p.body
        return result
