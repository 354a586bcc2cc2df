"""Region-based faults: candidate fault centers, their coverage over time, and CTR_f.

A fault is a disk of radius R that takes out any subset of the ANPs inside
it.  Only disks centered on an I-point need checking: an intersection point
of two vulnerability zones (disks of radius R around two ANPs), or the
position of a single ANP.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .kinematics import EPS_LEVEL, EPS_TIME, OrbitSpec, SAMPLES_PER_REV, all_pair_crossings
from .timeline import Event, EventKind, EventTimeline, build_link_timeline, iter_intervals
from .topology import Snapshot, adjacency, bisect_range, connected_subset

if TYPE_CHECKING:
    from .scenario import Scenario

INF = math.inf


@dataclass(frozen=True)
class FaultPoint:
    """An I-point: ``pair`` (intersection of the zones of i and j) or ``node`` (ANP i itself).

    Branch 1 is the intersection to the left of the direction i -> j, branch 2
    the one to the right, so each branch moves continuously while it exists.
    """

    kind: str
    i: int
    j: int | None = None
    branch: int | None = None
    region_radius: float = 0.0

    def __post_init__(self):
        if self.kind == "pair":
            if self.j is None or self.branch not in (1, 2) or not self.i < self.j:
                raise ValueError("pair fault point needs i < j and branch 1 or 2")
        elif self.kind == "node":
            if self.j is not None or self.branch is not None:
                raise ValueError("node fault point takes only i")
        else:
            raise ValueError(f"unknown fault point kind {self.kind!r}")
        if not self.region_radius > 0:
            raise ValueError("region radius must be > 0")

    @property
    def id(self) -> str:
        if self.kind == "pair":
            return f"I({self.i},{self.j})#{self.branch}"
        return f"I({self.i})"


def enumerate_fault_points(n: int, R: float) -> list[FaultPoint]:
    pts = [FaultPoint("pair", i, j, b, R) for i in range(n) for j in range(i + 1, n) for b in (1, 2)]
    pts += [FaultPoint("node", i, region_radius=R) for i in range(n)]
    return pts


def circle_intersections(xi, yi, xj, yj, R, branch):
    """Branch-selected intersection of two radius-R circles (arrays allowed).

    Where the centers coincide the two points sit at +-R along the x axis.
    Callers make sure the circles meet; slightly separated circles are
    clamped to their tangent point.
    """
    xi, yi, xj, yj = (np.asarray(v, dtype=float) for v in (xi, yi, xj, yj))
    dx, dy = xj - xi, yj - yi
    s = np.hypot(dx, dy)
    h = np.sqrt(np.maximum(R * R - 0.25 * s * s, 0.0))
    sign = 1.0 if branch == 1 else -1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        px = 0.5 * (xi + xj) - sign * h * dy / s
        py = 0.5 * (yi + yj) + sign * h * dx / s
    same = s < 1e-12 * max(R, 1.0)
    px = np.where(same, xi + sign * R, px)
    py = np.where(same, yi, py)
    return px, py


def fault_point_location(fp: FaultPoint, scenario: "Scenario", t):
    """Where ``fp`` sits at time(s) ``t``; raises DomainError when it does not exist."""
    tr_i = scenario.trajectories[fp.i]
    if fp.kind == "node":
        return tr_i.position(t)
    xi, yi = tr_i.position(t)
    xj, yj = scenario.trajectories[fp.j].position(t)
    s = np.hypot(xj - xi, yj - yi)
    if np.any(s > 2 * fp.region_radius + EPS_LEVEL):
        raise DomainError(f"{fp.id} does not exist at the requested time")
    px, py = circle_intersections(xi, yi, xj, yj, fp.region_radius, fp.branch)
    if np.ndim(t) == 0:
        return float(px), float(py)
    return px, py


@dataclass(frozen=True)
class ExistenceIntervals:
    fault_point: str
    intervals: tuple  # ((start, end), ...) sorted, disjoint

    def total(self) -> float:
        return sum(b - a for a, b in self.intervals)


def _active_spans(times, falling, initially, t0, t1):
    spans = []
    on = t0 if initially else None
    for t, f in zip(times, falling):
        if f and on is None:
            on = t
        elif not f and on is not None:
            if t > on:
                spans.append((on, t))
            on = None
    if on is not None and t1 > on:
        spans.append((on, t1))
    return tuple(spans)


def _pair_existence(scenario, R, pairs):
    t0, t1 = scenario.horizon.window
    found = all_pair_crossings(scenario.trajectories, 2 * R, scenario.horizon, pairs=pairs)
    return {(pc.i, pc.j): _active_spans(pc.times.tolist(), pc.falling.tolist(),
                                        pc.initially_below, t0, t1) for pc in found}


def existence_intervals(fp: FaultPoint, scenario: "Scenario") -> ExistenceIntervals:
    """Spans of the analysis window during which ``fp`` exists (pair distance <= 2R)."""
    if fp.kind == "node":
        return ExistenceIntervals(fp.id, (scenario.horizon.window,))
    spans = _pair_existence(scenario, fp.region_radius, [(fp.i, fp.j)])[(fp.i, fp.j)]
    return ExistenceIntervals(fp.id, spans)


@dataclass(frozen=True)
class CoverageWindow:
    """One existence interval split into pieces with a constant covered-node set."""

    start: float
    end: float
    pieces: tuple  # ((piece_start, frozenset_of_nodes), ...)

    def subintervals(self) -> Iterator[tuple[float, float, frozenset]]:
        for k, (a, nodes) in enumerate(self.pieces):
            b = self.pieces[k + 1][0] if k + 1 < len(self.pieces) else self.end
            yield a, b, nodes


@dataclass(frozen=True)
class CoverageTimeline:
    fault_point: str
    windows: tuple
    node_center: bool = False

    def subintervals(self) -> Iterator[tuple[float, float, frozenset]]:
        for w in self.windows:
            yield from w.subintervals()


def _coverage_window(fp, scenario, a, b, step):
    R = fp.region_radius
    n = scenario.n
    others = [k for k in range(n) if k not in (fp.i, fp.j)]
    base = frozenset((fp.i, fp.j))
    if not others or b <= a:
        return CoverageWindow(a, b, ((a, base),))
    trs = scenario.trajectories
    ts = np.linspace(a, b, max(65, int(math.ceil((b - a) / step)) + 1))
    px, py = fault_point_location(fp, scenario, ts)
    X, Y = scenario.positions(ts)
    inside = (X - px) ** 2 + (Y - py) ** 2 - R * R <= 0

    def gap(k, t):
        qx, qy = fault_point_location(fp, scenario, t)
        xk, yk = trs[k].position(t)
        return float((qx - xk) ** 2 + (qy - yk) ** 2 - R * R)

    changes = []
    initial = set(base)
    for k in others:
        row = inside[k]
        if row[0]:
            initial.add(k)
        for m in np.nonzero(row[1:] != row[:-1])[0]:
            t = brentq(lambda x: gap(k, x), ts[m], ts[m + 1], xtol=EPS_TIME * 1e-2)
            changes.append((t, k, bool(row[m + 1])))
    changes.sort()
    pieces = [(a, frozenset(initial))]
    cur = set(initial)
    for t, k, entering in changes:
        if entering:
            cur.add(k)
        else:
            cur.discard(k)
        if t <= pieces[-1][0]:
            pieces[-1] = (pieces[-1][0], frozenset(cur))
        else:
            pieces.append((t, frozenset(cur)))
    merged = [pieces[0]]
    for t, nodes in pieces[1:]:
        if nodes != merged[-1][1]:
            merged.append((t, nodes))
    return CoverageWindow(a, b, tuple(merged))


def _coverage_step(scenario) -> float:
    span = scenario.horizon.span
    step = span / SAMPLES_PER_REV
    for tr in scenario.trajectories:
        if isinstance(tr, OrbitSpec):
            if tr.omega:
                step = min(step, 2 * math.pi / abs(tr.omega) / SAMPLES_PER_REV)
        else:
            step = min(step, tr.sample_step)
    return step


def coverage_timeline(fp: FaultPoint, scenario: "Scenario",
                      existence: ExistenceIntervals | None = None) -> CoverageTimeline:
    """Covered-node sets of ``fp`` over each of its existence intervals.

    A node is covered while it lies within R of the fault point; the two
    ANPs defining a pair point always are.
    """
    if fp.kind == "node":
        a, b = scenario.horizon.window
        return CoverageTimeline(fp.id, (CoverageWindow(a, b, ((a, frozenset((fp.i,))),)),), True)
    if existence is None:
        existence = existence_intervals(fp, scenario)
    step = _coverage_step(scenario)
    return CoverageTimeline(fp.id, tuple(_coverage_window(fp, scenario, a, b, step)
                                         for a, b in existence.intervals))


def all_coverage_timelines(scenario: "Scenario", R: float) -> list[CoverageTimeline]:
    """Coverage timelines of every I-point that exists at some time."""
    n = scenario.n
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = []
    if pairs:
        spans = _pair_existence(scenario, R, pairs)
        for (i, j) in pairs:
            if not spans[(i, j)]:
                continue
            for branch in (1, 2):
                fp = FaultPoint("pair", i, j, branch, R)
                out.append(coverage_timeline(fp, scenario, ExistenceIntervals(fp.id, spans[(i, j)])))
    out += [coverage_timeline(FaultPoint("node", i, region_radius=R), scenario) for i in range(n)]
    return out


def coverage_event_timeline(ct: CoverageTimeline, horizon) -> EventTimeline:
    """Region coverage as node enter/leave events, ready to merge with a link timeline."""
    t0, t1 = horizon.window
    events = []
    initial = frozenset()
    for w in ct.windows:
        prev = frozenset()
        for a, _b, nodes in w.subintervals():
            if a <= t0:
                initial = nodes
            else:
                events += [Event(a, EventKind.NODE_ENTER, k, -1, ct.fault_point) for k in nodes - prev]
                events += [Event(a, EventKind.NODE_LEAVE, k, -1, ct.fault_point) for k in prev - nodes]
            prev = nodes
        if w.end < t1:
            events += [Event(w.end, EventKind.NODE_LEAVE, k, -1, ct.fault_point) for k in prev]
    events.sort()
    return EventTimeline(tuple(events), horizon, frozenset(), {ct.fault_point: initial})


# ----------------------------------------------------------------------------
# region-based connectivity


def _min_vertex_cut(adj, n, s, t, removable, limit):
    # node v -> (2v in, 2v+1 out); only removable nodes have unit capacity
    big = n + 1
    cap: dict[int, dict[int, int]] = {v: {} for v in range(2 * n)}
    for v in range(n):
        cap[2 * v][2 * v + 1] = 1 if v in removable else big
        cap[2 * v + 1].setdefault(2 * v, 0)
        for w in adj[v]:
            cap[2 * v + 1][2 * w] = big
            cap[2 * w].setdefault(2 * v + 1, 0)
    src, dst = 2 * s + 1, 2 * t
    flow = 0
    while flow < limit:
        parent = {src: None}
        q = deque([src])
        while q and dst not in parent:
            u = q.popleft()
            for v, c in cap[u].items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    q.append(v)
        if dst not in parent:
            # a cut made only of removable nodes is worth at most len(removable)
            return flow if flow <= len(removable) else INF
        path = []
        v = dst
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(cap[u][v] for u, v in path)
        if push >= big:
            return INF
        for u, v in path:
            cap[u][v] -= push
            cap[v][u] += push
        flow += push
    return flow


def region_based_connectivity(s: Snapshot, covered) -> float:
    """Fewest covered nodes whose failure splits the surviving network.

    0 if the snapshot is already split, ``inf`` if no subset of ``covered``
    can split it.  One or zero survivors count as connected.
    """
    n = s.node_count
    covered = set(covered)
    adj = s.adjacency()
    if not connected_subset(adj, set(range(n))):
        return 0
    best = INF
    for a in range(n):
        for b in range(a + 1, n):
            if b in adj[a]:
                continue
            removable = covered - {a, b}
            if not removable:
                continue
            best = min(best, _min_vertex_cut(adj, n, a, b, removable, best))
    return best


def failing_subset(adj, n, covered) -> frozenset | None:
    """A subset of ``covered`` whose removal splits the survivors, or None.

    Equivalent to region_based_connectivity < len(covered) + 1 but linear time:
    with U the uncovered nodes, every subset is survivable iff G[U] is
    connected and each covered node has a neighbour in U (or, when U is
    empty, the graph is complete).
    """
    covered = frozenset(covered)
    rest = set(range(n)) - covered
    if not rest:
        nodes = sorted(covered)
        for x in range(len(nodes)):
            for y in range(x + 1, len(nodes)):
                a, b = nodes[x], nodes[y]
                if b not in adj[a]:
                    return covered - {a, b}
        return None
    if not connected_subset(adj, rest):
        return covered
    for c in sorted(covered):
        if not adj[c] & rest:
            return covered - {c}
    return None


def articulation_points(adj, n) -> set:
    """Cut vertices of a connected graph (iterative DFS)."""
    if n < 3:
        return set()
    disc = [-1] * n
    low = [0] * n
    cuts = set()
    timer = 0
    root = 0
    disc[root] = low[root] = timer
    timer += 1
    root_children = 0
    stack = [(root, -1, iter(adj[root]))]
    while stack:
        v, parent, it = stack[-1]
        advanced = False
        for w in it:
            if disc[w] == -1:
                disc[w] = low[w] = timer
                timer += 1
                stack.append((w, v, iter(adj[w])))
                if v == root:
                    root_children += 1
                advanced = True
                break
            if w != parent:
                low[v] = min(low[v], disc[w])
        if advanced:
            continue
        stack.pop()
        if parent != -1:
            low[parent] = min(low[parent], low[v])
            if parent != root and low[v] >= disc[parent]:
                cuts.add(parent)
    if root_children > 1:
        cuts.add(root)
    return cuts


@dataclass(frozen=True)
class FaultViolation:
    """A static interval where losing ``failed`` (all inside one fault region) splits the network."""

    fault_point: str
    start: float
    end: float
    covered: tuple
    failed: tuple

    def as_dict(self):
        return {"fault_point": self.fault_point, "start": self.start, "end": self.end,
                "covered": list(self.covered), "failed": list(self.failed)}


def _static_pieces(pieces, starts, a, b):
    k = max(bisect_right(starts, a) - 1, 0)
    while k < len(pieces) and pieces[k].start < b:
        lo, hi = max(a, pieces[k].start), min(b, pieces[k].end)
        if hi > lo:
            yield k, lo, hi
        k += 1


def find_fault_violation(scenario: "Scenario", R: float, tr: float, coverages=None,
                         method: str = "fast") -> FaultViolation | None:
    """First static interval at range ``tr`` that some single region failure can split.

    ``method="maxflow"`` evaluates region-based connectivity by max-flow on
    every static interval; ``"fast"`` uses the equivalent linear-time test.
    """
    if method not in ("fast", "maxflow"):
        raise ValueError(f"unknown method {method!r}")
    n = scenario.n
    if coverages is None:
        coverages = all_coverage_timelines(scenario, R)
    pieces = list(iter_intervals(build_link_timeline(scenario, tr)))
    starts = [p.start for p in pieces]
    adjs = [adjacency(n, p.links) for p in pieces]
    everyone = set(range(n))
    rbc_cache: dict = {}

    def check(k, covered):
        if method == "fast":
            return failing_subset(adjs[k], n, covered)
        key = (k, covered)
        if key not in rbc_cache:
            snap = Snapshot(n, pieces[k].links)
            ok = region_based_connectivity(snap, covered) >= len(covered) + 1
            rbc_cache[key] = None if ok else _smallest_failing(adjs[k], n, covered)
        return rbc_cache[key]

    if method == "fast":
        # node-centered regions exist throughout and cover exactly one ANP
        for k, p in enumerate(pieces):
            adj = adjs[k]
            if not connected_subset(adj, everyone):
                return FaultViolation("none", p.start, p.end, (), ())
            cuts = articulation_points(adj, n)
            if cuts:
                c = min(cuts)
                return FaultViolation(f"I({c})", p.start, p.end, (c,), (c,))
    for ct in coverages:
        if method == "fast" and ct.node_center:
            continue
        for a, b, covered in ct.subintervals():
            for k, lo, hi in _static_pieces(pieces, starts, a, b):
                bad = check(k, covered)
                if bad is not None:
                    return FaultViolation(ct.fault_point, lo, hi, tuple(sorted(covered)),
                                          tuple(sorted(bad)))
    return None


def _smallest_failing(adj, n, covered):
    from itertools import combinations

    nodes = sorted(covered)
    for size in range(len(nodes) + 1):
        for sub in combinations(nodes, size):
            alive = set(range(n)) - set(sub)
            if not connected_subset(adj, alive):
                return frozenset(sub)
    return frozenset(covered)


def ctrf_search(scenario: "Scenario", R: float, err: float, method: str = "fast"):
    if not R > 0:
        raise ValueError("region radius must be > 0")
    coverages = all_coverage_timelines(scenario, R)
    return bisect_range(
        lambda tr: find_fault_violation(scenario, R, tr, coverages, method),
        scenario.tr_max, err)


def compute_ctr_f(scenario: "Scenario", R: float, err: float, method: str = "fast") -> float:
    """Smallest range (within ``err``) that keeps the survivors connected after
    any single region failure of radius ``R``, at any time."""
    return ctrf_search(scenario, R, err, method).value
