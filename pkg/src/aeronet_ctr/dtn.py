"""Delay-tolerant connectivity over a periodic sequence of topologies.

A hop taken in topology G_i completes at the start of G_i, and any number of
hops may be chained inside one topology.  The delay of a temporal path is the
start time of the topology holding its last hop, measured from the start of
the topology the message was released in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .timeline import EventTimeline, build_link_timeline, iter_intervals
from .topology import bisect_range, components

if TYPE_CHECKING:
    from .scenario import Scenario


@dataclass(frozen=True)
class TopologySequence:
    """Topologies G_1..G_l of one period with their durations T_1..T_l."""

    node_count: int
    snapshots: tuple  # ((frozenset_of_links, duration), ...)
    periodic: bool = True

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("need at least one node")
        for links, dur in self.snapshots:
            if not dur > 0:
                raise ValueError("topology durations must be > 0")
        object.__setattr__(self, "snapshots",
                           tuple((frozenset(links), float(d)) for links, d in self.snapshots))

    @classmethod
    def from_edges(cls, node_count, edge_sets, durations, periodic=True):
        return cls(node_count, tuple(zip(edge_sets, durations)), periodic)

    @property
    def l(self) -> int:
        return len(self.snapshots)

    @property
    def period_total(self) -> float:
        return math.fsum(d for _, d in self.snapshots)

    @property
    def durations(self) -> list[float]:
        return [d for _, d in self.snapshots]

    def start_offsets(self) -> list[float]:
        out, acc = [], 0.0
        for _, d in self.snapshots:
            out.append(acc)
            acc += d
        return out


def topology_sequence_from_timeline(timeline: EventTimeline, n: int) -> TopologySequence:
    snaps: list[list] = []
    for piece in iter_intervals(timeline):
        if snaps and snaps[-1][0] == piece.links:
            snaps[-1][1] += piece.end - piece.start
        else:
            snaps.append([piece.links, piece.end - piece.start])
    return TopologySequence(n, tuple((a, b) for a, b in snaps), timeline.horizon.periodic)


def topology_sequence(scenario: "Scenario", tr: float) -> TopologySequence:
    return topology_sequence_from_timeline(build_link_timeline(scenario, tr), scenario.n)


def _component_masks(ts: TopologySequence):
    out = []
    for links, _ in ts.snapshots:
        out.append([c for c in components(ts.node_count, links) if len(c) > 1])
    return out


def superimposed_connected(ts: TopologySequence) -> bool:
    """Whether the union of all topologies is connected (finite-delay reachability)."""
    union = set()
    for links, _ in ts.snapshots:
        union |= links
    return len(components(ts.node_count, union)) == 1


def d_max(ts: TopologySequence) -> float:
    """The classic estimate (l - 1) times the period of the worst temporal path delay.

    It is not an upper bound in general: a path may need to wait a period per
    hop rather than per topology (see ``delay_bound``).
    """
    return (ts.l - 1) * ts.period_total


def delay_bound(ts: TopologySequence) -> float:
    """A delay at or beyond which delay-bounded connectivity equals connectivity
    of the superimposed graph.

    While a source has not reached everyone and the union graph is connected,
    some edge leaves its reached set; that edge's topology recurs within one
    period, so each period adds a node. A single topology merges everything at
    once.
    """
    if ts.node_count <= 1 or ts.l == 1:
        return 0.0
    return (ts.node_count - 1) * ts.period_total


def _sweep(ts, comps, start, D):
    """Unreached (source, target) pair within delay D from topology ``start``, or None."""
    n, l = ts.node_count, ts.l
    full = (1 << n) - 1
    if n == 1:
        return None
    # reach[v]: bitmask of sources that have reached v
    reach = [1 << v for v in range(n)]
    durs = ts.durations
    tol = 1e-12 * max(1.0, ts.period_total)
    offset, k, idle = 0.0, start, 0
    while offset <= D + tol:
        changed = False
        for comp in comps[k]:
            m = 0
            for v in comp:
                m |= reach[v]
            for v in comp:
                if reach[v] != m:
                    reach[v] = m
                    changed = True
        if changed and all(r == full for r in reach):
            return None
        idle = 0 if changed else idle + 1
        if idle >= l:
            break
        offset += durs[k]
        k += 1
        if k == l:
            if not ts.periodic:
                break
            k = 0
    if all(r == full for r in reach):
        return None
    for v in range(n):
        missing = full & ~reach[v]
        if missing:
            u = (missing & -missing).bit_length() - 1
            return u, v
    return None


def connected_with_delay(ts: TopologySequence, D: float, start_index: int = 0) -> bool:
    """Every ordered pair has a temporal path of delay <= D released at topology ``start_index``."""
    if D < 0:
        raise ValueError("delay must be >= 0")
    if not 0 <= start_index < ts.l:
        raise IndexError("start_index out of range")
    return _sweep(ts, _component_masks(ts), start_index, D) is None


@dataclass(frozen=True)
class DelayViolation:
    start_index: int
    start_time: float
    source: int
    target: int

    def as_dict(self):
        return {"start_index": self.start_index, "start_time": self.start_time,
                "source": self.source, "target": self.target}


def delay_violations(ts: TopologySequence, D: float, all_starts: bool = True,
                     stop_at_first: bool = True) -> list[DelayViolation]:
    if D < 0:
        raise ValueError("delay must be >= 0")
    comps = _component_masks(ts)
    offsets = ts.start_offsets()
    out = []
    for s in range(ts.l if all_starts else min(1, ts.l)):
        bad = _sweep(ts, comps, s, D)
        if bad is not None:
            out.append(DelayViolation(s, offsets[s], *bad))
            if stop_at_first:
                break
    return out


def connected_with_delay_all_starts(ts: TopologySequence, D: float) -> bool:
    return not delay_violations(ts, D, all_starts=True)


def temporal_delays(ts: TopologySequence, start_index: int = 0) -> list[list[float]]:
    """Smallest delay from each node to each other one, released at ``start_index``.

    ``inf`` where no temporal path exists at all.
    """
    n, l = ts.node_count, ts.l
    comps = _component_masks(ts)
    durs = ts.durations
    out = []
    for u in range(n):
        delay = [math.inf] * n
        delay[u] = 0.0
        reached = 1 << u
        offset, k, idle = 0.0, start_index, 0
        while True:
            grown = reached
            for comp in comps[k]:
                if any(reached >> v & 1 for v in comp):
                    for v in comp:
                        grown |= 1 << v
            if grown != reached:
                for v in range(n):
                    if grown >> v & 1 and not reached >> v & 1:
                        delay[v] = offset
                reached = grown
                idle = 0
            else:
                idle += 1
            if reached == (1 << n) - 1 or idle >= l:
                break
            offset += durs[k]
            k += 1
            if k == l:
                if not ts.periodic:
                    break
                k = 0
        out.append(delay)
    return out


def find_delay_violation(scenario: "Scenario", tr: float, D: float, all_starts: bool = True):
    found = delay_violations(topology_sequence(scenario, tr), D, all_starts)
    return found[0] if found else None


def ctrd_search(scenario: "Scenario", D: float, err: float, all_starts: bool = True):
    if D < 0:
        raise ValueError("delay must be >= 0")
    return bisect_range(lambda tr: find_delay_violation(scenario, tr, D, all_starts),
                        scenario.tr_max, err)


def compute_ctr_d(scenario: "Scenario", D: float, err: float, all_starts: bool = True) -> float:
    """Smallest range (within ``err``) under which every node reaches every other within D."""
    return ctrd_search(scenario, D, err, all_starts).value
