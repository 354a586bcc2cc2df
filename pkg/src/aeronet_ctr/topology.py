"""Per-interval connectivity and the fault-free critical transmission range."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Iterable

from .errors import InfeasibleError
from .timeline import build_link_timeline, iter_intervals

if TYPE_CHECKING:
    from .scenario import Scenario


@dataclass(frozen=True)
class Snapshot:
    node_count: int
    active_links: frozenset

    def __post_init__(self):
        links = frozenset((min(a, b), max(a, b)) for a, b in self.active_links)
        for a, b in links:
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (0 <= a < self.node_count and 0 <= b < self.node_count):
                raise ValueError(f"link {(a, b)} references a node outside [0, {self.node_count})")
        object.__setattr__(self, "active_links", links)

    def adjacency(self) -> list[set]:
        return adjacency(self.node_count, self.active_links)


def adjacency(n: int, links: Iterable) -> list[set]:
    adj = [set() for _ in range(n)]
    for a, b in links:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def components(n: int, links: Iterable) -> list[list[int]]:
    """Connected components, each sorted, listed by smallest member."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in links:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return [groups[k] for k in sorted(groups)]


def connected_subset(adj: list[set], nodes: set) -> bool:
    """Whether the subgraph induced by ``nodes`` is connected (empty and singletons are)."""
    if len(nodes) <= 1:
        return True
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w in nodes and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def is_connected(s: Snapshot) -> bool:
    if s.node_count < 1:
        raise ValueError("snapshot needs at least one node")
    return connected_subset(s.adjacency(), set(range(s.node_count)))


@dataclass(frozen=True)
class Disconnection:
    """Certificate that the network is split during [start, end)."""

    start: float
    end: float
    components: list

    def as_dict(self):
        return {"start": self.start, "end": self.end, "components": self.components}


def find_disconnected_interval(scenario: "Scenario", tr: float) -> Disconnection | None:
    n = scenario.n
    for piece in iter_intervals(build_link_timeline(scenario, tr)):
        if not connected_subset(adjacency(n, piece.links), set(range(n))):
            return Disconnection(piece.start, piece.end, components(n, piece.links))
    return None


def always_connected(scenario: "Scenario", tr: float) -> bool:
    return find_disconnected_interval(scenario, tr) is None


# ----------------------------------------------------------------------------
# range search


@dataclass(frozen=True)
class RangeSearch:
    value: float  # smallest feasible range found (upper end of final bracket)
    lower: float  # largest range known to be infeasible
    witness: Any  # violation observed at ``lower``, None if never probed
    steps: int


def bisect_range(violation: Callable[[float], Any], tr_max: float, err: float) -> RangeSearch:
    """Binary search for the smallest range whose ``violation`` is None.

    ``violation`` must be monotone: once None at some range, None above it.
    Stops when the bracket is no wider than ``err`` and returns its upper end.
    """
    if not err > 0:
        raise ValueError("err must be > 0")
    top = violation(tr_max)
    if top is not None:
        raise InfeasibleError(f"requirement not met even at the maximum range {tr_max:g}", top)
    lo, hi = 0.0, float(tr_max)
    witness = None
    steps = 0
    while hi - lo > err:
        mid = 0.5 * (lo + hi)
        v = violation(mid)
        steps += 1
        if v is None:
            hi = mid
        else:
            lo, witness = mid, v
    return RangeSearch(hi, lo, witness, steps)


def ctr_search(scenario: "Scenario", err: float) -> RangeSearch:
    return bisect_range(lambda tr: find_disconnected_interval(scenario, tr), scenario.tr_max, err)


def compute_ctr(scenario: "Scenario", err: float) -> float:
    """Smallest range (within ``err``) keeping the network connected at all times."""
    return ctr_search(scenario, err).value
