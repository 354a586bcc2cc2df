"""Event timelines: link lifetimes, region-coverage changes and their intervals."""

from __future__ import annotations

import csv
import enum
import heapq
import io
import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, NamedTuple

import numpy as np

from .kinematics import AnalysisHorizon, crossing_table

if TYPE_CHECKING:
    from .scenario import Scenario


class EventKind(enum.IntEnum):
    # value order is the tie-break order for simultaneous events
    HORIZON_START = 0
    LINK_UP = 1
    LINK_DOWN = 2
    NODE_ENTER = 3
    NODE_LEAVE = 4
    HORIZON_END = 5


class Event(NamedTuple):
    """One state change.  Link events use (i, j) with i < j; region events use
    ``i`` for the node and carry the fault point id."""

    time: float
    kind: EventKind
    i: int
    j: int = -1
    fault_point: str = ""


class Interval(NamedTuple):
    start: float
    end: float
    links: frozenset
    covered: Mapping[str, frozenset]


@dataclass(frozen=True)
class EventTimeline:
    events: tuple
    horizon: AnalysisHorizon
    initial_links: frozenset = frozenset()
    initial_covered: Mapping[str, frozenset] = field(default_factory=dict)

    def __len__(self):
        return len(self.events)

    @property
    def window(self):
        return self.horizon.window


def build_link_timeline(scenario: "Scenario", tr: float) -> EventTimeline:
    """Every link state change over one period (or the whole horizon) at range ``tr``."""
    if tr < 0:
        raise ValueError("transmission range must be >= 0")
    tab = crossing_table(scenario.trajectories, tr, scenario.horizon)
    initial = zip(tab.I[tab.initially_below].tolist(), tab.J[tab.initially_below].tolist())
    owner = np.repeat(np.arange(len(tab.I)), np.diff(tab.bounds))
    events = [Event(t, EventKind.LINK_UP if up else EventKind.LINK_DOWN, i, j)
              for t, up, i, j in zip(tab.times.tolist(), tab.falling.tolist(),
                                     tab.I[owner].tolist(), tab.J[owner].tolist())]
    events.sort()
    return EventTimeline(tuple(events), scenario.horizon, frozenset(initial))


def merge_timelines(a: EventTimeline, b: EventTimeline) -> EventTimeline:
    if a.horizon != b.horizon:
        raise ValueError("cannot merge timelines over different horizons")
    covered = dict(a.initial_covered)
    for fp, nodes in b.initial_covered.items():
        covered[fp] = covered.get(fp, frozenset()) | nodes
    return EventTimeline(
        tuple(heapq.merge(a.events, b.events)),
        a.horizon,
        a.initial_links | b.initial_links,
        covered,
    )


def _apply(ev: Event, links: set, covered: dict):
    k = ev.kind
    if k == EventKind.LINK_UP:
        links.add((ev.i, ev.j))
    elif k == EventKind.LINK_DOWN:
        links.discard((ev.i, ev.j))
    elif k == EventKind.NODE_ENTER:
        covered.setdefault(ev.fault_point, set()).add(ev.i)
    elif k == EventKind.NODE_LEAVE:
        covered.setdefault(ev.fault_point, set()).discard(ev.i)


def iter_intervals(timeline: EventTimeline) -> Iterable[Interval]:
    """Yield the constant-state pieces of the window; zero-length pieces are skipped."""
    t0, t1 = timeline.window
    links = set(timeline.initial_links)
    covered = {k: set(v) for k, v in timeline.initial_covered.items()}
    start = t0
    for ev in timeline.events:
        if ev.time > start:
            yield Interval(start, ev.time, frozenset(links),
                           {k: frozenset(v) for k, v in covered.items()})
            start = ev.time
        _apply(ev, links, covered)
    if t1 > start:
        yield Interval(start, t1, frozenset(links), {k: frozenset(v) for k, v in covered.items()})


def intervals(timeline: EventTimeline) -> list[Interval]:
    return list(iter_intervals(timeline))


def timeline_from_intervals(pieces: list[Interval], horizon: AnalysisHorizon) -> EventTimeline:
    """Inverse of :func:`intervals` for a contiguous partition of the window."""
    if not pieces:
        return EventTimeline((), horizon)
    events = []
    for prev, cur in zip(pieces, pieces[1:]):
        t = cur.start
        for i, j in cur.links - prev.links:
            events.append(Event(t, EventKind.LINK_UP, i, j))
        for i, j in prev.links - cur.links:
            events.append(Event(t, EventKind.LINK_DOWN, i, j))
        for fp in set(prev.covered) | set(cur.covered):
            before = prev.covered.get(fp, frozenset())
            after = cur.covered.get(fp, frozenset())
            for k in after - before:
                events.append(Event(t, EventKind.NODE_ENTER, k, -1, fp))
            for k in before - after:
                events.append(Event(t, EventKind.NODE_LEAVE, k, -1, fp))
    events.sort()
    first = pieces[0]
    return EventTimeline(tuple(events), horizon, first.links,
                         {k: v for k, v in first.covered.items()})


def active_links_at(timeline: EventTimeline, t: float) -> frozenset:
    for piece in iter_intervals(timeline):
        if piece.start <= t < piece.end:
            return piece.links
    raise ValueError(f"time {t} outside the analysis window")


# ----------------------------------------------------------------------------
# export

CSV_COLUMNS = ("time", "kind", "i", "j")


def _csv_rows(timeline: EventTimeline):
    t0, t1 = timeline.window
    yield (repr(t0), "horizon_start", "", "")
    for i, j in sorted(timeline.initial_links):
        yield (repr(t0), "initial_link", i, j)
    for fp in sorted(timeline.initial_covered):
        for k in sorted(timeline.initial_covered[fp]):
            yield (repr(t0), "initial_cover", fp, k)
    for ev in timeline.events:
        if ev.kind in (EventKind.NODE_ENTER, EventKind.NODE_LEAVE):
            yield (repr(ev.time), ev.kind.name.lower(), ev.fault_point, ev.i)
        else:
            yield (repr(ev.time), ev.kind.name.lower(), ev.i, ev.j)
    yield (repr(t1), "horizon_end", "", "")


def timeline_to_csv(timeline: EventTimeline, fh=None) -> str | None:
    """Write ``time,kind,i,j`` rows.  Region events put the fault point in ``i``
    and the node in ``j``."""
    own = fh is None
    if own:
        fh = io.StringIO()
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(_csv_rows(timeline))
    return fh.getvalue() if own else None


def timeline_to_json(timeline: EventTimeline) -> dict:
    h = timeline.horizon
    return {
        "horizon": {"t_start": h.t_start, "t_end": h.t_end, "periodic": h.periodic,
                    "period_length": h.period_length},
        "window": list(timeline.window),
        "initial_links": [list(p) for p in sorted(timeline.initial_links)],
        "initial_covered": {k: sorted(v) for k, v in sorted(timeline.initial_covered.items())},
        "events": [
            {"time": ev.time, "kind": ev.kind.name.lower(), "i": ev.i, "j": ev.j,
             **({"fault_point": ev.fault_point} if ev.fault_point else {})}
            for ev in timeline.events
        ],
        "intervals": [
            {"start": p.start, "end": p.end, "links": [list(x) for x in sorted(p.links)]}
            for p in iter_intervals(timeline)
        ],
    }


def dump_timeline_json(timeline: EventTimeline, fh) -> None:
    json.dump(timeline_to_json(timeline), fh, indent=1)
