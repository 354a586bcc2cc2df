"""Acceptance gate: one test per criterion, each recording a pass/fail line
that the terminal summary prints at the end of the run."""

import itertools
import math
import time

import numpy as np

from aeronet_ctr.dtn import TopologySequence, compute_ctr_d, connected_with_delay, temporal_delays
from aeronet_ctr.experiment import ExperimentPlan, run_experiment
from aeronet_ctr.fault import compute_ctr_f, region_based_connectivity
from aeronet_ctr.kinematics import AngularVelocity, OrbitSpec
from aeronet_ctr.scenario import Area, Scenario, generate_random_scenario
from aeronet_ctr.timeline import EventKind, build_link_timeline
from aeronet_ctr.topology import Snapshot, compute_ctr
from conftest import record
from oracles import (
    earliest_delay,
    expanded_graph_delay_ok,
    grid_scan,
    orbits_of,
    rbc_enumeration,
    sampled_ctr,
    sampled_link_events,
)

ERR = 0.01
STUDY_AREA = Area(1000.0, 1000.0)


def random_equal_rate_fleet(rng, n):
    """Equal-rate orbits with independent radii; orbits may overlap."""
    w = AngularVelocity.exact(int(rng.choice([5, 10, 20, 40])))
    side = float(rng.uniform(80, 300))
    trs = tuple(OrbitSpec((float(rng.uniform(0, side)), float(rng.uniform(0, side))),
                          float(rng.uniform(0, 25)), float(rng.uniform(0, 360)), w)
                for _ in range(n))
    return Scenario(trs, Area(side, side))


def test_criterion_01_timeline_oracle():
    rng = np.random.default_rng(101)
    worst, mismatches, events = 0.0, 0, 0
    t_pkg = 0.0
    start = time.perf_counter()
    for k in range(50):
        n = int(rng.integers(2, 9))
        sc = random_equal_rate_fleet(rng, n)
        x, y = sc.positions(np.linspace(*sc.horizon.window, 64))
        d = np.hypot(x[:, None] - x[None], y[:, None] - y[None])
        tr = float(np.quantile(d[d > 0], rng.uniform(0.2, 0.8)))
        t0 = time.perf_counter()
        tl = build_link_timeline(sc, tr)
        t_pkg += time.perf_counter() - t0
        want = sampled_link_events(orbits_of(sc), tr, *sc.horizon.window, samples=1_000_000)
        got = [(e.time, e.kind == EventKind.LINK_UP, e.i, e.j) for e in tl.events]
        if len(got) != len(want):
            mismatches += 1
            continue
        events += len(got)
        for (ta, ua, ia, ja), (tb, ub, ib, jb) in zip(got, want):
            if (ua, ia, ja) != (ub, ib, jb):
                mismatches += 1
            worst = max(worst, abs(ta - tb))
    total = time.perf_counter() - start
    ok = mismatches == 0 and worst <= 1e-6 and total < 60
    record(1, "timeline events match dense-sampling oracle", ok,
           f"{events} events, max |dt| {worst:.1e} h, {total:.1f} s total, {t_pkg:.2f} s in package")
    assert ok


def test_criterion_02_ctr_oracle():
    rng = np.random.default_rng(202)
    worst = 0.0
    start = time.perf_counter()
    for k in range(30):
        n = int(rng.integers(2, 11))
        side = float(rng.uniform(100, 400))
        sc = generate_random_scenario(n, 10.0, 20, Area(side, side), int(rng.integers(2**31)))
        exact = sampled_ctr(orbits_of(sc), *sc.horizon.window, samples=100_000)
        want = grid_scan(exact, sc.tr_max, ERR / 4)
        got = compute_ctr(sc, ERR)
        worst = max(worst, abs(got - want))
    total = time.perf_counter() - start
    ok = worst <= ERR and total < 120
    record(2, "CTR matches grid-scan oracle within err", ok,
           f"max |diff| {worst:.4f}, {total:.1f} s")
    assert ok


def test_criterion_03_rbc_oracle():
    rng = np.random.default_rng(303)
    bad = 0
    for _ in range(200):
        n = int(rng.integers(2, 11))
        p = rng.uniform(0.2, 0.9)
        links = {e for e in itertools.combinations(range(n), 2) if rng.random() < p}
        covered = set(rng.choice(n, size=int(rng.integers(0, min(5, n) + 1)), replace=False).tolist())
        if region_based_connectivity(Snapshot(n, links), covered) != rbc_enumeration(n, links, covered):
            bad += 1
    record(3, "region-based connectivity equals subset enumeration", bad == 0, f"{bad}/200 differ")
    assert bad == 0


def test_criterion_04_delay_oracle():
    rng = np.random.default_rng(404)
    bad = checks = 0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        l = int(rng.integers(1, 6))
        pairs = list(itertools.combinations(range(n), 2))
        edges = [{e for e in pairs if rng.random() < 0.3} for _ in range(l)]
        durs = rng.uniform(0.1, 3.0, l).tolist()
        ts = TopologySequence.from_edges(n, edges, durs)
        offsets = ts.start_offsets()
        for _ in range(10):
            # half the probes land exactly on a topology boundary
            if rng.random() < 0.5:
                D = float(rng.uniform(0, 3 * ts.period_total))
            else:
                D = offsets[int(rng.integers(l))] + ts.period_total * int(rng.integers(0, 3))
            for s in range(l):
                checks += 1
                if connected_with_delay(ts, D, s) != expanded_graph_delay_ok(n, edges, durs, D, s):
                    bad += 1
    record(4, "delay-bounded connectivity matches time-expanded BFS", bad == 0,
           f"{bad}/{checks} differ")
    assert bad == 0


def test_criterion_05_worked_examples():
    A, B, C, D = range(4)
    ok = True
    for T1, T2, T3 in [(1.0, 2.0, 3.0), (0.7, 0.05, 4.2), (2.5, 2.5, 2.5)]:
        two = TopologySequence.from_edges(3, [{(A, B)}, {(B, C)}], [T1, T2])
        d2 = temporal_delays(two, 0)
        ok &= math.isclose(d2[A][C], T1) and math.isclose(d2[C][A], T1 + T2)
        ok &= not connected_with_delay(two, T1, 0) and connected_with_delay(two, T1 + T2, 0)
        three = TopologySequence.from_edges(4, [{(C, D)}, {(B, C)}, {(A, B)}], [T1, T2, T3])
        want = 2 * (T1 + T2 + T3)
        ok &= math.isclose(temporal_delays(three, 0)[A][D], want)
        ok &= math.isclose(earliest_delay(4, [{(C, D)}, {(B, C)}, {(A, B)}], [T1, T2, T3], A, D), want)
    record(5, "worked temporal-path delay examples", ok)
    assert ok


def test_criterion_06_ordering():
    rng = np.random.default_rng(606)
    worst = -math.inf
    for _ in range(30):
        n = int(rng.integers(5, 16))
        sc = generate_random_scenario(n, 10.0, 20, Area(500, 500), int(rng.integers(2**31)))
        ctr = compute_ctr(sc, ERR)
        for D in (0.5, 2.0):
            worst = max(worst, compute_ctr_d(sc, D * sc.period, ERR) - ctr)
        for R in (20.0, 60.0):
            worst = max(worst, ctr - compute_ctr_f(sc, R, ERR))
    ok = worst <= ERR
    record(6, "CTR_D <= CTR <= CTR_f on every scenario", ok, f"largest violation {worst:.4f}")
    assert ok


def _non_increasing(seq, slack=0.02):
    rises = [b / a - 1 for a, b in zip(seq, seq[1:]) if b > a]
    return len(rises) == 0 or (len(rises) == 1 and rises[0] <= slack)


def test_criterion_07_trend_in_node_count():
    plan = ExperimentPlan("node_count", (10, 20, 35), 30, n=35, orbit_radius=10.0,
                          area=STUDY_AREA, region_radii=(20.0,), delays=(0.5,), err=ERR, rng_seed=7)
    start = time.perf_counter()
    res = run_experiment(plan)
    total = time.perf_counter() - start
    parts, ok = [], True
    for metric in res.metrics:
        _, means, _ = res.series(metric)
        ok &= _non_increasing(means)
        parts.append(f"{metric}: " + " > ".join(f"{m:.1f}" for m in means))
    ok &= total <= 15 * 60
    record(7, "mean ranges fall with node count", ok, "; ".join(parts) + f"; {total:.0f} s")
    assert ok


def test_criterion_08_trend_in_radius_and_delay():
    radius = run_experiment(ExperimentPlan("region_radius", (10, 20, 40, 60), 10, n=35,
                                           area=STUDY_AREA, metrics=("ctr_f",), err=ERR, rng_seed=8))
    _, rmeans, _ = radius.series("ctr_f")
    rising = len(rmeans) == 4 and all(b >= a for a, b in zip(rmeans, rmeans[1:]))

    delay = run_experiment(ExperimentPlan("delay", (0, 0.5, 1, 2, 3), 10, n=35, area=STUDY_AREA,
                                          metrics=("ctr", "ctr_d"), err=ERR, rng_seed=8))
    ctr = {t.trial: t.range for t in delay.trials if t.metric == "ctr"}
    d0 = {t.trial: t.range for t in delay.trials if t.metric == "ctr_d[D=0P]"}
    zero_matches = all(abs(d0[k] - ctr[k]) <= ERR for k in ctr)
    _, dmeans, _ = delay.series("ctr_d")
    falling = len(dmeans) == 5 and all(b <= a for a, b in zip(dmeans, dmeans[1:4]))
    tail = abs(dmeans[4] - dmeans[3]) / dmeans[3]
    ok = rising and zero_matches and falling and tail <= 0.01
    record(8, "CTR_f rises with R; CTR_D falls with D and levels off", ok,
           "R: " + " < ".join(f"{m:.1f}" for m in rmeans)
           + "; D: " + " > ".join(f"{m:.1f}" for m in dmeans)
           + f"; 2P->3P change {100 * tail:.2f}%")
    assert ok


def test_criterion_09_speed_invariance():
    rng = np.random.default_rng(909)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(4, 15))
        sc = generate_random_scenario(n, 10.0, 20, Area(400, 400), int(rng.integers(2**31)))
        worst = max(worst, abs(compute_ctr(sc, ERR) - compute_ctr(sc.with_speed_factor(3), ERR)))
    ok = worst <= ERR
    record(9, "CTR unchanged when every rate is tripled", ok, f"max |diff| {worst:.4f}")
    assert ok


def test_criterion_10_timeline_scaling():
    rng = np.random.default_rng(1010)
    times = []
    for n in (20, 40, 80):
        sc = generate_random_scenario(n, 10.0, 20, STUDY_AREA, int(rng.integers(2**31)))
        best = math.inf
        for _ in range(7):
            t0 = time.perf_counter()
            build_link_timeline(sc, 200.0)
            best = min(best, time.perf_counter() - t0)
        times.append(best)
    ratios = [b / a for a, b in zip(times, times[1:])]
    ok = all(r <= 5 for r in ratios)
    record(10, "timeline build time grows near n^2 log n", ok,
           "times " + ", ".join(f"{1e3 * t:.1f} ms" for t in times)
           + "; ratios " + ", ".join(f"{r:.2f}" for r in ratios))
    assert ok
