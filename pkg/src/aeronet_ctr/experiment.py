"""Seeded Monte Carlo sweeps of CTR, CTR_f and CTR_D over random fleets."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .dtn import compute_ctr_d
from .errors import InfeasibleError, PackingError, ScenarioError
from .fault import compute_ctr_f
from .kinematics import AngularVelocity, as_rate
from .scenario import Area, Scenario, _rate, _rate_doc, generate_random_scenario
from .topology import compute_ctr

SWEEPS = ("node_count", "region_radius", "delay")
METRICS = ("ctr", "ctr_f", "ctr_d")


@dataclass(frozen=True)
class ExperimentPlan:
    sweep: str
    values: tuple
    trials_per_value: int = 30
    n: int = 35
    orbit_radius: float = 10.0
    omega: AngularVelocity = field(default_factory=lambda: AngularVelocity(Fraction(20)))
    area: Area = field(default_factory=lambda: Area(1000.0, 1000.0))
    region_radii: tuple = (20.0, 60.0)
    delays: tuple = (0.5, 2.0)  # in periods
    err: float = 0.01
    metrics: tuple = METRICS
    all_starts: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise ScenarioError(f"sweep: must be one of {SWEEPS}, got {self.sweep!r}")
        if not self.values:
            raise ScenarioError("values: must be non-empty")
        if self.trials_per_value < 1:
            raise ScenarioError("trials_per_value: must be >= 1")
        bad = set(self.metrics) - set(METRICS)
        if bad:
            raise ScenarioError(f"metrics: unknown {sorted(bad)}")
        if not self.err > 0:
            raise ScenarioError("err: must be > 0")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "region_radii", tuple(self.region_radii))
        object.__setattr__(self, "delays", tuple(self.delays))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        object.__setattr__(self, "omega", as_rate(self.omega))

    def settings(self, value):
        """(n, region radii, delays) in force at one sweep value."""
        if self.sweep == "node_count":
            return int(value), self.region_radii, self.delays
        if self.sweep == "region_radius":
            return self.n, (float(value),), self.delays
        return self.n, self.region_radii, (float(value),)

    def scenario(self, n: int, trial: int) -> Scenario:
        seed = np.random.SeedSequence([self.rng_seed, trial, n])
        return generate_random_scenario(n, self.orbit_radius, self.omega, self.area, seed)


def plan_from_dict(doc: dict) -> ExperimentPlan:
    if not isinstance(doc, dict):
        raise ScenarioError("plan: expected an object")
    known = {"sweep", "values", "trials_per_value", "trials", "n", "orbit_radius", "omega",
             "area", "region_radii", "delays", "R", "D", "err", "metrics", "all_starts",
             "rng_seed"}
    extra = set(doc) - known
    if extra:
        raise ScenarioError(f"plan: unknown keys {sorted(extra)}")
    kw = {k: doc[k] for k in doc if k in known and k not in ("trials", "omega", "area", "R", "D")}
    # short aliases for the base fault radius and delay (periods)
    for short, key in (("R", "region_radii"), ("D", "delays")):
        if short in doc:
            if key in doc:
                raise ScenarioError(f"plan: give only one of {short!r} and {key!r}")
            kw[key] = doc[short]
    if "trials" in doc:
        kw["trials_per_value"] = doc["trials"]
    if "omega" in doc:
        kw["omega"] = _rate(doc["omega"], "omega")
    if "area" in doc:
        a = doc["area"]
        kw["area"] = Area(float(a["w"]), float(a["h"]))
    for key in ("region_radii", "delays"):
        if key in kw and not isinstance(kw[key], (list, tuple)):
            kw[key] = (kw[key],)
    try:
        return ExperimentPlan(**kw)
    except TypeError as exc:
        raise ScenarioError(f"plan: {exc}") from None


def load_plan(path) -> ExperimentPlan:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"plan: invalid JSON ({exc})") from None
    return plan_from_dict(doc)


def plan_to_dict(plan: ExperimentPlan) -> dict:
    d = asdict(plan)
    d["omega"] = _rate_doc(plan.omega)
    d["area"] = {"w": plan.area.width, "h": plan.area.height}
    for k in ("values", "region_radii", "delays", "metrics"):
        d[k] = list(d[k])
    return d


def metric_label(metric: str, param=None) -> str:
    if metric == "ctr_f":
        return f"ctr_f[R={param:g}]"
    if metric == "ctr_d":
        return f"ctr_d[D={param:g}P]"
    return metric


@dataclass(frozen=True)
class TrialResult:
    value: float
    trial: int
    metric: str
    range: float | None  # None when infeasible


@dataclass(frozen=True)
class SummaryRow:
    value: float
    metric: str
    mean: float
    stddev: float
    trials: int
    infeasible: int


def _trial(plan: ExperimentPlan, value, trial: int) -> list[TrialResult]:
    n, radii, delays = plan.settings(value)
    try:
        sc = plan.scenario(n, trial)
    except PackingError:
        return [TrialResult(value, trial, lab, None) for lab in _labels(plan, radii, delays)]
    out = []

    def run(label, fn):
        try:
            out.append(TrialResult(value, trial, label, fn()))
        except InfeasibleError:
            out.append(TrialResult(value, trial, label, None))

    if "ctr" in plan.metrics:
        run("ctr", lambda: compute_ctr(sc, plan.err))
    if "ctr_f" in plan.metrics:
        for R in radii:
            run(metric_label("ctr_f", R), lambda R=R: compute_ctr_f(sc, R, plan.err))
    if "ctr_d" in plan.metrics:
        for D in delays:
            run(metric_label("ctr_d", D),
                lambda D=D: compute_ctr_d(sc, D * sc.period, plan.err, plan.all_starts))
    return out


def _labels(plan, radii, delays):
    labs = []
    if "ctr" in plan.metrics:
        labs.append("ctr")
    if "ctr_f" in plan.metrics:
        labs += [metric_label("ctr_f", R) for R in radii]
    if "ctr_d" in plan.metrics:
        labs += [metric_label("ctr_d", D) for D in delays]
    return labs


def _trial_task(args):
    return _trial(*args)


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    trials: list
    rows: list

    def series_key(self, label: str) -> str:
        """Drop the bracketed parameter when it is the swept one, so a sweep over
        R or D reads as one curve rather than one point per value."""
        swept = {"region_radius": "ctr_f[", "delay": "ctr_d["}.get(self.plan.sweep)
        return label.split("[")[0] if swept and label.startswith(swept) else label

    def series(self, metric: str) -> tuple[list, list, list]:
        rows = [r for r in self.rows if self.series_key(r.metric) == metric]
        return [r.value for r in rows], [r.mean for r in rows], [r.stddev for r in rows]

    @property
    def metrics(self) -> list[str]:
        seen = []
        for r in self.rows:
            key = self.series_key(r.metric)
            if key not in seen:
                seen.append(key)
        return seen


def summarize(trials: list[TrialResult], plan: ExperimentPlan) -> list[SummaryRow]:
    rows = []
    for value in plan.values:
        by_metric: dict[str, list] = {}
        for t in trials:
            if t.value == value:
                by_metric.setdefault(t.metric, []).append(t.range)
        for metric, vals in by_metric.items():
            ok = [v for v in vals if v is not None]
            mean = statistics.fmean(ok) if ok else math.nan
            sd = statistics.stdev(ok) if len(ok) > 1 else 0.0
            rows.append(SummaryRow(value, metric, mean, sd, len(ok), len(vals) - len(ok)))
    return rows


def run_experiment(plan: ExperimentPlan, jobs: int = 1) -> ExperimentResult:
    """Run every (value, trial) cell; output order is fixed regardless of ``jobs``."""
    tasks = [(plan, v, t) for v in plan.values for t in range(plan.trials_per_value)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_trial_task, tasks))
    else:
        chunks = [_trial(*t) for t in tasks]
    trials = [r for chunk in chunks for r in chunk]
    return ExperimentResult(plan, trials, summarize(trials, plan))


SUMMARY_COLUMNS = ("sweep", "value", "metric", "mean", "stddev", "trials", "infeasible")
TRIAL_COLUMNS = ("sweep", "value", "trial", "metric", "range")


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def summary_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in result.rows:
        w.writerow((result.plan.sweep, _fmt(r.value), r.metric, _fmt(r.mean), _fmt(r.stddev),
                    r.trials, r.infeasible))
    return buf.getvalue()


def trials_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for t in result.trials:
        w.writerow((result.plan.sweep, _fmt(t.value), t.trial, t.metric, _fmt(t.range)))
    return buf.getvalue()


def result_to_json(result: ExperimentResult) -> dict:
    def clean(x):
        return None if isinstance(x, float) and math.isnan(x) else x

    return {
        "plan": plan_to_dict(result.plan),
        "rows": [{k: clean(v) for k, v in asdict(r).items()} for r in result.rows],
        "trials": [asdict(t) for t in result.trials],
    }
