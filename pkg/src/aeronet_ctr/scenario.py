"""Scenario model, the JSON scenario format and random scenario generation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import PackingError, ScenarioError
from .kinematics import (
    EPS_GEOM,
    AnalysisHorizon,
    AngularVelocity,
    OrbitSpec,
    ParametricPath,
    Trajectory,
    as_rate,
    common_period,
)

# horizon used when every node is stationary (nothing ever changes)
STATIONARY_SPAN = 1.0


@dataclass(frozen=True)
class Area:
    width: float
    height: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("area needs positive width and height")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


def default_horizon(trajectories: Sequence[Trajectory]) -> AnalysisHorizon:
    if any(not isinstance(t, OrbitSpec) for t in trajectories):
        raise ScenarioError("horizon: required when a trajectory is not circular")
    period = common_period(trajectories)
    if period is not None:
        return AnalysisHorizon.one_period(period)
    if all(t.omega == 0 for t in trajectories):
        return AnalysisHorizon.one_period(STATIONARY_SPAN)
    raise ScenarioError("horizon: angular velocities are not commensurate; give an explicit horizon")


@dataclass(frozen=True)
class Scenario:
    trajectories: tuple
    area: Area
    horizon: AnalysisHorizon = None
    labels: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        if not self.trajectories:
            raise ScenarioError("anps: need at least one ANP")
        if self.horizon is None:
            object.__setattr__(self, "horizon", default_horizon(self.trajectories))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != len(self.trajectories):
                raise ScenarioError("labels: one label per ANP")

    @property
    def n(self) -> int:
        return len(self.trajectories)

    @property
    def tr_max(self) -> float:
        return self.area.diagonal

    @property
    def period(self) -> float:
        return self.horizon.span

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    def positions(self, t):
        """Arrays (x, y) of shape (n, len(t))."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        xs, ys = zip(*(tr.position(t) for tr in self.trajectories))
        return np.vstack(xs), np.vstack(ys)

    def with_speed_factor(self, k) -> "Scenario":
        """Same flight paths flown ``k`` times faster; the horizon shrinks accordingly."""
        trs = [t.scaled(k) for t in self.trajectories]
        h = self.horizon
        kf = float(k)
        if h.periodic:
            hz = AnalysisHorizon(h.t_start / kf, h.t_start / kf + (h.t_end - h.t_start) / kf,
                                 True, h.period_length / kf)
        else:
            hz = AnalysisHorizon(h.t_start / kf, h.t_end / kf)
        return replace(self, trajectories=tuple(trs), horizon=hz)


# ----------------------------------------------------------------------------
# parsing


def _num(v, path, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{path}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ScenarioError(f"{path}: must be finite")
    if positive and not v > 0:
        raise ScenarioError(f"{path}: must be > 0, got {v}")
    if nonneg and not v >= 0:
        raise ScenarioError(f"{path}: must be >= 0, got {v}")
    return v


def _point(v, path):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ScenarioError(f"{path}: expected [x, y]")
    return (float(_num(v[0], f"{path}[0]")), float(_num(v[1], f"{path}[1]")))


def _rate(v, path) -> AngularVelocity:
    if isinstance(v, dict):
        extra = set(v) - {"num", "den", "pi_factor"}
        if extra:
            raise ScenarioError(f"{path}: unknown keys {sorted(extra)}")
        num = v.get("num")
        den = v.get("den", 1)
        for key, x in (("num", num), ("den", den)):
            if isinstance(x, bool) or not isinstance(x, int):
                raise ScenarioError(f"{path}.{key}: expected an integer, got {x!r}")
        if den == 0:
            raise ScenarioError(f"{path}.den: must be non-zero")
        pi = v.get("pi_factor", False)
        if not isinstance(pi, bool):
            raise ScenarioError(f"{path}.pi_factor: expected true/false")
        return AngularVelocity.exact(num, den, pi)
    return as_rate(_num(v, path))


def _rate_doc(w: AngularVelocity):
    if w.is_exact:
        return {"num": w.ratio.numerator, "den": w.ratio.denominator, "pi_factor": w.pi_factor}
    return w.value


def _anp(d, path):
    if not isinstance(d, dict):
        raise ScenarioError(f"{path}: expected an object")
    name = d.get("label")
    who = f"{path} ({name!r})" if name is not None else path
    if "track" in d:
        tr = d["track"]
        if not isinstance(tr, dict) or "t" not in tr or "xy" not in tr:
            raise ScenarioError(f"{who}.track: expected {{'t': [...], 'xy': [[x, y], ...]}}")
        try:
            return ParametricPath.from_waypoints(tr["t"], tr["xy"], tr.get("sample_step")), name
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"{who}.track: {exc}") from None
    for key in ("center", "orbit_radius", "omega_rad_per_hour"):
        if key not in d:
            raise ScenarioError(f"{who}.{key}: missing")
    center = _point(d["center"], f"{who}.center")
    radius = float(_num(d["orbit_radius"], f"{who}.orbit_radius", nonneg=True))
    rate = _rate(d["omega_rad_per_hour"], f"{who}.omega_rad_per_hour")
    if ("phase_deg" in d) == ("initial_position" in d):
        raise ScenarioError(f"{who}: give exactly one of phase_deg / initial_position")
    if "phase_deg" in d:
        return OrbitSpec(center, radius, float(_num(d["phase_deg"], f"{who}.phase_deg")), rate), name
    p = _point(d["initial_position"], f"{who}.initial_position")
    off = abs(math.hypot(p[0] - center[0], p[1] - center[1]) - radius)
    if off > EPS_GEOM:
        raise ScenarioError(f"{who}.initial_position: {off:.6g} mi off the orbit circle")
    return OrbitSpec.from_initial_position(center, radius, p, rate), name


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("document: expected an object")
    extra = set(doc) - {"area", "anps", "horizon"}
    if extra:
        raise ScenarioError(f"document: unknown keys {sorted(extra)}")
    a = doc.get("area")
    if not isinstance(a, dict) or "w" not in a or "h" not in a:
        raise ScenarioError("area: expected {'w': ..., 'h': ...}")
    area = Area(float(_num(a["w"], "area.w", positive=True)),
                float(_num(a["h"], "area.h", positive=True)),
                float(_num(a.get("x0", 0.0), "area.x0")), float(_num(a.get("y0", 0.0), "area.y0")))
    anps = doc.get("anps")
    if not isinstance(anps, list) or not anps:
        raise ScenarioError("anps: expected a non-empty list")
    trajs, labels = [], []
    for k, d in enumerate(anps):
        t, name = _anp(d, f"anps[{k}]")
        trajs.append(t)
        labels.append(name)
    horizon = None
    if doc.get("horizon") is not None:
        h = doc["horizon"]
        if not isinstance(h, dict):
            raise ScenarioError("horizon: expected an object")
        try:
            periodic = bool(h.get("periodic", False))
            pl = h.get("period_length")
            horizon = AnalysisHorizon(
                float(_num(h.get("t_start", 0.0), "horizon.t_start")),
                float(_num(h["t_end"], "horizon.t_end")),
                periodic,
                None if pl is None else float(_num(pl, "horizon.period_length", positive=True)),
            )
        except KeyError:
            raise ScenarioError("horizon.t_end: missing") from None
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"horizon: {exc}") from None
    has_labels = any(x is not None for x in labels)
    if has_labels and len(set(labels)) != len(labels):
        raise ScenarioError("anps[*].label: labels must be unique")
    return Scenario(tuple(trajs), area, horizon,
                    tuple(x if x is not None else str(k) for k, x in enumerate(labels))
                    if has_labels else None)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"document: invalid JSON ({exc})") from None
    return scenario_from_dict(doc)


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return parse_scenario(fh.read())


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    anps = []
    for k, t in enumerate(s.trajectories):
        if isinstance(t, OrbitSpec):
            d = {"center": list(t.center), "orbit_radius": t.orbit_radius,
                 "phase_deg": t.phase_deg, "omega_rad_per_hour": _rate_doc(t.angular_velocity)}
        elif t.waypoints is not None:
            d = {"track": {"t": list(t.waypoints[0]), "xy": [list(p) for p in t.waypoints[1]],
                           "sample_step": t.sample_step}}
        else:
            raise ScenarioError(f"anps[{k}]: a function-defined path cannot be serialised")
        if s.labels:
            d["label"] = s.labels[k]
        anps.append(d)
    a = s.area
    area = {"w": a.width, "h": a.height}
    if a.x0 or a.y0:
        area.update(x0=a.x0, y0=a.y0)
    h = s.horizon
    hz = {"t_start": h.t_start, "t_end": h.t_end, "periodic": h.periodic}
    if h.periodic:
        hz["period_length"] = h.period_length
    return {"area": area, "anps": anps, "horizon": hz}


def serialize_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=1)


# ----------------------------------------------------------------------------
# generation


def generate_random_scenario(n: int, orbit_radius: float, omega=20, area: Area | None = None,
                             rng_seed=None, max_tries: int = 10_000) -> Scenario:
    """``n`` equal-rate circular orbits with random centers, none intersecting.

    Centers are uniform over the part of the area where the whole orbit fits,
    rejected while they come within ``2 * orbit_radius`` of an earlier one.
    Phases are uniform.  ``max_tries`` caps the rejections per orbit.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    area = area or Area(1000.0, 1000.0)
    rate = as_rate(omega)
    r = float(orbit_radius)
    if 2 * r >= min(area.width, area.height):
        raise PackingError("orbit does not fit in the area")
    rng = np.random.default_rng(rng_seed)
    centers: list[tuple[float, float]] = []
    for k in range(n):
        for _ in range(max_tries):
            c = (float(rng.uniform(area.x0 + r, area.x0 + area.width - r)),
                 float(rng.uniform(area.y0 + r, area.y0 + area.height - r)))
            if all(math.hypot(c[0] - x, c[1] - y) > 2 * r for x, y in centers):
                centers.append(c)
                break
        else:
            raise PackingError(f"could not place orbit {k} of {n} after {max_tries} tries")
    phases = rng.uniform(0.0, 360.0, size=n)
    trajs = tuple(OrbitSpec(c, r, float(p), rate) for c, p in zip(centers, phases))
    return Scenario(trajs, area)


def pinned_scenario(points, area: Area | None = None) -> Scenario:
    """Stationary nodes at the given points; handy for tests and small studies."""
    pts = [(float(x), float(y)) for x, y in points]
    if area is None:
        xs, ys = zip(*pts)
        w = max(max(xs) - min(xs), 1.0)
        h = max(max(ys) - min(ys), 1.0)
        area = Area(w, h, min(xs), min(ys))
    return Scenario(tuple(OrbitSpec(p, 0.0, 0.0, Fraction(0)) for p in pts), area)
