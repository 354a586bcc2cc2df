"""Positions and pairwise distances of ANPs, plus threshold-crossing search.

Circular flight paths are evaluated in closed form from the orbit parameters
(center in polar form, orbit radius, phase angle, angular velocity).  Any
other predictable path can be supplied as a vectorised position function and
is handled numerically on a sampling grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, UnsupportedError

EPS_GEOM = 1e-6  # miles
EPS_LEVEL = 1e-6  # miles
EPS_TIME = 1e-8  # hours

# grid samples per revolution of the fastest node in a pair
SAMPLES_PER_REV = 1024
# an extremum within this fraction of level^2 of the level is a touch, not a crossing
TOUCH_REL = 1e-10


@dataclass(frozen=True)
class AngularVelocity:
    """Signed angular rate in rad/h.

    Exact rates are ``ratio`` (times pi when ``pi_factor``), which keeps the
    commensurability of a fleet decidable.  Rates built from floats carry no
    ratio and are treated as incommensurate with everything else.
    """

    ratio: Fraction | None
    pi_factor: bool = False
    approx: float | None = None

    def __post_init__(self):
        if self.ratio is None and self.approx is None:
            raise ValueError("inexact angular velocity needs a value")
        if self.ratio is not None and self.ratio == 0 and self.pi_factor:
            object.__setattr__(self, "pi_factor", False)

    @classmethod
    def exact(cls, num: int, den: int = 1, pi_factor: bool = False) -> "AngularVelocity":
        if den == 0:
            raise ValueError("zero denominator")
        return cls(Fraction(num, den), pi_factor)

    @classmethod
    def inexact(cls, value: float) -> "AngularVelocity":
        return cls(None, False, float(value))

    @property
    def is_exact(self) -> bool:
        return self.ratio is not None

    @property
    def value(self) -> float:
        if self.ratio is None:
            return self.approx
        v = float(self.ratio)
        return v * math.pi if self.pi_factor else v

    def scaled(self, k: int | Fraction | float) -> "AngularVelocity":
        if self.ratio is not None and isinstance(k, (int, Fraction)):
            return AngularVelocity(self.ratio * Fraction(k), self.pi_factor)
        return AngularVelocity.inexact(self.value * float(k))


def as_rate(w) -> AngularVelocity:
    """Coerce ints/Fractions to exact rates and floats to inexact ones."""
    if isinstance(w, AngularVelocity):
        return w
    if isinstance(w, bool):
        raise TypeError("angular velocity cannot be a bool")
    if isinstance(w, (int, Fraction)):
        return AngularVelocity(Fraction(w))
    return AngularVelocity.inexact(float(w))


@dataclass(frozen=True)
class OrbitSpec:
    """Circular flight path: center, radius, phase at t=0 and angular rate.

    The phase is stored in degrees because that is the canonical file form;
    ``beta`` gives it in radians.
    """

    center: tuple[float, float]
    orbit_radius: float
    phase_deg: float
    angular_velocity: AngularVelocity = field(default_factory=lambda: AngularVelocity(Fraction(0)))

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "angular_velocity", as_rate(self.angular_velocity))
        if not self.orbit_radius >= 0:
            raise ValueError(f"orbit radius must be >= 0, got {self.orbit_radius}")

    @classmethod
    def from_initial_position(cls, center, orbit_radius, initial_position, angular_velocity=0):
        dx = initial_position[0] - center[0]
        dy = initial_position[1] - center[1]
        off = abs(math.hypot(dx, dy) - orbit_radius)
        if off > EPS_GEOM:
            raise ValueError(
                f"initial position {tuple(initial_position)} is {off:.6g} mi off the orbit circle"
            )
        # atan2 puts the phase in the right quadrant
        phase = math.degrees(math.atan2(dy, dx)) if orbit_radius > 0 else 0.0
        return cls(center, orbit_radius, phase, angular_velocity)

    @property
    def beta(self) -> float:
        return math.radians(self.phase_deg)

    @property
    def omega(self) -> float:
        return self.angular_velocity.value

    @property
    def center_polar(self) -> tuple[float, float]:
        x, y = self.center
        return math.hypot(x, y), math.atan2(y, x)

    @property
    def initial_position(self) -> tuple[float, float]:
        x, y = self.center
        b = self.beta
        return x + self.orbit_radius * math.cos(b), y + self.orbit_radius * math.sin(b)

    def position(self, t):
        ang = self.beta + self.omega * np.asarray(t, dtype=float)
        return (
            self.center[0] + self.orbit_radius * np.cos(ang),
            self.center[1] + self.orbit_radius * np.sin(ang),
        )

    def scaled(self, k) -> "OrbitSpec":
        return OrbitSpec(self.center, self.orbit_radius, self.phase_deg,
                         self.angular_velocity.scaled(k))


@dataclass(frozen=True, eq=False)
class ParametricPath:
    """A predictable but non-circular path given by a vectorised position function.

    ``sample_step`` bounds the spacing of the crossing-search grid; pick it
    below the shortest feature of the path.
    """

    func: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    t_min: float
    t_max: float
    sample_step: float
    waypoints: tuple | None = None

    @classmethod
    def from_waypoints(cls, times: Sequence[float], points: Sequence[Sequence[float]],
                       sample_step: float | None = None) -> "ParametricPath":
        """Piecewise-linear track through timed waypoints."""
        ts = np.asarray(times, dtype=float)
        xy = np.asarray(points, dtype=float)
        if ts.ndim != 1 or len(ts) < 2 or xy.shape != (len(ts), 2):
            raise ValueError("need >= 2 times and matching (x, y) points")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("waypoint times must increase strictly")
        if sample_step is None:
            sample_step = float(np.min(np.diff(ts))) / 4

        def func(t):
            return np.interp(t, ts, xy[:, 0]), np.interp(t, ts, xy[:, 1])

        key = (tuple(ts.tolist()), tuple(map(tuple, xy.tolist())))
        return cls(func, float(ts[0]), float(ts[-1]), float(sample_step), key)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        tol = EPS_TIME
        if np.any(t < self.t_min - tol) or np.any(t > self.t_max + tol):
            raise DomainError(f"time outside path domain [{self.t_min}, {self.t_max}]")
        x, y = self.func(t)
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)

    def __eq__(self, other):
        if not isinstance(other, ParametricPath):
            return NotImplemented
        if self.waypoints is not None:
            return self.waypoints == other.waypoints and self.sample_step == other.sample_step
        return self is other

    def __hash__(self):
        return hash(self.waypoints) if self.waypoints is not None else id(self)


Trajectory = Union[OrbitSpec, ParametricPath]


@dataclass(frozen=True)
class AnalysisHorizon:
    t_start: float
    t_end: float
    periodic: bool = False
    period_length: float | None = None

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("horizon needs t_end > t_start")
        if self.periodic:
            if self.period_length is None or not self.period_length > 0:
                raise ValueError("periodic horizon needs a positive period_length")
            if self.t_end - self.t_start < self.period_length * (1 - 1e-12):
                raise ValueError("periodic horizon must span at least one period")
        elif self.period_length is not None:
            raise ValueError("period_length only applies to periodic horizons")

    @classmethod
    def one_period(cls, period: float, t_start: float = 0.0) -> "AnalysisHorizon":
        return cls(t_start, t_start + period, True, period)

    @property
    def window(self) -> tuple[float, float]:
        """The span that has to be analysed: one period, or the whole horizon."""
        if self.periodic:
            return self.t_start, self.t_start + self.period_length
        return self.t_start, self.t_end

    @property
    def span(self) -> float:
        a, b = self.window
        return b - a


# ----------------------------------------------------------------------------
# distances


def _circular_distance_sq(a: OrbitSpec, b: OrbitSpec, t):
    # Grouping keeps the result bit-identical under swapping a and b.
    rci, aci = a.center_polar
    rcj, acj = b.center_polar
    ri, rj = a.orbit_radius, b.orbit_radius
    bi, bj = a.beta, b.beta
    wi, wj = a.omega, b.omega
    t = np.asarray(t, dtype=float)
    own_i = rci * rci + ri * ri + 2 * rci * ri * np.cos(bi - aci + wi * t)
    own_j = rcj * rcj + rj * rj + 2 * rcj * rj * np.cos(bj - acj + wj * t)
    cross = (
        rci * rcj * math.cos(aci - acj)
        + ri * rj * np.cos((bi - bj) + (wi - wj) * t)
        + (rci * rj * np.cos(aci - bj - wj * t) + rcj * ri * np.cos(acj - bi - wi * t))
    )
    return own_i + own_j - 2 * cross


def distance_squared_equal_motion(a: OrbitSpec, b: OrbitSpec, t):
    """Squared distance for two orbits with the same rate and the same radius."""
    if a.omega != b.omega or a.orbit_radius != b.orbit_radius:
        raise ValueError("equal-motion form needs identical angular velocity and orbit radius")
    rci, aci = a.center_polar
    rcj, acj = b.center_polar
    r, w = a.orbit_radius, a.omega
    bi, bj = a.beta, b.beta
    t = np.asarray(t, dtype=float)
    return (
        rci**2 + r**2 + 2 * rci * r * np.cos(bi - aci + w * t)
        + rcj**2 + r**2 + 2 * rcj * r * np.cos(bj - acj + w * t)
        - 2 * (rci * rcj * math.cos(aci - acj) + r**2 * math.cos(bi - bj)
               + rci * r * np.cos(aci - bj - w * t) + rcj * r * np.cos(acj - bi - w * t))
    )


def pairwise_distance_squared(a: Trajectory, b: Trajectory, t):
    """Squared distance between two ANPs at time(s) ``t``."""
    if isinstance(a, OrbitSpec) and isinstance(b, OrbitSpec):
        return _circular_distance_sq(a, b, t)
    xa, ya = a.position(t)
    xb, yb = b.position(t)
    return (xa - xb) ** 2 + (ya - yb) ** 2


def _harmonic_arrays(rci, aci, ri, bi, rcj, acj, rj, bj):
    """Vectorized (C, A, B) for equal-rate pairs from per-node orbit constants."""
    C = rci**2 + ri**2 + rcj**2 + rj**2 - 2 * rci * rcj * np.cos(aci - acj) - 2 * ri * rj * np.cos(bi - bj)
    # cos(x + wt) = cos x cos wt - sin x sin wt ; cos(x - wt) = cos x cos wt + sin x sin wt
    kp1, xp1 = 2 * rci * ri, bi - aci
    kp2, xp2 = 2 * rcj * rj, bj - acj
    km1, xm1 = -2 * rci * rj, aci - bj
    km2, xm2 = -2 * rcj * ri, acj - bi
    A = kp1 * np.cos(xp1) + kp2 * np.cos(xp2) + km1 * np.cos(xm1) + km2 * np.cos(xm2)
    B = -kp1 * np.sin(xp1) - kp2 * np.sin(xp2) + km1 * np.sin(xm1) + km2 * np.sin(xm2)
    return C, A, B


def _orbit_constants(orbits):
    """Per-node (rc, ac, r, beta) arrays."""
    rc, ac = np.array([o.center_polar for o in orbits], dtype=float).reshape(-1, 2).T
    r = np.array([o.orbit_radius for o in orbits], dtype=float)
    beta = np.array([o.beta for o in orbits], dtype=float)
    return rc, ac, r, beta


def harmonic_form(a: OrbitSpec, b: OrbitSpec) -> tuple[float, float, float]:
    """Constants (C, A, B) with s^2(t) = C + A cos(wt) + B sin(wt).

    Only valid when both orbits share the angular velocity w.
    """
    if a.omega != b.omega:
        raise ValueError("harmonic form needs equal angular velocities")
    (rci, rcj), (aci, acj), (ri, rj), (bi, bj) = _orbit_constants([a, b])
    C, A, B = _harmonic_arrays(rci, aci, ri, bi, rcj, acj, rj, bj)
    return float(C), float(A), float(B)


# ----------------------------------------------------------------------------
# threshold crossings


class Direction(str, enum.Enum):
    FALLING = "falling"  # distance drops to the level: link comes up
    RISING = "rising"  # distance climbs past the level: link goes down


class Crossing(NamedTuple):
    time: float
    direction: Direction


@dataclass(frozen=True)
class PairCrossings:
    i: int
    j: int
    times: np.ndarray
    falling: np.ndarray  # bool per crossing
    initially_below: bool  # s(t) <= level just after the window start


def _harmonic_roots(C, A, B, omega, level, t0, span):
    """Closed-form crossings for arrays of equal-rate pairs.

    Returns (pair_index, time, falling) arrays.
    """
    C, A, B, omega = map(np.atleast_1d, (C, A, B, omega))
    M = np.hypot(A, B)
    psi = np.arctan2(B, A)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (level * level - C) / M
    scale = np.maximum(np.abs(C), level * level) + 1.0
    moving = (omega != 0) & (M > 1e-13 * scale)
    # the extremum must clear the level by more than rounding noise
    ok = moving & (M - np.abs(level * level - C) > TOUCH_REL * scale)
    idx = np.nonzero(ok)[0]
    if len(idx) == 0:
        return np.empty(0, int), np.empty(0), np.empty(0, bool)
    theta0 = np.arccos(c[idx])
    w = omega[idx]
    p = 2 * np.pi / np.abs(w)
    reps = np.maximum(np.ceil(span / p - 1e-9).astype(int), 1)
    out_idx, out_t, out_fall = [], [], []
    for sign in (1.0, -1.0):
        # s^2 - level^2 = M cos(w t - psi) - M c ; derivative -M w sin(w t - psi)
        phase = psi[idx] + sign * theta0
        falling = (sign * np.sign(w)) > 0
        base = np.mod(phase / w - t0, p)
        base = np.where(p - base < 1e-15 * p, 0.0, base)
        for k in range(int(reps.max())):
            sel = k < reps
            tk = t0 + base[sel] + k * p[sel]
            keep = tk < t0 + span
            out_idx.append(idx[sel][keep])
            out_t.append(tk[keep])
            out_fall.append(np.broadcast_to(falling, idx.shape)[sel][keep])
    return np.concatenate(out_idx), np.concatenate(out_t), np.concatenate(out_fall)


def _grid_step(a: Trajectory, b: Trajectory, span: float) -> float:
    steps = [span / SAMPLES_PER_REV]
    for tr in (a, b):
        if isinstance(tr, OrbitSpec):
            if tr.omega != 0:
                steps.append(2 * math.pi / abs(tr.omega) / SAMPLES_PER_REV)
        else:
            steps.append(tr.sample_step)
    return min(steps)


def sign_change_roots(f: Callable, t0: float, t1: float, n_samples: int,
                      xtol: float = EPS_TIME * 1e-2):
    """Roots of a vectorised ``f`` on [t0, t1] where ``f <= 0`` toggles between samples.

    Returns (times, falling) where falling marks a transition into ``f <= 0``.
    """
    ts = np.linspace(t0, t1, n_samples)
    vals = np.asarray(f(ts), dtype=float)
    below = vals <= 0
    flips = np.nonzero(below[1:] != below[:-1])[0]
    times, falling = [], []
    for k in flips:
        a, b = ts[k], ts[k + 1]
        root = brentq(lambda x: float(f(np.array([x]))[0]), a, b, xtol=xtol, rtol=4 * np.finfo(float).eps)
        times.append(root)
        falling.append(bool(below[k + 1]))
    return np.array(times, dtype=float), np.array(falling, dtype=bool), bool(below[0])


def _drop_touches(f, times, falling, tol):
    """Remove opposite-direction root pairs that only graze the level in between."""
    keep = np.ones(len(times), dtype=bool)
    k = 0
    while k + 1 < len(times):
        if falling[k] != falling[k + 1]:
            mid = 0.5 * (times[k] + times[k + 1])
            if abs(float(f(np.array([mid]))[0])) <= tol:
                keep[k] = keep[k + 1] = False
                k += 2
                continue
        k += 1
    return times[keep], falling[keep]


def _numeric_pair(a, b, level, t0, span, periodic):
    step = _grid_step(a, b, span)
    n = max(int(math.ceil(span / step)) + 1, 3)
    lv = level * level

    def f(t):
        return pairwise_distance_squared(a, b, t) - lv

    times, falling, first_below = sign_change_roots(f, t0, t0 + span, n)
    times, falling = _drop_touches(f, times, falling, TOUCH_REL * (lv + 1.0))
    if periodic and len(times):
        # a root landing on the period end is the same event as one at the start
        wrap = times >= t0 + span - EPS_TIME * 1e-3
        times = np.where(wrap, t0, times)
        order = np.argsort(times, kind="stable")
        times, falling = times[order], falling[order]
    return times, falling, first_below


@dataclass(frozen=True)
class CrossingTable:
    """Crossings of many pairs in flat arrays.

    Pair ``k`` is ``(I[k], J[k])``; its crossings are ``times[bounds[k]:bounds[k+1]]``
    in time order, with matching ``falling`` flags.
    """
    I: np.ndarray
    J: np.ndarray
    bounds: np.ndarray
    times: np.ndarray
    falling: np.ndarray
    initially_below: np.ndarray  # bool per pair


def crossing_table(trajectories: Sequence[Trajectory], level: float,
                   horizon: AnalysisHorizon, pairs=None) -> CrossingTable:
    """Crossings of ``level`` by every pairwise distance over the analysis window.

    Equal-rate circular pairs are solved in closed form, all at once; any
    other pair is sampled and refined numerically.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    t0, t1 = horizon.window
    span = t1 - t0
    n = len(trajectories)
    if pairs is None:
        I, J = np.triu_indices(n, 1)
    else:
        pairs = list(pairs)
        I = np.array([p[0] for p in pairs], dtype=int)
        J = np.array([p[1] for p in pairs], dtype=int)
    circular = np.array([isinstance(tr, OrbitSpec) for tr in trajectories], dtype=bool)
    omega = np.array([tr.omega if c else np.nan for tr, c in zip(trajectories, circular)])
    is_closed = circular[I] & circular[J] & (omega[I] == omega[J])

    below = np.zeros(len(I), dtype=bool)
    pidx, times, falling = [np.empty(0, int)], [np.empty(0)], [np.empty(0, bool)]
    closed = np.nonzero(is_closed)[0]
    if len(closed):
        cI, cJ = I[closed], J[closed]
        circ_idx = np.nonzero(circular)[0]
        consts = np.zeros((4, n))
        consts[:, circ_idx] = _orbit_constants([trajectories[k] for k in circ_idx])
        rc, ac, r, beta = consts
        C, A, B = _harmonic_arrays(rc[cI], ac[cI], r[cI], beta[cI], rc[cJ], ac[cJ], r[cJ], beta[cJ])
        w = omega[cI]
        k, t, f = _harmonic_roots(C, A, B, w, level, t0, span)
        below[closed] = C + A * np.cos(w * t0) + B * np.sin(w * t0) <= level * level
        pidx.append(closed[k]), times.append(t), falling.append(f)
    for k in np.nonzero(~is_closed)[0].tolist():
        t, f, first_below = _numeric_pair(
            trajectories[I[k]], trajectories[J[k]], level, t0, span, horizon.periodic)
        below[k] = first_below
        pidx.append(np.full(len(t), k)), times.append(t), falling.append(f)
    pidx, times, falling = np.concatenate(pidx), np.concatenate(times), np.concatenate(falling)
    order = np.lexsort((times, pidx))
    pidx, times, falling = pidx[order], times[order], falling[order]
    bounds = np.searchsorted(pidx, np.arange(len(I) + 1))
    # a pair's state at the window start is fixed by its first crossing when it has one
    has = bounds[1:] > bounds[:-1]
    below[has] = ~falling[bounds[:-1][has]]
    return CrossingTable(I, J, bounds, times, falling, below)


def all_pair_crossings(trajectories: Sequence[Trajectory], level: float,
                       horizon: AnalysisHorizon, pairs=None) -> list[PairCrossings]:
    """Per-pair view of :func:`crossing_table`, in the order of ``pairs``."""
    tab = crossing_table(trajectories, level, horizon, pairs)
    b = tab.bounds.tolist()
    return [PairCrossings(i, j, tab.times[b[k]:b[k + 1]], tab.falling[b[k]:b[k + 1]], init)
            for k, (i, j, init) in enumerate(zip(tab.I.tolist(), tab.J.tolist(),
                                                   tab.initially_below.tolist()))]


def threshold_crossings(a: Trajectory, b: Trajectory, level: float,
                        horizon: AnalysisHorizon) -> list[Crossing]:
    """Sorted times in the analysis window where s_ab(t) crosses ``level``.

    ``FALLING`` crossings bring the link up, ``RISING`` ones take it down.
    Tangential touches are not reported.
    """
    pc = all_pair_crossings([a, b], level, horizon)[0]
    return [Crossing(float(t), Direction.FALLING if f else Direction.RISING)
            for t, f in zip(pc.times, pc.falling)]


def common_period(trajectories: Sequence[Trajectory]) -> float | None:
    """Least common period of a fleet of circular paths, or None if there is none.

    Stationary nodes do not constrain the period; a fleet with no moving
    node has no period either.
    """
    rates = []
    for tr in trajectories:
        if not isinstance(tr, OrbitSpec):
            raise UnsupportedError("common_period needs circular trajectories; give an explicit horizon")
        w = tr.angular_velocity
        if w.is_exact:
            if w.ratio != 0:
                rates.append(w)
        elif w.value != 0:
            return None
    if not rates:
        return None
    if len({w.pi_factor for w in rates}) > 1:
        return None
    fracs = [abs(w.ratio) for w in rates]
    num = reduce(math.gcd, (f.numerator for f in fracs))
    den = reduce(lambda x, y: x * y // math.gcd(x, y), (f.denominator for f in fracs))
    g = Fraction(num, den)
    unit = math.pi if rates[0].pi_factor else 1.0
    return 2 * math.pi / (float(g) * unit)
