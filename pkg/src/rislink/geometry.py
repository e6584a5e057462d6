"""Planar factory geometry: occlusion, beam cones, coverage and conflict extraction.

Everything here is pure and operates on immutable inputs, so it is safe to
call from parallel trial workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Point2D",
    "Obstacle",
    "RisMount",
    "CoverageMap",
    "ConflictSets",
    "los_blocked",
    "los_blocked_batch",
    "footprint_diameter",
    "in_beam_cone",
    "angle_between",
    "build_coverage",
    "build_conflicts",
]


@dataclass(frozen=True)
class Point2D:
    """A position on the factory floor, in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def distance_to(self, other: "Point2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned rectangular blocker (a machine on the floor)."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if self.xmin > self.xmax or self.ymin > self.ymax:
            raise ValueError("obstacle min corner must be <= max corner componentwise")

    def contains(self, p: Point2D) -> bool:
        return self.xmin <= p.x <= self.xmax and self.ymin <= p.y <= self.ymax


@dataclass(frozen=True)
class RisMount:
    """A wall-mounted reflecting surface with an inward field of view.

    ``normal`` is the unit vector pointing into the room; a robot is inside
    the field of view when the angle between the normal and the direction to
    the robot is at most ``fov_half_angle``.
    """

    position: Point2D
    normal: tuple[float, float]
    fov_half_angle: float

    def __post_init__(self):
        nx, ny = self.normal
        norm = math.hypot(nx, ny)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"mount normal must be unit length, got |n|={norm}")
        if not (0.0 < self.fov_half_angle <= math.pi / 2):
            raise ValueError("fov_half_angle must be in (0, pi/2]")

    def sees(self, p: Point2D) -> bool:
        """Field-of-view test only; occlusion is checked separately."""
        dx, dy = p.x - self.position.x, p.y - self.position.y
        d = math.hypot(dx, dy)
        if d == 0.0:
            return False
        cos_a = (dx * self.normal[0] + dy * self.normal[1]) / d
        cos_a = max(-1.0, min(1.0, cos_a))
        return math.acos(cos_a) <= self.fov_half_angle + 1e-12


def los_blocked(p: Point2D, q: Point2D, obstacles) -> bool:
    """True iff segment pq intersects any obstacle, boundary contact included.

    Slab clipping against the closed rectangle; grazing a corner or running
    along an edge counts as blocked (conservative, deterministic).  Endpoints
    are ordered canonically first so the test is exactly symmetric.
    """
    if p.x == q.x and p.y == q.y:
        raise ValueError("los_blocked requires two distinct points")
    if (q.x, q.y) < (p.x, p.y):
        p, q = q, p
    dx = q.x - p.x
    dy = q.y - p.y
    for ob in obstacles:
        t0, t1 = 0.0, 1.0
        ok = True
        for delta, lo, hi, start in ((dx, ob.xmin, ob.xmax, p.x), (dy, ob.ymin, ob.ymax, p.y)):
            if delta == 0.0:
                if start < lo or start > hi:
                    ok = False
                    break
            else:
                ta = (lo - start) / delta
                tb = (hi - start) / delta
                if ta > tb:
                    ta, tb = tb, ta
                t0 = max(t0, ta)
                t1 = min(t1, tb)
                if t0 > t1:
                    ok = False
                    break
        if ok:
            return True
    return False


def los_blocked_batch(starts: np.ndarray, ends: np.ndarray, obstacles) -> np.ndarray:
    """Vectorized ``los_blocked`` over row-aligned (M, 2) endpoint arrays.

    Agrees with the scalar routine on every input (including boundary
    grazing); degenerate zero-length rows are reported unblocked.
    """
    a = np.asarray(starts, dtype=float)
    b = np.asarray(ends, dtype=float)
    # canonical endpoint order per row, matching the scalar routine
    swap = (b[:, 0] < a[:, 0]) | ((b[:, 0] == a[:, 0]) & (b[:, 1] < a[:, 1]))
    starts = np.where(swap[:, None], b, a)
    ends = np.where(swap[:, None], a, b)
    delta = ends - starts
    m = starts.shape[0]
    blocked = np.zeros(m, dtype=bool)
    degenerate = (delta[:, 0] == 0.0) & (delta[:, 1] == 0.0)
    for ob in obstacles:
        t0 = np.zeros(m)
        t1 = np.ones(m)
        ok = np.ones(m, dtype=bool)
        for axis, lo, hi in ((0, ob.xmin, ob.xmax), (1, ob.ymin, ob.ymax)):
            d = delta[:, axis]
            s = starts[:, axis]
            parallel = d == 0.0
            ok &= ~parallel | ((s >= lo) & (s <= hi))
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                ta = (lo - s) / d
                tb = (hi - s) / d
            lo_t = np.minimum(ta, tb)
            hi_t = np.maximum(ta, tb)
            t0 = np.where(parallel, t0, np.maximum(t0, lo_t))
            t1 = np.where(parallel, t1, np.minimum(t1, hi_t))
        blocked |= ok & (t0 <= t1)
    return blocked & ~degenerate


def footprint_diameter(theta: float, d: float) -> float:
    """Cross-section diameter of a conical beam of width ``theta`` at range ``d``."""
    if not 0.0 < theta < math.pi:
        raise ValueError("beamwidth must be in (0, pi)")
    if d < 0.0:
        raise ValueError("distance must be non-negative")
    return 2.0 * math.tan(theta / 2.0) * d


def angle_between(ux: float, uy: float, vx: float, vy: float) -> float:
    """Unsigned angle between two nonzero vectors, in [0, pi]."""
    nu = math.hypot(ux, uy)
    nv = math.hypot(vx, vy)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("angle undefined for zero vector")
    c = (ux * vx + uy * vy) / (nu * nv)
    return math.acos(max(-1.0, min(1.0, c)))


def in_beam_cone(origin: Point2D, target: Point2D, probe: Point2D, theta: float, obstacles) -> bool:
    """Does ``probe`` receive the beam transmitted from ``origin`` toward ``target``?

    True iff probe lies within theta/2 of the beam axis, on the target side of
    the origin, with unobstructed sight from the origin.
    """
    if origin.x == target.x and origin.y == target.y:
        raise ValueError("beam axis undefined: origin == target")
    ax, ay = target.x - origin.x, target.y - origin.y
    px, py = probe.x - origin.x, probe.y - origin.y
    na = math.hypot(ax, ay)
    np_ = math.hypot(px, py)
    if np_ == 0.0:
        return False
    # normalized components avoid underflow on near-degenerate geometry
    ax, ay = ax / na, ay / na
    px, py = px / np_, py / np_
    if px * ax + py * ay <= 0.0:
        return False
    if angle_between(ax, ay, px, py) > theta / 2.0 + 1e-12:
        return False
    return not los_blocked(origin, probe, obstacles)


@dataclass
class CoverageMap:
    """Per-slot LoS coverage sets.

    ``bs_robot[n]`` holds (b, r) pairs with clear sight, ``ris_robot[n]``
    holds (i, r) pairs that are additionally inside the mount's field of view
    and whose mount has at least one covering BS, and ``bs_ris[n]`` holds
    (b, i) pairs.  ``serving_bs[n][i]`` is the nearest covering BS of mount i
    at slot n (the BS whose signal the mount redirects), or None.
    """

    n_slots: int
    bs_robot: list = field(default_factory=list)
    ris_robot: list = field(default_factory=list)
    bs_ris: list = field(default_factory=list)
    serving_bs: list = field(default_factory=list)

    def ris_usable(self, i: int, n: int) -> bool:
        return self.serving_bs[n][i] is not None


@dataclass
class ConflictSets:
    """Unordered robot pairs that share an arrival angle at a mount.

    ``pairs[n][i]`` is a sorted list of (r, r') tuples with r < r'; at most
    one robot of each pair may be scheduled through mount i in slot n.
    """

    pairs: list

    def at(self, i: int, n: int):
        return self.pairs[n][i]


def build_coverage(scenario) -> CoverageMap:
    """Compute all coverage sets for every slot of a scenario.

    A BS covers a robot with clear sight; a mount covers a robot with clear
    sight inside its field of view, provided the mount itself is covered by
    at least one BS (its serving BS is the nearest covering one).
    """
    obstacles = scenario.obstacles
    n_slots = scenario.config.n_slots
    n_robots = scenario.config.n_robots
    n_bs = len(scenario.bs_positions)
    n_ris = len(scenario.ris_mounts)
    cov = CoverageMap(n_slots=n_slots)

    bs_xy = np.array([[p.x, p.y] for p in scenario.bs_positions], dtype=float).reshape(n_bs, 2)
    ris_xy = np.array([[m.position.x, m.position.y] for m in scenario.ris_mounts], dtype=float).reshape(n_ris, 2)

    # BS-RIS sight is static; computed once and replicated per slot.
    static_bs_ris = set()
    if n_bs and n_ris:
        a = np.repeat(bs_xy, n_ris, axis=0)
        b = np.tile(ris_xy, (n_bs, 1))
        hit = los_blocked_batch(a, b, obstacles).reshape(n_bs, n_ris)
        same = (a == b).all(axis=1).reshape(n_bs, n_ris)
        for bb in range(n_bs):
            for ii in range(n_ris):
                if not hit[bb, ii] and not same[bb, ii]:
                    static_bs_ris.add((bb, ii))
    static_serving = []
    for i, mount in enumerate(scenario.ris_mounts):
        covering = [b for b in range(n_bs) if (b, i) in static_bs_ris]
        if covering:
            static_serving.append(
                min(covering, key=lambda b: (scenario.bs_positions[b].distance_to(mount.position), b))
            )
        else:
            static_serving.append(None)

    normals = np.array([m.normal for m in scenario.ris_mounts], dtype=float).reshape(n_ris, 2)
    fov = np.array([m.fov_half_angle for m in scenario.ris_mounts], dtype=float)
    usable = np.array([s is not None for s in static_serving], dtype=bool)

    for n in range(n_slots):
        bs_robot = set()
        ris_robot = set()
        if n_robots:
            pos = scenario.positions_at(n)  # (R, 2)
            if n_bs:
                a = np.repeat(bs_xy, n_robots, axis=0)
                t = np.tile(pos, (n_bs, 1))
                hit = los_blocked_batch(a, t, obstacles).reshape(n_bs, n_robots)
                same = (a == t).all(axis=1).reshape(n_bs, n_robots)
                for b in range(n_bs):
                    for r in range(n_robots):
                        if not hit[b, r] and not same[b, r]:
                            bs_robot.add((b, r))
            if n_ris:
                vec = pos[None, :, :] - ris_xy[:, None, :]  # (I, R, 2)
                dist = np.linalg.norm(vec, axis=2)
                with np.errstate(divide="ignore", invalid="ignore"):
                    cos_a = (vec * normals[:, None, :]).sum(axis=2) / dist
                in_fov = (dist > 0) & (np.arccos(np.clip(cos_a, -1.0, 1.0)) <= fov[:, None] + 1e-12)
                a = np.repeat(ris_xy, n_robots, axis=0)
                t = np.tile(pos, (n_ris, 1))
                hit = los_blocked_batch(a, t, obstacles).reshape(n_ris, n_robots)
                for i in range(n_ris):
                    if not usable[i]:
                        continue
                    for r in range(n_robots):
                        if in_fov[i, r] and not hit[i, r]:
                            ris_robot.add((i, r))
        cov.bs_robot.append(bs_robot)
        cov.ris_robot.append(ris_robot)
        cov.bs_ris.append(set(static_bs_ris))
        cov.serving_bs.append(list(static_serving))
    return cov


def build_conflicts(scenario, coverage: CoverageMap, conflict_angle: float | None = None) -> ConflictSets:
    """Extract robot pairs whose directions from a mount are angularly inseparable.

    Pairs are emitted when both robots are covered by the mount and the
    separation of the two mount-to-robot directions is at most
    ``conflict_angle`` (the beamwidth unless overridden).
    """
    if conflict_angle is None:
        conflict_angle = scenario.config.phys.theta
    pairs = []
    for n in range(scenario.config.n_slots):
        per_ris = []
        pos = scenario.positions_at(n) if scenario.config.n_robots else None
        for i, mount in enumerate(scenario.ris_mounts):
            covered = sorted(r for (ii, r) in coverage.ris_robot[n] if ii == i)
            found = []
            if len(covered) > 1:
                vec = pos[covered] - np.array([mount.position.x, mount.position.y])
                unit = vec / np.linalg.norm(vec, axis=1, keepdims=True)
                sep = np.arccos(np.clip(unit @ unit.T, -1.0, 1.0))
                for a in range(len(covered)):
                    for b in range(a + 1, len(covered)):
                        if sep[a, b] <= conflict_angle + 1e-12:
                            found.append((covered[a], covered[b]))
            per_ris.append(found)
        pairs.append(per_ris)
    return ConflictSets(pairs=pairs)
