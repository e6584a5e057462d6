"""Seeded factory scenario generation, derived-table precomputation, and file I/O.

``generate`` is a pure function of (config, seed): the same pair always yields
the same scenario, byte-for-byte after serialization.  ``precompute`` turns a
scenario into the coverage/conflict/power tables every solver consumes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import channel, geometry
from .channel import LinkPowerTables, PhysParams
from .geometry import ConflictSets, CoverageMap, Obstacle, Point2D, RisMount

SCHEMA_NAME = "rislink-scenario"
SCHEMA_VERSION = 1

PLACEMENT_RETRIES = 1000
STEP_RETRIES = 500
DIRECTION_HOLD_SLOTS = 5  # slots a robot keeps its heading before redrawing

__all__ = [
    "ScenarioConfig",
    "Scenario",
    "DerivedTables",
    "GenerationError",
    "ScenarioFormatError",
    "generate",
    "precompute",
    "serialize",
    "deserialize",
    "strip_ris",
]


class GenerationError(RuntimeError):
    """Rejection sampling exhausted its retry budget (overcrowded floor)."""


class ScenarioFormatError(ValueError):
    """A scenario file failed schema validation."""


@dataclass(frozen=True)
class ScenarioConfig:
    floor_width: float = 40.0
    floor_height: float = 40.0
    n_bs: int = 2
    n_ris: int = 8
    n_robots: int = 6
    n_slots: int = 50
    slot_duration: float = 1.0      # seconds; metadata only, enters no equation
    robot_step: float = 1.0         # meters advanced per slot
    n_obstacles: int = 6
    obstacle_size: tuple[float, float] = (3.0, 6.0)
    n_ring_obstacles: int = 0       # machines ringed around the floor center
    ring_radii: tuple[float, float] = (4.5, 7.5)
    ring_size: tuple[float, float] | None = None  # ring machine sides; obstacle_size if None
    bs_clearance: float = 4.0       # obstacles keep this distance from BS masts
    wall_clearance: float = 0.0     # obstacles keep this distance from the walls
    ris_placement: str = "stratified"  # "stratified" or "uniform" wall positions
    phys: PhysParams = field(default_factory=PhysParams)
    psi_range: tuple[float, float] = (9.0, 10.0)
    k_range: tuple[int, int] = (14, 15)
    qos_draw: str = "integer"       # "integer" or "uniform"
    d_reconfig: int = 2             # slots a retargeted surface stays unavailable
    u_override: int | None = None   # concurrent robots per surface; derived from E if None
    ris_fov_half_angle: float = math.radians(60.0)
    conflict_angle: float | None = None  # arrival-angle separation threshold; beamwidth if None
    sinr_threshold_db: bool = False  # interpret psi values as dB instead of linear
    bs_positions: tuple | None = None  # explicit (x, y) pairs; quadrant-center default if None
    seed: int = 0

    def __post_init__(self):
        if self.floor_width <= 0 or self.floor_height <= 0:
            raise ValueError("floor dimensions must be positive")
        for name in ("n_bs", "n_ris", "n_robots", "n_obstacles"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n_slots < 1:
            raise ValueError("n_slots must be >= 1")
        if self.psi_range[0] > self.psi_range[1] or self.k_range[0] > self.k_range[1]:
            raise ValueError("psi_range and k_range must be non-empty")
        if self.k_range[0] < 1:
            raise ValueError("outage windows must be >= 1 slot")
        if self.qos_draw not in ("integer", "uniform"):
            raise ValueError("qos_draw must be 'integer' or 'uniform'")
        if self.ris_placement not in ("stratified", "uniform"):
            raise ValueError("ris_placement must be 'stratified' or 'uniform'")
        if self.bs_clearance < 0 or self.wall_clearance < 0:
            raise ValueError("clearances must be >= 0")
        if self.d_reconfig < 1:
            raise ValueError("d_reconfig must be >= 1")
        if self.u_override is not None:
            cap = channel.max_concurrent(self.phys.n_elements)
            if not 1 <= self.u_override <= cap:
                raise ValueError(f"u_override must be in [1, {cap}] for E={self.phys.n_elements}")
        if self.bs_positions is not None and len(self.bs_positions) != self.n_bs:
            raise ValueError("bs_positions length must equal n_bs")


@dataclass
class Scenario:
    config: ScenarioConfig
    bs_positions: list  # of Point2D
    ris_mounts: list    # of RisMount
    obstacles: list     # of Obstacle
    trajectories: np.ndarray  # (n_robots, n_slots, 2) meters
    psi: np.ndarray     # per-robot SINR threshold as configured (linear or dB)
    k_out: np.ndarray   # per-robot consecutive-outage budget, slots

    def robot_position(self, r: int, n: int) -> Point2D:
        x, y = self.trajectories[r, n]
        return Point2D(float(x), float(y))

    def positions_at(self, n: int) -> np.ndarray:
        return self.trajectories[:, n, :]

    def psi_linear(self) -> np.ndarray:
        if self.config.sinr_threshold_db:
            return 10.0 ** (self.psi / 10.0)
        return self.psi.astype(float)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.config == other.config
            and self.bs_positions == other.bs_positions
            and self.ris_mounts == other.ris_mounts
            and self.obstacles == other.obstacles
            and np.array_equal(self.trajectories, other.trajectories)
            and np.array_equal(self.psi, other.psi)
            and np.array_equal(self.k_out, other.k_out)
        )


@dataclass
class DerivedTables:
    """Everything the optimizers need, precomputed once per scenario."""

    coverage: CoverageMap
    conflicts: ConflictSets
    tables: LinkPowerTables
    u_effective: int
    psi_linear: np.ndarray

    @property
    def noise(self) -> float:
        return self.tables.noise


def _default_bs_positions(config: ScenarioConfig, rng) -> list:
    """Central mast pair first, quadrant centers after, random beyond that."""
    w, h = config.floor_width, config.floor_height
    anchors = [
        Point2D(0.45 * w, 0.5 * h),
        Point2D(0.55 * w, 0.5 * h),
        Point2D(w / 4, h / 4),
        Point2D(3 * w / 4, 3 * h / 4),
    ]
    out = []
    for b in range(config.n_bs):
        if b < len(anchors):
            out.append(anchors[b])
        else:
            out.append(Point2D(rng.uniform(0.05 * w, 0.95 * w), rng.uniform(0.05 * h, 0.95 * h)))
    return out


def _rect_distance(ob: Obstacle, p: Point2D) -> float:
    dx = max(ob.xmin - p.x, 0.0, p.x - ob.xmax)
    dy = max(ob.ymin - p.y, 0.0, p.y - ob.ymax)
    return math.hypot(dx, dy)


def _draw_obstacles(config: ScenarioConfig, rng, keep_clear: list) -> list:
    """Ring machines around the floor center first, then scattered ones."""
    w, h = config.floor_width, config.floor_height
    lo, hi = config.obstacle_size
    margin = max(config.wall_clearance, 1e-6)
    obstacles = []

    def admissible(ob: Obstacle) -> bool:
        if ob.xmin < margin or ob.ymin < margin:
            return False
        if ob.xmax > w - margin or ob.ymax > h - margin:
            return False
        return all(_rect_distance(ob, p) >= config.bs_clearance for p in keep_clear)

    ring_lo, ring_hi = config.ring_size if config.ring_size is not None else (lo, hi)
    for _ in range(config.n_ring_obstacles):
        for _ in range(PLACEMENT_RETRIES):
            ow = rng.uniform(ring_lo, ring_hi)
            oh = rng.uniform(ring_lo, ring_hi)
            rho = rng.uniform(*config.ring_radii)
            phi = rng.uniform(0.0, 2 * math.pi)
            cx = w / 2 + rho * math.cos(phi)
            cy = h / 2 + rho * math.sin(phi)
            ob = Obstacle(cx - ow / 2, cy - oh / 2, cx + ow / 2, cy + oh / 2)
            if admissible(ob):
                obstacles.append(ob)
                break
        else:
            raise GenerationError("could not place ring obstacle")

    for _ in range(config.n_obstacles):
        for _ in range(PLACEMENT_RETRIES):
            ow = rng.uniform(lo, hi)
            oh = rng.uniform(lo, hi)
            if ow >= w - 2 * margin or oh >= h - 2 * margin:
                raise GenerationError("obstacle size exceeds floor dimensions")
            cx = rng.uniform(ow / 2 + margin, w - ow / 2 - margin)
            cy = rng.uniform(oh / 2 + margin, h - oh / 2 - margin)
            ob = Obstacle(cx - ow / 2, cy - oh / 2, cx + ow / 2, cy + oh / 2)
            if admissible(ob):
                obstacles.append(ob)
                break
        else:
            raise GenerationError("could not place obstacle clear of base stations")
    return obstacles


def _draw_ris_mounts(config: ScenarioConfig, rng) -> list:
    w, h = config.floor_width, config.floor_height
    perimeter = 2 * (w + h)
    mounts = []
    for idx in range(config.n_ris):
        if config.ris_placement == "stratified":
            # one mount per equal perimeter arc, jittered inside its arc
            arc = perimeter / config.n_ris
            s = (idx + rng.uniform(0.0, 1.0)) * arc
        else:
            s = rng.uniform(0.0, perimeter)
        if s < w:
            pos, normal = Point2D(s, 0.0), (0.0, 1.0)
        elif s < w + h:
            pos, normal = Point2D(w, s - w), (-1.0, 0.0)
        elif s < 2 * w + h:
            pos, normal = Point2D(2 * w + h - s, h), (0.0, -1.0)
        else:
            pos, normal = Point2D(0.0, s - 2 * w - h), (1.0, 0.0)
        mounts.append(RisMount(pos, normal, config.ris_fov_half_angle))
    return mounts


def _inside_obstacle(x: float, y: float, obstacles) -> bool:
    return any(ob.xmin <= x <= ob.xmax and ob.ymin <= y <= ob.ymax for ob in obstacles)


def _draw_start(config: ScenarioConfig, rng, obstacles) -> tuple[float, float]:
    w, h = config.floor_width, config.floor_height
    for _ in range(PLACEMENT_RETRIES):
        x = rng.uniform(0.0, w)
        y = rng.uniform(0.0, h)
        if not _inside_obstacle(x, y, obstacles):
            return min(max(x, 1e-9), w - 1e-9), min(max(y, 1e-9), h - 1e-9)
    raise GenerationError("could not place robot start outside obstacles")


def _walk(config: ScenarioConfig, rng, obstacles, start) -> np.ndarray:
    """One robot trajectory: heading held for DIRECTION_HOLD_SLOTS steps,
    reflected at walls, redrawn on obstacle contact."""
    w, h = config.floor_width, config.floor_height
    eps = 1e-9
    pos = np.empty((config.n_slots, 2))
    pos[0] = start
    x, y = start
    dx = dy = 0.0
    for n in range(1, config.n_slots):
        if (n - 1) % DIRECTION_HOLD_SLOTS == 0:
            phi = rng.uniform(0.0, 2 * math.pi)
            dx, dy = math.cos(phi), math.sin(phi)
        for attempt in range(STEP_RETRIES):
            nx = x + config.robot_step * dx
            ny = y + config.robot_step * dy
            if nx < 0.0:
                nx = -nx
                dx = -dx
            elif nx > w:
                nx = 2 * w - nx
                dx = -dx
            if ny < 0.0:
                ny = -ny
                dy = -dy
            elif ny > h:
                ny = 2 * h - ny
                dy = -dy
            nx = min(max(nx, eps), w - eps)
            ny = min(max(ny, eps), h - eps)
            if not _inside_obstacle(nx, ny, obstacles):
                x, y = nx, ny
                break
            phi = rng.uniform(0.0, 2 * math.pi)
            dx, dy = math.cos(phi), math.sin(phi)
        else:
            raise GenerationError("robot trapped by obstacles; no valid step found")
        pos[n] = (x, y)
    return pos


def generate(config: ScenarioConfig, seed: int | None = None) -> Scenario:
    """Draw placements, trajectories, and per-robot QoS for one random scenario."""
    if seed is None:
        seed = config.seed
    rng = np.random.default_rng(seed)

    if config.bs_positions is not None:
        bs_positions = [Point2D(float(x), float(y)) for (x, y) in config.bs_positions]
    else:
        bs_positions = _default_bs_positions(config, rng)
    obstacles = _draw_obstacles(config, rng, keep_clear=bs_positions)
    ris_mounts = _draw_ris_mounts(config, rng)

    trajectories = np.zeros((config.n_robots, config.n_slots, 2))
    for r in range(config.n_robots):
        start = _draw_start(config, rng, obstacles)
        trajectories[r] = _walk(config, rng, obstacles, start)

    if config.qos_draw == "integer":
        psi = rng.integers(int(config.psi_range[0]), int(config.psi_range[1]) + 1,
                           size=config.n_robots).astype(float)
        k_out = rng.integers(config.k_range[0], config.k_range[1] + 1, size=config.n_robots)
    else:
        psi = rng.uniform(config.psi_range[0], config.psi_range[1], size=config.n_robots)
        k_out = np.round(rng.uniform(config.k_range[0], config.k_range[1],
                                     size=config.n_robots)).astype(int)

    return Scenario(
        config=config,
        bs_positions=bs_positions,
        ris_mounts=ris_mounts,
        obstacles=obstacles,
        trajectories=trajectories,
        psi=psi,
        k_out=k_out.astype(int),
    )


def precompute(scenario: Scenario) -> DerivedTables:
    """Build coverage, conflicts, and all link-power tables for a scenario."""
    cfg = scenario.config
    phys = cfg.phys
    coverage = geometry.build_coverage(scenario)
    conflicts = geometry.build_conflicts(scenario, coverage, cfg.conflict_angle)

    n_n, n_b, n_i, n_r = cfg.n_slots, cfg.n_bs, cfg.n_ris, cfg.n_robots
    gain = channel.antenna_gain(phys.theta)
    noise = channel.noise_power(phys.temperature, phys.bandwidth, phys.k)

    p_direct = np.zeros((n_n, n_b, n_r))
    p_ris = np.zeros((n_n, n_i, n_r))
    xi_bs = np.zeros((n_n, n_b, n_r, n_r))
    xi_ris = np.zeros((n_n, n_i, n_r, n_r))

    bs_xy = np.array([[p.x, p.y] for p in scenario.bs_positions], dtype=float).reshape(n_b, 2)
    ris_xy = np.array([[m.position.x, m.position.y] for m in scenario.ris_mounts], dtype=float).reshape(n_i, 2)
    half_theta = phys.theta / 2.0

    for n in range(n_n):
        pos = scenario.positions_at(n) if n_r else np.zeros((0, 2))
        cov_bs = np.zeros((n_b, n_r), dtype=bool)
        for (b, r) in coverage.bs_robot[n]:
            cov_bs[b, r] = True
        cov_ris = np.zeros((n_i, n_r), dtype=bool)
        for (i, r) in coverage.ris_robot[n]:
            cov_ris[i, r] = True

        if n_b and n_r:
            vec_b = pos[None, :, :] - bs_xy[:, None, :]          # (B, R, 2)
            dist_b = np.linalg.norm(vec_b, axis=2)
            amp = phys.c / (4.0 * math.pi * phys.freq * np.maximum(dist_b, channel.MIN_DISTANCE))
            pwr_b = phys.p_bs * amp * amp                        # gainless power from b at r
            p_direct[n] = np.where(cov_bs, pwr_b, 0.0)
            # Beam-cone gating: victim r hears the beam b->rp when its
            # direction is within theta/2 of the axis with clear sight.
            with np.errstate(divide="ignore", invalid="ignore"):
                unit = vec_b / dist_b[:, :, None]
                cosm = np.einsum("brk,bsk->brs", unit, unit)     # (B, rp, r)
                dots = np.einsum("brk,bsk->brs", vec_b, vec_b)
                in_cone = (np.arccos(np.clip(cosm, -1, 1)) <= half_theta + 1e-12) & (dots > 0)
            sight = cov_bs  # LoS(b, r) holds exactly when covered
            gate = cov_bs[:, :, None] & in_cone & sight[:, None, :]
            np.einsum("brr->br", gate)[:] = False                # no self term
            xi_bs[n] = np.where(gate, (gain * gain) * pwr_b[:, None, :], 0.0)

        if n_i and n_r:
            vec_i = pos[None, :, :] - ris_xy[:, None, :]
            dist_i = np.linalg.norm(vec_i, axis=2)
            amp2 = phys.c / (4.0 * math.pi * phys.freq * np.maximum(dist_i, channel.MIN_DISTANCE))
            feed = np.zeros(n_i)
            for i in range(n_i):
                serving = coverage.serving_bs[n][i]
                if serving is None:
                    continue
                d1 = scenario.bs_positions[serving].distance_to(scenario.ris_mounts[i].position)
                feed[i] = phys.c / (4.0 * math.pi * phys.freq * max(d1, channel.MIN_DISTANCE))
            cascade = feed[:, None] * phys.n_elements * amp2
            pwr_i = phys.p_bs * cascade * cascade
            p_ris[n] = np.where(cov_ris, pwr_i, 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                unit = vec_i / dist_i[:, :, None]
                cosm = np.einsum("irk,isk->irs", unit, unit)
                dots = np.einsum("irk,isk->irs", vec_i, vec_i)
                in_cone = (np.arccos(np.clip(cosm, -1, 1)) <= half_theta + 1e-12) & (dots > 0)
            a = np.repeat(ris_xy, n_r, axis=0)
            t = np.tile(pos, (n_i, 1))
            clear = ~geometry.los_blocked_batch(a, t, scenario.obstacles).reshape(n_i, n_r)
            clear &= dist_i > 0
            gate = cov_ris[:, :, None] & in_cone & clear[:, None, :]
            np.einsum("irr->ir", gate)[:] = False
            xi_ris[n] = np.where(gate, (gain * gain) * pwr_i[:, None, :], 0.0)

    link_tables = LinkPowerTables(
        p_direct=p_direct,
        p_ris=p_ris,
        xi_bs=xi_bs,
        xi_ris=xi_ris,
        gain_bs=gain,
        gain_robot=gain,
        noise=noise,
    )
    u_effective = cfg.u_override if cfg.u_override is not None else channel.max_concurrent(phys.n_elements)
    return DerivedTables(
        coverage=coverage,
        conflicts=conflicts,
        tables=link_tables,
        u_effective=u_effective,
        psi_linear=scenario.psi_linear(),
    )


def strip_ris(scenario: Scenario) -> Scenario:
    """The same scenario with every reflecting surface removed."""
    return Scenario(
        config=replace(scenario.config, n_ris=0),
        bs_positions=list(scenario.bs_positions),
        ris_mounts=[],
        obstacles=list(scenario.obstacles),
        trajectories=scenario.trajectories.copy(),
        psi=scenario.psi.copy(),
        k_out=scenario.k_out.copy(),
    )


def _config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "floor_m": [cfg.floor_width, cfg.floor_height],
        "n_bs": cfg.n_bs,
        "n_ris": cfg.n_ris,
        "n_robots": cfg.n_robots,
        "n_slots": cfg.n_slots,
        "slot_duration_s": cfg.slot_duration,
        "robot_step_m": cfg.robot_step,
        "n_obstacles": cfg.n_obstacles,
        "obstacle_size_m": list(cfg.obstacle_size),
        "n_ring_obstacles": cfg.n_ring_obstacles,
        "ring_radii_m": list(cfg.ring_radii),
        "ring_size_m": None if cfg.ring_size is None else list(cfg.ring_size),
        "bs_clearance_m": cfg.bs_clearance,
        "wall_clearance_m": cfg.wall_clearance,
        "ris_placement": cfg.ris_placement,
        "phys": {
            "p_bs_w": cfg.phys.p_bs,
            "freq_hz": cfg.phys.freq,
            "beamwidth_rad": cfg.phys.theta,
            "n_elements": cfg.phys.n_elements,
            "temperature_k": cfg.phys.temperature,
            "bandwidth_hz": cfg.phys.bandwidth,
            "light_speed_m_s": cfg.phys.c,
            "boltzmann_j_k": cfg.phys.k,
        },
        "psi_range": list(cfg.psi_range),
        "k_range": list(cfg.k_range),
        "qos_draw": cfg.qos_draw,
        "d_reconfig_slots": cfg.d_reconfig,
        "u_override": cfg.u_override,
        "ris_fov_half_angle_rad": cfg.ris_fov_half_angle,
        "conflict_angle_rad": cfg.conflict_angle,
        "sinr_threshold_db": cfg.sinr_threshold_db,
        "bs_positions_m": None if cfg.bs_positions is None else [list(p) for p in cfg.bs_positions],
        "seed": cfg.seed,
    }


def _config_from_dict(d: dict) -> ScenarioConfig:
    try:
        phys = d["phys"]
        return ScenarioConfig(
            floor_width=float(d["floor_m"][0]),
            floor_height=float(d["floor_m"][1]),
            n_bs=int(d["n_bs"]),
            n_ris=int(d["n_ris"]),
            n_robots=int(d["n_robots"]),
            n_slots=int(d["n_slots"]),
            slot_duration=float(d["slot_duration_s"]),
            robot_step=float(d["robot_step_m"]),
            n_obstacles=int(d["n_obstacles"]),
            obstacle_size=(float(d["obstacle_size_m"][0]), float(d["obstacle_size_m"][1])),
            n_ring_obstacles=int(d["n_ring_obstacles"]),
            ring_radii=(float(d["ring_radii_m"][0]), float(d["ring_radii_m"][1])),
            ring_size=None if d["ring_size_m"] is None
            else (float(d["ring_size_m"][0]), float(d["ring_size_m"][1])),
            bs_clearance=float(d["bs_clearance_m"]),
            wall_clearance=float(d["wall_clearance_m"]),
            ris_placement=str(d["ris_placement"]),
            phys=PhysParams(
                p_bs=float(phys["p_bs_w"]),
                freq=float(phys["freq_hz"]),
                theta=float(phys["beamwidth_rad"]),
                n_elements=int(phys["n_elements"]),
                temperature=float(phys["temperature_k"]),
                bandwidth=float(phys["bandwidth_hz"]),
                c=float(phys["light_speed_m_s"]),
                k=float(phys["boltzmann_j_k"]),
            ),
            psi_range=(float(d["psi_range"][0]), float(d["psi_range"][1])),
            k_range=(int(d["k_range"][0]), int(d["k_range"][1])),
            qos_draw=str(d["qos_draw"]),
            d_reconfig=int(d["d_reconfig_slots"]),
            u_override=None if d["u_override"] is None else int(d["u_override"]),
            ris_fov_half_angle=float(d["ris_fov_half_angle_rad"]),
            conflict_angle=None if d["conflict_angle_rad"] is None else float(d["conflict_angle_rad"]),
            sinr_threshold_db=bool(d["sinr_threshold_db"]),
            bs_positions=None if d["bs_positions_m"] is None
            else tuple((float(p[0]), float(p[1])) for p in d["bs_positions_m"]),
            seed=int(d["seed"]),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise ScenarioFormatError(f"bad config block: {exc!r}") from exc


def serialize(scenario: Scenario) -> str:
    """Render a scenario as versioned, human-readable JSON text."""
    doc = {
        "format": SCHEMA_NAME,
        "version": SCHEMA_VERSION,
        "config": _config_to_dict(scenario.config),
        "bs_positions_m": [[p.x, p.y] for p in scenario.bs_positions],
        "ris_mounts": [
            {
                "position_m": [m.position.x, m.position.y],
                "normal": list(m.normal),
                "fov_half_angle_rad": m.fov_half_angle,
            }
            for m in scenario.ris_mounts
        ],
        "obstacles_m": [[o.xmin, o.ymin, o.xmax, o.ymax] for o in scenario.obstacles],
        "trajectories_m": scenario.trajectories.tolist(),
        "sinr_thresholds": scenario.psi.tolist(),
        "outage_window_slots": scenario.k_out.tolist(),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def deserialize(text: str) -> Scenario:
    """Parse scenario JSON, rejecting unknown versions and shape violations."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioFormatError("top level must be an object")
    if doc.get("format") != SCHEMA_NAME:
        raise ScenarioFormatError(f"unknown format {doc.get('format')!r}; expected {SCHEMA_NAME!r}")
    if doc.get("version") != SCHEMA_VERSION:
        raise ScenarioFormatError(f"unsupported version {doc.get('version')!r}; expected {SCHEMA_VERSION}")
    for key in ("config", "bs_positions_m", "ris_mounts", "obstacles_m",
                "trajectories_m", "sinr_thresholds", "outage_window_slots"):
        if key not in doc:
            raise ScenarioFormatError(f"missing field {key!r}")

    config = _config_from_dict(doc["config"])
    try:
        bs_positions = [Point2D(float(p[0]), float(p[1])) for p in doc["bs_positions_m"]]
        ris_mounts = [
            RisMount(
                Point2D(float(m["position_m"][0]), float(m["position_m"][1])),
                (float(m["normal"][0]), float(m["normal"][1])),
                float(m["fov_half_angle_rad"]),
            )
            for m in doc["ris_mounts"]
        ]
        obstacles = [Obstacle(float(o[0]), float(o[1]), float(o[2]), float(o[3]))
                     for o in doc["obstacles_m"]]
        trajectories = np.array(doc["trajectories_m"], dtype=float)
        psi = np.array(doc["sinr_thresholds"], dtype=float)
        k_out = np.array(doc["outage_window_slots"], dtype=int)
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ScenarioFormatError(f"bad scenario body: {exc!r}") from exc

    if len(bs_positions) != config.n_bs:
        raise ScenarioFormatError("bs_positions_m length disagrees with config n_bs")
    if len(ris_mounts) != config.n_ris:
        raise ScenarioFormatError("ris_mounts length disagrees with config n_ris")
    expected = (config.n_robots, config.n_slots, 2)
    if trajectories.shape != expected and config.n_robots > 0:
        raise ScenarioFormatError(f"trajectories shape {trajectories.shape} != {expected}")
    if config.n_robots == 0:
        trajectories = np.zeros(expected)
    if psi.shape != (config.n_robots,) or k_out.shape != (config.n_robots,):
        raise ScenarioFormatError("per-robot QoS arrays disagree with config n_robots")

    return Scenario(
        config=config,
        bs_positions=bs_positions,
        ris_mounts=ris_mounts,
        obstacles=obstacles,
        trajectories=trajectories,
        psi=psi,
        k_out=k_out,
    )
