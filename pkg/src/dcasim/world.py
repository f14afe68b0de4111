"""Deterministic 2D test-pen simulation.

A differential-drive robot wanders a rectangular pen under a layered
controller (stop beats turn beats cruise) while three sensor models watch
the scene: a planar laser that only sees geometry at least 330 mm tall, a
ring of sonar cones that sees everything, and a forward camera reporting
the apparent area of the largest pink blob. True kinematics integrate
exactly; dead-reckoning integrates velocity-perturbed kinematics and
drifts. All stochastic draws come from one generator per world instance,
so replays are bit-identical.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from dcasim._kernels import cast_rays
from dcasim.antigen import Pose
from dcasim.signals import wrap_pi

# Geometry below this height is invisible to the planar laser; this single
# asymmetry is what makes short objects distinguishable at all.
LASER_MIN_VISIBLE_HEIGHT = 330.0


@dataclass(frozen=True)
class Obstacle:
    """Vertical cylinder on the pen floor."""

    x: float
    y: float
    radius: float
    height: float
    is_pink: bool = False

    def __post_init__(self):
        if self.radius <= 0.0 or self.height <= 0.0:
            raise ValueError("obstacle radius and height must be > 0")


@dataclass
class Pen:
    """Rectangular enclosure; walls act as tall non-pink geometry."""

    width: float
    height: float
    obstacles: list[Obstacle] = field(default_factory=list)
    wall_height: float = 1000.0

    def __post_init__(self):
        if self.width <= 0.0 or self.height <= 0.0:
            raise ValueError("pen dimensions must be > 0")
        for ob in self.obstacles:
            if not (ob.radius <= ob.x <= self.width - ob.radius
                    and ob.radius <= ob.y <= self.height - ob.radius):
                raise ValueError(f"obstacle at ({ob.x}, {ob.y}) not fully "
                                 "inside pen")
        for i, a in enumerate(self.obstacles):
            for b in self.obstacles[i + 1:]:
                if math.hypot(a.x - b.x, a.y - b.y) < a.radius + b.radius:
                    raise ValueError("obstacles overlap at spawn")

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


def default_pen() -> Pen:
    """Default 4200x3000 mm pen: one short pink cylinder (anomalous) and
    one tall pink cylinder (normal)."""
    return Pen(4200.0, 3000.0, [
        Obstacle(3000.0, 2200.0, 100.0, 300.0, is_pink=True),   # short: A
        Obstacle(1200.0, 800.0, 100.0, 500.0, is_pink=True),    # tall: B
    ])


DEFAULT_START = Pose(600.0, 600.0, 0.0)


@dataclass(frozen=True)
class LaserModel:
    half_span: float = math.radians(90.0)
    step: float = math.radians(1.0)
    max_range: float = 8000.0
    min_visible_height: float = LASER_MIN_VISIBLE_HEIGHT


@dataclass(frozen=True)
class SonarModel:
    n_transducers: int = 16
    cone_half_angle: float = math.radians(15.0)
    rays_per_cone: int = 7
    max_range: float = 5000.0
    min_visible_height: float = 0.0


@dataclass(frozen=True)
class CameraModel:
    half_fov: float = math.radians(30.0)
    gain: float = 1.0
    # Segmentation floor: blobs with apparent area below this report 0.
    # Calibrated so pink detection dies while the ranged sensors still
    # dominate the fused outputs (no camera-only maturation at ranges the
    # ranged sensors call empty).
    min_area: float = 0.125


@dataclass(frozen=True)
class SensorSuite:
    laser: LaserModel = LaserModel()
    sonar: SonarModel = SonarModel()
    camera: CameraModel = CameraModel()


@dataclass(frozen=True)
class WanderParams:
    """Layered wander controller: stop > turn > cruise.

    Defaults calibrated against the default pen: close enough approaches
    that high-threshold cells still mature inside the danger zone, with
    whole-pen coverage over a ten-minute run.
    """

    d_stop: float = 350.0
    d_turn: float = 520.0
    v_cruise: float = 300.0
    v_slow: float = 150.0
    steer_rate: float = 0.34
    spin_rate: float = 1.0
    openness_cap: float = 2000.0


@dataclass(frozen=True)
class RobotParams:
    v_max: float = 400.0
    theta_dot_max: float = 1.5
    body_radius: float = 220.0


class StaticGeometry:
    """Pen walls and obstacle arrays prepared for the ray kernel."""

    def __init__(self, pen: Pen):
        self.pen = pen
        obs = pen.obstacles
        self.obs_x = np.array([o.x for o in obs], dtype=np.float64)
        self.obs_y = np.array([o.y for o in obs], dtype=np.float64)
        self.obs_r = np.array([o.radius for o in obs], dtype=np.float64)
        self.obs_h = np.array([o.height for o in obs], dtype=np.float64)

    def cast(self, ox: float, oy: float, angles: np.ndarray, min_height: float,
             max_range: float = math.inf) -> tuple[np.ndarray, np.ndarray]:
        return cast_rays(float(ox), float(oy),
                         np.ascontiguousarray(angles, dtype=np.float64),
                         float(min_height), self.pen.width, self.pen.height,
                         self.pen.wall_height, self.obs_x, self.obs_y,
                         self.obs_r, self.obs_h, float(max_range))


def raycast(pen: Pen, origin: tuple[float, float], angle: float,
            min_height: float, max_range: float = math.inf) -> float:
    """Distance to the nearest wall/obstacle of sufficient height along one
    ray (inf when nothing qualifies within range)."""
    ox, oy = origin
    if not pen.contains(ox, oy):
        raise ValueError(f"ray origin ({ox}, {oy}) outside pen")
    dist, _ = StaticGeometry(pen).cast(ox, oy, np.array([angle]), min_height,
                                       max_range)
    return float(dist[0])


def integrate(pose: Pose, v: float, theta_dot: float, dt: float) -> Pose:
    """Exact constant-twist arc update of a unicycle pose."""
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if abs(theta_dot) < 1e-12:
        return Pose(pose.x + v * dt * math.cos(pose.heading),
                    pose.y + v * dt * math.sin(pose.heading),
                    pose.heading)
    h2 = pose.heading + theta_dot * dt
    r = v / theta_dot
    return Pose(pose.x + r * (math.sin(h2) - math.sin(pose.heading)),
                pose.y - r * (math.cos(h2) - math.cos(pose.heading)),
                h2)


def odometry_step(odom_pose: Pose, v: float, theta_dot: float, dt: float,
                  noise_sigma: float, rng: np.random.Generator) -> Pose:
    """Dead-reckoning update: the same arc integration with velocity noise.

    Linear velocity picks up a multiplicative Gaussian factor and angular
    velocity an additive one, both scaled by noise_sigma * sqrt(dt), so
    pose error accumulates as a random walk. noise_sigma = 0 reproduces
    the true integration exactly.
    """
    if noise_sigma < 0.0:
        raise ValueError("noise_sigma must be >= 0")
    if noise_sigma > 0.0:
        scale = noise_sigma * math.sqrt(dt)
        v = v * (1.0 + scale * rng.standard_normal())
        theta_dot = theta_dot + scale * rng.standard_normal()
    return integrate(odom_pose, v, theta_dot, dt)


class WanderController:
    """Layered wander behavior with a latched escape turn.

    Nearest return over the front half-plane (both sensors) picks the
    layer: inside d_stop halt and spin toward the more open side, keeping
    that spin direction until the front clears (a re-evaluated direction
    dithers when geometry straddles the centerline); inside d_turn creep
    forward steering away from the nearest return; otherwise cruise
    straight. Deterministic: state is the single latched direction.
    """

    def __init__(self, params: WanderParams, robot: RobotParams):
        self.params = params
        self.robot = robot
        self._escape_dir: float | None = None

    def step(self, lrf_scan, sonar_scan) -> tuple[float, float]:
        params, robot = self.params, self.robot
        la, ld = lrf_scan
        sa, sd = sonar_scan
        front = np.abs(sa) <= math.pi / 2.0 + 1e-12
        angles = np.concatenate([la, sa[front]])
        dists = np.concatenate([ld, sd[front]])
        finite = np.isfinite(dists)
        if not finite.any():
            self._escape_dir = None
            return min(params.v_cruise, robot.v_max), 0.0
        nearest_i = int(np.argmin(np.where(finite, dists, np.inf)))
        nearest = float(dists[nearest_i])
        nearest_angle = float(angles[nearest_i])

        if nearest < params.d_stop:
            if self._escape_dir is None:
                capped = np.minimum(
                    np.where(np.isfinite(ld), ld, params.openness_cap),
                    params.openness_cap)
                left = float(capped[la > 0.0].sum())
                right = float(capped[la < 0.0].sum())
                self._escape_dir = 1.0 if left >= right else -1.0
            theta_dot = self._escape_dir * params.spin_rate
            v = 0.0
        elif nearest < params.d_turn:
            self._escape_dir = None
            theta_dot = (-params.steer_rate if nearest_angle >= 0.0
                         else params.steer_rate)
            v = params.v_slow
        else:
            self._escape_dir = None
            theta_dot = 0.0
            v = params.v_cruise
        v = min(v, robot.v_max)
        theta_dot = max(-robot.theta_dot_max, min(robot.theta_dot_max, theta_dot))
        return v, theta_dot


def wander_step(lrf_scan, sonar_scan, params: WanderParams = WanderParams(),
                robot: RobotParams = RobotParams()) -> tuple[float, float]:
    """Single-shot controller decision for the given scans (no latch state)."""
    return WanderController(params, robot).step(lrf_scan, sonar_scan)


class World:
    """One simulated pen + robot; strictly single-threaded."""

    def __init__(self, pen: Pen | None = None, start: Pose = DEFAULT_START,
                 sensors: SensorSuite = SensorSuite(),
                 wander: WanderParams = WanderParams(),
                 robot: RobotParams = RobotParams(),
                 noise_sigma: float = 0.03,
                 rng: np.random.Generator | int | None = None):
        self.pen = pen if pen is not None else default_pen()
        self.sensors = sensors
        self.wander = wander
        self.robot = robot
        self.noise_sigma = noise_sigma
        self.rng = (rng if isinstance(rng, np.random.Generator)
                    else np.random.default_rng(rng))
        self.geometry = StaticGeometry(self.pen)
        self.controller = WanderController(wander, robot)
        if not self._clear(start.x, start.y):
            raise ValueError("start pose violates body-radius clearance")
        self.true_pose = start
        self.odom_pose = start
        self.v = 0.0
        self.theta_dot = 0.0
        self.t = 0.0
        self.blocked_ticks = 0

        laser = sensors.laser
        n = int(round(2.0 * laser.half_span / laser.step)) + 1
        self._laser_offsets = np.linspace(-laser.half_span, laser.half_span, n)
        sonar = sensors.sonar
        centers = np.array([wrap_pi(k * 2.0 * math.pi / sonar.n_transducers)
                            for k in range(sonar.n_transducers)])
        self._sonar_centers = centers
        fan = np.linspace(-sonar.cone_half_angle, sonar.cone_half_angle,
                          sonar.rays_per_cone)
        self._sonar_offsets = (centers[:, None] + fan[None, :]).ravel()

    # -- sensors ---------------------------------------------------------

    def lrf_scan(self) -> tuple[np.ndarray, np.ndarray]:
        """(robot-frame angles, distances); short geometry is invisible."""
        laser = self.sensors.laser
        world_angles = self.true_pose.heading + self._laser_offsets
        dist, _ = self.geometry.cast(self.true_pose.x, self.true_pose.y,
                                     world_angles, laser.min_visible_height,
                                     laser.max_range)
        return self._laser_offsets, dist

    def sonar_scan(self) -> tuple[np.ndarray, np.ndarray]:
        """(transducer angles, distances); each cone takes the min of a ray fan."""
        sonar = self.sensors.sonar
        world_angles = self.true_pose.heading + self._sonar_offsets
        dist, _ = self.geometry.cast(self.true_pose.x, self.true_pose.y,
                                     world_angles, sonar.min_visible_height,
                                     sonar.max_range)
        per_cone = dist.reshape(sonar.n_transducers, sonar.rays_per_cone)
        return self._sonar_centers, per_cone.min(axis=1)

    def camera_blob(self) -> float:
        """Apparent area of the largest visible pink blob (0 if none).

        Area follows an inverse-square law, gain * (2*radius*height) / d^2
        with d the distance to the visible surface. A pink cylinder
        contributes nothing when outside the horizontal FOV, occluded by
        equal-or-taller geometry on the ray to its center, or below the
        segmentation floor.
        """
        cam = self.sensors.camera
        px, py = self.true_pose.x, self.true_pose.y
        best = 0.0
        for i, ob in enumerate(self.pen.obstacles):
            if not ob.is_pink:
                continue
            bearing = math.atan2(ob.y - py, ob.x - px)
            if abs(wrap_pi(bearing - self.true_pose.heading)) > cam.half_fov:
                continue
            _, hit = self.geometry.cast(px, py, np.array([bearing]), ob.height)
            if int(hit[0]) != i:
                continue
            d = max(math.hypot(ob.x - px, ob.y - py) - ob.radius,
                    self.robot.body_radius)
            area = cam.gain * (2.0 * ob.radius * ob.height) / (d * d)
            if area >= cam.min_area and area > best:
                best = area
        return best

    # -- stepping --------------------------------------------------------

    def _clear(self, x: float, y: float) -> bool:
        rb = self.robot.body_radius
        if not (rb <= x <= self.pen.width - rb and rb <= y <= self.pen.height - rb):
            return False
        for ob in self.pen.obstacles:
            if math.hypot(ob.x - x, ob.y - y) < ob.radius + rb:
                return False
        return True

    def step(self, dt: float) -> None:
        """One tick: sense, control, move truth (collision-guarded), move odometry."""
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt}")
        lrf = self.lrf_scan()
        sonar = self.sonar_scan()
        v_cmd, w_cmd = self.controller.step(lrf, sonar)
        candidate = integrate(self.true_pose, v_cmd, w_cmd, dt)
        if self._clear(candidate.x, candidate.y):
            v_exec, w_exec = v_cmd, w_cmd
            self.true_pose = candidate
        else:
            # Clamp translation; rotation alone cannot create contact.
            v_exec = 0.0
            w_exec = w_cmd if w_cmd != 0.0 else self.wander.spin_rate
            self.true_pose = integrate(self.true_pose, 0.0, w_exec, dt)
            self.blocked_ticks += 1
        self.odom_pose = odometry_step(self.odom_pose, v_exec, w_exec, dt,
                                       self.noise_sigma, self.rng)
        self.v = v_exec
        self.theta_dot = w_exec
        self.t += dt

    def clearance(self) -> float:
        """Distance from the body edge to the nearest geometry (>= 0 is safe)."""
        x, y = self.true_pose.x, self.true_pose.y
        rb = self.robot.body_radius
        best = min(x - rb, y - rb, self.pen.width - x - rb,
                   self.pen.height - y - rb)
        for ob in self.pen.obstacles:
            best = min(best, math.hypot(ob.x - x, ob.y - y) - ob.radius - rb)
        return best
