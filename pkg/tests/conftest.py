import math

import pytest

from dcasim.antigen import Pose
from dcasim.world import Obstacle, Pen


@pytest.fixture
def box_pen():
    """Empty 3000 x 2000 pen."""
    return Pen(3000.0, 2000.0)


@pytest.fixture
def two_cylinder_pen():
    """Pen with one short pink cylinder (anomalous) and one tall pink one."""
    return Pen(4200.0, 3000.0, [
        Obstacle(3000.0, 2200.0, 100.0, 300.0, is_pink=True),
        Obstacle(1200.0, 800.0, 100.0, 500.0, is_pink=True),
    ])


def brute_ray(pen, origin, angle, min_height, step_mm=1.0, max_mm=6000.0):
    """Independent ray oracle: march along the ray until inside blocking
    geometry. Returns the marched distance (within step_mm of the true
    hit) or inf."""
    ox, oy = origin
    dx, dy = math.cos(angle), math.sin(angle)
    t = 0.0
    while t <= max_mm:
        x, y = ox + t * dx, oy + t * dy
        if min_height <= pen.wall_height and not (
                0.0 <= x <= pen.width and 0.0 <= y <= pen.height):
            return t
        for ob in pen.obstacles:
            if ob.height >= min_height and math.hypot(ob.x - x, ob.y - y) <= ob.radius:
                return t
        t += step_mm
    return math.inf


@pytest.fixture
def pose():
    return Pose(600.0, 600.0, 0.0)
