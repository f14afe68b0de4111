"""Pure-Python (numpy) ray-cast kernel, the fallback backend.

Semantically and numerically identical to the compiled ``_raycast`` module:
same formulas applied elementwise in the same order, so results match the
compiled kernel bit for bit.
"""

import numpy as np


def cast_rays(ox, oy, angles, min_height, width, height, wall_height,
              obs_x, obs_y, obs_r, obs_h, max_range):
    angles = np.ascontiguousarray(angles, dtype=np.float64)
    n = angles.shape[0]
    dx = np.cos(angles)
    dy = np.sin(angles)
    best = np.full(n, np.inf)
    hit = np.full(n, -2, dtype=np.int64)

    if min_height <= wall_height:
        tx = np.full(n, np.inf)
        ty = np.full(n, np.inf)
        pos = dx > 0.0
        neg = dx < 0.0
        tx[pos] = (width - ox) / dx[pos]
        tx[neg] = (0.0 - ox) / dx[neg]
        pos = dy > 0.0
        neg = dy < 0.0
        ty[pos] = (height - oy) / dy[pos]
        ty[neg] = (0.0 - oy) / dy[neg]
        best = np.minimum(tx, ty)
        hit[:] = -1

    obs_x = np.asarray(obs_x, dtype=np.float64)
    obs_y = np.asarray(obs_y, dtype=np.float64)
    obs_r = np.asarray(obs_r, dtype=np.float64)
    obs_h = np.asarray(obs_h, dtype=np.float64)
    for i in range(obs_x.shape[0]):
        if obs_h[i] < min_height:
            continue
        mx = obs_x[i] - ox
        my = obs_y[i] - oy
        c = mx * mx + my * my - obs_r[i] * obs_r[i]
        if c < 0.0:
            t = np.zeros(n)
            valid = np.ones(n, dtype=bool)
        else:
            b = mx * dx + my * dy
            disc = b * b - c
            valid = (b > 0.0) & (disc >= 0.0)
            t = b - np.sqrt(np.where(valid, disc, 0.0))
            valid &= t >= 0.0
        upd = valid & (t < best)
        best[upd] = t[upd]
        hit[upd] = i

    no_return = best > max_range
    best[no_return] = np.inf
    hit[no_return] = -2
    return best, hit
