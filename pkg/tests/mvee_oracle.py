"""Brute-force reference for minimum-volume enclosing ellipses in 2D.

Independent of the package's Khachiyan solver: for each candidate shape
(rotation angle and axis ratio on a grid) the points are mapped so the
ellipse family becomes circles, the exact smallest enclosing circle is
found by Welzl's algorithm, and the implied ellipse area is minimized over
the grid.
"""

import math

import numpy as np


def _circle_two(p, q):
    c = (p + q) / 2.0
    return c, np.linalg.norm(p - c)


def _circle_three(p, q, r):
    ax, ay = p
    bx, by = q
    cx, cy = r
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-14:
        # collinear: use the widest pair
        best = None
        for a, b in ((p, q), (p, r), (q, r)):
            c, rad = _circle_two(a, b)
            if best is None or rad > best[1]:
                best = (c, rad)
        return best
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
          + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
          + (cx**2 + cy**2) * (bx - ax)) / d
    c = np.array([ux, uy])
    return c, np.linalg.norm(p - c)


def _in_circle(c, rad, p, eps=1e-9):
    return np.linalg.norm(p - c) <= rad * (1.0 + eps) + eps


def smallest_circle(points, seed=0):
    """Exact smallest enclosing circle (Welzl, move-to-front iterative)."""
    pts = [np.asarray(p, dtype=float) for p in points]
    rng = np.random.default_rng(seed)
    rng.shuffle(pts)
    c, rad = pts[0], 0.0
    for i in range(1, len(pts)):
        if _in_circle(c, rad, pts[i]):
            continue
        c, rad = pts[i], 0.0
        for j in range(i):
            if _in_circle(c, rad, pts[j]):
                continue
            c, rad = _circle_two(pts[i], pts[j])
            for k in range(j):
                if _in_circle(c, rad, pts[k]):
                    continue
                c, rad = _circle_three(pts[i], pts[j], pts[k])
    return c, rad


def min_ellipse_area_bruteforce(points, n_angles=60, ratios=None, refine=2):
    """Smallest enclosing-ellipse area by grid search over shapes.

    For a fixed rotation phi and axis ratio rho, points are mapped by
    diag(1/sqrt(rho), sqrt(rho)) R(phi); the smallest enclosing circle of
    the mapped points has radius rad and the corresponding ellipse area is
    pi * rad^2 (the map is unit-determinant).  The grid is refined around
    the running best.
    """
    points = np.asarray(points, dtype=float)
    if ratios is None:
        ratios = np.exp(np.linspace(math.log(0.1), math.log(10.0), 41))
    angles = np.linspace(0.0, math.pi, n_angles, endpoint=False)

    def area_at(phi, rho):
        rot = np.array(
            [[math.cos(phi), math.sin(phi)], [-math.sin(phi), math.cos(phi)]]
        )
        scale = np.diag([1.0 / math.sqrt(rho), math.sqrt(rho)])
        mapped = points @ rot.T @ scale.T
        _, rad = smallest_circle(mapped)
        return math.pi * rad * rad

    best = (math.inf, 0.0, 1.0)
    for phi in angles:
        for rho in ratios:
            a = area_at(phi, rho)
            if a < best[0]:
                best = (a, phi, rho)
    d_phi = angles[1] - angles[0]
    log_ratios = np.log(ratios)
    d_log = log_ratios[1] - log_ratios[0]
    for _ in range(refine):
        _, phi0, rho0 = best
        for phi in np.linspace(phi0 - d_phi, phi0 + d_phi, 9):
            for lr in np.linspace(math.log(rho0) - d_log, math.log(rho0) + d_log, 9):
                a = area_at(phi, math.exp(lr))
                if a < best[0]:
                    best = (a, phi, math.exp(lr))
        d_phi /= 4.0
        d_log /= 4.0
    return best[0]
