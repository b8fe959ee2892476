"""Volumes and surface areas of Euclidean balls and spheres."""

import numpy as np
from scipy.special import gamma


def unit_ball_volume(d: int) -> float:
    """|B_1| = pi^(d/2) / Gamma(d/2 + 1)"""
    return float(np.pi ** (d / 2.0) / gamma(d / 2.0 + 1.0))


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d (2 for d = 1)"""
    return float(2.0 * np.pi ** (d / 2.0) / gamma(d / 2.0))


def ball_volume(d: int, r: float) -> float:
    return unit_ball_volume(d) * r ** d
