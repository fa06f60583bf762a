"""Coordinate conversions, geodesic distance and spherical windows.

Spherical coordinates are (theta, phi): colatitude in [0, pi] and azimuth in
[0, 2 pi). Geographic coordinates are (lon, lat) in radians with lon in
(-pi, pi] and lat in [-pi/2, pi/2]. Cartesian vectors are stacked on the last
axis, shape ``(..., 3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import healpix
from .errors import UndefinedDirectionError, WindowError
from .healpix import Ordering, Resolution

TWO_PI = 2.0 * math.pi
PLANE_TOL = 1e-12
MAX_POLYGON_VERTICES = 64


class SphCoord(NamedTuple):
    theta: float
    phi: float


class GeoCoord(NamedTuple):
    lon: float
    lat: float


class CartCoord(NamedTuple):
    x: float
    y: float
    z: float


def wrap_azimuth(phi):
    """Map any real azimuth into [0, 2 pi)."""
    phi = np.mod(phi, TWO_PI)
    return np.where(phi >= TWO_PI, 0.0, phi)[()]


def sph2car(theta, phi):
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def car2sph(xyz):
    """Direction of each (non-zero) vector as (theta, phi); poles get phi = 0."""
    xyz = np.asarray(xyz, dtype=np.float64)
    if xyz.shape[-1] != 3:
        raise ValueError("expected vectors of length 3 on the last axis")
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    rho = np.hypot(x, y)
    if np.any((rho == 0.0) & (z == 0.0)):
        raise UndefinedDirectionError("zero vector has no direction")
    theta = np.arctan2(rho, z)
    phi = np.where(rho == 0.0, 0.0, wrap_azimuth(np.arctan2(y, x)))
    return theta[()], phi[()]


def geo2sph(lon, lat):
    """Geographic (lon, lat) radians to (theta, phi); lon may be any real value."""
    lat = np.asarray(lat, dtype=np.float64)
    theta = math.pi / 2.0 - lat
    phi = wrap_azimuth(np.asarray(lon, dtype=np.float64))
    phi = np.where((theta <= 0.0) | (theta >= math.pi), 0.0, phi)
    return np.clip(theta, 0.0, math.pi)[()], phi[()]


def sph2geo(theta, phi):
    phi = np.asarray(phi, dtype=np.float64)
    lon = np.where(phi > math.pi, phi - TWO_PI, phi)
    lat = math.pi / 2.0 - np.asarray(theta, dtype=np.float64)
    return lon[()], lat[()]


def geodesic(theta1, phi1, theta2, phi2):
    """Great-circle angle between two points, in [0, pi]."""
    a = sph2car(theta1, phi1)
    b = sph2car(theta2, phi2)
    return angle_between(a, b)


def angle_between(a, b):
    """Angle between unit vectors via the clamped dot product.

    The products are summed in a fixed order so that the same pair always gives
    the same bits, whichever code path evaluates it.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    dot = a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]
    return np.arccos(np.clip(dot, -1.0, 1.0))[()]


def sample_mean_direction(xyz) -> CartCoord:
    """Unit vector along the sum of the given unit vectors."""
    xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
    if xyz.shape[0] == 0:
        raise UndefinedDirectionError("no vectors given")
    total = xyz.sum(axis=0)
    norm = math.sqrt(float(total @ total))
    if norm <= 1e-12 * xyz.shape[0]:
        raise UndefinedDirectionError("resultant vector is zero")
    return CartCoord(*(total / norm).tolist())


# --- windows ---------------------------------------------------------------


class Window:
    """A region of the sphere with a boundary-inclusive membership test."""

    def contains(self, theta, phi):
        return self.contains_xyz(sph2car(theta, phi))

    def contains_xyz(self, xyz):  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class Disc(Window):
    center: SphCoord
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", SphCoord(float(self.center[0]), float(self.center[1])))
        if not (0.0 < self.radius < math.pi):
            raise WindowError(f"disc radius must lie in (0, pi), got {self.radius}")

    def contains_xyz(self, xyz):
        c = sph2car(*self.center)
        return np.asarray(angle_between(xyz, c) <= self.radius)


@dataclass(frozen=True)
class Polygon(Window):
    """Convex spherical polygon given by its vertices.

    The vertex order may be clockwise or counter-clockwise; it is normalised
    to counter-clockwise (seen from outside the sphere) on construction.
    """

    vertices: tuple[SphCoord, ...]
    normals: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple(SphCoord(float(t), float(p)) for t, p in self.vertices)
        if not 3 <= len(verts) <= MAX_POLYGON_VERTICES:
            raise WindowError(f"polygon needs 3..{MAX_POLYGON_VERTICES} vertices, got {len(verts)}")
        v = sph2car([t for t, _ in verts], [p for _, p in verts])
        for i in range(len(v)):
            for k in range(i + 1, len(v)):
                d = float(v[i] @ v[k])
                if d > 1.0 - 1e-14:
                    raise WindowError(f"vertices {i} and {k} coincide")
                if d < -1.0 + 1e-14:
                    raise WindowError(f"vertices {i} and {k} are antipodal")
        if float(np.dot(np.cross(v[0], v[1]), v[2])) < 0.0:
            verts = verts[::-1]
            v = v[::-1]
        n = np.cross(v, np.roll(v, -1, axis=0))
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        if np.any(n @ v.T < -PLANE_TOL):
            raise WindowError("polygon is not convex")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "normals", n)

    def contains_xyz(self, xyz):
        xyz = np.asarray(xyz, dtype=np.float64)
        inside = np.ones(xyz.shape[:-1], dtype=bool)
        for n in self.normals:
            inside &= xyz[..., 0] * n[0] + xyz[..., 1] * n[1] + xyz[..., 2] * n[2] >= -PLANE_TOL
        return inside


def polygon(theta: Sequence[float], phi: Sequence[float]) -> Polygon:
    """Polygon from parallel vertex coordinate lists."""
    if len(theta) != len(phi):
        raise WindowError("theta and phi lists differ in length")
    return Polygon(tuple(zip(theta, phi)))


def contains(window: Window | None, theta, phi):
    """Membership of points in ``window``; ``None`` stands for the whole sphere."""
    if window is None:
        return np.ones(np.broadcast(np.asarray(theta), np.asarray(phi)).shape, dtype=bool)[()]
    return window.contains(theta, phi)[()]


def window_pixels(window: Window | None, res: Resolution, ordering=Ordering.RING, chunk: int = 1 << 20):
    """Sorted indices of the pixels whose centres lie in ``window``."""
    ordering = Ordering.parse(ordering)
    hits = []
    for start in range(0, res.npix, chunk):
        pix = np.arange(start, min(start + chunk, res.npix), dtype=np.int64)
        if window is not None:
            pix = pix[window.contains(*healpix.pix2ang_ring(res, pix))]
        hits.append(pix)
    pix = np.concatenate(hits) if hits else np.empty(0, dtype=np.int64)
    if ordering is Ordering.NESTED:
        pix = np.sort(healpix.ring2nest(res, pix))
    return pix
