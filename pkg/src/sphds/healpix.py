"""HEALPix pixelation: resolution, ring geometry, ring/nested indexing.

Pixel indices are 0-based. Angles are colatitude ``theta`` in [0, pi] and
azimuth ``phi`` in [0, 2 pi). Array functions accept scalars or numpy arrays
and return numpy values of the broadcast shape.

Base faces are numbered 0..11: faces 0-3 touch the north pole, 4-7 straddle
the equator (face 4 centred on phi = 0) and 8-11 touch the south pole. Within a
face, ``x`` grows towards the north-east and ``y`` towards the north-west; the
nested index interleaves the bits of ``x`` (even) and ``y`` (odd).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    InvalidResolutionError,
    NoParentError,
    OrderingError,
    PixelDomainError,
)

MAX_LEVEL = 29
TWO_THIRDS = 2.0 / 3.0
_TWO_OVER_PI = 2.0 / math.pi
_SQRT6 = math.sqrt(6.0)

# ring number (in units of nside) of each face's northern corner, and its
# azimuth (in units of pi/4)
_JRLL = np.array([2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4], dtype=np.int64)
_JPLL = np.array([1, 3, 5, 7, 0, 2, 4, 6, 1, 3, 5, 7], dtype=np.int64)

# Cross-face stepping for neighbour search. Rows are indexed by
# 4 + dx + 3*dy after wrapping x, y into the neighbouring face.
_FACEARRAY = (
    (8, 9, 10, 11, -1, -1, -1, -1, 10, 11, 8, 9),  # S
    (5, 6, 7, 4, 8, 9, 10, 11, 9, 10, 11, 8),  # SE
    (-1, -1, -1, -1, 5, 6, 7, 4, -1, -1, -1, -1),  # E
    (4, 5, 6, 7, 11, 8, 9, 10, 11, 8, 9, 10),  # SW
    (0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11),  # centre
    (1, 2, 3, 0, 0, 1, 2, 3, 5, 6, 7, 4),  # NE
    (-1, -1, -1, -1, 7, 4, 5, 6, -1, -1, -1, -1),  # W
    (3, 0, 1, 2, 3, 0, 1, 2, 4, 5, 6, 7),  # NW
    (2, 3, 0, 1, -1, -1, -1, -1, 0, 1, 2, 3),  # N
)
# bit 1: mirror x, bit 2: mirror y, bit 4: swap x and y; column is face // 4
_SWAPARRAY = (
    (0, 0, 3),
    (0, 0, 6),
    (0, 0, 0),
    (0, 0, 5),
    (0, 0, 0),
    (5, 0, 0),
    (0, 0, 0),
    (6, 0, 0),
    (3, 0, 0),
)
# SW, W, NW, N, NE, E, SE, S
_XOFFSET = (-1, -1, 0, 1, 1, 1, 0, -1)
_YOFFSET = (0, 1, 1, 1, 0, -1, -1, -1)


class Ordering(str, enum.Enum):
    RING = "ring"
    NESTED = "nested"

    @classmethod
    def parse(cls, value: "Ordering | str") -> "Ordering":
        try:
            return cls(value.lower() if isinstance(value, str) else value)
        except ValueError:
            raise OrderingError(f"unknown ordering {value!r} (use 'ring' or 'nested')") from None


@dataclass(frozen=True)
class Resolution:
    """HEALPix resolution level ``j`` with ``nside = 2**j``."""

    j: int

    def __post_init__(self):
        if not isinstance(self.j, (int, np.integer)) or not 0 <= self.j <= MAX_LEVEL:
            raise InvalidResolutionError(f"resolution level must be an integer in [0, {MAX_LEVEL}], got {self.j!r}")
        object.__setattr__(self, "j", int(self.j))

    @classmethod
    def from_nside(cls, nside: int) -> "Resolution":
        return resolution_from_nside(nside)

    @property
    def nside(self) -> int:
        return 1 << self.j

    @property
    def npix(self) -> int:
        return 12 * self.nside * self.nside

    @property
    def nrings(self) -> int:
        return 4 * self.nside - 1

    @property
    def ncap(self) -> int:
        """Number of pixels in the north polar cap (rings 1 .. nside-1)."""
        return 2 * self.nside * (self.nside - 1)

    def __repr__(self):
        return f"Resolution(j={self.j}, nside={self.nside})"


def resolution_from_nside(nside: int) -> Resolution:
    """Build a Resolution from ``nside``; only powers of two are accepted."""
    try:
        n = int(nside)
    except (TypeError, ValueError):
        raise InvalidResolutionError(f"nside must be an integer, got {nside!r}") from None
    if n != nside or n < 1 or n & (n - 1):
        raise InvalidResolutionError(f"nside must be a power of two >= 1, got {nside!r}")
    return Resolution(n.bit_length() - 1)


def pixel_area(res: Resolution) -> float:
    """Solid angle of every pixel, in steradians."""
    return 4.0 * math.pi / res.npix


def max_pixel_radius(res: Resolution) -> float:
    """Upper bound on the angular distance from a pixel centre to its boundary."""
    return 2.0 * math.sqrt(pixel_area(res))


class RingInfo(NamedTuple):
    ring: int
    count: int
    z: float
    first_index: int
    phase_shift: bool  # True when centres sit at (k + 1/2) * 2pi/count


def _ring_z(nside: int, ring):
    ring = np.asarray(ring, dtype=np.int64)
    north = ring < nside
    south = ring > 3 * nside
    fn = float(nside)
    z = (4.0 / 3.0) - 2.0 * ring / (3.0 * fn)
    z = np.where(north, 1.0 - ring * ring / (3.0 * fn * fn), z)
    rs = 4 * nside - ring
    z = np.where(south, rs * rs / (3.0 * fn * fn) - 1.0, z)
    return z


def _ring_theta(nside: int, ring):
    """Colatitude of a ring; caps use the arcsin form to stay accurate near the poles."""
    ring = np.asarray(ring, dtype=np.int64)
    fn = float(nside)
    theta = np.arccos(_ring_z(nside, ring))
    north = ring < nside
    south = ring > 3 * nside
    polar = np.where(north, ring, 4 * nside - ring)
    polar_theta = 2.0 * np.arcsin(np.minimum(polar / (_SQRT6 * fn), 1.0))
    theta = np.where(north, polar_theta, theta)
    theta = np.where(south, math.pi - polar_theta, theta)
    return theta


def ring_info(res: Resolution, ring: int) -> RingInfo:
    nside = res.nside
    if not 1 <= ring <= res.nrings:
        raise PixelDomainError(f"ring {ring} outside [1, {res.nrings}] for nside={nside}")
    if ring < nside:
        count, first, shift = 4 * ring, 2 * ring * (ring - 1), True
    elif ring <= 3 * nside:
        count = 4 * nside
        first = res.ncap + (ring - nside) * 4 * nside
        shift = (ring + nside) % 2 == 0
    else:
        rs = 4 * nside - ring
        count, first, shift = 4 * rs, res.npix - 2 * rs * (rs + 1), True
    return RingInfo(ring, count, float(_ring_z(nside, ring)), first, shift)


def _isqrt(v):
    """Elementwise integer square root of a non-negative int64 array."""
    r = np.floor(np.sqrt(v.astype(np.float64))).astype(np.int64)
    r = np.where(r * r > v, r - 1, r)
    r = np.where((r + 1) * (r + 1) <= v, r + 1, r)
    return r


def _check_pix(res: Resolution, pix):
    pix = np.asarray(pix)
    if pix.dtype.kind not in "iu":
        if pix.dtype.kind == "f" and np.all(np.isfinite(pix)) and np.all(pix == np.floor(pix)):
            pix = pix.astype(np.int64)
        else:
            raise PixelDomainError("pixel indices must be integers")
    pix = pix.astype(np.int64)
    if pix.size and (pix.min() < 0 or pix.max() >= res.npix):
        raise PixelDomainError(f"pixel index outside [0, {res.npix}) for nside={res.nside}")
    return pix


def _ring_slot(res: Resolution, pix):
    """Ring number (1-based) and 1-based slot along the ring for ring indices."""
    nside, npix, ncap = res.nside, res.npix, res.ncap
    ring = np.empty_like(pix)
    iphi = np.empty_like(pix)

    north = pix < ncap
    south = pix >= npix - ncap
    belt = ~(north | south)

    p = pix[north]
    r = (1 + _isqrt(1 + 2 * p)) >> 1
    ring[north] = r
    iphi[north] = p + 1 - 2 * r * (r - 1)

    ip = pix[belt] - ncap
    ring[belt] = ip // (4 * nside) + nside
    iphi[belt] = ip % (4 * nside) + 1

    ip = npix - pix[south]
    r = (1 + _isqrt(2 * ip - 1)) >> 1
    ring[south] = 4 * nside - r
    iphi[south] = 4 * r + 1 - (ip - 2 * r * (r - 1))
    return ring, iphi


def pix2ring(res: Resolution, pix):
    """Ring number (1-based) of ring-scheme pixel indices."""
    pix = _check_pix(res, pix)
    ring, _ = _ring_slot(res, np.atleast_1d(pix))
    return ring.reshape(pix.shape)[()]


def pix2ang_ring(res: Resolution, pix):
    """Centre (theta, phi) of ring-scheme pixels."""
    pix = _check_pix(res, pix)
    shape = pix.shape
    pix = np.atleast_1d(pix)
    nside = res.nside
    ring, iphi = _ring_slot(res, pix)

    theta = _ring_theta(nside, ring)
    belt = (ring >= nside) & (ring <= 3 * nside)
    nr = np.where(ring < nside, ring, np.where(ring > 3 * nside, 4 * nside - ring, nside))
    # half-pixel offset: always in the caps, alternating across the belt
    half = np.where(belt & ((ring + nside) & 1 == 1), 0.0, 0.5)
    phi = (iphi - 1 + half) * (math.pi / (2.0 * nr))
    return theta.reshape(shape)[()], phi.reshape(shape)[()]


def _prepare_angles(theta, phi):
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    theta, phi = np.broadcast_arrays(theta, phi)
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(phi))):
        raise PixelDomainError("coordinates must be finite")
    if theta.size and (theta.min() < 0.0 or theta.max() > math.pi):
        raise PixelDomainError("theta must lie in [0, pi]")
    return theta, phi


def _belt_pixel(nside, ncap, jp, jm):
    ir = nside + 1 + jp - jm
    kshift = 1 - (ir & 1)
    ip = ((jp + jm - nside + kshift + 1) // 2) % (4 * nside)
    return ncap + (ir - 1) * 4 * nside + ip


def _cap_pixel(npix, north, ir, ip):
    return np.where(north, 2 * ir * (ir - 1) + ip, npix - 2 * ir * (ir + 1) + ip)


def _floor_choices(v, allow_negative=True):
    f = math.floor(v)
    if v == f and (allow_negative or f >= 1):
        return (f, f - 1)
    return (f,)


def _tie_pixel(res: Resolution, theta: float, z: float, tt: float) -> int:
    """Smallest ring index among the pixels whose closure contains the point."""
    nside, npix, ncap = res.nside, res.npix, res.ncap
    za = abs(z)
    if theta == 0.0 or za == 1.0 and z > 0:
        return 0
    if theta == math.pi or za == 1.0:
        return npix - 4
    found = []
    if za <= TWO_THIRDS:
        t1 = nside * (0.5 + tt)
        t2 = nside * 0.75 * z
        for jp in _floor_choices(t1 - t2):
            for jm in _floor_choices(t1 + t2):
                if 1 <= nside + 1 + jp - jm <= 2 * nside + 1:
                    found.append(int(_belt_pixel(nside, ncap, jp, jm)))
    if za >= TWO_THIRDS:
        tp = tt - math.floor(tt)
        half = theta / 2.0 if z > 0 else (math.pi - theta) / 2.0
        tmp = nside * _SQRT6 * math.sin(half)
        for jp in _floor_choices(tp * tmp, allow_negative=False):
            for jm in _floor_choices((1.0 - tp) * tmp, allow_negative=False):
                ir = jp + jm + 1
                if not 1 <= ir <= nside:
                    continue
                for ip in _floor_choices(tt * ir):
                    found.append(int(_cap_pixel(npix, z > 0, ir, ip % (4 * ir))))
    return min(found)


def ang2pix_ring(res: Resolution, theta, phi):
    """Ring-scheme index of the pixel containing each (theta, phi).

    Points lying exactly on a pixel boundary (in float arithmetic) go to the
    candidate pixel with the smallest ring index.
    """
    theta, phi = _prepare_angles(theta, phi)
    shape = theta.shape
    theta, phi = np.atleast_1d(theta).ravel(), np.atleast_1d(phi).ravel()
    nside, npix, ncap = res.nside, res.npix, res.ncap

    z = np.cos(theta)
    za = np.abs(z)
    tt = np.mod(phi * _TWO_OVER_PI, 4.0)
    tt = np.where(tt >= 4.0, 0.0, tt)

    pix = np.empty(theta.shape, dtype=np.int64)
    tie = np.zeros(theta.shape, dtype=bool)

    belt = za <= TWO_THIRDS
    if belt.any():
        t1 = nside * (0.5 + tt[belt])
        t2 = nside * 0.75 * z[belt]
        a, b = t1 - t2, t1 + t2
        fa, fb = np.floor(a), np.floor(b)
        pix[belt] = _belt_pixel(nside, ncap, fa.astype(np.int64), fb.astype(np.int64))
        tie[belt] = (a == fa) | (b == fb) | (za[belt] == TWO_THIRDS)

    cap = ~belt
    if cap.any():
        tc = tt[cap]
        north = z[cap] > 0
        tp = tc - np.floor(tc)
        half = np.where(north, theta[cap] / 2.0, (math.pi - theta[cap]) / 2.0)
        tmp = nside * _SQRT6 * np.sin(half)
        a, b = tp * tmp, (1.0 - tp) * tmp
        fa, fb = np.floor(a), np.floor(b)
        jp = np.minimum(fa.astype(np.int64), nside - 1)
        jm = np.minimum(fb.astype(np.int64), nside - 1 - jp)
        ir = jp + jm + 1
        c = tc * ir
        fc = np.floor(c)
        ip = fc.astype(np.int64) % (4 * ir)
        pix[cap] = _cap_pixel(npix, north, ir, ip)
        tie[cap] = (a == fa) | (b == fb) | (c == fc) | (za[cap] == 1.0)

    for i in np.flatnonzero(tie):
        pix[i] = _tie_pixel(res, float(theta[i]), float(z[i]), float(tt[i]))
    return pix.reshape(shape)[()]


# --- nested scheme --------------------------------------------------------

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_M8 = np.uint64(0x00FF00FF00FF00FF)
_M16 = np.uint64(0x0000FFFF0000FFFF)
_M32 = np.uint64(0x00000000FFFFFFFF)


def _spread_bits(v):
    v = np.asarray(v).astype(np.uint64)
    v = (v | (v << np.uint64(16))) & _M16
    v = (v | (v << np.uint64(8))) & _M8
    v = (v | (v << np.uint64(4))) & _M4
    v = (v | (v << np.uint64(2))) & _M2
    v = (v | (v << np.uint64(1))) & _M1
    return v.astype(np.int64)


def _compact_bits(v):
    v = np.asarray(v).astype(np.uint64) & _M1
    v = (v | (v >> np.uint64(1))) & _M2
    v = (v | (v >> np.uint64(2))) & _M4
    v = (v | (v >> np.uint64(4))) & _M8
    v = (v | (v >> np.uint64(8))) & _M16
    v = (v | (v >> np.uint64(16))) & _M32
    return v.astype(np.int64)


def nest2xyf(res: Resolution, pix):
    """Decode nested indices into (x, y, face)."""
    pix = np.asarray(pix, dtype=np.int64)
    face = pix >> (2 * res.j)
    ipf = pix & (res.nside * res.nside - 1)
    return _compact_bits(ipf), _compact_bits(ipf >> 1), face


def xyf2nest(res: Resolution, x, y, face):
    face = np.asarray(face, dtype=np.int64)
    return (face << (2 * res.j)) + _spread_bits(x) + (_spread_bits(y) << 1)


def xyf2ring(res: Resolution, x, y, face):
    nside, npix, ncap = res.nside, res.npix, res.ncap
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    face = np.asarray(face, dtype=np.int64)
    jr = _JRLL[face] * nside - x - y - 1

    north = jr < nside
    south = jr > 3 * nside
    nr = np.where(north, jr, np.where(south, 4 * nside - jr, nside))
    kshift = np.where(north | south, 0, (jr - nside) & 1)
    n_before = np.where(
        north,
        2 * nr * (nr - 1),
        np.where(south, npix - 2 * (nr + 1) * nr, ncap + (jr - nside) * 4 * nside),
    )
    jp = (_JPLL[face] * nr + x - y + 1 + kshift) // 2
    jp = np.where(jp > 4 * nside, jp - 4 * nside, jp)
    jp = np.where(jp < 1, jp + 4 * nside, jp)
    return n_before + jp - 1


def ring2xyf(res: Resolution, pix):
    nside = res.nside
    pix = np.atleast_1d(np.asarray(pix, dtype=np.int64))
    ring, iphi = _ring_slot(res, pix)

    north = ring < nside
    south = ring > 3 * nside
    belt = ~(north | south)
    nr = np.where(north, ring, np.where(south, 4 * nside - ring, nside))
    kshift = np.where(belt, (ring + nside) & 1, 0)

    face = np.empty_like(pix)
    face[north] = (iphi[north] - 1) // nr[north]
    face[south] = 8 + (iphi[south] - 1) // nr[south]
    ire = ring[belt] - nside + 1
    irm = 2 * nside + 2 - ire
    ib = iphi[belt]
    ifm = (ib - ire // 2 + nside - 1) // nside
    ifp = (ib - irm // 2 + nside - 1) // nside
    face[belt] = np.where(ifp == ifm, ifp | 4, np.where(ifp < ifm, ifp, ifm + 8))

    irt = ring - _JRLL[face] * nside + 1
    ipt = 2 * iphi - _JPLL[face] * nr - kshift - 1
    ipt = np.where(ipt >= 2 * nside, ipt - 8 * nside, ipt)
    return (ipt - irt) >> 1, (-ipt - irt) >> 1, face


def nest2ring(res: Resolution, pix):
    """Convert nested indices to ring indices."""
    pix = _check_pix(res, pix)
    x, y, face = nest2xyf(res, pix)
    return xyf2ring(res, x, y, face)[()]


def ring2nest(res: Resolution, pix):
    """Convert ring indices to nested indices."""
    pix = _check_pix(res, pix)
    x, y, face = ring2xyf(res, pix)
    return xyf2nest(res, x, y, face).reshape(pix.shape)[()]


def ang2pix(res: Resolution, theta, phi, ordering: Ordering | str = Ordering.RING):
    ordering = Ordering.parse(ordering)
    pix = ang2pix_ring(res, theta, phi)
    if ordering is Ordering.NESTED:
        pix = ring2nest(res, pix)
    return pix


def pix2ang(res: Resolution, pix, ordering: Ordering | str = Ordering.RING):
    ordering = Ordering.parse(ordering)
    if ordering is Ordering.NESTED:
        pix = nest2ring(res, pix)
    return pix2ang_ring(res, pix)


def convert_ordering(res: Resolution, pix, src, dst):
    src, dst = Ordering.parse(src), Ordering.parse(dst)
    if src is dst:
        return _check_pix(res, pix)[()]
    return nest2ring(res, pix) if src is Ordering.NESTED else ring2nest(res, pix)


# --- pixel identities, hierarchy and neighbours ---------------------------


@dataclass(frozen=True)
class PixelId:
    """A single pixel index bound to a resolution and ordering scheme."""

    res: Resolution
    index: int
    ordering: Ordering = Ordering.NESTED

    def __post_init__(self):
        object.__setattr__(self, "ordering", Ordering.parse(self.ordering))
        if not 0 <= self.index < self.res.npix:
            raise PixelDomainError(f"pixel index {self.index} outside [0, {self.res.npix})")
        object.__setattr__(self, "index", int(self.index))

    def to(self, ordering: Ordering | str) -> "PixelId":
        ordering = Ordering.parse(ordering)
        idx = convert_ordering(self.res, self.index, self.ordering, ordering)
        return PixelId(self.res, int(idx), ordering)


def _require_nested(p: PixelId):
    if p.ordering is not Ordering.NESTED:
        raise OrderingError("hierarchy and neighbour operations need nested ordering")


def children(p: PixelId) -> tuple[PixelId, ...]:
    """The four nested children of ``p`` at the next resolution level."""
    _require_nested(p)
    if p.res.j >= MAX_LEVEL:
        raise InvalidResolutionError(f"no resolution level beyond {MAX_LEVEL}")
    finer = Resolution(p.res.j + 1)
    return tuple(PixelId(finer, 4 * p.index + k, Ordering.NESTED) for k in range(4))


def parent(p: PixelId) -> PixelId:
    _require_nested(p)
    if p.res.j == 0:
        raise NoParentError(f"base pixel {p.index} has no parent")
    return PixelId(Resolution(p.res.j - 1), p.index >> 2, Ordering.NESTED)


def neighbour_indices(res: Resolution, pix: int) -> list[int]:
    """Nested indices of the 8 neighbours (SW, W, NW, N, NE, E, SE, S); -1 where absent."""
    nside = res.nside
    x, y, face = (int(v) for v in nest2xyf(res, int(pix)))
    out = []
    for dx, dy in zip(_XOFFSET, _YOFFSET):
        nx, ny, nbnum = x + dx, y + dy, 4
        if nx < 0:
            nx += nside
            nbnum -= 1
        elif nx >= nside:
            nx -= nside
            nbnum += 1
        if ny < 0:
            ny += nside
            nbnum -= 3
        elif ny >= nside:
            ny -= nside
            nbnum += 3
        f = _FACEARRAY[nbnum][face]
        if f < 0:
            out.append(-1)
            continue
        bits = _SWAPARRAY[nbnum][face >> 2]
        if bits & 1:
            nx = nside - nx - 1
        if bits & 2:
            ny = nside - ny - 1
        if bits & 4:
            nx, ny = ny, nx
        out.append(int(xyf2nest(res, nx, ny, f)))
    return out


def neighbors(p: PixelId) -> list[PixelId]:
    """Distinct pixels sharing an edge or a corner with ``p`` (nested ordering).

    At most 8; pixels at the corners where only three base faces meet have 7
    (6 at nside=1, where some directions also coincide).
    """
    _require_nested(p)
    seen = []
    for q in neighbour_indices(p.res, p.index):
        if q >= 0 and q != p.index and q not in seen:
            seen.append(q)
    return [PixelId(p.res, q, Ordering.NESTED) for q in seen]


class AutoResolution(NamedTuple):
    res: Resolution
    separated: bool


def auto_resolution(theta, phi, j_max: int = 13) -> AutoResolution:
    """Smallest level at which every point falls in its own pixel.

    If no level up to ``j_max`` separates the points, ``separated`` is False and
    ``res`` is level ``j_max``.
    """
    theta, phi = _prepare_angles(theta, phi)
    theta, phi = theta.ravel(), phi.ravel()
    if theta.size == 0:
        raise PixelDomainError("auto_resolution needs at least one point")
    if not 0 <= j_max <= MAX_LEVEL:
        raise InvalidResolutionError(f"j_max must lie in [0, {MAX_LEVEL}]")
    for j in range(j_max + 1):
        res = Resolution(j)
        if theta.size > res.npix:
            continue
        pix = ang2pix_ring(res, theta, phi)
        if np.unique(pix).size == pix.size:
            return AutoResolution(res, True)
    return AutoResolution(Resolution(j_max), False)
