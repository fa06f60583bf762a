"""Equirectangular raster rendering and binary PPM output."""

from __future__ import annotations

import math

import numpy as np

from . import geom, healpix
from .dataset import SphericalDataset

RAMPS = ("grayscale", "bluered")


def _ramp(t: np.ndarray, ramp: str) -> np.ndarray:
    level = np.rint(t * 255.0).astype(np.uint8)
    if ramp == "grayscale":
        return np.stack([level, level, level], axis=-1)
    if ramp == "bluered":
        return np.stack([level, np.zeros_like(level), 255 - level], axis=-1)
    raise ValueError(f"unknown colour ramp {ramp!r}; choose from {', '.join(RAMPS)}")


def render(
    ds: SphericalDataset,
    col: str,
    width: int,
    height: int,
    ramp: str = "grayscale",
    background=(255, 255, 255),
) -> np.ndarray:
    """Paint ``col`` onto a ``height x width`` RGB equirectangular raster.

    Row 0 is the northern edge, column 0 starts at longitude 0 and longitude
    grows to the right. Cells whose pixel has no row (or a NaN value) get
    ``background``. Values are min-max normalised over the column.
    """
    if width < 1 or height < 1:
        raise ValueError("raster width and height must be at least 1")
    values = ds.column(col)
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[...] = np.asarray(background, dtype=np.uint8)
    if ds.n == 0:
        return img

    lat = math.pi / 2.0 - math.pi * (np.arange(height) + 0.5) / height
    lon = 2.0 * math.pi * (np.arange(width) + 0.5) / width
    theta, phi = geom.geo2sph(lon[None, :], lat[:, None])
    theta, phi = np.broadcast_arrays(theta, phi)
    pix = healpix.ang2pix(ds.res, theta, phi, ds.ordering)

    row = np.searchsorted(ds.pix, pix)
    row = np.minimum(row, ds.n - 1)
    present = ds.pix[row] == pix
    cell = np.where(present, values[row], np.nan)
    painted = np.isfinite(cell)

    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return img
    lo, hi = float(finite.min()), float(finite.max())
    t = np.full(cell.shape, 0.5) if hi == lo else (cell - lo) / (hi - lo)
    t = np.clip(np.where(painted, t, 0.0), 0.0, 1.0)
    img[painted] = _ramp(t[painted], ramp)
    return img


def ppm_bytes(img: np.ndarray) -> bytes:
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape[:2]
    return f"P6\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def write_ppm(path, img: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(ppm_bytes(img))


def read_ppm(path) -> np.ndarray:
    """Read a binary P6 file as written by ``write_ppm``."""
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if len(parts) < 5 or parts[0] != b"P6" or parts[3] != b"255":
        raise ValueError(f"{path}: not a P6 file with maxval 255")
    w, h = int(parts[1]), int(parts[2])
    body = parts[4]
    return np.frombuffer(body[: w * h * 3], dtype=np.uint8).reshape(h, w, 3)
