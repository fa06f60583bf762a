"""Sparse pixel-indexed datasets and the ingestion pipelines that build them."""

from __future__ import annotations

import csv
import enum
import math
import os
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import geom, healpix
from .errors import (
    DatasetFormatError,
    DuplicatePixelError,
    IngestError,
    SeparationError,
    UndefinedDirectionError,
)
from .healpix import Ordering, Resolution

SENTINEL = -9999.0
FORMAT_TAG = "sphds v1"
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


class DedupPolicy(str, enum.Enum):
    KEEP_FIRST = "first"
    FAIL = "fail"


def _check_column_name(name: str) -> str:
    if not isinstance(name, str) or not _NAME_RE.match(name):
        raise ValueError(f"invalid column name {name!r}")
    return name


@dataclass
class PointTable:
    """Points on the sphere with named value columns, before pixelation."""

    theta: np.ndarray
    phi: np.ndarray
    columns: dict[str, np.ndarray]
    note: str = ""
    dropped: int = 0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64).ravel()
        self.phi = geom.wrap_azimuth(np.asarray(self.phi, dtype=np.float64).ravel())
        self.phi = np.atleast_1d(self.phi)
        n = self.theta.size
        if self.phi.size != n:
            raise ValueError("theta and phi differ in length")
        if not (np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.phi))):
            raise ValueError("coordinates must be finite")
        if n and (self.theta.min() < 0.0 or self.theta.max() > math.pi):
            raise ValueError("theta outside [0, pi]")
        cols = {}
        for name, values in self.columns.items():
            values = np.asarray(values, dtype=np.float64).ravel()
            if values.size != n:
                raise ValueError(f"column {name!r} has {values.size} values for {n} points")
            cols[_check_column_name(name)] = values
        self.columns = cols

    def __len__(self):
        return self.theta.size


class SphericalDataset:
    """Values attached to distinct HEALPix pixels at a fixed resolution and ordering.

    Rows are kept sorted by pixel index. Instances are treated as immutable.
    """

    def __init__(self, res: Resolution, ordering, pix, columns: Mapping[str, Iterable[float]]):
        self.res = res
        self.ordering = Ordering.parse(ordering)
        pix = np.array(pix, dtype=np.int64).ravel()
        if pix.size:
            if pix[0] < 0 or pix[-1] >= res.npix:
                raise DatasetFormatError(f"pixel index outside [0, {res.npix})")
            if np.any(np.diff(pix) <= 0):
                raise DatasetFormatError("pixel indices must be strictly increasing")
        self.pix = pix
        self.pix.setflags(write=False)
        self.columns: dict[str, np.ndarray] = {}
        for name, values in columns.items():
            values = np.array(values, dtype=np.float64).ravel()
            if values.size != pix.size:
                raise DatasetFormatError(f"column {name!r} has {values.size} values for {pix.size} rows")
            values.setflags(write=False)
            self.columns[_check_column_name(name)] = values
        self._angles = None

    def __len__(self):
        return self.pix.size

    @property
    def n(self) -> int:
        return self.pix.size

    def __repr__(self):
        return (
            f"SphericalDataset(nside={self.res.nside}, ordering={self.ordering.value}, "
            f"n={self.n}, columns={list(self.columns)})"
        )

    def __eq__(self, other):
        if not isinstance(other, SphericalDataset):
            return NotImplemented
        return (
            self.res == other.res
            and self.ordering is other.ordering
            and np.array_equal(self.pix, other.pix)
            and list(self.columns) == list(other.columns)
            and all(np.array_equal(self.columns[k], other.columns[k], equal_nan=True) for k in self.columns)
        )

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"unknown column {name!r}; available: {', '.join(self.columns) or 'none'}") from None

    @property
    def angles(self):
        """Pixel-centre (theta, phi) arrays, one entry per row."""
        if self._angles is None:
            theta, phi = healpix.pix2ang(self.res, self.pix, self.ordering)
            self._angles = (np.atleast_1d(theta), np.atleast_1d(phi))
        return self._angles

    @property
    def theta(self) -> np.ndarray:
        return self.angles[0]

    @property
    def phi(self) -> np.ndarray:
        return self.angles[1]

    def xyz(self) -> np.ndarray:
        return geom.sph2car(self.theta, self.phi).reshape(-1, 3)

    def mask(self, window) -> np.ndarray:
        if window is None:
            return np.ones(self.n, dtype=bool)
        return np.asarray(window.contains(self.theta, self.phi), dtype=bool).reshape(-1)

    def take(self, rows) -> "SphericalDataset":
        rows = np.asarray(rows)
        return SphericalDataset(self.res, self.ordering, self.pix[rows], {k: v[rows] for k, v in self.columns.items()})

    def subset(self, window) -> "SphericalDataset":
        return subset(self, window)

    def with_column(self, name: str, values) -> "SphericalDataset":
        cols = dict(self.columns)
        cols[name] = values
        return SphericalDataset(self.res, self.ordering, self.pix, cols)


def from_points(
    table: PointTable,
    res: Resolution | int | str = "auto",
    ordering=Ordering.RING,
    dedup: DedupPolicy | str = DedupPolicy.KEEP_FIRST,
    j_max: int = 13,
) -> SphericalDataset:
    """Pixelate a point table.

    ``res`` is a Resolution, an nside, or ``"auto"`` for the coarsest level that
    separates all points. With ``KEEP_FIRST`` a later row landing in an occupied
    pixel is dropped; with ``FAIL`` it raises DuplicatePixelError.
    """
    if len(table) == 0:
        raise IngestError("no points to pixelate")
    dedup = DedupPolicy(dedup)
    ordering = Ordering.parse(ordering)
    if isinstance(res, str):
        if res != "auto":
            raise ValueError(f"resolution must be a Resolution, an nside or 'auto', got {res!r}")
        res, separated = healpix.auto_resolution(table.theta, table.phi, j_max=j_max)
        if not separated:
            raise SeparationError(f"points not separable up to nside={res.nside}")
    elif not isinstance(res, Resolution):
        res = healpix.resolution_from_nside(res)

    pix = np.atleast_1d(healpix.ang2pix(res, table.theta, table.phi, ordering))
    uniq, first = np.unique(pix, return_index=True)
    if uniq.size != pix.size and dedup is DedupPolicy.FAIL:
        order = np.argsort(pix, kind="stable")
        sp = pix[order]
        k = int(np.flatnonzero(sp[1:] == sp[:-1])[0])
        raise DuplicatePixelError(sp[k], np.sort(order[sp == sp[k]]))
    return SphericalDataset(res, ordering, uniq, {k: v[first] for k, v in table.columns.items()})


def subset(ds: SphericalDataset, window) -> SphericalDataset:
    """Rows whose pixel centre lies in ``window`` (``None`` = whole sphere)."""
    if window is None:
        return ds
    return ds.take(np.flatnonzero(ds.mask(window)))


# --- CSV ingestion ---------------------------------------------------------


def _read_csv(path, header: bool):
    if not os.path.isfile(path):
        raise IngestError(f"no such file: {path}")
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    if header:
        if not rows:
            raise IngestError(f"{path} is empty")
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    else:
        width = max((len(r) for r in rows), default=0)
        names = [f"V{i + 1}" for i in range(width)]
    return names, rows


def _to_float(cell: str) -> float:
    cell = cell.strip()
    if not cell or cell.upper() in ("NA", "NAN"):
        return math.nan
    try:
        return float(cell)
    except ValueError:
        return math.nan


def _extract(path, wanted: Sequence[str], header: bool, sentinels):
    names, rows = _read_csv(path, header)
    idx = []
    for w in wanted:
        if w not in names:
            raise IngestError(f"column {w!r} not found in {path} (columns: {', '.join(names)})")
        idx.append(names.index(w))
    data = np.array(
        [[_to_float(r[i]) if i < len(r) else math.nan for i in idx] for r in rows],
        dtype=np.float64,
    ).reshape(len(rows), len(idx))
    ok = np.all(np.isfinite(data), axis=1)
    for s in sentinels:
        ok &= ~np.any(data == s, axis=1)
    return data, ok


def ingest_geo_csv(
    path,
    lon_col: str,
    lat_col: str,
    value_cols: Sequence[str],
    unit: str = "degrees",
    lon_offset: float = 0.0,
    sentinels: Sequence[float] = (SENTINEL,),
    header: bool = True,
) -> PointTable:
    """Read longitude/latitude rows into a PointTable.

    Rows with a missing, non-numeric or sentinel entry in any used column are
    dropped, as are rows whose latitude lies outside [-90, 90] degrees or whose
    longitude lies outside [-360, 360] degrees (placeholder codes such as
    -998.8). ``lon_offset`` is in radians and is added before wrapping. Without
    a header, columns are named ``V1``, ``V2``, ...
    """
    if unit not in ("degrees", "radians"):
        raise ValueError("unit must be 'degrees' or 'radians'")
    value_cols = list(value_cols)
    data, ok = _extract(path, [lon_col, lat_col, *value_cols], header, sentinels)
    scale = math.pi / 180.0 if unit == "degrees" else 1.0
    lon = data[:, 0] * scale
    lat = data[:, 1] * scale
    with np.errstate(invalid="ignore"):
        ok &= (np.abs(lat) <= math.pi / 2.0) & (np.abs(lon) <= 2.0 * math.pi)
    if not ok.any():
        raise IngestError(f"no usable rows in {path}")
    theta, phi = geom.geo2sph(lon[ok] + lon_offset, lat[ok])
    cols = {name: data[ok, 2 + k] for k, name in enumerate(value_cols)}
    return PointTable(theta, phi, cols, note=f"geo:{os.path.basename(path)}", dropped=int((~ok).sum()))


def ingest_sph_csv(
    path,
    theta_col: str,
    phi_col: str,
    value_cols: Sequence[str],
    unit: str = "radians",
    sentinels: Sequence[float] = (SENTINEL,),
    header: bool = True,
) -> PointTable:
    """Read rows already in spherical (theta, phi) coordinates."""
    if unit not in ("degrees", "radians"):
        raise ValueError("unit must be 'degrees' or 'radians'")
    value_cols = list(value_cols)
    data, ok = _extract(path, [theta_col, phi_col, *value_cols], header, sentinels)
    scale = math.pi / 180.0 if unit == "degrees" else 1.0
    theta = data[:, 0] * scale
    with np.errstate(invalid="ignore"):
        ok &= (theta >= 0.0) & (theta <= math.pi)
    if not ok.any():
        raise IngestError(f"no usable rows in {path}")
    cols = {name: data[ok, 2 + k] for k, name in enumerate(value_cols)}
    return PointTable(theta[ok], data[ok, 1] * scale, cols, note=f"sph:{os.path.basename(path)}", dropped=int((~ok).sum()))


def ingest_cart_csv(
    path,
    x_col: str,
    y_col: str,
    z_col: str,
    center: Sequence[float] | None = None,
    value_name: str = "I",
    header: bool = True,
) -> PointTable:
    """Read surface points of a star-shaped body as directions from a centre.

    The centre defaults to the per-axis mean of the surviving rows. The value
    column holds each point's distance from the centre.
    """
    data, ok = _extract(path, [x_col, y_col, z_col], header, ())
    if not ok.any():
        raise IngestError(f"no usable rows in {path}")
    pts = data[ok]
    c = pts.mean(axis=0) if center is None else np.asarray(center, dtype=np.float64)
    centred = pts - c
    radius = np.sqrt(np.einsum("ij,ij->i", centred, centred))
    if np.any(radius == 0.0):
        row = int(np.flatnonzero(radius == 0.0)[0])
        raise UndefinedDirectionError(f"point {row} coincides with the centre")
    theta, phi = geom.car2sph(centred)
    return PointTable(
        np.atleast_1d(theta),
        np.atleast_1d(phi),
        {value_name: radius},
        note=f"cart:{os.path.basename(path)}",
        dropped=int((~ok).sum()),
    )


# --- persistence -----------------------------------------------------------


def save(ds: SphericalDataset, path) -> None:
    """Write ``ds`` in the line-oriented ``sphds v1`` text format."""
    names = list(ds.columns)
    cols = [ds.columns[k] for k in names]
    lines = [f"{FORMAT_TAG} nside={ds.res.nside} ordering={ds.ordering.value} columns={','.join(names)}"]
    for i, p in enumerate(ds.pix.tolist()):
        lines.append(" ".join([str(p), *(repr(float(c[i])) for c in cols)]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


_HEADER_RE = re.compile(r"^sphds v1 nside=(\d+) ordering=(\w+) columns=(\S*)$")


def load(path) -> SphericalDataset:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetFormatError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    m = _HEADER_RE.match(lines[0].strip()) if lines else None
    if not m:
        raise DatasetFormatError(f"{path}: missing or malformed sphds header")
    try:
        res = healpix.resolution_from_nside(int(m.group(1)))
        ordering = Ordering.parse(m.group(2))
        names = [n for n in m.group(3).split(",") if n]
        for n in names:
            _check_column_name(n)
    except ValueError as exc:
        raise DatasetFormatError(f"{path}: {exc}") from exc

    pix = []
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 1 + len(names):
            raise DatasetFormatError(f"{path}:{lineno}: expected {1 + len(names)} fields, got {len(parts)}")
        try:
            pix.append(int(parts[0]))
            values.append([float(v) for v in parts[1:]])
        except ValueError as exc:
            raise DatasetFormatError(f"{path}:{lineno}: {exc}") from exc
    arr = np.array(values, dtype=np.float64).reshape(len(pix), len(names))
    return SphericalDataset(res, ordering, pix, {n: arr[:, k] for k, n in enumerate(names)})
