"""Statistics over pixelated spherical datasets.

Every window statistic works on pixel centres, after pixelation. ``window=None``
means the whole sphere.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import geom, healpix
from .dataset import SphericalDataset
from .errors import EmptySubsetError

EXACT_SCAN_LIMIT = 10_000


def _window_values(ds: SphericalDataset, window, col: str):
    values = ds.column(col)
    mask = ds.mask(window)
    return values[mask], mask


def mean_value(ds: SphericalDataset, col: str = "I") -> float:
    values = ds.column(col)
    if values.size == 0:
        raise EmptySubsetError("mean of an empty dataset")
    return float(np.mean(values))


def exprob(ds: SphericalDataset, alpha: float, window=None, col: str = "I") -> float:
    """Fraction of rows in ``window`` whose value is strictly above ``alpha``."""
    values, _ = _window_values(ds, window, col)
    if values.size == 0:
        raise EmptySubsetError("exceedance probability over an empty window")
    return int(np.count_nonzero(values > alpha)) / values.size


class ExtremaRow(NamedTuple):
    pix: int
    theta: float
    phi: float
    value: float


def extrema(ds: SphericalDataset, n: int, window=None, side: str = "smallest", col: str = "I") -> list[ExtremaRow]:
    """The ``n`` smallest (ascending) or largest (descending) values in ``window``.

    Ties are broken by ascending pixel index.
    """
    if side not in ("smallest", "largest"):
        raise ValueError("side must be 'smallest' or 'largest'")
    if n < 0:
        raise ValueError("n must be non-negative")
    values, mask = _window_values(ds, window, col)
    if values.size < n:
        raise EmptySubsetError(f"window holds {values.size} rows, fewer than the {n} requested")
    rows = np.flatnonzero(mask)
    key = values if side == "smallest" else -values
    order = np.lexsort((ds.pix[rows], key))[:n]
    sel = rows[order]
    return [
        ExtremaRow(int(ds.pix[i]), float(ds.theta[i]), float(ds.phi[i]), float(ds.columns[col][i]))
        for i in sel
    ]


def sturges_bins(n: int) -> int:
    return int(math.ceil(math.log2(n))) + 1 if n > 1 else 1


def entropy(ds: SphericalDataset, window=None, col: str = "I", bins: int | str = "auto") -> float:
    """Shannon entropy (natural log) of an equal-width histogram of the values.

    The histogram spans [min, max] of the values in the window; ``"auto"`` picks
    the bin count by Sturges' rule.
    """
    values, _ = _window_values(ds, window, col)
    n = values.size
    if n == 0:
        raise EmptySubsetError("entropy over an empty window")
    k = sturges_bins(n) if bins == "auto" else int(bins)
    if k < 1:
        raise ValueError("bins must be positive")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return 0.0
    idx = np.floor((values - lo) / (hi - lo) * k).astype(np.int64)
    counts = np.bincount(np.clip(idx, 0, k - 1), minlength=k)
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def fmf(ds: SphericalDataset, level: float, col: str = "I", relative: bool = False) -> float:
    """Area of the excursion set {value >= level}, as pixel count times pixel area.

    With ``relative=True`` the area is divided by the area of all rows.
    """
    values = ds.column(col)
    hits = int(np.count_nonzero(values >= level))
    if relative:
        if values.size == 0:
            raise EmptySubsetError("relative excursion area of an empty dataset")
        return hits / values.size
    return hits * healpix.pixel_area(ds.res)


def _max_dot_exact(xyz: np.ndarray, block: int = 256) -> float:
    n = xyz.shape[0]
    best = -1.0
    for s in range(0, n - 1, block):
        a = xyz[s : s + block]
        b = xyz[s + 1 :]
        dot = (
            a[:, None, 0] * b[None, :, 0]
            + a[:, None, 1] * b[None, :, 1]
            + a[:, None, 2] * b[None, :, 2]
        )
        # keep only pairs (i, j) with j > i
        ii = np.arange(a.shape[0])[:, None]
        jj = np.arange(b.shape[0])[None, :]
        dot = np.where(jj >= ii, dot, -2.0)
        best = max(best, float(dot.max()))
    return best


def _max_dot_pruned(theta: np.ndarray, xyz: np.ndarray, margin: float = 1e-9) -> float:
    # Rows sorted by colatitude: rows on one iso-latitude ring are contiguous,
    # and a pair is only compared while its colatitude gap could still beat the
    # best distance found so far (geodesic >= |delta theta|).
    order = np.argsort(theta, kind="stable")
    th = theta[order]
    v = xyz[order]
    best_dot = -1.0
    for k in range(1, th.size):
        gap = th[k:] - th[:-k]
        bound = math.acos(max(-1.0, min(1.0, best_dot))) + margin
        active = np.flatnonzero(gap <= bound)
        if active.size == 0:
            break
        a = v[active]
        b = v[active + k]
        dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1] + a[:, 2] * b[:, 2]
        best_dot = max(best_dot, float(dot.max()))
    return best_dot


def min_dist(ds: SphericalDataset, method: str = "auto") -> float:
    """Smallest geodesic distance between any two pixel centres, in radians.

    ``method`` is ``"exact"`` (all pairs), ``"pruned"`` (colatitude-band sweep)
    or ``"auto"`` (exact up to 10 000 rows). Both give bit-identical results.
    """
    if ds.n < 2:
        raise EmptySubsetError("minimum distance needs at least two rows")
    if method == "auto":
        method = "exact" if ds.n <= EXACT_SCAN_LIMIT else "pruned"
    xyz = ds.xyz()
    if method == "exact":
        best = _max_dot_exact(xyz)
    elif method == "pruned":
        best = _max_dot_pruned(ds.theta, xyz)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(np.arccos(np.clip(best, -1.0, 1.0)))


@dataclass(frozen=True)
class Histogram:
    axis: str  # "theta" or "phi"
    edges: np.ndarray
    counts: np.ndarray
    means: np.ndarray  # NaN for empty bins

    def rows(self):
        for k in range(self.counts.size):
            yield self.axis, float(self.edges[k]), float(self.edges[k + 1]), int(self.counts[k]), float(self.means[k])


def _axis_histogram(axis, angle, values, upper, bins):
    edges = np.linspace(0.0, upper, bins + 1)
    idx = np.clip(np.floor(angle / upper * bins).astype(np.int64), 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    sums = np.bincount(idx, weights=values, minlength=bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return Histogram(axis, edges, counts, means)


def ang_distribution(ds: SphericalDataset, col: str = "I", bins_theta: int = 20, bins_phi: int = 20):
    """Marginal row counts and mean values over equal-width theta and phi bins."""
    if ds.n == 0:
        raise EmptySubsetError("angular distribution of an empty dataset")
    if bins_theta < 1 or bins_phi < 1:
        raise ValueError("bin counts must be positive")
    values = ds.column(col)
    return (
        _axis_histogram("theta", ds.theta, values, math.pi, bins_theta),
        _axis_histogram("phi", ds.phi, values, 2.0 * math.pi, bins_phi),
    )


def _g7(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.7g}"


def histograms_to_csv(hists: Sequence[Histogram]) -> str:
    out = io.StringIO()
    out.write("axis,bin_lo,bin_hi,count,mean\n")
    for h in hists:
        for axis, lo, hi, count, mean in h.rows():
            out.write(f"{axis},{_g7(lo)},{_g7(hi)},{count},{_g7(mean)}\n")
    return out.getvalue()


def asymmetry_mean(ds: SphericalDataset, window, col: str = "I") -> float:
    """Mean radial distance inside ``window`` relative to the overall mean."""
    values, _ = _window_values(ds, window, col)
    if values.size == 0:
        raise EmptySubsetError("asymmetry over an empty window")
    return float(np.mean(values)) / mean_value(ds, col)


def asymmetry_extrema(ds: SphericalDataset, window, n: int = 10, side: str = "smallest", col: str = "I") -> float:
    """Mean of the ``n`` extreme values inside ``window`` relative to the overall mean."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rows = extrema(ds, n, window, side, col)
    return float(np.mean([r.value for r in rows])) / mean_value(ds, col)


def mean_direction(ds: SphericalDataset) -> geom.CartCoord:
    """Sample mean direction of the dataset's pixel centres."""
    return geom.sample_mean_direction(ds.xyz())
