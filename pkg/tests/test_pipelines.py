"""End-to-end runs on synthetic stand-ins shaped like the three source datasets."""

import math
import time

import numpy as np
import pytest

from sphds import dataset, geom, healpix, render, stats
from sphds.healpix import Resolution

from oracles import icosphere

WIN_SOUTH = geom.polygon([math.pi / 2, math.pi, math.pi / 2], [0.0, 0.0, math.pi / 2])


@pytest.mark.slow
def test_ozone_scale_pipeline(tmp_path):
    # 173,405 rows on a regular lon/lat grid plus jitter, as in a gridded product
    rng = np.random.default_rng(1988)
    n = 173_405
    lon = rng.uniform(-180, 180, n)
    lat = np.degrees(np.arcsin(rng.uniform(-1, 1, n)))
    ozone = 300 + 60 * np.sin(np.radians(lat)) ** 2 - 100 * (lat < -70) + rng.normal(0, 8, n)
    csv = tmp_path / "ozone.csv"
    with open(csv, "w", encoding="utf-8") as fh:
        fh.write("lon,lat,ozone\n")
        fh.writelines(f"{a:.3f},{b:.3f},{c:.1f}\n" for a, b, c in zip(lon, lat, ozone))
    t0 = time.perf_counter()
    table = dataset.ingest_geo_csv(str(csv), "lon", "lat", ["ozone"])
    ds = dataset.from_points(table, Resolution(11))
    mean = stats.mean_value(ds, "ozone")
    win1 = geom.polygon([0.0, math.pi / 2, math.pi / 2], [0.0, 0.0, math.pi / 2])
    p = stats.exprob(ds, mean, win1, "ozone")
    rows = stats.extrema(ds, 3, None, "smallest", "ozone")
    h = stats.entropy(ds, win1, "ozone")
    img = render.render(ds, "ozone", 720, 360)
    elapsed = time.perf_counter() - t0
    assert len(table) == n
    res = Resolution(11)
    assert ds.n == len(set(healpix.ang2pix_ring(res, table.theta, table.phi).tolist()))
    assert ds.n > 170_000
    assert 0 < p < 1 and h > 0
    assert all(r.theta > math.radians(160) for r in rows)  # the synthetic hole sits south of -70
    assert img.shape == (360, 720, 3)
    assert elapsed < 120


def test_igra_like_pipeline(tmp_path):
    # headerless station list: id, lat, lon, elevation, with placeholder and sentinel rows
    rng = np.random.default_rng(2)
    n = 2700
    lat = np.degrees(np.arcsin(rng.uniform(-1, 1, n)))
    lon = rng.uniform(-180, 180, n)
    elev = np.where(rng.uniform(size=n) < 0.98, rng.gamma(1.5, 300, n), -rng.uniform(1, 50, n))
    lines = [f"ST{k:05d},{a:.4f},{b:.4f},{c:.1f},XX,NAME,1950,2018,1000" for k, (a, b, c) in enumerate(zip(lat, lon, elev))]
    # a twin station 0.2 arc-seconds away, one placeholder row and one sentinel row
    lines.append(f"TWIN,{lat[0]:.4f},{lon[0] + 0.0001:.4f},5.0,XX,NAME,1950,2018,1")
    lines.append("BAD1,-98.8888,-998.8,-998.8,XX,NAME,1950,2018,1")
    lines.append("BAD2,10.0,20.0,-9999,XX,NAME,1950,2018,1")
    csv = tmp_path / "igra.csv"
    csv.write_text("\n".join(lines) + "\n")
    table = dataset.ingest_geo_csv(str(csv), "V3", "V2", ["V4"], lon_offset=math.pi, header=False)
    assert len(table) == n + 1 and table.dropped == 2
    ds = dataset.from_points(table, Resolution(11))
    rel = stats.fmf(ds, 0.0, "V4", relative=True)
    assert rel == np.count_nonzero(ds.column("V4") >= 0) / ds.n
    exact = stats.min_dist(ds, "exact")
    assert exact == stats.min_dist(ds, "pruned")
    assert exact < 1e-3  # the twin pair
    hists = stats.ang_distribution(ds, "V4")
    text = stats.histograms_to_csv(hists)
    assert len(text.splitlines()) == 41


def test_amygdala_like_pipeline(tmp_path):
    # 2562 surface points of a lumpy ellipsoid, off-centre, as Cartesian rows
    v = icosphere(4)
    rng = np.random.default_rng(3)
    radius = 7.5 * (1 + 0.15 * v[:, 0] - 0.1 * v[:, 2] ** 2) * (1 + 0.02 * rng.normal(size=v.shape[0]))
    pts = v * radius[:, None] * np.array([1.0, 0.8, 1.2]) + np.array([40.0, -12.0, 7.0])
    csv = tmp_path / "amy.csv"
    np.savetxt(csv, pts, delimiter=",", header="x,y,z", comments="", fmt="%.10f")
    t0 = time.perf_counter()
    table = dataset.ingest_cart_csv(str(csv), "x", "y", "z")
    ds = dataset.from_points(table, "auto")
    mean = stats.mean_value(ds)
    area = stats.fmf(ds, mean)
    asym = stats.asymmetry_extrema(ds, WIN_SOUTH, 10)
    elapsed = time.perf_counter() - t0
    assert ds.n == 2562
    centred = pts - pts.mean(axis=0)
    assert mean == pytest.approx(np.linalg.norm(centred, axis=1).mean(), rel=1e-12)
    above = np.count_nonzero(np.linalg.norm(centred, axis=1) >= mean)
    assert area == pytest.approx(above * healpix.pixel_area(ds.res), rel=1e-12)
    inside = ds.column("I")[ds.mask(WIN_SOUTH)]
    assert asym == pytest.approx(np.sort(inside)[:10].mean() / mean, rel=1e-12)
    assert elapsed < 5
