import math

import numpy as np
import pytest

from sphds import dataset, geom, healpix
from sphds.dataset import DedupPolicy, PointTable, SphericalDataset
from sphds.errors import (
    DatasetFormatError,
    DuplicatePixelError,
    IngestError,
    SeparationError,
    UndefinedDirectionError,
)
from sphds.healpix import Resolution

from oracles import uniform_sphere

R1 = Resolution(0)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


class TestFromPoints:
    def test_three_base_points(self):
        t = PointTable([0.1, math.pi / 2, 3.0], [0.2, 2.0, 4.0], {"I": [1.0, 2.0, 3.0]})
        ds = dataset.from_points(t, R1)
        assert ds.n == 3
        assert np.all(np.diff(ds.pix) > 0)

    def test_keep_first(self):
        t = PointTable([1.0, 1.0, 2.0], [1.0, 1.0, 5.0], {"I": [10.0, 20.0, 30.0]})
        ds = dataset.from_points(t, Resolution(3))
        assert ds.n == 2
        p = healpix.ang2pix_ring(Resolution(3), 1.0, 1.0)
        assert ds.column("I")[ds.pix.tolist().index(p)] == 10.0

    def test_keep_first_follows_input_order(self):
        # three rows share a pixel; the survivor is the earliest row, not the smallest value
        res = Resolution(2)
        t = PointTable([0.8, 0.8001, 0.7999], [0.5, 0.5001, 0.4999], {"I": [5.0, 1.0, 9.0]})
        assert np.unique(healpix.ang2pix_ring(res, t.theta, t.phi)).size == 1
        assert dataset.from_points(t, res).column("I").tolist() == [5.0]

    def test_fail_policy(self):
        t = PointTable([0.3, 2.0, 0.3], [1.0, 1.0, 1.0], {"I": [1.0, 2.0, 3.0]})
        with pytest.raises(DuplicatePixelError) as info:
            dataset.from_points(t, R1, dedup=DedupPolicy.FAIL)
        assert info.value.rows == (0, 2)
        assert info.value.pixel == healpix.ang2pix_ring(R1, 0.3, 1.0)

    def test_auto_resolution(self):
        t = PointTable([0.3, math.pi - 0.3], [0.2, 0.2 + math.pi], {"I": [1.0, 2.0]})
        assert dataset.from_points(t, "auto").res.nside == 1
        t = PointTable([1.0, 1.0], [2.0, 2.0], {"I": [1.0, 2.0]})
        with pytest.raises(SeparationError):
            dataset.from_points(t, "auto", j_max=4)

    def test_nside_int_and_nested(self):
        t = PointTable([1.0], [2.0], {"I": [3.0]})
        ds = dataset.from_points(t, 8, ordering="nested")
        assert ds.res.nside == 8
        assert ds.pix[0] == healpix.ang2pix(Resolution(3), 1.0, 2.0, "nested")

    def test_idempotent_on_centres(self):
        rng = np.random.default_rng(0)
        res = Resolution(4)
        theta, phi = uniform_sphere(rng, 3000)
        ds = dataset.from_points(PointTable(theta, phi, {"I": theta}), res)
        again = dataset.from_points(PointTable(ds.theta, ds.phi, {"I": ds.column("I")}), res)
        assert again == ds

    def test_unique_sorted_and_distinct_count_oracle(self):
        rng = np.random.default_rng(1)
        res = Resolution(5)
        theta, phi = uniform_sphere(rng, 20000)
        ds = dataset.from_points(PointTable(theta, phi, {"I": phi}), res, ordering="nested")
        assert np.all(np.diff(ds.pix) > 0)
        assert ds.n == len(set(healpix.ang2pix(res, theta, phi, "nested").tolist()))

    def test_empty_table(self):
        with pytest.raises(IngestError):
            dataset.from_points(PointTable([], [], {}), R1)


class TestDatasetInvariants:
    def test_constructor_checks(self):
        with pytest.raises(DatasetFormatError):
            SphericalDataset(R1, "ring", [3, 3], {"I": [1, 2]})
        with pytest.raises(DatasetFormatError):
            SphericalDataset(R1, "ring", [12], {"I": [1]})
        with pytest.raises(DatasetFormatError):
            SphericalDataset(R1, "ring", [1, 2], {"I": [1]})
        with pytest.raises(ValueError):
            SphericalDataset(R1, "ring", [1], {"bad name": [1]})

    def test_immutable(self):
        ds = SphericalDataset(R1, "ring", [1, 4], {"I": [1.0, 2.0]})
        with pytest.raises(ValueError):
            ds.column("I")[0] = 5.0
        with pytest.raises(ValueError):
            ds.pix[0] = 0

    def test_unknown_column(self):
        ds = SphericalDataset(R1, "ring", [1], {"I": [1.0]})
        with pytest.raises(KeyError, match="available: I"):
            ds.column("J")

    def test_with_column(self):
        ds = SphericalDataset(R1, "ring", [1, 2], {"I": [1.0, 2.0]})
        ds2 = ds.with_column("I1", ds.column("I") / 2)
        assert list(ds2.columns) == ["I", "I1"]
        assert ds2.column("I1").tolist() == [0.5, 1.0]


class TestSubset:
    def test_exhaustive_scan(self):
        rng = np.random.default_rng(2)
        for nside in (1, 4, 16):
            res = Resolution.from_nside(nside)
            pix = np.sort(rng.choice(res.npix, size=max(1, res.npix // 2), replace=False))
            ds = SphericalDataset(res, "ring", pix, {"I": rng.normal(size=pix.size)})
            for w in (geom.Disc((1.0, 2.0), 0.9), geom.polygon([0.2, 1.4, 1.2], [0.1, 0.3, 1.7])):
                expected = [p for p in pix.tolist() if w.contains(*healpix.pix2ang_ring(res, p))]
                sub = dataset.subset(ds, w)
                assert sub.pix.tolist() == expected
                assert sub.res == res and sub.ordering is ds.ordering

    def test_full_and_disjoint(self):
        ds = SphericalDataset(R1, "ring", [0, 1, 2, 3], {"I": [1.0, 2.0, 3.0, 4.0]})
        assert dataset.subset(ds, None) == ds
        assert dataset.subset(ds, geom.Disc((math.pi, 0.0), 0.3)).n == 0

    def test_octant_fraction(self):
        rng = np.random.default_rng(3)
        theta, phi = uniform_sphere(rng, 50000)
        ds = dataset.from_points(PointTable(theta, phi, {"I": theta}), Resolution(7))
        octant = geom.polygon([0.0, math.pi / 2, math.pi / 2], [0.0, 0.0, math.pi / 2])
        assert abs(dataset.subset(ds, octant).n / ds.n - 1 / 8) <= 0.02


class TestGeoCsv:
    def test_single_row(self, tmp_path):
        path = write(tmp_path, "a.csv", "lon,lat,ozone\n0,0,300\n")
        t = dataset.ingest_geo_csv(path, "lon", "lat", ["ozone"])
        assert t.theta.tolist() == [math.pi / 2] and t.phi.tolist() == [0.0]
        assert t.columns["ozone"].tolist() == [300.0]

    def test_drops_missing_and_sentinels(self, tmp_path):
        text = "lon,lat,ozone\n0,,300\n10,20,-9999\n10,20,NA\n-170.5,-45,250\n10,abc,1\n,3,4\n20,30,310\n"
        path = write(tmp_path, "b.csv", text)
        t = dataset.ingest_geo_csv(path, "lon", "lat", ["ozone"])
        assert len(t) == 2 and t.dropped == 5
        assert t.columns["ozone"].tolist() == [250.0, 310.0]
        assert t.phi[0] == pytest.approx(math.radians(360 - 170.5))
        assert t.theta[0] == pytest.approx(math.radians(135))

    def test_survivor_count_matches_direct_scan(self, tmp_path):
        rng = np.random.default_rng(4)
        lines, good = ["lon,lat,v"], 0
        for _ in range(500):
            lon, lat, v = rng.uniform(-180, 180), rng.uniform(-90, 90), rng.uniform(0, 10)
            kind = rng.integers(0, 4)
            if kind == 0:
                lines.append(f"{lon},{lat},")
            elif kind == 1:
                lines.append(f"{lon},{lat},-9999")
            else:
                lines.append(f"{lon},{lat},{v}")
                good += 1
        t = dataset.ingest_geo_csv(write(tmp_path, "c.csv", "\n".join(lines) + "\n"), "lon", "lat", ["v"])
        assert len(t) == good and t.dropped == 500 - good

    def test_lon_offset_and_headerless(self, tmp_path):
        # station-list style: no header, V2 = lat, V3 = lon, V4 = elevation
        path = write(tmp_path, "d.csv", "ID1,10.0,-170.0,5\nID2,-998.8,-998.8,-998.8\nID3,0,0,0\n")
        t = dataset.ingest_geo_csv(path, "V3", "V2", ["V4"], lon_offset=math.pi, header=False)
        assert len(t) == 2 and t.dropped == 1
        np.testing.assert_allclose(t.phi, [math.radians(10.0), math.pi])
        np.testing.assert_allclose(t.theta, [math.radians(80.0), math.pi / 2])

    def test_radians(self, tmp_path):
        path = write(tmp_path, "r.csv", "x,y,v\n1.0,0.5,2\n")
        t = dataset.ingest_geo_csv(path, "x", "y", ["v"], unit="radians")
        assert t.phi[0] == 1.0 and t.theta[0] == pytest.approx(math.pi / 2 - 0.5)

    def test_errors(self, tmp_path):
        with pytest.raises(IngestError):
            dataset.ingest_geo_csv(str(tmp_path / "missing.csv"), "lon", "lat", ["v"])
        path = write(tmp_path, "e.csv", "lon,lat,v\n1,2,3\n")
        with pytest.raises(IngestError, match="'ozone' not found"):
            dataset.ingest_geo_csv(path, "lon", "lat", ["ozone"])
        path = write(tmp_path, "f.csv", "lon,lat,v\n1,,3\n")
        with pytest.raises(IngestError):
            dataset.ingest_geo_csv(path, "lon", "lat", ["v"])
        with pytest.raises(IngestError):
            dataset.ingest_geo_csv(write(tmp_path, "g.csv", ""), "lon", "lat", ["v"])


class TestSphCsv:
    def test_reads_and_filters(self, tmp_path):
        path = write(tmp_path, "s.csv", "theta,phi,I\n1.0,7.0,3\n4.0,1.0,2\n0.5,-1.0,1\n")
        t = dataset.ingest_sph_csv(path, "theta", "phi", ["I"])
        assert len(t) == 2 and t.dropped == 1
        np.testing.assert_allclose(t.phi, [7.0 - 2 * math.pi, 2 * math.pi - 1.0])


class TestCartCsv:
    def test_explicit_centre(self, tmp_path):
        path = write(tmp_path, "c.csv", "x,y,z\n1,0,0\n")
        t = dataset.ingest_cart_csv(path, "x", "y", "z", center=(0, 0, 0))
        assert (t.theta[0], t.phi[0], t.columns["I"][0]) == (math.pi / 2, 0.0, 1.0)

    def test_centroid(self, tmp_path):
        path = write(tmp_path, "c.csv", "x,y,z\n2,0,0\n0,0,0\n")
        t = dataset.ingest_cart_csv(path, "x", "y", "z")
        assert t.columns["I"].tolist() == [1.0, 1.0]
        np.testing.assert_allclose(t.phi, [0.0, math.pi])
        np.testing.assert_allclose(t.theta, [math.pi / 2, math.pi / 2])

    def test_point_at_centre(self, tmp_path):
        path = write(tmp_path, "c.csv", "x,y,z\n1,1,1\n")
        with pytest.raises(UndefinedDirectionError):
            dataset.ingest_cart_csv(path, "x", "y", "z")

    def test_radius_oracle(self, tmp_path):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(200, 3)) * 4 + 10
        path = tmp_path / "p.csv"
        np.savetxt(path, pts, delimiter=",", header="x,y,z", comments="", fmt="%.17g")
        t = dataset.ingest_cart_csv(str(path), "x", "y", "z")
        centred = pts - pts.mean(axis=0)
        np.testing.assert_allclose(t.columns["I"], np.linalg.norm(centred, axis=1), rtol=1e-14)
        back = geom.sph2car(t.theta, t.phi) * t.columns["I"][:, None]
        np.testing.assert_allclose(back, centred, atol=1e-12)


class TestPersistence:
    def test_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(6)
        res = Resolution(11)
        pix = np.sort(rng.choice(res.npix, 1000, replace=False))
        cols = {"I": rng.normal(size=1000) * 1e5, "I1": rng.uniform(size=1000) ** 7}
        cols["I"][3] = np.nan
        cols["I1"][4] = -0.0
        ds = SphericalDataset(res, "nested", pix, cols)
        path = str(tmp_path / "ds.txt")
        dataset.save(ds, path)
        back = dataset.load(path)
        assert back == ds
        assert back.column("I1").view(np.int64).tolist() == ds.column("I1").view(np.int64).tolist()

    def test_trivial_dataset(self, tmp_path):
        ds = SphericalDataset(R1, "ring", [0, 5, 11], {"I": [1.5, 2.5, 3.5]})
        path = str(tmp_path / "t.txt")
        dataset.save(ds, path)
        with open(path, encoding="utf-8") as fh:
            assert fh.readline() == "sphds v1 nside=1 ordering=ring columns=I\n"
        assert dataset.load(path) == ds

    def test_empty_dataset(self, tmp_path):
        path = write(tmp_path, "e.txt", "sphds v1 nside=2048 ordering=ring columns=I\n")
        ds = dataset.load(path)
        assert ds.n == 0 and ds.res.nside == 2048

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "hello\n1 2\n",
            "sphds v1 nside=3 ordering=ring columns=I\n",
            "sphds v1 nside=2 ordering=spiral columns=I\n",
            "sphds v1 nside=1 ordering=ring columns=I\n12 1.0\n",
            "sphds v1 nside=1 ordering=ring columns=I\n1 1.0 2.0\n",
            "sphds v1 nside=1 ordering=ring columns=I\n1 abc\n",
            "sphds v1 nside=1 ordering=ring columns=I\n2 1.0\n1 1.0\n",
        ],
    )
    def test_malformed(self, tmp_path, text):
        with pytest.raises(DatasetFormatError):
            dataset.load(write(tmp_path, "m.txt", text))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetFormatError):
            dataset.load(str(tmp_path / "nope.txt"))
