"""HEALPix pixelation and statistics for spherical data."""

from .dataset import (
    DedupPolicy,
    PointTable,
    SphericalDataset,
    from_points,
    ingest_cart_csv,
    ingest_geo_csv,
    ingest_sph_csv,
    load,
    save,
    subset,
)
from .geom import Disc, Polygon, car2sph, geo2sph, geodesic, sph2car, sph2geo
from .healpix import Ordering, PixelId, Resolution, resolution_from_nside

__version__ = "0.1.0"

__all__ = [
    "DedupPolicy",
    "Disc",
    "Ordering",
    "PixelId",
    "PointTable",
    "Polygon",
    "Resolution",
    "SphericalDataset",
    "car2sph",
    "from_points",
    "geo2sph",
    "geodesic",
    "ingest_cart_csv",
    "ingest_geo_csv",
    "ingest_sph_csv",
    "load",
    "resolution_from_nside",
    "save",
    "sph2car",
    "sph2geo",
    "subset",
]
