"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 empty or insufficient data,
4 point separation failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import dataset, geom, healpix, render, stats
from .errors import (
    DatasetFormatError,
    DuplicatePixelError,
    EmptySubsetError,
    IngestError,
    InvalidResolutionError,
    SeparationError,
    SphdsError,
    UndefinedDirectionError,
    WindowError,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SEPARATION, EXIT_IO = 0, 2, 3, 4, 5

STATS = ("mean", "exprob", "entropy", "fmf", "mindist", "asym-mean", "asym-extrema")


class UsageError(Exception):
    pass


_EXIT_CODES = (
    ((IngestError, EmptySubsetError, DuplicatePixelError, UndefinedDirectionError), EXIT_DATA),
    (SeparationError, EXIT_SEPARATION),
    ((DatasetFormatError, OSError), EXIT_IO),
)


def _g7(x: float) -> str:
    return f"{x:.7g}"


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed {what}: {text!r}") from None


def parse_window(args) -> geom.Window | None:
    scale = math.pi / 180.0 if args.deg else 1.0
    if args.win_polygon and args.win_disc:
        raise UsageError("give at most one of --win-polygon and --win-disc")
    try:
        if args.win_polygon:
            verts = []
            for item in args.win_polygon.split(";"):
                if not item.strip():
                    continue
                tp = _floats(item, "polygon vertex")
                if len(tp) != 2:
                    raise UsageError(f"polygon vertex needs 'theta,phi', got {item!r}")
                verts.append((tp[0] * scale, tp[1] * scale))
            return geom.Polygon(tuple(verts))
        if args.win_disc:
            v = _floats(args.win_disc, "disc")
            if len(v) != 3:
                raise UsageError("--win-disc needs 'theta,phi,radius'")
            return geom.Disc((v[0] * scale, v[1] * scale), v[2] * scale)
    except WindowError as exc:
        raise UsageError(f"malformed window: {exc}") from None
    return None


def _add_window_flags(p):
    p.add_argument("--win-polygon", metavar="T1,P1;T2,P2;...", help="convex polygon window (theta,phi pairs)")
    p.add_argument("--win-disc", metavar="T,P,R", help="disc window: centre theta, phi and angular radius")
    p.add_argument("--deg", action="store_true", help="window angles are in degrees")


def _level(text: str, ds, col) -> float:
    if text == "mean":
        return stats.mean_value(ds, col)
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"expected a number or 'mean', got {text!r}") from None


def cmd_convert(args, out) -> int:
    values = [v for v in (args.value_cols or "").split(",") if v]
    header = not args.no_header
    if args.kind == "geo":
        if not (args.lon_col and args.lat_col and values):
            raise UsageError("--kind geo needs --lon-col, --lat-col and --value-cols")
        table = dataset.ingest_geo_csv(
            args.input,
            args.lon_col,
            args.lat_col,
            values,
            unit=args.unit or "degrees",
            lon_offset=math.radians(args.lon_offset_deg),
            header=header,
        )
    elif args.kind == "sph":
        if not (args.theta_col and args.phi_col and values):
            raise UsageError("--kind sph needs --theta-col, --phi-col and --value-cols")
        table = dataset.ingest_sph_csv(
            args.input, args.theta_col, args.phi_col, values, unit=args.unit or "radians", header=header
        )
    else:
        if not (args.x_col and args.y_col and args.z_col):
            raise UsageError("--kind cart needs --x-col, --y-col and --z-col")
        center = None
        if args.center != "centroid":
            center = _floats(args.center, "--center")
            if len(center) != 3:
                raise UsageError("--center needs 'x,y,z' or 'centroid'")
        table = dataset.ingest_cart_csv(args.input, args.x_col, args.y_col, args.z_col, center=center, header=header)

    if args.nside == "auto":
        res = "auto"
    else:
        try:
            res = healpix.resolution_from_nside(int(args.nside))
        except ValueError:
            raise InvalidResolutionError(f"nside must be a power of two or 'auto', got {args.nside!r}") from None
    ds = dataset.from_points(table, res, ordering=args.ordering, dedup=args.dedup, j_max=args.j_max)
    dataset.save(ds, args.out)
    out.write(f"n={ds.n} nside={ds.res.nside} dropped={table.dropped} duplicates={len(table) - ds.n}\n")
    return EXIT_OK


def cmd_info(args, out) -> int:
    ds = dataset.load(args.ds)
    out.write(f"n={ds.n} nside={ds.res.nside} ordering={ds.ordering.value} columns={','.join(ds.columns)}\n")
    return EXIT_OK


def cmd_stats(args, out) -> int:
    ds = dataset.load(args.ds)
    window = parse_window(args)
    col = args.col
    name = args.stat
    if name != "mindist":
        ds.column(col)
    if name == "mean":
        value = stats.mean_value(dataset.subset(ds, window), col)
    elif name == "exprob":
        if args.alpha is None:
            raise UsageError("--stat exprob needs --alpha")
        value = stats.exprob(ds, _level(args.alpha, ds, col), window, col)
    elif name == "entropy":
        bins = "auto" if args.bins in (None, "auto") else int(args.bins)
        value = stats.entropy(ds, window, col, bins)
    elif name == "fmf":
        if args.level is None:
            raise UsageError("--stat fmf needs --level")
        value = stats.fmf(dataset.subset(ds, window), _level(args.level, ds, col), col, relative=args.relative)
    elif name == "mindist":
        value = stats.min_dist(dataset.subset(ds, window))
    elif name == "asym-mean":
        value = stats.asymmetry_mean(ds, window, col)
    else:
        value = stats.asymmetry_extrema(ds, window, args.n if args.n is not None else 10, args.side, col)
    out.write(f"stat={name} value={_g7(value)}\n")
    return EXIT_OK


def cmd_extrema(args, out) -> int:
    ds = dataset.load(args.ds)
    window = parse_window(args)
    rows = stats.extrema(ds, args.n, window, args.side, args.col)
    out.write("pix,theta,phi,value\n")
    for r in rows:
        out.write(f"{r.pix},{_g7(r.theta)},{_g7(r.phi)},{_g7(r.value)}\n")
    return EXIT_OK


def cmd_hist(args, out) -> int:
    ds = dataset.load(args.ds)
    hists = stats.ang_distribution(ds, args.col, args.bins, args.bins)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(stats.histograms_to_csv(hists))
    return EXIT_OK


def _rgb(text: str):
    v = text.lstrip("#")
    if len(v) != 6:
        raise UsageError(f"background must be RRGGBB hex, got {text!r}")
    try:
        return tuple(int(v[i : i + 2], 16) for i in (0, 2, 4))
    except ValueError:
        raise UsageError(f"background must be RRGGBB hex, got {text!r}") from None


def cmd_render(args, out) -> int:
    if args.width < 1 or args.height < 1:
        raise UsageError("raster width and height must be at least 1")
    ds = dataset.load(args.ds)
    img = render.render(ds, args.col, args.width, args.height, args.ramp, _rgb(args.background))
    render.write_ppm(args.out, img)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sphds", description="HEALPix spherical dataset tool")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="pixelate a CSV file into a dataset file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", choices=("geo", "cart", "sph"), required=True)
    p.add_argument("--lon-col")
    p.add_argument("--lat-col")
    p.add_argument("--theta-col")
    p.add_argument("--phi-col")
    p.add_argument("--x-col")
    p.add_argument("--y-col")
    p.add_argument("--z-col")
    p.add_argument("--value-cols", help="comma-separated value columns")
    p.add_argument("--center", default="centroid", help="'x,y,z' or 'centroid' (cart only)")
    p.add_argument("--unit", choices=("degrees", "radians"))
    p.add_argument("--no-header", action="store_true", help="CSV has no header; columns are V1, V2, ...")
    p.add_argument("--nside", default="auto", help="power of two, or 'auto'")
    p.add_argument("--j-max", type=int, default=13)
    p.add_argument("--ordering", choices=("ring", "nested"), default="ring")
    p.add_argument("--dedup", choices=("first", "fail"), default="first")
    p.add_argument("--lon-offset-deg", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("info", help="summarise a dataset file")
    p.add_argument("--ds", required=True)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("stats", help="compute one statistic")
    p.add_argument("--ds", required=True)
    p.add_argument("--col", default="I")
    p.add_argument("--stat", choices=STATS, required=True)
    p.add_argument("--alpha", help="exceedance level (number or 'mean')")
    p.add_argument("--level", help="excursion level (number or 'mean')")
    p.add_argument("--relative", action="store_true", help="fmf as a fraction of the total area")
    p.add_argument("--n", type=int)
    p.add_argument("--side", choices=("smallest", "largest"), default="smallest")
    p.add_argument("--bins")
    _add_window_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("extrema", help="list extreme values as CSV")
    p.add_argument("--ds", required=True)
    p.add_argument("--col", default="I")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--side", choices=("smallest", "largest"), default="smallest")
    _add_window_flags(p)
    p.set_defaults(func=cmd_extrema)

    p = sub.add_parser("hist", help="export theta/phi marginal histograms")
    p.add_argument("--ds", required=True)
    p.add_argument("--col", default="I")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("render", help="write an equirectangular PPM heat map")
    p.add_argument("--ds", required=True)
    p.add_argument("--col", default="I")
    p.add_argument("--width", type=int, default=720)
    p.add_argument("--height", type=int, default=360)
    p.add_argument("--ramp", choices=render.RAMPS, default="grayscale")
    p.add_argument("--background", default="ffffff", help="RRGGBB hex colour for empty cells")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args, out)
    except (UsageError, SphdsError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        err.write(f"sphds: error: {msg}\n")
        return exit_code(exc)


def exit_code(exc: BaseException) -> int:
    for kinds, code in _EXIT_CODES:
        if isinstance(exc, kinds):
            return code
    return EXIT_USAGE


def main_entry():
    sys.exit(main())
