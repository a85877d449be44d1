"""Command-line interface: ``shearmark embed|extract|attack|bench|metrics``.

Exit status is 0 on success, 2 for usage, input, config or key-format
errors, and 1 when a bench finishes with error cells.
"""

import argparse
import sys

import numpy as np

from . import __version__
from . import attacks as _attacks
from . import metrics
from .bench import (ALL_SCHEMES, DEFAULT_SEED, BenchConfig, base_seed_from_env,
                    run_bench, write_report)
from .errors import InvalidConfigError, KeyFormatError, ShearmarkError
from .imageio import is_lossless_path, read_image, write_image
from .image import quantize_u8
from .keyfile import read_key, write_key
from .shearlet import SubbandSelector
from .watermark import DEFAULT_ALPHA, EmbedConfig, Scheme, embed, extract

EXIT_OK = 0
EXIT_CELL_ERRORS = 1
EXIT_USAGE = 2


def _levels(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.replace("[", "").replace("]", "").split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"shear levels must be integers like 0,1,1: {text!r}")


def _add_embed_config(p: argparse.ArgumentParser, with_scheme: bool = True) -> None:
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                   help="scaling factor (default %(default)s)")
    if with_scheme:
        p.add_argument("--scheme", default="DWT_DST",
                       help="DWT_DST, DWT_ONLY or DST_ONLY (default %(default)s)")
    p.add_argument("--wavelet", default="haar", help="haar or db4 (default %(default)s)")
    p.add_argument("--scales", type=int, default=3, dest="n_scales",
                   help="number of shearlet scales (default %(default)s)")
    p.add_argument("--shear-levels", type=_levels, default=(0, 1, 1),
                   help="shear level per scale, comma separated (default 0,1,1)")
    p.add_argument("--selector", default="1:v:0",
                   help="embedding plane as scale:cone:shear (default %(default)s)")


def _embed_config(args, scheme=None) -> EmbedConfig:
    scheme = Scheme.parse(args.scheme) if scheme is None else scheme
    return EmbedConfig(alpha=args.alpha, scheme=scheme, wavelet=args.wavelet,
                       n_scales=args.n_scales, shear_levels=args.shear_levels,
                       selector=SubbandSelector.parse(args.selector))


def cmd_embed(args) -> int:
    config = _embed_config(args)
    host = read_image(args.host)
    wm = read_image(args.wm)
    marked, key = embed(host, wm, config)
    written = marked if is_lossless_path(args.out) else quantize_u8(marked).astype(np.float64)
    write_image(args.out, marked)
    write_key(key, args.key)
    report = metrics.compare(host, written)
    print(f"PSNR: {report.psnr:.2f} dB")
    print(f"SSIM: {report.ssim:.4f}")
    return EXIT_OK


def cmd_extract(args) -> int:
    key = read_key(args.key)
    image = read_image(args.input)
    w = extract(image, key)
    if args.out:
        write_image(args.out, w if is_lossless_path(args.out) else np.clip(w, 0, 255))
    if args.ref:
        ref = read_image(args.ref)
        if ref.shape != w.shape:
            raise ShearmarkError(f"reference is {ref.shape}, extracted watermark is {w.shape}")
        print(f"NC: {metrics.nc(ref, w):.4f}")
    return EXIT_OK


def cmd_attack(args) -> int:
    spec = _attacks.parse_spec(args.spec)
    if spec.is_noise and spec.seed is None:
        seed = args.seed if args.seed is not None else base_seed_from_env()
        spec = spec.with_seed(seed)
    image = read_image(args.input)
    if np.any(image != np.rint(image)) or image.min() < 0 or image.max() > 255:
        image = quantize_u8(image)
    out = _attacks.apply_attack(image.astype(np.uint8), spec)
    if args.register and spec.is_geometric:
        out = _attacks.register(out, spec)
    write_image(args.out, out)
    return EXIT_OK


def cmd_bench(args) -> int:
    schemes = ALL_SCHEMES if not args.schemes else tuple(
        Scheme.parse(s) for s in args.schemes.split(","))
    seed = args.seed if args.seed is not None else base_seed_from_env(DEFAULT_SEED)
    hosts = args.hosts or [f"synthetic:{n}" for n in ("texture", "scene", "geometry")]
    cfg = BenchConfig(hosts=tuple(hosts), watermark=args.wm,
                      embed=_embed_config(args, Scheme.DWT_DST), catalog=args.catalog,
                      schemes=schemes, seed=seed, out_dir=args.out_dir,
                      formats=tuple(args.formats.split(",")), size=args.size,
                      include_raw=args.no_register)
    report = run_bench(cfg, jobs=args.jobs)
    for path in write_report(report, cfg.out_dir, cfg.formats):
        print(f"wrote {path}")
    if not args.quiet:
        print(report.render_table(nc_x100=args.x100), end="")
    if report.errors:
        print(f"{len(report.errors)} cell(s) failed; see the report", file=sys.stderr)
        return EXIT_CELL_ERRORS
    return EXIT_OK


def cmd_metrics(args) -> int:
    x = read_image(args.a)
    y = read_image(args.b)
    report = metrics.compare(x, y, peak=None if args.literal_peak else 255.0)
    print(f"MSE:  {report.mse:.6f}")
    print(f"PSNR: {report.psnr:.4f} dB")
    print(f"SSIM: {report.ssim:.6f}")
    flag = " (degenerate input)" if report.nc_degenerate else ""
    print(f"NC:   {report.nc:.4f}{flag}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shearmark", description="DWT + shearlet + BSVD image watermarking toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed a watermark into a host image")
    p.add_argument("--host", required=True, help="gray host image (PNG/PGM/.npy)")
    p.add_argument("--wm", required=True, help="square gray watermark image")
    p.add_argument("--out", required=True,
                   help="watermarked image; .npy keeps float values, other formats are 8-bit")
    p.add_argument("--key", required=True, help="output key file")
    _add_embed_config(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="extract a watermark with a key")
    p.add_argument("--in", dest="input", required=True, help="received image")
    p.add_argument("--key", required=True, help="key file written by embed")
    p.add_argument("--out", help="where to write the extracted watermark")
    p.add_argument("--ref", help="original watermark; prints NC against it")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("attack", help="apply one attack to an image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--spec", required=True, help='attack such as "JPEG 30" or "SP 0.04"')
    p.add_argument("--seed", type=int, help=f"noise seed (default ${{SHEARMARK_SEED}} or {DEFAULT_SEED})")
    p.add_argument("--register", action="store_true",
                   help="undo a geometric attack after applying it")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("bench", help="run the robustness grid and write CSV/JSON reports")
    p.add_argument("--hosts", nargs="+",
                   help="host images or synthetic:NAME (default: the three synthetic hosts)")
    p.add_argument("--wm", help="watermark image (default: generated logo)")
    p.add_argument("--catalog", help="attack catalog file (default: bundled grid)")
    p.add_argument("--schemes", help="comma separated subset of DWT_DST,DWT_ONLY,DST_ONLY")
    p.add_argument("--seed", type=int, help=f"base seed (default ${{SHEARMARK_SEED}} or {DEFAULT_SEED})")
    p.add_argument("--size", type=int, help="resize hosts to SIZE x SIZE (e.g. 128 for CI)")
    p.add_argument("--out-dir", default="bench-out")
    p.add_argument("--formats", default="csv,json")
    p.add_argument("--no-register", action="store_true",
                   help="also evaluate geometric attacks without re-registration")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--x100", action="store_true", help="print NC as integer percent")
    p.add_argument("--quiet", action="store_true", help="do not print the NC table")
    _add_embed_config(p, with_scheme=False)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("metrics", help="compare two images")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--literal-peak", action="store_true",
                   help="use the first image's maximum as PSNR peak instead of 255")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        name = exc.filename if exc.filename else str(exc)
        print(f"shearmark: error: file not found: {name}", file=sys.stderr)
        return EXIT_USAGE
    except (ShearmarkError, ValueError) as exc:
        if isinstance(exc, KeyFormatError):
            kind = "key format error"
        elif isinstance(exc, InvalidConfigError):
            kind = "config error"
        else:
            kind = "error"
        print(f"shearmark: {kind}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"shearmark: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
