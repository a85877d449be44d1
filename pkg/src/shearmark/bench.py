"""Robustness bench: every host x scheme x attack, written as CSV and JSON.

For each (host, scheme) the watermark is embedded once. The transparency
row (attack ``none``) compares the float watermarked image with the host
and extracts from it losslessly. Every attack row quantizes the
watermarked image to 8 bits, applies the attack, re-registers geometric
attacks and extracts.

Outputs are written atomically and contain no timestamps, so a rerun with
the same base seed reproduces both files byte for byte.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
import errno
from dataclasses import dataclass, field, asdict
import hashlib
import io
import json
import os
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from . import attacks as _attacks
from . import metrics, synthetic
from .errors import InvalidConfigError
from .image import quantize_u8
from .imageio import read_image
from .watermark import EmbedConfig, Scheme, embed, extract

DEFAULT_SEED = 42
SEED_ENV = "SHEARMARK_SEED"
SYNTHETIC_PREFIX = "synthetic:"
CSV_HEADER = ("host", "scheme", "attack", "params", "registered", "nc", "psnr", "ssim", "seed")
ALL_SCHEMES = (Scheme.DWT_DST, Scheme.DWT_ONLY, Scheme.DST_ONLY)


def base_seed_from_env(default: int = DEFAULT_SEED) -> int:
    value = os.environ.get(SEED_ENV)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise InvalidConfigError(f"{SEED_ENV} must be an integer, got {value!r}") from None


@dataclass(frozen=True)
class BenchConfig:
    """Inputs for :func:`run_bench`.

    Hosts are file paths or ``synthetic:NAME`` with NAME one of
    :data:`shearmark.synthetic.HOST_NAMES`. With ``size`` set, every host
    is brought to ``size x size``. The watermark is resized to half the
    host side; ``None`` uses the generated logo.
    """

    hosts: tuple
    watermark: str | None = None
    embed: EmbedConfig = EmbedConfig()
    catalog: str | None = None
    schemes: tuple = ALL_SCHEMES
    seed: int = DEFAULT_SEED
    out_dir: str = "bench-out"
    formats: tuple = ("csv", "json")
    size: int | None = None
    include_raw: bool = False

    def __post_init__(self):
        object.__setattr__(self, "hosts", tuple(str(h) for h in self.hosts))
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        object.__setattr__(self, "formats", tuple(self.formats))
        if not self.hosts:
            raise InvalidConfigError("bench needs at least one host")
        if not self.schemes:
            raise InvalidConfigError("bench needs at least one scheme")
        bad = set(self.formats) - {"csv", "json"}
        if bad or not self.formats:
            raise InvalidConfigError(f"report formats must be csv and/or json, got {self.formats}")
        if self.size is not None and (self.size < 64 or self.size % 2):
            raise InvalidConfigError(f"--size must be an even number >= 64, got {self.size}")
        for h in self.hosts:
            if h.startswith(SYNTHETIC_PREFIX):
                if h[len(SYNTHETIC_PREFIX):] not in synthetic.HOST_NAMES:
                    raise InvalidConfigError(
                        f"unknown synthetic host {h!r}; choose from {synthetic.HOST_NAMES}")
            elif not Path(h).exists():
                raise FileNotFoundError(errno.ENOENT, "host image not found", h)
        for p in (self.watermark, self.catalog):
            if p is not None and not Path(p).exists():
                raise FileNotFoundError(errno.ENOENT, "file not found", p)

    def describe(self) -> dict:
        """Canonical, path-independent description used for the config hash."""
        cfg = self.embed
        return {
            "hosts": [host_label(h) for h in self.hosts],
            "watermark": "synthetic:logo" if self.watermark is None else Path(self.watermark).name,
            "alpha": cfg.alpha,
            "wavelet": cfg.wavelet,
            "n_scales": cfg.n_scales,
            "shear_levels": list(cfg.shear_levels),
            "selector": str(cfg.selector),
            "catalog": "default" if self.catalog is None else Path(self.catalog).name,
            "schemes": [s.name for s in self.schemes],
            "seed": self.seed,
            "size": self.size,
            "include_raw": self.include_raw,
        }

    def config_hash(self) -> str:
        text = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class Cell:
    host: str
    scheme: str
    attack: str
    params: str
    registered: str
    nc: float | None = None
    psnr: float | None = None
    ssim: float | None = None
    seed: int | None = None
    error: str | None = None


@dataclass
class BenchReport:
    config: dict
    metadata: dict
    cells: list = field(default_factory=list)

    @property
    def errors(self) -> list:
        return [c for c in self.cells if c.error is not None]

    def transparency(self) -> dict:
        """(host, scheme) -> (psnr, ssim) of the watermarked image."""
        return {(c.host, c.scheme): (c.psnr, c.ssim)
                for c in self.cells if c.attack == "none" and c.error is None}

    def nc_table(self) -> dict:
        """(host, scheme, attack label, registered) -> nc."""
        return {(c.host, c.scheme, _row_label(c), c.registered): c.nc for c in self.cells}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for c in self.cells:
            nc = "error" if c.error is not None else _num(c.nc)
            w.writerow([c.host, c.scheme, c.attack, c.params, c.registered, nc,
                        _num(c.psnr), _num(c.ssim), "" if c.seed is None else c.seed])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "config": self.config,
               "cells": [asdict(c) for c in self.cells]}
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"

    def render_table(self, nc_x100: bool = False) -> str:
        """Plain-text NC table, attacks down and (host, scheme) across."""
        columns = sorted({(c.host, c.scheme) for c in self.cells},
                         key=lambda hs: (hs[0], Scheme[hs[1]].value))
        rows = []
        for c in self.cells:
            key = (_row_label(c), c.registered)
            if key not in rows:
                rows.append(key)
        table = self.nc_table()
        head = ["attack"] + [f"{h}/{s}" for h, s in columns]
        lines = [head]
        for label, reg in rows:
            name = label if reg in ("", "registered") else f"{label} [raw]"
            line = [name]
            for h, s in columns:
                v = table.get((h, s, label, reg))
                if v is None:
                    line.append("err" if (h, s, label, reg) in table else "-")
                elif nc_x100:
                    line.append(str(int(round(100 * v))))
                else:
                    line.append(f"{v:.4f}")
            lines.append(line)
        widths = [max(len(r[i]) for r in lines) for i in range(len(head))]
        return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip()
                         for r in lines) + "\n"


def _row_label(c: Cell) -> str:
    return c.attack if not c.params else f"{c.attack} {c.params}"


def _num(v) -> str:
    if v is None:
        return ""
    if v == float("inf"):
        return "inf"
    return f"{v:.4f}"


def host_label(host: str) -> str:
    if host.startswith(SYNTHETIC_PREFIX):
        return host
    return Path(host).stem


def _resize_u8(x: np.ndarray, shape: tuple) -> np.ndarray:
    if x.shape == shape:
        return x
    im = Image.fromarray(quantize_u8(x))
    return np.asarray(im.resize((shape[1], shape[0]), Image.Resampling.LANCZOS),
                      dtype=np.float64)


def load_host(host: str, size: int | None) -> np.ndarray:
    if host.startswith(SYNTHETIC_PREFIX):
        return synthetic.host(host[len(SYNTHETIC_PREFIX):], size or 512)
    img = read_image(host)
    return img if size is None else _resize_u8(img, (size, size))


def load_watermark(path: str | None, host_shape: tuple) -> np.ndarray:
    side = min(host_shape) // 2
    if path is None:
        return synthetic.logo(side)
    return _resize_u8(read_image(path), (side, side))


def _cell_seed(cfg: BenchConfig, host: str, spec) -> int | None:
    if not spec.is_noise:
        return None
    if spec.seed is not None:
        return spec.seed
    return _attacks.derive_seed(cfg.seed, host_label(host), spec)


def _run_group(cfg: BenchConfig, host: str, scheme: Scheme, catalog: list) -> list:
    """All rows for one (host, scheme) pair."""
    label = host_label(host)
    cells = []

    def make(spec, registered):
        return Cell(label, scheme.name, spec.kind.value, spec.params_text(), registered)

    try:
        host_img = load_host(host, cfg.size)
        wm = load_watermark(cfg.watermark, host_img.shape)
        config = EmbedConfig(cfg.embed.alpha, scheme, cfg.embed.wavelet, cfg.embed.n_scales,
                             cfg.embed.shear_levels, cfg.embed.selector)
        marked, key = embed(host_img, wm, config)
    except Exception as exc:  # recorded as error cells, bench continues
        cells.append(Cell(label, scheme.name, "none", "", "", error=_describe(exc)))
        for spec in catalog:
            for reg in _modes(cfg, spec):
                cell = make(spec, reg)
                cell.error = "embedding failed"
                cells.append(cell)
        return cells

    cell = Cell(label, scheme.name, "none", "", "")
    try:
        cell.psnr = metrics.psnr(host_img, marked)
        cell.ssim = metrics.ssim(host_img, marked)
        cell.nc = metrics.nc(wm, extract(marked, key))
    except Exception as exc:
        cell.error = _describe(exc)
    cells.append(cell)

    marked_u8 = quantize_u8(marked)
    for spec in catalog:
        seed = _cell_seed(cfg, host, spec)
        if seed is not None:
            spec = spec.with_seed(seed)
        for reg in _modes(cfg, spec):
            cell = make(spec, reg)
            cell.seed = seed
            try:
                attacked = _attacks.apply_attack(marked_u8, spec)
                if reg == "registered":
                    attacked = _attacks.register(attacked, spec)
                cell.nc = metrics.nc(wm, extract(attacked, key))
            except Exception as exc:
                cell.error = _describe(exc)
            cells.append(cell)
    return cells


def _modes(cfg: BenchConfig, spec) -> tuple:
    if not spec.is_geometric:
        return ("",)
    return ("registered", "raw") if cfg.include_raw else ("registered",)


def _describe(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _load_catalog(cfg: BenchConfig) -> list:
    if cfg.catalog is None:
        return _attacks.default_catalog()
    return _attacks.parse_catalog(cfg.catalog)


def run_bench(cfg: BenchConfig, jobs: int = 1) -> BenchReport:
    """Run the full grid and return the report (no files written)."""
    catalog = _load_catalog(cfg)
    groups = [(h, s) for h in cfg.hosts for s in cfg.schemes]
    if jobs > 1 and len(groups) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_group, cfg, h, s, catalog) for h, s in groups]
            results = [f.result() for f in futures]
    else:
        results = [_run_group(cfg, h, s, catalog) for h, s in groups]
    metadata = {"seed": cfg.seed, "config_hash": cfg.config_hash(), "version": __version__,
                "catalog_size": len(catalog)}
    return BenchReport(config=cfg.describe(), metadata=metadata,
                       cells=[c for group in results for c in group])


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_report(report: BenchReport, out_dir, formats=("csv", "json")) -> list:
    """Write ``bench.csv`` and/or ``bench.json`` into `out_dir`."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        _atomic_write(out / "bench.csv", report.to_csv())
        written.append(out / "bench.csv")
    if "json" in formats:
        _atomic_write(out / "bench.json", report.to_json())
        written.append(out / "bench.json")
    return written
