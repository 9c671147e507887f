"""Batch refinery: read a directory tree of rasters, refine every image with one
shared config, write a mirrored tree of lossless PNGs plus ``manifest.jsonl``.

Outputs depend only on the inputs and the config. Worker count and
scheduling change nothing but wall-clock time.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import cv2
import numpy as np

from .analysis import DEFAULT_BINS, DEFAULT_DROP_FRACTION, shannon_entropy
from .core_types import ColorPolicy, ImageField, RefineryConfig, RefineryError
from .transform import pst

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
IMAGE_SUFFIXES = frozenset({".png", ".tif", ".tiff", ".bmp", ".jpg", ".jpeg", ".pgm", ".ppm"})
MANIFEST_NAME = "manifest.jsonl"


class ImageReadError(RefineryError):
    """The file could not be decoded into a supported raster."""


class BatchInputError(RefineryError):
    """The input or output directory is unusable."""


def decode_raster(data: bytes) -> np.ndarray:
    """Decode 8/16-bit gray or RGB(A) bytes into float64 in [0, 1].

    Returns ``(H, W)`` for gray and ``(H, W, 3)`` in RGB order for color;
    an alpha channel is dropped.
    """
    buf = np.frombuffer(data, dtype=np.uint8)
    if buf.size == 0:
        raise ImageReadError("empty file")
    arr = cv2.imdecode(buf, cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise ImageReadError("not a decodable raster")
    if arr.dtype == np.uint8:
        scale = 255.0
    elif arr.dtype == np.uint16:
        scale = 65535.0
    else:
        raise ImageReadError(f"unsupported sample type {arr.dtype}")
    if arr.size == 0 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ImageReadError("zero-size image")
    if arr.ndim == 3:
        if arr.shape[2] == 1:
            arr = arr[..., 0]
        elif arr.shape[2] in (3, 4):
            arr = arr[..., 2::-1]
        else:
            raise ImageReadError(f"unsupported channel count {arr.shape[2]}")
    return arr.astype(np.float64) / scale


def to_fields(pixels: np.ndarray, color_policy: ColorPolicy) -> list[ImageField]:
    """Reduce a decoded raster to the fields that get refined."""
    if pixels.ndim == 2:
        return [ImageField(pixels)]
    if color_policy is ColorPolicy.LUMA:
        r, g, b = (pixels[..., i] for i in range(3))
        wr, wg, wb = LUMA_WEIGHTS
        return [ImageField(np.clip(wr * r + wg * g + wb * b, 0.0, 1.0))]
    return [ImageField(pixels[..., i]) for i in range(3)]


def ingest_image(path, color_policy: ColorPolicy = ColorPolicy.LUMA) -> list[ImageField]:
    """Read one raster. LUMA yields one field; PER_CHANNEL yields one per color channel
    (a gray file still yields a single field)."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ImageReadError(f"cannot read {path}: {exc.strerror or exc}") from None
    pixels = decode_raster(data)
    if pixels.shape[0] < 2 or pixels.shape[1] < 2:
        raise ImageReadError(f"image smaller than 2x2: {pixels.shape[:2]}")
    return to_fields(pixels, color_policy)


def quantize(values: np.ndarray, bit_depth: int) -> np.ndarray:
    top = (1 << bit_depth) - 1
    dtype = np.uint16 if bit_depth == 16 else np.uint8
    return np.rint(np.clip(values, 0.0, 1.0) * top).astype(dtype)


def refine_fields(fields: list[ImageField], config: RefineryConfig) -> list[ImageField]:
    return [pst(f, config) for f in fields]


def encode_png(fields: list[ImageField], bit_depth: int) -> bytes:
    """Lossless PNG of one (gray) or three (RGB) refined fields."""
    planes = [quantize(f.values, bit_depth) for f in fields]
    arr = planes[0] if len(planes) == 1 else np.stack(planes[::-1], axis=-1)
    ok, buf = cv2.imencode(".png", arr, [cv2.IMWRITE_PNG_COMPRESSION, 6])
    if not ok:
        raise RefineryError("PNG encoding failed")
    return buf.tobytes()


@dataclass
class ManifestRecord:
    input: str
    output: str | None
    digest: str | None
    entropy_pre: float | None
    entropy_post: float | None
    flagged: bool | None
    error: str | None
    elapsed_s: float = 0.0

    def stable_dict(self) -> dict:
        """Everything except wall-clock timing."""
        d = asdict(self)
        d.pop("elapsed_s")
        return d


@dataclass
class BatchManifest:
    config_digest: str
    records: list[ManifestRecord]

    @property
    def total(self) -> int:
        return len(self.records)

    @property
    def failures(self) -> int:
        return sum(r.error is not None for r in self.records)

    @property
    def processed(self) -> int:
        return self.total - self.failures

    def digest(self) -> str:
        """SHA-256 over the config digest and all records, timing excluded."""
        payload = json.dumps(
            {"config_digest": self.config_digest, "records": [r.stable_dict() for r in self.records]},
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_jsonl(self) -> str:
        header = {
            "type": "header",
            "config_digest": self.config_digest,
            "total": self.total,
            "failures": self.failures,
            "records_digest": self.digest(),
        }
        lines = [json.dumps(header, sort_keys=True)]
        for rec in self.records:
            lines.append(json.dumps({"type": "record", **asdict(rec)}, sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> BatchManifest:
        lines = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not lines or lines[0].get("type") != "header":
            raise RefineryError("manifest is missing its header line")
        header = lines[0]
        records = []
        for item in lines[1:]:
            item = dict(item)
            item.pop("type", None)
            records.append(ManifestRecord(**item))
        manifest = cls(config_digest=header["config_digest"], records=records)
        if header.get("total") != manifest.total:
            raise RefineryError("manifest header total does not match record count")
        return manifest


def _scan_inputs(input_dir: Path, output_dir: Path) -> list[Path]:
    out_resolved = output_dir.resolve()
    found = []
    for root, dirs, files in os.walk(input_dir):
        root_path = Path(root)
        # Never pick up our own outputs when the output tree sits inside the input tree.
        dirs[:] = sorted(d for d in dirs if (root_path / d).resolve() != out_resolved)
        for name in files:
            p = root_path / name
            if p.suffix.lower() in IMAGE_SUFFIXES:
                found.append(p.relative_to(input_dir))
    return sorted(found, key=lambda p: p.as_posix())


def _output_names(inputs: list[Path]) -> dict[Path, Path]:
    """Mirror relative paths with a ``.png`` suffix; a clash keeps the original suffix
    (``a.tif`` -> ``a.tif.png``)."""
    names: dict[Path, Path] = {}
    taken: set[str] = set()
    for rel in inputs:
        out = rel.with_suffix(".png")
        if out.as_posix() in taken:
            out = rel.with_name(rel.name + ".png")
        taken.add(out.as_posix())
        names[rel] = out
    return names


def _refine_one(src: Path, rel: Path, out_rel: Path, output_dir: Path,
                config: RefineryConfig, bins: int, drop_fraction: float) -> ManifestRecord:
    start = time.perf_counter()
    try:
        fields = ingest_image(src, config.color_policy)
        refined = refine_fields(fields, config)
        payload = encode_png(refined, config.output_bit_depth)
        dest = output_dir / out_rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(payload)
        pre = float(np.mean([shannon_entropy(f, bins) for f in fields]))
        post = float(np.mean([shannon_entropy(f, bins) for f in refined]))
        return ManifestRecord(
            input=rel.as_posix(),
            output=out_rel.as_posix(),
            digest=hashlib.sha256(payload).hexdigest(),
            entropy_pre=round(pre, 12),
            entropy_post=round(post, 12),
            flagged=post < drop_fraction * pre,
            error=None,
            elapsed_s=time.perf_counter() - start,
        )
    except (RefineryError, OSError) as exc:
        return ManifestRecord(
            input=rel.as_posix(), output=None, digest=None, entropy_pre=None,
            entropy_post=None, flagged=None, error=f"{type(exc).__name__}: {exc}",
            elapsed_s=time.perf_counter() - start,
        )


def refine_batch(input_dir, output_dir, config: RefineryConfig, workers: int = 1,
                 bins: int = DEFAULT_BINS, drop_fraction: float = DEFAULT_DROP_FRACTION) -> BatchManifest:
    """Refine every raster under ``input_dir`` into ``output_dir``.

    A file that cannot be read or refined becomes a failed record; the rest
    of the batch carries on. Records are ordered by input path. A record is
    flagged when refinement keeps less than ``drop_fraction`` of the input's
    entropy.
    """
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    if workers < 1:
        raise BatchInputError(f"workers must be >= 1, got {workers}")
    if not input_dir.is_dir():
        raise BatchInputError(f"input directory {input_dir} does not exist")
    inputs = _scan_inputs(input_dir, output_dir)
    if not inputs:
        raise BatchInputError(f"no image files under {input_dir}")
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BatchInputError(f"cannot create output directory {output_dir}: {exc}") from None
    if not os.access(output_dir, os.W_OK):
        raise BatchInputError(f"output directory {output_dir} is not writable")

    names = _output_names(inputs)
    jobs = [(input_dir / rel, rel, names[rel]) for rel in inputs]

    def run(job):
        return _refine_one(*job, output_dir, config, bins, drop_fraction)

    if workers == 1:
        records = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, jobs))

    manifest = BatchManifest(config_digest=config.digest(), records=records)
    (output_dir / MANIFEST_NAME).write_text(manifest.to_jsonl(), encoding="utf-8")
    return manifest
