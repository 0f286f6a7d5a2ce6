"""Core data types: the regular pixel grid and the floating sample mesh.

Intensities are stored normalized in [0, 1]. The coordinate convention is
x = column axis, y = row axis, origin at the top-left grid pixel; grid
pixel (i, j) sits at real position (i, j) and the pixel spacing is 1.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np


class ImageFormatError(ValueError):
    """Raised for malformed graymap files (bad magic, truncated payload)."""


class MeshParseError(ValueError):
    """Raised for unparseable mesh CSV rows (wrong arity, non-numeric)."""


class MeshValidationError(ValueError):
    """Raised for parseable but invalid samples (value or position out of range)."""


@dataclass(frozen=True)
class Image:
    """Dense 2-D array of intensities on the regular grid.

    ``data`` is row-major with shape (height, width), dtype float64, every
    entry in [0, 1]. Instances are immutable; producers clamp before
    constructing. ``meta`` carries optional provenance notes (e.g. method
    fallbacks) and does not participate in equality.
    """

    data: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"image data must be 2-D, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("image must contain at least one pixel")
        if not np.isfinite(arr).all():
            raise ValueError("intensities must be finite")
        lo, hi = float(arr.min()), float(arr.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"intensities must lie in [0, 1], got [{lo}, {hi}]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(
            np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True)
class MeshSamples:
    """Scattered samples at real-valued positions targeting a (width, height) grid.

    Positions live in the half-open domain [0, width) x [0, height) in grid
    units; values in [0, 1]. No two samples share an identical position.
    """

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    bounds: tuple[int, int]  # (width, height) of the target grid
    duplicates_dropped: int = field(default=0, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64).ravel()
        y = np.asarray(self.y, dtype=np.float64).ravel()
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if not (x.size == y.size == v.size):
            raise ValueError("x, y, values must have equal length")
        width, height = self.bounds
        if width < 1 or height < 1:
            raise ValueError(f"bounds must be positive, got {self.bounds}")
        if x.size:
            if not (np.isfinite(x).all() and np.isfinite(y).all()):
                raise MeshValidationError("sample positions must be finite")
            if not np.isfinite(v).all():
                raise MeshValidationError("sample values must be finite")
            if x.min() < 0.0 or x.max() >= width or y.min() < 0.0 or y.max() >= height:
                raise MeshValidationError(
                    "sample positions must lie in [0, width) x [0, height)"
                )
            if v.min() < 0.0 or v.max() > 1.0:
                raise MeshValidationError("sample values must lie in [0, 1]")
            pos = np.stack([x, y], axis=1)
            if np.unique(pos, axis=0).shape[0] != pos.shape[0]:
                raise MeshValidationError("duplicate sample positions")
        for name, arr in (("x", x), ("y", y), ("values", v)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "bounds", (int(width), int(height)))

    def __len__(self) -> int:
        return self.x.size

    def __eq__(self, other):
        if not isinstance(other, MeshSamples):
            return NotImplemented
        return (
            self.bounds == other.bounds
            and bool(np.array_equal(self.x, other.x))
            and bool(np.array_equal(self.y, other.y))
            and bool(np.array_equal(self.values, other.values))
        )

    @property
    def positions(self) -> np.ndarray:
        """Sample positions as an (n, 2) array of (x, y) pairs."""
        return np.stack([self.x, self.y], axis=1)


def make_mesh(x, y, values, bounds, dedup: bool = False) -> MeshSamples:
    """Build a MeshSamples, optionally dropping duplicate positions (first kept)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    v = np.asarray(values, dtype=np.float64).ravel()
    dropped = 0
    if dedup and x.size:
        seen = {}
        keep = []
        for i in range(x.size):
            key = (x[i], y[i])
            if key in seen:
                dropped += 1
            else:
                seen[key] = i
                keep.append(i)
        if dropped:
            idx = np.asarray(keep, dtype=np.intp)
            x, y, v = x[idx], y[idx], v[idx]
    return MeshSamples(x=x, y=y, values=v, bounds=bounds, duplicates_dropped=dropped)


# ---------------------------------------------------------------------------
# Mesh CSV I/O
#
# Format: header line "x,y,value", one sample per row, decimal-point reals,
# UTF-8, LF or CRLF line endings.
# ---------------------------------------------------------------------------

MESH_CSV_HEADER = "x,y,value"


def load_mesh(path, bounds: tuple[int, int] | None = None) -> MeshSamples:
    """Load mesh samples from CSV, deduplicating positions (first kept).

    ``bounds`` gives the target grid (width, height); when omitted it is
    inferred as (floor(max x) + 1, floor(max y) + 1). The returned mesh
    records how many duplicate rows were dropped in ``duplicates_dropped``.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != MESH_CSV_HEADER:
        raise MeshParseError(f"{path}: missing '{MESH_CSV_HEADER}' header line")
    xs, ys, vs = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise MeshParseError(
                f"{path}: line {lineno}: expected 3 comma-separated fields, got {len(parts)}"
            )
        try:
            x, y, v = (float(p) for p in parts)
        except ValueError:
            raise MeshParseError(f"{path}: line {lineno}: non-numeric field") from None
        if not all(math.isfinite(t) for t in (x, y, v)):
            raise MeshParseError(f"{path}: line {lineno}: non-finite field")
        xs.append(x)
        ys.append(y)
        vs.append(v)
    if bounds is None:
        if xs:
            bounds = (int(max(xs)) + 1, int(max(ys)) + 1)
        else:
            bounds = (1, 1)
    try:
        return make_mesh(xs, ys, vs, bounds, dedup=True)
    except MeshValidationError as exc:
        raise MeshValidationError(f"{path}: {exc}") from None


def save_mesh(mesh: MeshSamples, path) -> None:
    """Write mesh samples as CSV with shortest round-tripping float reprs."""
    lines = [MESH_CSV_HEADER]
    for x, y, v in zip(mesh.x, mesh.y, mesh.values):
        lines.append(f"{float(x)!r},{float(y)!r},{float(v)!r}")
    data = ("\n".join(lines) + "\n").encode("utf-8")
    _atomic_write_bytes(path, data)


# ---------------------------------------------------------------------------
# Binary portable graymap I/O (magic P5, maxval 255)
# ---------------------------------------------------------------------------


def load_image(path) -> Image:
    """Load an 8-bit binary graymap, mapping codes to [0, 1] by v/255."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(b"P5"):
        raise ImageFormatError(f"{path}: wrong magic number (expected P5)")
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(raw):
            raise ImageFormatError(f"{path}: truncated header")
        if raw[pos : pos + 1] == b"#":  # comment runs to end of line
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ImageFormatError(f"{path}: non-numeric header field") from None
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"{path}: maxval must be 255, got {maxval}")
    pos += 1  # single whitespace byte separates header from payload
    payload = raw[pos : pos + width * height]
    if len(payload) != width * height:
        raise ImageFormatError(f"{path}: truncated payload")
    codes = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return Image(codes.astype(np.float64) / 255.0)


def encode_image(img: Image) -> bytes:
    """Serialize to canonical P5 bytes; codes are round(v*255), half away up."""
    codes = np.floor(img.data * 255.0 + 0.5)
    codes = np.clip(codes, 0, 255).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + codes.tobytes()


def save_image(img: Image, path) -> None:
    _atomic_write_bytes(path, encode_image(img))


def _atomic_write_bytes(path, data: bytes) -> None:
    path = os.fspath(path)
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


# ---------------------------------------------------------------------------
# Quality metric
# ---------------------------------------------------------------------------


def psnr(a: Image, b: Image) -> float:
    """Peak signal-to-noise ratio in dB for unit-range intensities.

    Returns +inf for identical images.
    """
    if a.data.shape != b.data.shape:
        raise ValueError(f"dimension mismatch: {a.data.shape} vs {b.data.shape}")
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)
