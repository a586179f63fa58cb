"""Image and edge I/O plus orientation normalization.

Images are carried as normalized float64 grids in [0, 1] with the origin at
the top-left corner: row y (1-based) runs downward, column x runs right.
Mammograms whose bright mass sits on the right are mirrored so the pectoral
muscle lands top-left before any other processing.
"""

from dataclasses import dataclass, field
import io

import numpy as np

MIN_PIPELINE_DIM = 8  # segment() rejects anything smaller; raw I/O does not


class PgmParseError(ValueError):
    """Malformed PGM input; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class EdgeCsvParseError(ValueError):
    """Malformed edge CSV; ``line`` is the 1-based offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} at line {line}")
        self.line = line


@dataclass(eq=False)
class GrayImage:
    """2-D grid of intensities in [0, 1].

    ``pixels`` is a C-contiguous float64 array of shape (height, width).
    ``source_max_value`` records the sample maximum of the originating file
    (255 for 8-bit PGM) so writers can round-trip the quantization grid.
    """

    pixels: np.ndarray
    source_max_value: int = 255
    _on_grid: bool | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        lo, hi = px.min(), px.max()
        if not (0.0 <= lo and hi <= 1.0):
            raise ValueError(f"pixel intensities must lie in [0, 1], got [{lo}, {hi}]")
        self.pixels = px

    @classmethod
    def _wrap(cls, pixels: np.ndarray, source_max_value: int = 255,
              on_grid: bool | None = None) -> "GrayImage":
        # internal fast path: pixels already validated by construction
        img = cls.__new__(cls)
        img.pixels = pixels
        img.source_max_value = source_max_value
        img._on_grid = on_grid
        return img

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def is_on_255_grid(self) -> bool:
        """True when every pixel is k/255 for integer k (8-bit sourced)."""
        if self._on_grid is None:
            scaled = self.pixels * 255.0
            self._on_grid = bool(np.all(np.abs(scaled - np.rint(scaled)) <= 1e-9))
        return self._on_grid


@dataclass(eq=False)
class EdgePolyline:
    """Ordered per-row edge columns: point i is (xs[i], y=i+1).

    Rows are implicitly contiguous from 1, matching how the rough edge is
    collected from the image top.
    """

    xs: np.ndarray

    def __post_init__(self):
        xs = np.ascontiguousarray(self.xs, dtype=np.float64)
        if xs.ndim != 1:
            raise ValueError("edge columns must be a 1-D array")
        if xs.size and xs.min() < 1.0:
            raise ValueError("edge columns must be >= 1")
        self.xs = xs

    def __len__(self) -> int:
        return int(self.xs.size)

    @property
    def ys(self) -> np.ndarray:
        return np.arange(1, self.xs.size + 1, dtype=np.int64)

    def points(self) -> list[tuple[float, int]]:
        return [(float(x), y + 1) for y, x in enumerate(self.xs)]


def quantize_255(pixels: np.ndarray) -> np.ndarray:
    """8-bit sample grid: q = floor(v*255 + 0.5) (round half up)."""
    return np.floor(pixels * 255.0 + 0.5).astype(np.uint8)


class _PgmScanner:
    """Tokenizer over the PGM header; tracks byte offsets for errors."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip_separators(self) -> None:
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos]
            if b in b" \t\r\n\x0b\x0c":
                self.pos += 1
            elif b == ord("#"):
                nl = data.find(b"\n", self.pos)
                self.pos = n if nl < 0 else nl + 1
            else:
                return

    def next_token(self, what: str) -> tuple[bytes, int]:
        self._skip_separators()
        start = self.pos
        data, n = self.data, len(self.data)
        if start >= n:
            raise PgmParseError(f"unexpected end of header, missing {what}", start)
        while self.pos < n and data[self.pos] not in b" \t\r\n\x0b\x0c#":
            self.pos += 1
        return data[start:self.pos], start

    def next_int(self, what: str) -> tuple[int, int]:
        tok, off = self.next_token(what)
        try:
            return int(tok), off
        except ValueError:
            raise PgmParseError(f"invalid {what} {tok!r}", off) from None


def read_pgm(data: bytes) -> GrayImage:
    """Parse a P2 (ASCII) or P5 (binary) PGM into a normalized image.

    Samples are divided by the header max value; 2-byte big-endian samples
    are used for P5 files with max value above 255.
    """
    sc = _PgmScanner(data)
    magic, off = sc.next_token("magic number")
    if magic not in (b"P2", b"P5"):
        raise PgmParseError(f"malformed magic number {magic!r}", off)
    width, off_w = sc.next_int("width")
    height, off_h = sc.next_int("height")
    if width <= 0:
        raise PgmParseError(f"zero or negative width {width}", off_w)
    if height <= 0:
        raise PgmParseError(f"zero or negative height {height}", off_h)
    maxval, off_m = sc.next_int("max value")
    if maxval == 0:
        raise PgmParseError("max value 0", off_m)
    if maxval < 0 or maxval > 65535:
        raise PgmParseError(f"max value {maxval} outside 1..65535", off_m)

    count = width * height
    if magic == b"P5":
        # exactly one separator byte between maxval and the raster
        raster = sc.pos + 1
        if raster > len(data):
            raise PgmParseError("truncated pixel data", len(data))
        nbytes = count * (2 if maxval > 255 else 1)
        if len(data) - raster < nbytes:
            raise PgmParseError("truncated pixel data", len(data))
        buf = data[raster:raster + nbytes]
        dtype = ">u2" if maxval > 255 else np.uint8
        samples = np.frombuffer(buf, dtype=dtype).astype(np.int64)
    else:
        samples = np.empty(count, dtype=np.int64)
        for i in range(count):
            samples[i], _ = sc.next_int("pixel sample")
    if samples.size and samples.max() > maxval:
        raise PgmParseError(f"sample exceeds max value {maxval}", off_m)
    if samples.size and samples.min() < 0:
        raise PgmParseError("negative pixel sample", off_m)

    pixels = (samples / float(maxval)).reshape(height, width)
    return GrayImage._wrap(np.ascontiguousarray(pixels), source_max_value=maxval,
                           on_grid=(maxval == 255))


def write_pgm(img: GrayImage) -> bytes:
    """Serialize as binary P5 with max value 255 (samples rounded half up)."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + quantize_255(img.pixels).tobytes()


def _mirror(pixels: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(pixels[:, ::-1])


def mirror_image(img: GrayImage) -> GrayImage:
    """Reflect across the vertical axis (column x -> width+1-x)."""
    return GrayImage._wrap(_mirror(img.pixels), img.source_max_value, img._on_grid)


def normalize_orientation(img: GrayImage) -> tuple[GrayImage, bool]:
    """Mirror the image when the bright mass sits on the right half.

    Compares total intensity of the left and right halves of the columns
    (middle column excluded for odd widths); strict right > left triggers
    the flip, ties leave the image unchanged.
    """
    half = img.width // 2
    if half == 0:
        return img, False
    # summing the right half in mirrored column order makes the comparison
    # exactly antisymmetric under mirroring, so a flip never re-triggers
    colsums = img.pixels.sum(axis=0)
    left = float(np.add.reduce(colsums[:half]))
    right = float(np.add.reduce(np.ascontiguousarray(colsums[::-1][:half])))
    if right > left:
        return mirror_image(img), True
    return img, False


def read_edge_csv(data: bytes) -> EdgePolyline:
    """Parse an edge CSV (header ``y,x``, rows contiguous from y=1)."""
    text = data.decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip("\r").strip() != "y,x":
        raise EdgeCsvParseError('missing "y,x" header', 1)
    xs = []
    prev_y = 0
    for idx, raw in enumerate(lines[1:], start=2):
        line = raw.strip("\r").strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise EdgeCsvParseError(f"expected 2 fields, got {len(parts)}", idx)
        try:
            y = int(parts[0])
            x = float(parts[1])
        except ValueError:
            raise EdgeCsvParseError(f"non-numeric field in {line!r}", idx) from None
        if y == prev_y:
            raise EdgeCsvParseError("duplicate row index", idx)
        if y != prev_y + 1:
            raise EdgeCsvParseError("non-contiguous row index", idx)
        if not (1.0 <= x <= 1e6):
            raise EdgeCsvParseError(f"x {x} out of [1, 1e6]", idx)
        xs.append(x)
        prev_y = y
    return EdgePolyline(np.asarray(xs, dtype=np.float64))


def write_edge_csv(edge: EdgePolyline) -> bytes:
    """Serialize an edge polyline (x with 9 decimal digits, LF endings)."""
    out = io.StringIO()
    out.write("y,x\n")
    for y, x in enumerate(edge.xs, start=1):
        out.write(f"{y},{x:.9f}\n")
    return out.getvalue().encode("utf-8")
