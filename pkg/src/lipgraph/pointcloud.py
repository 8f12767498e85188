"""Planar point clouds: reproducible generation and the CSV point-file format.

Random streams come from numpy's Philox4x64-10 counter-based generator. A
stream is addressed by ``(master_seed, stream_index)``, which is used verbatim
as the 128-bit Philox key with the counter starting at zero, so the pair
determines the cloud bit for bit and distinct pairs give independent streams.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator, NamedTuple, TextIO, Union

import numpy as np

MASK64 = (1 << 64) - 1

GENERATOR_ID = "philox4x64-10[key=(master_seed,stream_index),counter=0]/double53/splitmix64-cells/v1"


class PointFileError(ValueError):
    """A point file could not be parsed; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value <= MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")


def mix64(seed: int, index: int) -> int:
    """Derive a child 64-bit seed from ``seed`` and ``index`` (splitmix64 finalizer).

    For a fixed index this is a bijection on 64-bit seeds.
    """
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def make_generator(seed: SeedSpec) -> np.random.Generator:
    # an explicit uint64 array: a plain list goes through float64 above 2**63
    key = np.array([seed.master_seed, seed.stream_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class PointCloud:
    """Immutable ordered collection of planar points, stored as an (n, 2) float64 array."""

    __slots__ = ("_xy",)

    def __init__(self, xy=None):
        if xy is None:
            arr = np.empty((0, 2), dtype=np.float64)
        else:
            arr = np.array(xy, dtype=np.float64, copy=True)
            if arr.size == 0:
                arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"expected an (n, 2) array of coordinates, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("point coordinates must be finite")
        arr.flags.writeable = False
        self._xy = arr

    @classmethod
    def from_points(cls, points: Iterable) -> "PointCloud":
        return cls([tuple(p) for p in points])

    @property
    def xy(self) -> np.ndarray:
        return self._xy

    @property
    def x(self) -> np.ndarray:
        return self._xy[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self._xy[:, 1]

    @property
    def n(self) -> int:
        return self._xy.shape[0]

    @property
    def points(self) -> list[Point]:
        return list(self)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Point:
        x, y = self._xy[i]
        return Point(float(x), float(y))

    def __iter__(self) -> Iterator[Point]:
        for x, y in self._xy.tolist():
            yield Point(x, y)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self._xy.shape == other._xy.shape and bool((self._xy == other._xy).all())

    def __hash__(self):
        return hash(self._xy.tobytes())

    def __repr__(self) -> str:
        return f"PointCloud(n={self.n})"

    def subset(self, indices) -> "PointCloud":
        return PointCloud(self._xy[np.asarray(indices, dtype=np.intp)])


def generate_uniform(n: int, seed: SeedSpec) -> PointCloud:
    """Draw ``n`` points i.i.d. uniform on [0, 1)^2 from the stream ``seed``.

    Row i of the cloud is the pair of doubles ``(x_i, y_i)`` taken in that
    order from the stream.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return PointCloud(make_generator(seed).random((n, 2)))


def load_cloud(source: Union[bytes, str, BinaryIO, TextIO]) -> PointCloud:
    """Parse the point-file format: one ``x,y`` per line, ``#`` comments, UTF-8."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data

    coords = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise PointFileError(lineno, f"expected 2 comma-separated fields, got {len(fields)}")
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError:
            raise PointFileError(lineno, f"cannot parse number in {line!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise PointFileError(lineno, f"non-finite coordinate in {line!r}")
        coords.append((x, y))
    return PointCloud(coords)


def save_cloud(cloud: PointCloud) -> bytes:
    # repr() of a float is the shortest string that round-trips exactly
    return "".join(f"{x!r},{y!r}\n" for x, y in cloud.xy.tolist()).encode("utf-8")
