"""On-disk formats: FSEB binary embedding files and JSON manifests.

FSEB layout (little-endian throughout):

    bytes 0..3    magic "FSEB"
    bytes 4..7    version, uint32 (currently 1)
    bytes 8..11   dtype tag, uint32: 1 = float32, 2 = float64
    bytes 12..19  rows, uint64
    bytes 20..27  dims, uint64
    bytes 28..    payload, rows*dims floats, row-major

``read_embeddings`` reproduces payload values bit-exactly (widened to
float64 for float32 files); ``load_unit_rows`` is the engine-facing loader
that additionally re-normalizes rows drifting off unit norm.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    IndexOutOfRangeError,
    SizeOverflowError,
    TruncatedPayloadError,
    UnknownItemError,
    UnsupportedVersionError,
)
from .numerics import as_matrix, l2_normalize_rows

logger = logging.getLogger(__name__)

MAGIC = b"FSEB"
VERSION = 1
_HEADER = struct.Struct("<4sIIQQ")
DTYPE_TAGS = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
DEFAULT_SIZE_CAP = 8 << 30  # bytes
NORM_TOLERANCE = 1e-4


def write_embeddings(path, m, dtype: str = "f8") -> None:
    """Write a matrix as an FSEB file. dtype is 'f4' or 'f8'."""
    m = as_matrix(m)
    tag = {"f4": 1, "f8": 2}[dtype]
    payload = np.ascontiguousarray(m, dtype=DTYPE_TAGS[tag])
    header = _HEADER.pack(MAGIC, VERSION, tag, m.shape[0], m.shape[1])
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload.tobytes())


def read_embeddings(path, size_cap: int = DEFAULT_SIZE_CAP) -> np.ndarray:
    """Read an FSEB file, validating the header before allocating.

    Returns float64 values; float32 payloads are widened exactly.
    """
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise TruncatedPayloadError(f"{path}: file shorter than header")
        magic, version, tag, rows, dims = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise UnsupportedVersionError(f"{path}: unsupported version {version}")
        if tag not in DTYPE_TAGS:
            raise UnsupportedVersionError(f"{path}: unknown dtype tag {tag}")
        dt = DTYPE_TAGS[tag]
        nbytes = rows * dims * dt.itemsize
        if nbytes > size_cap:
            raise SizeOverflowError(
                f"{path}: header claims {nbytes} bytes, cap is {size_cap}"
            )
        payload = f.read(nbytes)
        if len(payload) < nbytes:
            raise TruncatedPayloadError(
                f"{path}: payload has {len(payload)} bytes, header claims {nbytes}"
            )
    m = np.frombuffer(payload, dtype=dt).reshape(rows, dims)
    return m.astype(np.float64)


def load_unit_rows(path, size_cap: int = DEFAULT_SIZE_CAP):
    """Load embeddings and enforce unit rows.

    Rows within NORM_TOLERANCE of unit norm are kept as-is; others are
    re-normalized and counted. Returns (matrix, renormalized_count).
    """
    m = read_embeddings(path, size_cap=size_cap)
    norms = np.linalg.norm(m, axis=1)
    off = np.abs(norms - 1.0) > NORM_TOLERANCE
    count = int(np.count_nonzero(off))
    if count:
        logger.warning("%s: re-normalized %d rows off unit norm", path, count)
        m = l2_normalize_rows(m)
    return m, count


@dataclass(frozen=True)
class ManifestItem:
    item_id: str
    class_index: int
    row_index: int


@dataclass
class Manifest:
    """Dataset metadata: ordered class names plus item -> (class, row) map.

    Class order here defines logit column order everywhere downstream.
    """

    dataset_name: str
    class_names: list[str]
    items: list[ManifestItem] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.class_names)
        rows = set()
        for it in self.items:
            if not 0 <= it.class_index < n:
                raise IndexOutOfRangeError(
                    f"item {it.item_id}: class_index {it.class_index} not in [0, {n})"
                )
            if it.row_index in rows:
                raise ValueError(f"duplicate row_index {it.row_index}")
            rows.add(it.row_index)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def items_by_class(self) -> list[list[ManifestItem]]:
        groups = [[] for _ in self.class_names]
        for it in self.items:
            groups[it.class_index].append(it)
        return groups

    def to_json(self) -> dict:
        return {
            "dataset_name": self.dataset_name,
            "class_names": list(self.class_names),
            "items": [
                {"item_id": it.item_id, "class_index": it.class_index, "row_index": it.row_index}
                for it in self.items
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Manifest":
        # Unknown top-level and per-item fields are ignored for forward compat.
        items = [
            ManifestItem(d["item_id"], int(d["class_index"]), int(d["row_index"]))
            for d in obj["items"]
        ]
        return cls(obj["dataset_name"], list(obj["class_names"]), items)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "Manifest":
        return cls.from_json(json.loads(Path(path).read_text()))


def build_onehot(manifest: Manifest, item_ids) -> np.ndarray:
    """One-hot label matrix (|subset| x N) for the given item ids, in order."""
    index = {it.item_id: it for it in manifest.items}
    n = manifest.n_classes
    out = np.zeros((len(item_ids), n), dtype=np.float64)
    for i, item_id in enumerate(item_ids):
        if item_id not in index:
            raise UnknownItemError(f"item {item_id!r} not in manifest")
        out[i, index[item_id].class_index] = 1.0
    return out
