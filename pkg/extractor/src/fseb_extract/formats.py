"""Writers for the FSEB embedding format and manifest JSON.

FSEB: little-endian header (magic "FSEB", uint32 version, uint32 dtype tag,
uint64 rows, uint64 dims) followed by a row-major float payload. This
extractor emits dtype tag 1 (float32) to halve file size; the consuming
engine widens on load.
"""

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"FSEB"
VERSION = 1
FLOAT32_TAG = 1
_HEADER = struct.Struct("<4sIIQQ")


def write_fseb(path, matrix) -> None:
    m = np.ascontiguousarray(matrix, dtype=np.float32)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, FLOAT32_TAG, m.shape[0], m.shape[1]))
        f.write(m.tobytes())


def write_manifest(path, dataset_name, class_names, items) -> None:
    """items: iterable of (item_id, class_index, row_index)."""
    obj = {
        "dataset_name": dataset_name,
        "class_names": list(class_names),
        "items": [
            {"item_id": i, "class_index": c, "row_index": r} for i, c, r in items
        ],
    }
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True))
