"""File formats: the RNNE binary embedding container and CSV sidecars.

RNNE layout (little-endian throughout):

    offset 0   magic   4 bytes  b"RNNE"
    offset 4   version u16      1
    offset 6   n       u64      row count
    offset 14  d       u32      columns per row
    offset 18  dtype   u8       0 = float32
    offset 19  payload n*d*4 bytes, row-major float32, nothing after

Labels are CSV with header "index,label" (0 = inlier, 1 = outlier); scores
are CSV with header "index,score", scores printed with 9 significant
digits. Sweep reports are JSON records, one per line.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .core import NORM_ATOL, EmbeddingSet, _row_norms
from .errors import FileFormatError, InvalidEmbeddingError

MAGIC = b"RNNE"
VERSION = 1
DTYPE_FLOAT32 = 0

_HEADER = struct.Struct("<4sHQIB")
HEADER_SIZE = _HEADER.size  # 19 bytes


def write_embeddings(path, emb: EmbeddingSet) -> None:
    data = np.ascontiguousarray(emb.data, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, emb.n, emb.d, DTYPE_FLOAT32))
        fh.write(data.tobytes())


def read_embeddings(path) -> EmbeddingSet:
    """Parse an RNNE file; the normalized flag is detected from row norms."""
    blob = Path(path).read_bytes()
    if len(blob) < HEADER_SIZE:
        raise FileFormatError(
            f"{path}: truncated header, file ends at byte {len(blob)}, need {HEADER_SIZE}"
        )
    magic, version, n, d, dtype = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r} at byte 0, expected {MAGIC!r}")
    if version != VERSION:
        raise FileFormatError(f"{path}: unsupported version {version} at byte 4")
    if dtype != DTYPE_FLOAT32:
        raise FileFormatError(f"{path}: unsupported dtype {dtype} at byte 18")
    if n == 0 or d == 0:
        raise FileFormatError(f"{path}: empty embedding set (n={n}, d={d} in header)")
    expected = n * d * 4
    actual = len(blob) - HEADER_SIZE
    if actual != expected:
        raise FileFormatError(
            f"{path}: payload mismatch at byte {HEADER_SIZE}: expected {expected} bytes, found {actual}"
        )
    rows = np.frombuffer(blob, dtype="<f4", count=n * d, offset=HEADER_SIZE).reshape(n, d)
    try:
        emb = EmbeddingSet(rows)
    except InvalidEmbeddingError as exc:
        raise FileFormatError(f"{path}: invalid payload ({exc})") from exc
    if np.all(np.abs(_row_norms(emb.data) - 1.0) <= NORM_ATOL):
        emb = EmbeddingSet(emb.data, normalized=True)
    return emb


def write_labels(path, labels) -> None:
    flags = np.asarray(labels)
    with open(path, "w", newline="") as fh:
        fh.write("index,label\n")
        for i, value in enumerate(flags.tolist()):
            fh.write(f"{i},{int(value)}\n")


def read_labels(path, n: int | None = None) -> np.ndarray:
    """Read a complete label vector; indices must cover [0, n) exactly."""
    idx, values = _read_indexed_csv(path, "label")
    labels = np.array([int(v) for v in values], dtype=np.int8)
    if not np.all((labels == 0) | (labels == 1)):
        raise FileFormatError(f"{path}: labels must be 0 or 1")
    return _to_vector(path, idx, labels, n)


def write_scores(path, scores) -> None:
    values = np.asarray(getattr(scores, "values", scores), dtype=np.float64)
    with open(path, "w", newline="") as fh:
        fh.write("index,score\n")
        for i, value in enumerate(values.tolist()):
            fh.write(f"{i},{value:.9g}\n")


def read_scores(path, n: int | None = None) -> np.ndarray:
    idx, values = _read_indexed_csv(path, "score")
    scores = np.array([float(v) for v in values], dtype=np.float64)
    return _to_vector(path, idx, scores, n)


def write_keep_list(path, indices) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("index\n")
        for i in np.asarray(indices).tolist():
            fh.write(f"{int(i)}\n")


def write_sweep_records(path, records) -> None:
    with open(path, "w", newline="") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def csv_to_embeddings(path) -> EmbeddingSet:
    """Interop importer: plain CSV, one embedding per line, no header."""
    rows = []
    width = None
    with open(path, "r", newline="") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise FileFormatError(f"{path}: line {line_no}: {exc}") from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise FileFormatError(
                    f"{path}: line {line_no}: expected {width} columns, found {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise FileFormatError(f"{path}: no rows found")
    try:
        return EmbeddingSet(np.array(rows, dtype=np.float32))
    except InvalidEmbeddingError as exc:
        raise FileFormatError(f"{path}: invalid embeddings ({exc})") from exc


def _read_indexed_csv(path, value_column: str) -> tuple[np.ndarray, list[str]]:
    header = f"index,{value_column}"
    indices: list[int] = []
    values: list[str] = []
    with open(path, "r", newline="") as fh:
        first = fh.readline().strip()
        if first != header:
            raise FileFormatError(f"{path}: expected header {header!r}, found {first!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise FileFormatError(f"{path}: line {line_no}: expected 2 fields")
            try:
                indices.append(int(parts[0]))
            except ValueError as exc:
                raise FileFormatError(f"{path}: line {line_no}: bad index ({exc})") from exc
            values.append(parts[1])
    return np.array(indices, dtype=np.int64), values


def _to_vector(path, idx: np.ndarray, values: np.ndarray, n: int | None) -> np.ndarray:
    total = n if n is not None else (int(idx.max()) + 1 if idx.size else 0)
    if idx.size != np.unique(idx).size:
        raise FileFormatError(f"{path}: duplicate indices")
    if idx.size and (idx.min() < 0 or idx.max() >= total):
        raise FileFormatError(f"{path}: indices outside [0, {total})")
    if idx.size != total:
        raise FileFormatError(f"{path}: expected {total} rows, found {idx.size}")
    out = np.empty(total, dtype=values.dtype)
    out[idx] = values
    return out
