"""Shared numerical data model: embedding matrices, score vectors, seeded RNG.

Embeddings are stored as float32 row matrices; every similarity and norm is
accumulated in float64. All containers are immutable after construction
(the underlying arrays are marked read-only) and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidEmbeddingError

#: Tolerance on |row norm - 1| for a row to count as unit length.
NORM_ATOL = 1e-6

_U64 = 1 << 64

# Shared by SeededRng.generator(); the state setter copies these.
_SEED_SEQ = np.random.SeedSequence(0)
_PHILOX_ZEROS = np.zeros(4, dtype=np.uint64)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.setflags(write=False)
    return out


def _row_norms(data: np.ndarray) -> np.ndarray:
    d64 = data.astype(np.float64)
    return np.sqrt(np.einsum("ik,ik->i", d64, d64))


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """An n x d matrix of feature vectors, one embedding per row."""

    data: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        if data.ndim != 2:
            raise ValueError(f"embedding matrix must be 2-d, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"embedding matrix must be at least 1x1, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            bad = int(np.nonzero(~np.isfinite(data).all(axis=1))[0][0])
            raise InvalidEmbeddingError(f"row {bad} contains NaN or Inf")
        norms = _row_norms(data)
        if np.any(norms == 0.0):
            bad = int(np.nonzero(norms == 0.0)[0][0])
            raise InvalidEmbeddingError(f"row {bad} is the zero vector")
        if self.normalized and np.any(np.abs(norms - 1.0) > NORM_ATOL):
            bad = int(np.nonzero(np.abs(norms - 1.0) > NORM_ATOL)[0][0])
            raise InvalidEmbeddingError(
                f"set claims to be normalized but row {bad} has norm {norms[bad]!r}"
            )
        object.__setattr__(self, "data", _frozen(data))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class InlierScores:
    """Per-item inlier scores in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("inlier scores must be a 1-d vector")
        if not np.all((values >= -1.0) & (values <= 1.0)):
            raise ValueError("inlier scores must lie in [-1, 1]")
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class OutlierScores:
    """Per-item outlier scores in [0, 1].

    completed_iterations records how many threshold steps actually ran for
    scores produced by the threshold sweep; other producers leave it at 0.
    """

    values: np.ndarray
    completed_iterations: int = 0

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("outlier scores must be a 1-d vector")
        if not np.all((values >= 0.0) & (values <= 1.0)):
            raise ValueError("outlier scores must lie in [0, 1]")
        if self.completed_iterations < 0:
            raise ValueError("completed_iterations must be non-negative")
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SeededRng:
    """A named, reproducible random stream.

    Identical (master_seed, stream_id) pairs yield identical draw sequences
    on every platform; the generator is counter based (Philox), so streams
    can be derived in any order without affecting each other. Instances are
    cheap value objects; each parallel unit derives its own stream rather
    than sharing a generator.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < _U64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "stream_id", self.stream_id % _U64)

    def stream(self, offset: int) -> "SeededRng":
        """Derive the stream `offset` positions after this one."""
        return SeededRng(self.master_seed, (self.stream_id + offset) % _U64)

    def generator(self) -> np.random.Generator:
        # Equivalent to Philox(key=[master_seed, stream_id]) but avoids the
        # per-construction OS entropy draw, which dominates tight loops.
        bitgen = np.random.Philox(seed=_SEED_SEQ)
        bitgen.state = {
            "bit_generator": "Philox",
            "state": {
                "counter": _PHILOX_ZEROS,
                "key": np.array([self.master_seed, self.stream_id], dtype=np.uint64),
            },
            "buffer": _PHILOX_ZEROS,
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return np.random.Generator(bitgen)


def cosine_similarity(a, b) -> float:
    """Cosine similarity of two vectors, clamped to [-1, 1].

    Vectors whose norms are already within NORM_ATOL of 1 are compared by a
    plain dot product, matching the batch kernels bit for bit; anything
    else is divided by its norms first. Accumulation is float64.
    """
    a32 = np.ascontiguousarray(a, dtype=np.float32).reshape(1, -1)
    b32 = np.ascontiguousarray(b, dtype=np.float32).reshape(1, -1)
    if a32.shape != b32.shape:
        raise ValueError(f"dimension mismatch: {a32.shape[1]} vs {b32.shape[1]}")
    if not (np.all(np.isfinite(a32)) and np.all(np.isfinite(b32))):
        raise InvalidEmbeddingError("inputs must be finite")
    na = float(_row_norms(a32)[0])
    nb = float(_row_norms(b32)[0])
    if na == 0.0 or nb == 0.0:
        raise InvalidEmbeddingError("zero-norm input")
    if abs(na - 1.0) <= NORM_ATOL and abs(nb - 1.0) <= NORM_ATOL:
        return kernels.cosine_pair(a32, 0, b32, 0)
    dot = float(np.einsum("k,k->", a32[0].astype(np.float64), b32[0].astype(np.float64)))
    return min(1.0, max(-1.0, dot / (na * nb)))


def normalize(emb: EmbeddingSet) -> EmbeddingSet:
    """Rescale every row to unit L2 norm.

    Rows already within NORM_ATOL of unit length pass through unchanged,
    which makes the operation idempotent bit for bit.
    """
    norms = _row_norms(emb.data)
    needs = np.abs(norms - 1.0) > NORM_ATOL
    if not np.any(needs):
        return EmbeddingSet(emb.data, normalized=True)
    scaled = emb.data.astype(np.float64)
    scaled[needs] /= norms[needs, None]
    out = np.where(needs[:, None], scaled.astype(np.float32), emb.data)
    return EmbeddingSet(out, normalized=True)


def sample_without_replacement(rng: SeededRng, population: int, k: int) -> np.ndarray:
    """Draw k distinct indices from [0, population), every subset equiprobable.

    Partial Fisher-Yates driven by the stream's bounded-integer draws, so
    the result is a pure function of (master_seed, stream_id).
    """
    if not 1 <= k <= population:
        raise ValueError(f"need 1 <= k <= population, got k={k}, population={population}")
    gen = rng.generator()
    js = gen.integers(np.arange(k, dtype=np.int64), population).tolist()
    pool = list(range(population))
    for i, j in enumerate(js):
        pool[i], pool[j] = pool[j], pool[i]
    return np.array(pool[:k], dtype=np.int64)
