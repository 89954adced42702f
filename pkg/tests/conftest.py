import numpy as np

from ransacnn.core import EmbeddingSet, normalize


def unit_rows(seed: int, n: int, d: int) -> np.ndarray:
    """Random float32 rows of unit L2 norm."""
    gen = np.random.default_rng(seed)
    rows = gen.standard_normal((n, d))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    return rows.astype(np.float32)


def unit_set(seed: int, n: int, d: int) -> EmbeddingSet:
    return normalize(EmbeddingSet(unit_rows(seed, n, d)))
