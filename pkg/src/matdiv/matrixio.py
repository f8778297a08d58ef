"""Plain-text matrix serialization.

One header line ``rows cols``, then the row-major entries as
whitespace-separated decimals with 17 significant digits (enough to
round-trip float64 exactly).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DomainError
from .linalg import as_matrix


def write_matrix(path, m) -> None:
    m = as_matrix(m)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(format(v, ".17g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if len(tokens) < 2:
        raise DomainError(f"{path}: missing 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        data = np.array([float(t) for t in tokens[2:]], dtype=float)
    except ValueError as exc:
        raise DomainError(f"{path}: malformed matrix text: {exc}") from exc
    if data.size != rows * cols:
        raise DomainError(f"{path}: expected {rows * cols} entries, found {data.size}")
    return as_matrix(data.reshape(rows, cols))
