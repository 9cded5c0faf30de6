#!/usr/bin/env python3
"""
Matrix File Utilities
Reads and writes dense real matrices as whitespace-delimited text or
Matrix Market files. The format is auto-detected from the header line.
"""

import math
import os
from typing import List

import numpy as np
import scipy.io

from errors import MatrixFormatError

MATRIX_MARKET_BANNER = '%%MatrixMarket'


def detect_format(path: str) -> str:
    """Return 'mtx' for Matrix Market files, 'text' otherwise"""
    try:
        with open(path, 'r') as f:
            for line in f:
                if line.strip():
                    return 'mtx' if line.lstrip().startswith(MATRIX_MARKET_BANNER) else 'text'
    except OSError as e:
        raise MatrixFormatError(f"cannot read file ({e.strerror or e})", path=path) from e
    return 'text'


def read_matrix(path: str) -> np.ndarray:
    """Read a 2-D float matrix from a text or Matrix Market file"""
    if not os.path.isfile(path):
        raise MatrixFormatError("file does not exist", path=path)
    if detect_format(path) == 'mtx':
        return _read_matrix_market(path)
    return _read_text(path)


def _read_text(path: str) -> np.ndarray:
    rows: List[List[float]] = []
    try:
        with open(path, 'r') as f:
            lines = f.readlines()
    except (OSError, UnicodeDecodeError) as e:
        raise MatrixFormatError(f"cannot read file ({e})", path=path) from e

    for line_no, line in enumerate(lines, start=1):
        content = line.split('#', 1)[0].strip()
        if not content:
            continue
        row = []
        for col_no, token in enumerate(content.replace(',', ' ').split(), start=1):
            try:
                value = float(token)
            except ValueError:
                raise MatrixFormatError(f"non-numeric entry {token!r}", path=path,
                                        row=line_no, column=col_no) from None
            if not math.isfinite(value):
                raise MatrixFormatError(f"non-finite entry {token!r}", path=path,
                                        row=line_no, column=col_no)
            row.append(value)
        if rows and len(row) != len(rows[0]):
            raise MatrixFormatError(f"expected {len(rows[0])} columns, found {len(row)}",
                                    path=path, row=line_no)
        rows.append(row)

    if not rows:
        raise MatrixFormatError("file holds no matrix rows", path=path)
    return np.array(rows, dtype=float)


def _read_matrix_market(path: str) -> np.ndarray:
    try:
        data = scipy.io.mmread(path)
    except (ValueError, OSError, IndexError) as e:
        raise MatrixFormatError(f"invalid Matrix Market content ({e})", path=path) from e
    if hasattr(data, 'toarray'):
        data = data.toarray()
    matrix = np.asarray(data)
    if np.iscomplexobj(matrix):
        raise MatrixFormatError("complex Matrix Market field is not supported", path=path)
    matrix = matrix.astype(float)
    if matrix.ndim != 2:
        raise MatrixFormatError("Matrix Market content is not two-dimensional", path=path)
    bad = np.argwhere(~np.isfinite(matrix))
    if bad.size:
        r, c = bad[0]
        raise MatrixFormatError("non-finite entry", path=path, row=int(r) + 1, column=int(c) + 1)
    return matrix


def write_matrix(matrix: np.ndarray, path: str, fmt: str = 'text') -> None:
    """Write a matrix so that read_matrix returns a bit-identical array"""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if fmt == 'mtx':
        # 16 digits after the point in %e notation round-trips every double
        with open(path, 'wb') as f:
            scipy.io.mmwrite(f, matrix, field='real', precision=16, symmetry='general')
        return
    if fmt != 'text':
        raise ValueError(f"unknown matrix format {fmt!r}")
    with open(path, 'w') as f:
        for row in matrix:
            f.write(' '.join(repr(float(x)) for x in row) + '\n')
