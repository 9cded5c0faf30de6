#!/usr/bin/env python3
"""
Retarded Time-Delay System Model
Core data types shared by the Rekasius sweep, the Kronecker baseline and the
DDE simulator, plus the delay-free sanity checks every analysis starts from.

    x'(t) = A0 x(t) + A1 x(t - tau)
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

import config
from errors import DimensionMismatchError, EigenSolverError, MatrixFormatError
from matrix_io import read_matrix, write_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RetardedSystem:
    a0: np.ndarray
    a1: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        a0 = np.array(self.a0, dtype=float, copy=True)
        a1 = np.array(self.a1, dtype=float, copy=True)
        if a0.ndim == 0:
            a0 = a0.reshape(1, 1)
        if a1.ndim == 0:
            a1 = a1.reshape(1, 1)
        for name, m in (('A0', a0), ('A1', a1)):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionMismatchError(f"{name} must be square, got shape {m.shape}")
            if not np.all(np.isfinite(m)):
                r, c = np.argwhere(~np.isfinite(m))[0]
                raise MatrixFormatError(f"{name} has a non-finite entry", row=int(r) + 1, column=int(c) + 1)
        if a0.shape != a1.shape:
            raise DimensionMismatchError(f"A0 is {a0.shape[0]}x{a0.shape[1]} but A1 is {a1.shape[0]}x{a1.shape[1]}")
        a0.setflags(write=False)
        a1.setflags(write=False)
        object.__setattr__(self, 'a0', a0)
        object.__setattr__(self, 'a1', a1)
        object.__setattr__(self, 'n', a0.shape[0])

    @classmethod
    def from_arrays(cls, a0, a1) -> 'RetardedSystem':
        return cls(a0=np.atleast_2d(np.asarray(a0, dtype=float)),
                   a1=np.atleast_2d(np.asarray(a1, dtype=float)))

    @property
    def closed_loop(self) -> np.ndarray:
        """A0 + A1, the dynamics matrix at tau = 0"""
        return self.a0 + self.a1

    def norms(self) -> Tuple[float, float, float, float]:
        """Spectral norms of A0, A1, A0 + A1 and A0 - A1"""
        return (float(np.linalg.norm(self.a0, 2)),
                float(np.linalg.norm(self.a1, 2)),
                float(np.linalg.norm(self.a0 + self.a1, 2)),
                float(np.linalg.norm(self.a0 - self.a1, 2)))

    def default_eps_imag(self) -> float:
        norm_a0, norm_a1, _, _ = self.norms()
        return config.EPS_IMAG_REL * (1.0 + norm_a0 + norm_a1)

    def __eq__(self, other):
        if not isinstance(other, RetardedSystem):
            return NotImplemented
        return np.array_equal(self.a0, other.a0) and np.array_equal(self.a1, other.a1)

    def __hash__(self):
        return hash((self.a0.tobytes(), self.a1.tobytes()))


@dataclass(frozen=True)
class SpectrumSummary:
    eigenvalues: Tuple[complex, ...]
    rhp_count: int
    min_abs_real: float

    @classmethod
    def from_eigenvalues(cls, eigenvalues, tol: float) -> 'SpectrumSummary':
        eigenvalues = np.asarray(eigenvalues, dtype=complex)
        real = eigenvalues.real
        return cls(eigenvalues=tuple(complex(v) for v in eigenvalues),
                   rhp_count=int(np.count_nonzero(real > tol)),
                   min_abs_real=float(np.min(np.abs(real))) if real.size else float('inf'))

    @property
    def max_real(self) -> float:
        return max(v.real for v in self.eigenvalues)

    @property
    def is_stable(self) -> bool:
        """All eigenvalues strictly inside the left half-plane"""
        return self.max_real < -config.STABILITY_TOL


def load_system(path_a0: str, path_a1: str) -> RetardedSystem:
    """Read A0 and A1 from matrix files and validate them as a pair"""
    a0 = read_matrix(path_a0)
    a1 = read_matrix(path_a1)
    for path, m in ((path_a0, a0), (path_a1, a1)):
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"{path}: matrix is not square ({m.shape[0]}x{m.shape[1]})")
    if a0.shape != a1.shape:
        raise DimensionMismatchError(
            f"dimension mismatch: {path_a0} is {a0.shape[0]}x{a0.shape[1]}, "
            f"{path_a1} is {a1.shape[0]}x{a1.shape[1]}")
    system = RetardedSystem(a0=a0, a1=a1)
    logger.debug("📂 Loaded %dx%d system from %s and %s", system.n, system.n, path_a0, path_a1)
    return system


def save_system(system: RetardedSystem, path_a0: str, path_a1: str, fmt: str = 'text') -> None:
    write_matrix(system.a0, path_a0, fmt)
    write_matrix(system.a1, path_a1, fmt)


def delay_free_spectrum(system: RetardedSystem) -> SpectrumSummary:
    """Eigenvalues of A0 + A1; rhp_count == 0 certifies the starting point of the sweep"""
    try:
        eigenvalues = np.linalg.eigvals(system.closed_loop)
    except np.linalg.LinAlgError as e:
        raise EigenSolverError(f"delay-free eigensolve did not converge: {e}") from e
    return SpectrumSummary.from_eigenvalues(eigenvalues, tol=config.STABILITY_TOL)


def check_zero_root(system: RetardedSystem) -> bool:
    """True when s = 0 is a characteristic root for every delay (det(A0 + A1) ~ 0)"""
    closed_loop = system.closed_loop
    scale = float(np.linalg.norm(closed_loop, 2)) ** system.n
    if scale == 0.0:
        return True
    return abs(float(np.linalg.det(closed_loop))) < config.ZERO_ROOT_REL_TOL * scale
