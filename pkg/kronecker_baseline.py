#!/usr/bin/env python3
"""
Kronecker Multiplication Baseline
Independent oracle for small systems: every crossing frequency of
x'(t) = A0 x(t) + A1 x(t - tau) comes out of one 2n^2 x 2n^2 eigenproblem,

    lambda(s) = G0 s^2 + G1 s + G2
    G0 = I_{n^2},  G1 = (I (x) A0) - (A0 (x) I),  G2 = (A1 (x) A1) - (A0 (x) A0)

and the delays of each frequency follow from the generalized eigenvalues of
the pencil (A0 - jw I, -A1) that lie on the unit circle.

The dense companion matrix grows like n^4, so construction is refused above a
memory cap (see estimate_memory).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

import config
from errors import EigenSolverError, ResourceGuardError, SpuriousCrossingError
from system_model import RetardedSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatrixPolynomial:
    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray

    def __post_init__(self):
        size = self.g0.shape[0]
        for name, block in (('G0', self.g0), ('G1', self.g1), ('G2', self.g2)):
            if block.shape != (size, size):
                raise ValueError(f"{name} has shape {block.shape}, expected {(size, size)}")
        if not np.array_equal(self.g0, np.eye(size)):
            raise ValueError("G0 must be the identity")

    @property
    def size(self) -> int:
        return self.g0.shape[0]

    def evaluate(self, s: complex) -> np.ndarray:
        return self.g0 * s ** 2 + self.g1 * s + self.g2


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization, so vec(P1 P2 P3) = (P3^T (x) P1) vec(P2)"""
    return np.asarray(matrix).reshape(-1, order='F')


def kron_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.atleast_2d(a), np.atleast_2d(b))


def estimate_memory(n: int, bytes_per_element: int = 8) -> int:
    """Bytes needed to store the dense 2n^2 x 2n^2 companion matrix"""
    if n < 1 or bytes_per_element < 1:
        raise ValueError("n and bytes_per_element must be positive")
    return (2 * n * n) ** 2 * bytes_per_element


def _guard(system: RetardedSystem, memory_cap: Optional[float]) -> None:
    cap = config.MEMORY_CAP_BYTES if memory_cap is None else memory_cap
    required = estimate_memory(system.n, 8)
    if required > cap:
        raise ResourceGuardError(f"Kronecker companion for n = {system.n} refused", required, cap)


def build_lambda(system: RetardedSystem, memory_cap: Optional[float] = None) -> MatrixPolynomial:
    _guard(system, memory_cap)
    identity = np.eye(system.n)
    g0 = np.eye(system.n ** 2)
    g1 = kron_product(identity, system.a0) - kron_product(system.a0, identity)
    g2 = kron_product(system.a1, system.a1) - kron_product(system.a0, system.a0)
    return MatrixPolynomial(g0=g0, g1=g1, g2=g2)


def build_kron_companion(poly: MatrixPolynomial) -> np.ndarray:
    """[[0, I], [-G2, -G1]]; G0 is the identity so no inverse is needed"""
    size = poly.size
    companion = np.zeros((2 * size, 2 * size))
    companion[:size, size:] = np.eye(size)
    companion[size:, :size] = -poly.g2
    companion[size:, size:] = -poly.g1
    return companion


def kron_crossings(system: RetardedSystem, eps_imag: Optional[float] = None,
                   memory_cap: Optional[float] = None) -> List[float]:
    """Distinct positive crossing frequencies (rad/s), ascending"""
    eps_imag = system.default_eps_imag() if eps_imag is None else eps_imag
    companion = build_kron_companion(build_lambda(system, memory_cap))
    logger.info("🧮 Kronecker companion %dx%d for n = %d", companion.shape[0], companion.shape[1], system.n)
    try:
        eigenvalues = np.linalg.eigvals(companion).astype(complex)
    except np.linalg.LinAlgError as e:
        raise EigenSolverError(f"Kronecker companion eigensolve did not converge: {e}") from e

    on_axis = eigenvalues[(np.abs(eigenvalues.real) <= eps_imag) & (eigenvalues.imag > eps_imag)]
    omegas: List[float] = []
    for omega in np.sort(on_axis.imag):
        if omegas and abs(omega - omegas[-1]) <= 1e-8 * (1.0 + omega):
            continue
        omegas.append(float(omega))
    return omegas


def delays_from_crossing(system: RetardedSystem, omega: float, k_max: int = 0) -> List[float]:
    """
    Delay ladder at frequency w from the unit-circle generalized eigenvalue
    z = e^{-jw tau} of (A0 - jw I, -A1). The angle is taken with the full
    two-argument phase of z.
    """
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    pencil_a = system.a0 - 1j * omega * np.eye(system.n)
    pencil_b = -system.a1.astype(complex)
    try:
        z = scipy.linalg.eigvals(pencil_a, pencil_b)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenSolverError(f"generalized eigensolve did not converge at omega = {omega!r}: {e}") from e
    z = z[np.isfinite(z)]
    unit = z[np.abs(np.abs(z) - 1.0) <= config.UNIT_CIRCLE_TOL]
    if unit.size == 0:
        raise SpuriousCrossingError("no unit-modulus generalized eigenvalue; spurious crossing", omega)

    period = 2.0 * math.pi / omega
    phases = np.mod(-np.angle(unit), 2.0 * math.pi)
    taus0 = np.where(phases > 0.0, phases / omega, period)
    tau0 = float(np.min(taus0))
    return [tau0 + k * period for k in range(k_max + 1)]


def baseline_report(system: RetardedSystem, k_max: int = 0, eps_imag: Optional[float] = None,
                    memory_cap: Optional[float] = None) -> Tuple[List[Tuple[float, List[float]]], List[float]]:
    """
    (omega, delay ladder) for every genuine crossing, plus the frequencies that
    turned out to be spurious.
    """
    genuine = []
    spurious = []
    for omega in kron_crossings(system, eps_imag=eps_imag, memory_cap=memory_cap):
        try:
            genuine.append((omega, delays_from_crossing(system, omega, k_max)))
        except SpuriousCrossingError as e:
            logger.warning("⚠️  %s", e)
            spurious.append(omega)
    genuine.sort(key=lambda row: row[1][0])
    return genuine, spurious
