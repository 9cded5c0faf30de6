#!/usr/bin/env python3
"""
Rekasius Companion-Matrix Sweep
Finds the imaginary-axis root crossings and the delay margin of a retarded
time-delay system by sweeping the Rekasius parameter T.

With e^{-tau s} = (1 - T s) / (1 + T s) for s = jw, the characteristic equation
becomes the quadratic matrix polynomial

    det(T I s^2 + (I - T A0 + T A1) s - (A0 + A1)) = 0

whose roots are the eigenvalues of the 2n x 2n companion matrix

    [[0,              I                    ],
     [(A0 + A1) / T,  -(I / T - A0 + A1)   ]]

A coarse grid over T finds where the companion spectrum changes its
right-half-plane count, a fine search pins each crossing (T_c, w_c) down, and
every crossing maps to a ladder of delays tau_k spaced 2*pi/w_c apart.
"""

import logging
import math
import time
from dataclasses import dataclass, replace
from enum import Enum
from functools import partial
from multiprocessing import Pool
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

import config
from errors import (BracketLostError, ConfigurationError, ConsistencyError, EigenSolverError,
                    ScanChunkError, UnstableDelayFreeError, ZeroRootError)
from system_model import RetardedSystem, SpectrumSummary, check_zero_root, delay_free_spectrum

logger = logging.getLogger(__name__)


class Direction(Enum):
    DESTABILIZING = 'destabilizing'
    STABILIZING = 'stabilizing'
    INCONCLUSIVE = 'inconclusive'  # tangential touch, kept out of the stability walk

    @property
    def label(self) -> str:
        """Column value used in crossing tables"""
        return {Direction.DESTABILIZING: 'Unstable',
                Direction.STABILIZING: 'Stable',
                Direction.INCONCLUSIVE: 'Inconclusive'}[self]


class CandidateKind(Enum):
    COUNT_CHANGE = 'count_change'
    DIP = 'dip'


@dataclass(frozen=True)
class SweepConfig:
    """
    Search settings for the T sweep.

    eps_imag and refine_tol may be left as None; resolve() fills them in from
    the system being analyzed. Right-half-plane counts use the sign of Re s;
    eps_imag only marks near-axis dips for a closer look and bounds how far a
    refined crossing may sit off the axis.
    """
    t_min: float = config.T_MIN
    t_max: float = config.T_MAX
    t_step: float = config.T_STEP
    refine_tol: Optional[float] = None
    eps_imag: Optional[float] = None
    k_max: int = config.K_MAX
    workers: int = config.WORKERS
    auto_widen: bool = True
    batch_size: int = config.BATCH_SIZE
    cond_limit: float = config.COND_LIMIT

    def __post_init__(self):
        if not (math.isfinite(self.t_min) and math.isfinite(self.t_max)):
            raise ConfigurationError("t_min and t_max must be finite")
        if self.t_min >= self.t_max:
            raise ConfigurationError(f"empty T grid: t_min={self.t_min} must be below t_max={self.t_max}")
        if not (self.t_min < 0.0 < self.t_max):
            raise ConfigurationError(f"T range must straddle zero, got [{self.t_min}, {self.t_max}]")
        if not self.t_step > 0.0:
            raise ConfigurationError("t_step must be positive")
        if self.refine_tol is not None and not self.refine_tol > 0.0:
            raise ConfigurationError("refine_tol must be positive")
        if self.eps_imag is not None and not self.eps_imag > 0.0:
            raise ConfigurationError("eps_imag must be positive")
        if self.k_max < 0:
            raise ConfigurationError("k_max must be nonnegative")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be at least 1")

    @property
    def is_resolved(self) -> bool:
        return self.refine_tol is not None and self.eps_imag is not None and not self.auto_widen

    def resolve(self, system: RetardedSystem) -> 'SweepConfig':
        """Concrete settings for one system: widened T range, eps_imag and refine_tol"""
        if self.is_resolved:
            return self
        t_min, t_max = self.t_min, self.t_max
        if self.auto_widen:
            _, _, norm_sum, norm_diff = system.norms()
            bound = config.WIDEN_FACTOR * max(norm_sum, 1.0 / norm_diff if norm_diff > 0.0 else 0.0)
            if t_max < bound or -t_min < bound:
                t_max = max(t_max, bound)
                t_min = min(t_min, -bound)
                logger.warning("⚠️  T range widened to [%.6g, %.6g] so the T terms of the companion matrix "
                               "become negligible", t_min, t_max)
        eps_imag = self.eps_imag if self.eps_imag is not None else system.default_eps_imag()
        refine_tol = self.refine_tol
        if refine_tol is None:
            refine_tol = config.REFINE_TOL_REL * (t_max - t_min)
        return replace(self, t_min=t_min, t_max=t_max, eps_imag=eps_imag,
                       refine_tol=refine_tol, auto_widen=False)

    @property
    def grid_size(self) -> int:
        return int(math.floor((self.t_max - self.t_min) / self.t_step + 1e-9)) + 1

    def grid(self, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """T values t_min + i * t_step for i in [start, stop)"""
        stop = self.grid_size if stop is None else stop
        return self.t_min + self.t_step * np.arange(start, stop, dtype=float)


@dataclass(frozen=True)
class CrossingCandidate:
    t_lo: float
    t_hi: float
    kind: CandidateKind
    count_lo: int
    count_hi: int

    @property
    def width(self) -> float:
        return self.t_hi - self.t_lo


@dataclass(frozen=True)
class Crossing:
    t_c: float
    omega_c: float
    direction: Direction
    taus: Tuple[float, ...]

    @property
    def tau0(self) -> float:
        return self.taus[0]

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega_c


@dataclass(frozen=True)
class StabilityReport:
    crossings: Tuple[Crossing, ...]
    delay_margin: Optional[float]          # None means unbounded (delay-independent stability)
    windows: Tuple[Tuple[float, float], ...]
    walk_horizon: float
    config: SweepConfig
    candidate_count: int = 0
    elapsed: float = 0.0

    @property
    def is_unbounded(self) -> bool:
        return self.delay_margin is None


# ---------------------------------------------------------------------------
# Companion matrix and spectra
# ---------------------------------------------------------------------------

def build_companion(system: RetardedSystem, t: float) -> np.ndarray:
    """The 2n x 2n companion matrix whose eigenvalues solve the Rekasius polynomial at T = t"""
    if t == 0.0:
        raise ConfigurationError("the companion matrix is undefined at T = 0")
    return _companion_stack(system, np.array([float(t)]))[0]


def _companion_stack(system: RetardedSystem, ts: np.ndarray) -> np.ndarray:
    n = system.n
    identity = np.eye(n)
    inv_t = (1.0 / ts)[:, None, None]
    stack = np.zeros((ts.size, 2 * n, 2 * n))
    stack[:, :n, n:] = identity
    stack[:, n:, :n] = system.closed_loop[None, :, :] * inv_t
    stack[:, n:, n:] = (system.a0 - system.a1)[None, :, :] - identity[None, :, :] * inv_t
    return stack


def _eigvals(matrix: np.ndarray, t: float) -> np.ndarray:
    try:
        return np.linalg.eigvals(matrix).astype(complex)
    except np.linalg.LinAlgError as e:
        raise EigenSolverError(f"companion eigensolve did not converge: {e}", t=t) from e


def companion_eigenvalues(system: RetardedSystem, t: float) -> np.ndarray:
    return _eigvals(build_companion(system, t), t)


def spectrum_at(system: RetardedSystem, t: float, cfg: Optional[SweepConfig] = None) -> SpectrumSummary:
    """Spectrum of the companion matrix at T = t, classified with the active eps_imag"""
    eps_imag = cfg.eps_imag if cfg is not None and cfg.eps_imag is not None else system.default_eps_imag()
    return SpectrumSummary.from_eigenvalues(companion_eigenvalues(system, t), tol=eps_imag)


def taus_from_crossing(t_c: float, omega_c: float, k_max: int) -> List[float]:
    """
    Delay ladder of one crossing: the smallest nonnegative
    tau_0 = (2 / w) (atan(w T) + l pi), then tau_k = tau_0 + 2 pi k / w.
    """
    if not omega_c > 0.0:
        raise ConfigurationError(f"crossing frequency must be positive, got {omega_c}")
    if k_max < 0:
        raise ConfigurationError("k_max must be nonnegative")
    period = 2.0 * math.pi / omega_c
    tau0 = (2.0 / omega_c) * math.atan(omega_c * t_c)
    if tau0 < 0.0:
        tau0 += period
    if tau0 >= period:
        # a vanishing negative phase rounds up to a full period
        tau0 -= period
    return [tau0 + k * period for k in range(k_max + 1)]


def root_crossing_residual(system: RetardedSystem, omega: float, tau: float) -> float:
    """|det(jw I - A0 - A1 e^{-jw tau})|, zero at an exact root crossing"""
    matrix = 1j * omega * np.eye(system.n) - system.a0 - system.a1 * np.exp(-1j * omega * tau)
    return float(abs(np.linalg.det(matrix)))


def estimate_sweep_memory(n: int, bytes_per_element: int = 8, workers: int = 1) -> int:
    """Bytes held by the 2n x 2n companion matrices in flight during one sweep iteration"""
    if n < 1 or bytes_per_element < 1 or workers < 1:
        raise ConfigurationError("n, bytes_per_element and workers must be positive")
    return (2 * n) ** 2 * bytes_per_element * workers


# ---------------------------------------------------------------------------
# Coarse scan
# ---------------------------------------------------------------------------

def _axis_gap(eigenvalues: np.ndarray) -> np.ndarray:
    """Smallest |Re| over the non-real eigenvalues (last axis); real ones only reach the axis at s = 0"""
    gaps = np.where(eigenvalues.imag != 0.0, np.abs(eigenvalues.real), np.inf)
    return np.min(gaps, axis=-1)


def _scan_points(system: RetardedSystem, ts: np.ndarray, cfg: SweepConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """rhp counts, min |Re| and a validity mask for every T in ts"""
    counts = np.full(ts.size, -1, dtype=np.int64)
    min_abs = np.full(ts.size, np.inf)
    valid = np.abs(ts) >= 0.5 * cfg.t_step

    for start in range(0, ts.size, cfg.batch_size):
        stop = min(start + cfg.batch_size, ts.size)
        idx = np.arange(start, stop)[valid[start:stop]]
        if idx.size == 0:
            continue
        stack = _companion_stack(system, ts[idx])
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            cond = np.linalg.cond(stack)
        well_posed = np.isfinite(cond) & (cond <= cfg.cond_limit)
        if not np.all(well_posed):
            skipped = ts[idx[~well_posed]]
            logger.warning("⚠️  Skipping %d ill-conditioned companion matrices (first at T = %.6g)",
                           skipped.size, skipped[0])
            valid[idx[~well_posed]] = False
            idx = idx[well_posed]
            stack = stack[well_posed]
            if idx.size == 0:
                continue
        try:
            eigenvalues = np.linalg.eigvals(stack).astype(complex)
        except np.linalg.LinAlgError:
            # find the offending T value
            for i, matrix in zip(idx, stack):
                _eigvals(matrix, float(ts[i]))
            raise
        counts[idx] = np.count_nonzero(eigenvalues.real > 0.0, axis=1)
        min_abs[idx] = _axis_gap(eigenvalues)
    return counts, min_abs, valid


def _detect_candidates(ts: np.ndarray, counts: np.ndarray, min_abs: np.ndarray,
                       valid: np.ndarray, eps_imag: float) -> List[CrossingCandidate]:
    candidates = []
    same_side = np.sign(ts[:-1]) == np.sign(ts[1:])
    pair_ok = valid[:-1] & valid[1:] & same_side
    changes = np.flatnonzero(pair_ok & (counts[:-1] != counts[1:]))
    endpoints = set()
    for i in changes:
        candidates.append(CrossingCandidate(float(ts[i]), float(ts[i + 1]), CandidateKind.COUNT_CHANGE,
                                            int(counts[i]), int(counts[i + 1])))
        endpoints.update((int(i), int(i) + 1))

    # tangential dips: runs of grid points hugging the axis without a count change
    dips = [int(i) for i in np.flatnonzero(valid & (min_abs <= eps_imag)) if int(i) not in endpoints]
    runs: List[List[int]] = []
    for i in dips:
        if runs and i == runs[-1][-1] + 1 and pair_ok[i - 1]:
            runs[-1].append(i)
        else:
            runs.append([i])
    for run in runs:
        lo, hi = run[0], run[-1]
        if lo > 0 and pair_ok[lo - 1]:
            lo -= 1
        if hi < ts.size - 1 and pair_ok[hi]:
            hi += 1
        candidates.append(CrossingCandidate(float(ts[lo]), float(ts[hi]), CandidateKind.DIP,
                                            int(counts[run[0]]), int(counts[run[-1]])))

    candidates.sort(key=lambda c: (c.t_lo, c.t_hi))
    return candidates


def _require_stable(system: RetardedSystem) -> None:
    spectrum = delay_free_spectrum(system)
    if not spectrum.is_stable:
        raise UnstableDelayFreeError(
            f"delay-free system unstable: A0 + A1 has {spectrum.rhp_count} eigenvalue(s) with "
            f"nonnegative real part (max Re = {spectrum.max_real:.6g})")


def coarse_scan(system: RetardedSystem, cfg: SweepConfig) -> List[CrossingCandidate]:
    """Every grid bracket where the companion rhp count changes, plus tangential dips"""
    cfg = cfg.resolve(system)
    _require_stable(system)
    ts = cfg.grid()
    logger.info("🚀 Scanning %d values of T in [%.6g, %.6g]", ts.size, cfg.t_min, cfg.t_max)
    counts, min_abs, valid = _scan_points(system, ts, cfg)
    candidates = _detect_candidates(ts, counts, min_abs, valid, cfg.eps_imag)
    logger.info("🎯 Coarse scan found %d candidate bracket(s)", len(candidates))
    return candidates


def _scan_chunk(system: RetardedSystem, cfg: SweepConfig, bounds: Tuple[int, int]):
    start, stop = bounds
    ts = cfg.grid(start, stop)
    try:
        return _scan_points(system, ts, cfg)
    except Exception as e:
        raise ScanChunkError(f"scan worker failed: {e}", float(ts[0]), float(ts[-1])) from e


def parallel_scan(system: RetardedSystem, cfg: SweepConfig) -> List[CrossingCandidate]:
    """
    coarse_scan split into contiguous chunks evaluated by a process pool.
    Chunks are merged in grid order before brackets are detected, so the result
    does not depend on the number of workers.
    """
    cfg = cfg.resolve(system)
    if cfg.workers == 1:
        return coarse_scan(system, cfg)
    _require_stable(system)
    size = cfg.grid_size
    edges = np.linspace(0, size, cfg.workers + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    logger.info("🚀 Scanning %d values of T on %d workers", size, len(chunks))
    with Pool(processes=len(chunks)) as pool:
        parts = pool.map(partial(_scan_chunk, system, cfg), chunks)
    counts = np.concatenate([p[0] for p in parts])
    min_abs = np.concatenate([p[1] for p in parts])
    valid = np.concatenate([p[2] for p in parts])
    candidates = _detect_candidates(cfg.grid(), counts, min_abs, valid, cfg.eps_imag)
    logger.info("🎯 Parallel scan found %d candidate bracket(s)", len(candidates))
    return candidates


# ---------------------------------------------------------------------------
# Refinement and classification
# ---------------------------------------------------------------------------

def _count(system: RetardedSystem, t: float, cfg: SweepConfig) -> int:
    return int(np.count_nonzero(companion_eigenvalues(system, t).real > 0.0))


def _nearest(eigenvalues: np.ndarray, s_ref: complex) -> complex:
    return complex(eigenvalues[int(np.argmin(np.abs(eigenvalues - s_ref)))])


def _axis_eigenvalues(system: RetardedSystem, t: float) -> np.ndarray:
    """Upper half-plane eigenvalues ordered by distance to the imaginary axis"""
    eigenvalues = companion_eigenvalues(system, t)
    upper = eigenvalues[eigenvalues.imag > 0.0]
    return upper[np.argsort(np.abs(upper.real), kind='stable')]


def _same_side(t: float, t_ref: float) -> bool:
    return t != 0.0 and (t > 0.0) == (t_ref > 0.0)


def _polish(system: RetardedSystem, t_guess: float, s_guess: complex, max_half_width: float,
            cfg: SweepConfig) -> Optional[float]:
    """Root of Re(s(T)) for the eigenvalue tracked from s_guess; None if it never changes sign"""

    def real_part(t: float) -> float:
        return _nearest(companion_eigenvalues(system, t), s_guess).real

    half = cfg.refine_tol
    while half <= max_half_width:
        a, b = t_guess - half, t_guess + half
        if not (_same_side(a, t_guess) and _same_side(b, t_guess)):
            break
        f_a, f_b = real_part(a), real_part(b)
        if f_a == 0.0:
            return a
        if f_b == 0.0:
            return b
        if f_a * f_b < 0.0:
            return brentq(real_part, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        half *= 2.0
    return None


def _finish(system: RetardedSystem, t_guess: float, s_guess: complex, candidate: CrossingCandidate,
            cfg: SweepConfig) -> Tuple[float, float]:
    max_half_width = max(candidate.width, cfg.t_step, 2.0 * cfg.refine_tol)
    t_c = _polish(system, t_guess, s_guess, max_half_width, cfg)
    if t_c is None:
        # the count change already pins the crossing down to refine_tol
        logger.debug("brentq polish found no sign change near T = %.10g; keeping the bisection midpoint", t_guess)
        t_c = t_guess
    s_c = _nearest(companion_eigenvalues(system, t_c), s_guess)
    if abs(s_c.real) > cfg.eps_imag or s_c.imag == 0.0:
        raise BracketLostError(f"no imaginary eigenvalue at refined T = {t_c!r} (nearest {s_c})",
                               candidate.t_lo, candidate.t_hi,
                               companion_eigenvalues(system, candidate.t_lo),
                               companion_eigenvalues(system, candidate.t_hi))
    return float(t_c), float(abs(s_c.imag))


def _bisect_count(system: RetardedSystem, candidate: CrossingCandidate, cfg: SweepConfig) -> Tuple[float, float]:
    lo, hi = candidate.t_lo, candidate.t_hi
    c_lo = _count(system, lo, cfg)
    while hi - lo > cfg.refine_tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _count(system, mid, cfg) != c_lo:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _touch_tol(system: RetardedSystem, t: float, s: complex) -> float:
    roundoff = 100.0 * np.finfo(float).eps * float(np.linalg.norm(build_companion(system, t)))
    return max(config.TOUCH_TOL_REL * abs(s), roundoff)


def _refine_dip(system: RetardedSystem, candidate: CrossingCandidate, cfg: SweepConfig) -> List[Tuple[float, float]]:
    """
    Crossings hidden in a near-axis dip, where the grid count never changes.
    The pair closest to the axis either crosses and comes back inside one grid
    step (two crossings), touches the axis (one tangential crossing) or misses
    it (nothing).
    """
    lo, hi = candidate.t_lo, candidate.t_hi
    if hi > lo:
        result = minimize_scalar(lambda t: float(_axis_gap(companion_eigenvalues(system, t))),
                                 bounds=(lo, hi), method='bounded', options={'xatol': cfg.refine_tol})
        t_guess = float(result.x)
    else:
        t_guess = lo
    upper = _axis_eigenvalues(system, t_guess)
    if upper.size == 0:
        return []
    s_guess = complex(upper[0])

    def real_part(t: float) -> float:
        return _nearest(companion_eigenvalues(system, t), s_guess).real

    t_e = t_guess
    if hi > lo:
        f_lo, f_hi = real_part(lo), real_part(hi)
        if f_lo * f_hi < 0.0:
            # the count is unchanged, so another pair crossed the other way in this bracket
            logger.warning("⚠️  Near-axis dip in [%.6g, %.6g] hides crossings of two different pairs; "
                           "a finer t_step resolves both", lo, hi)
            t_c = brentq(real_part, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            s_c = _nearest(companion_eigenvalues(system, t_c), s_guess)
            if s_c.imag == 0.0 or abs(s_c.real) > cfg.eps_imag:
                return []
            return [(float(t_c), float(abs(s_c.imag)))]
        toward_axis = 1.0 if (f_lo if f_lo != 0.0 else f_hi) > 0.0 else -1.0
        result = minimize_scalar(lambda t: toward_axis * real_part(t), bounds=(lo, hi), method='bounded',
                                 options={'xatol': cfg.refine_tol})
        t_e = float(result.x)

        c_lo, c_e, c_hi = _count(system, lo, cfg), _count(system, t_e, cfg), _count(system, hi, cfg)
        if c_e != c_lo or c_e != c_hi:
            crossings = []
            for a, b, c_a, c_b in ((lo, t_e, c_lo, c_e), (t_e, hi, c_e, c_hi)):
                if c_a != c_b:
                    part = CrossingCandidate(a, b, CandidateKind.COUNT_CHANGE, c_a, c_b)
                    crossings.extend(refine_crossings(system, part, cfg))
            return crossings

    s_e = _nearest(companion_eigenvalues(system, t_e), s_guess)
    if s_e.imag != 0.0 and abs(s_e.real) <= _touch_tol(system, t_e, s_e):
        logger.warning("⚠️  Tangential touch of the imaginary axis at T = %.10g, w = %.10g", t_e, abs(s_e.imag))
        return [(float(t_e), float(abs(s_e.imag)))]
    logger.debug("Near miss in [%.6g, %.6g]: closest approach Re = %.3g at w = %.6g",
                 lo, hi, s_e.real, abs(s_e.imag))
    return []


def refine_crossing(system: RetardedSystem, candidate: CrossingCandidate, cfg: SweepConfig) -> Tuple[float, float]:
    """Refined (T_c, w_c) for a bracket holding one crossing pair"""
    cfg = cfg.resolve(system)
    if candidate.kind is CandidateKind.DIP:
        found = _refine_dip(system, candidate, cfg)
        if not found:
            raise BracketLostError("near-axis dip never reaches the imaginary axis", candidate.t_lo,
                                   candidate.t_hi, companion_eigenvalues(system, candidate.t_lo),
                                   companion_eigenvalues(system, candidate.t_hi))
        return found[0]
    lo, hi = _bisect_count(system, candidate, cfg)
    t_guess = 0.5 * (lo + hi)
    upper = _axis_eigenvalues(system, t_guess)
    if upper.size == 0:
        raise BracketLostError("no complex eigenvalue pair near the bracket", candidate.t_lo, candidate.t_hi,
                               companion_eigenvalues(system, candidate.t_lo),
                               companion_eigenvalues(system, candidate.t_hi))
    return _finish(system, t_guess, complex(upper[0]), candidate, cfg)


def _split_bracket(system: RetardedSystem, lo: float, hi: float, c_lo: int, c_hi: int,
                   cfg: SweepConfig) -> List[CrossingCandidate]:
    if c_lo == c_hi:
        return []
    if abs(c_hi - c_lo) <= 2 or hi - lo <= cfg.refine_tol:
        return [CrossingCandidate(lo, hi, CandidateKind.COUNT_CHANGE, c_lo, c_hi)]
    mid = 0.5 * (lo + hi)
    c_mid = _count(system, mid, cfg)
    return (_split_bracket(system, lo, mid, c_lo, c_mid, cfg)
            + _split_bracket(system, mid, hi, c_mid, c_hi, cfg))


def refine_crossings(system: RetardedSystem, candidate: CrossingCandidate,
                     cfg: SweepConfig) -> List[Tuple[float, float]]:
    """All crossings inside one candidate; multi-pair brackets are split first"""
    cfg = cfg.resolve(system)
    if candidate.kind is CandidateKind.DIP:
        return sorted(_refine_dip(system, candidate, cfg))

    results = []
    for part in _split_bracket(system, candidate.t_lo, candidate.t_hi,
                               candidate.count_lo, candidate.count_hi, cfg):
        pairs = abs(part.count_hi - part.count_lo) // 2
        if pairs <= 1:
            results.append(refine_crossing(system, part, cfg))
            continue
        # several pairs cross at (numerically) the same T
        lo, hi = _bisect_count(system, part, cfg)
        t_guess = 0.5 * (lo + hi)
        for s_guess in _axis_eigenvalues(system, t_guess)[:pairs]:
            results.append(_finish(system, t_guess, complex(s_guess), part, cfg))
    results.sort(key=lambda r: (r[0], r[1]))
    return results


def classify_direction(system: RetardedSystem, t_c: float, omega_c: float, cfg: SweepConfig) -> Direction:
    """
    Crossing direction from the motion of the tracked eigenvalue as T increases
    through T_c; the same root tendency holds along the whole delay ladder.
    """
    cfg = cfg.resolve(system)
    delta = min(10.0 * cfg.refine_tol, 0.5 * abs(t_c))
    s_ref = 1j * omega_c
    before = _nearest(companion_eigenvalues(system, t_c - delta), s_ref).real
    after = _nearest(companion_eigenvalues(system, t_c + delta), s_ref).real
    if before < 0.0 < after:
        return Direction.DESTABILIZING
    if before > 0.0 > after:
        return Direction.STABILIZING
    logger.warning("⚠️  Inconclusive crossing direction at T = %.10g, w = %.10g "
                   "(Re before %.3g, after %.3g); flagged for manual review", t_c, omega_c, before, after)
    return Direction.INCONCLUSIVE


# ---------------------------------------------------------------------------
# Stability walk and full analysis
# ---------------------------------------------------------------------------

def stability_walk(crossings: List[Crossing]) -> Tuple[Optional[float], List[Tuple[float, float]], float]:
    """
    Walk the merged delay ladders from tau = 0 counting unstable pole pairs.
    Returns (delay_margin or None, stable windows, horizon); events past the
    horizon are not trusted because some ladder has been truncated there.
    """
    active = [c for c in crossings if c.direction is not Direction.INCONCLUSIVE]
    if not any(c.direction is Direction.DESTABILIZING for c in active):
        if active:
            raise ConsistencyError("stabilizing crossings without any destabilizing crossing")
        return None, [(0.0, math.inf)], math.inf

    horizon = min(c.tau0 + len(c.taus) * c.period for c in active)
    events = []
    for c in active:
        step = 1 if c.direction is Direction.DESTABILIZING else -1
        for tau in c.taus:
            if tau < horizon:
                events.append((tau, 0 if step > 0 else 1, step))
    events.sort()

    count = 0
    margin = None
    windows = []
    window_start = 0.0
    for tau, _, step in events:
        updated = count + step
        if updated < 0:
            raise ConsistencyError(f"unstable pole-pair count went negative at tau = {tau!r}")
        if count == 0 and updated > 0:
            if margin is None:
                margin = tau
            if tau > window_start:
                windows.append((window_start, tau))
        elif count > 0 and updated == 0:
            window_start = tau
        count = updated
    if count == 0:
        windows.append((window_start, horizon))
    return margin, windows, horizon


def _dedupe(crossings: List[Crossing], cfg: SweepConfig) -> List[Crossing]:
    kept: List[Crossing] = []
    for c in crossings:
        duplicate = any(abs(c.t_c - k.t_c) <= max(10.0 * cfg.refine_tol, 1e-12)
                        and abs(c.omega_c - k.omega_c) <= 1e-6 * (1.0 + k.omega_c) for k in kept)
        if not duplicate:
            kept.append(c)
    return kept


def find_crossings(system: RetardedSystem, cfg: SweepConfig) -> Tuple[List[Crossing], int]:
    """
    coarse scan -> refine -> classify -> delay ladders, without the stability walk.
    Returns the crossings sorted by tau_0 and the number of scanned candidates.
    """
    cfg = cfg.resolve(system)
    _require_stable(system)
    if check_zero_root(system):
        raise ZeroRootError("det(A0 + A1) is zero: s = 0 is a characteristic root for every delay; "
                            "report it separately, the sweep cannot proceed")

    candidates = parallel_scan(system, cfg)
    crossings = []
    for candidate in candidates:
        try:
            refined = refine_crossings(system, candidate, cfg)
        except BracketLostError as e:
            if candidate.kind is not CandidateKind.DIP:
                raise
            # a dip whose inner brackets do not refine is reported and skipped
            logger.warning("⚠️  Near-axis dip in [%.6g, %.6g] did not refine to a crossing: %s",
                           candidate.t_lo, candidate.t_hi, e)
            continue
        for t_c, omega_c in refined:
            direction = classify_direction(system, t_c, omega_c, cfg)
            taus = taus_from_crossing(t_c, omega_c, cfg.k_max)
            crossings.append(Crossing(t_c=t_c, omega_c=omega_c, direction=direction, taus=tuple(taus)))
            logger.info("   ✅ Crossing T = %.6g s, w = %.6g rad/s, %s, tau_0 = %.6g s",
                        t_c, omega_c, direction.value, taus[0])

    crossings = _dedupe(crossings, cfg)
    crossings.sort(key=lambda c: (c.tau0, c.omega_c))
    return crossings, len(candidates)


def analyze(system: RetardedSystem, cfg: SweepConfig) -> StabilityReport:
    """find_crossings followed by the stability walk"""
    started = time.perf_counter()
    cfg = cfg.resolve(system)
    crossings, candidate_count = find_crossings(system, cfg)
    margin, windows, horizon = stability_walk(crossings)
    elapsed = time.perf_counter() - started
    if margin is None:
        logger.info("📊 No destabilizing crossing: stable for every delay")
    else:
        logger.info("📊 Delay margin %.6g s from %d crossing(s) in %.2f s", margin, len(crossings), elapsed)
    return StabilityReport(crossings=tuple(crossings), delay_margin=margin, windows=tuple(windows),
                           walk_horizon=horizon, config=cfg, candidate_count=candidate_count,
                           elapsed=elapsed)
