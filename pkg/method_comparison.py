"""
Method Comparison
Compare the Rekasius sweep against the Kronecker baseline on cost:
eigensolve time grows roughly with the cube of the matrix size, so measured
timings are fitted with a cubic and extrapolated to the 2n^2 Kronecker
companion and to the 2n sweep companion solved once per T grid point.
"""

import json
import logging
import time
from datetime import datetime
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from kronecker_baseline import estimate_memory
from rekasius_sweep import estimate_sweep_memory

logger = logging.getLogger(__name__)

DEFAULT_SIZES = (40, 80, 120, 160, 200, 240)


class EigensolveTimer:
    """Wall-clock timing of dense nonsymmetric eigensolves on random matrices"""

    def __init__(self, repeats: int = 3, seed: int = 0):
        if repeats < 1:
            raise ValueError("repeats must be at least 1")
        self.repeats = repeats
        self.rng = np.random.default_rng(seed)

    def time_size(self, size: int) -> float:
        matrix = self.rng.standard_normal((size, size))
        best = float('inf')
        for _ in range(self.repeats):
            start = time.perf_counter()
            np.linalg.eigvals(matrix)
            best = min(best, time.perf_counter() - start)
        return best


def time_eigensolves(sizes: Sequence[int] = DEFAULT_SIZES, repeats: int = 3,
                     seed: int = 0) -> List[Tuple[int, float]]:
    timer = EigensolveTimer(repeats=repeats, seed=seed)
    samples = []
    for size in sizes:
        seconds = timer.time_size(int(size))
        logger.info("⏱️  %4d x %-4d eigensolve: %.4g s", size, size, seconds)
        samples.append((int(size), seconds))
    return samples


def fit_cubic(samples: Sequence[Tuple[int, float]]) -> np.ndarray:
    """Least-squares cubic through (size, seconds); coefficients highest power first"""
    sizes = np.array([s for s, _ in samples], dtype=float)
    seconds = np.array([t for _, t in samples], dtype=float)
    if np.unique(sizes).size < 4:
        raise ValueError("a cubic fit needs at least four distinct matrix sizes")
    return np.polyfit(sizes, seconds, 3)


def predict_seconds(coefficients: np.ndarray, size: float) -> float:
    return max(float(np.polyval(coefficients, size)), 0.0)


def compare_methods(n: int, grid_points: int, coefficients: np.ndarray, workers: int = 1) -> Dict[str, float]:
    """Predicted time and memory of both methods for one system dimension n"""
    kron_size = 2 * n * n
    sweep_size = 2 * n
    kron_seconds = predict_seconds(coefficients, kron_size)
    sweep_seconds = grid_points * predict_seconds(coefficients, sweep_size) / workers
    return {
        'n': n,
        'kron_matrix_size': kron_size,
        'kron_seconds': kron_seconds,
        'kron_memory_bytes': estimate_memory(n, 8),
        'sweep_matrix_size': sweep_size,
        'sweep_seconds': sweep_seconds,
        'sweep_memory_bytes': estimate_sweep_memory(n, 8, workers),
        'time_ratio': kron_seconds / sweep_seconds if sweep_seconds > 0 else float('inf'),
    }


def run_comparison(n_values: Sequence[int], grid_points: int = 2_000_001, workers: int = 1,
                   sizes: Sequence[int] = DEFAULT_SIZES, repeats: int = 3, seed: int = 0,
                   save_path: Optional[str] = None) -> Dict:
    """Time eigensolves, fit the cubic cost model and tabulate both methods"""
    logger.info("🔬 Timing %d eigensolve sizes (%d repeats each)", len(sizes), repeats)
    samples = time_eigensolves(sizes, repeats=repeats, seed=seed)
    coefficients = fit_cubic(samples)
    rows = [compare_methods(int(n), grid_points, coefficients, workers) for n in n_values]

    for row in rows:
        if row['time_ratio'] > 1.0:
            logger.info("✅ n = %d: sweep predicted %.3gx faster", row['n'], row['time_ratio'])
        else:
            logger.info("⚠️  n = %d: Kronecker baseline predicted faster (ratio %.3g)", row['n'], row['time_ratio'])

    comparison_data = {
        'timestamp': datetime.now().isoformat(),
        'grid_points': grid_points,
        'workers': workers,
        'timings': [{'size': s, 'seconds': t} for s, t in samples],
        'cubic_coefficients': [float(c) for c in coefficients],
        'methods': rows,
    }

    if save_path:
        with open(save_path, 'w') as f:
            json.dump(comparison_data, f, indent=2, default=str)
        logger.info("💾 Comparison results saved to: %s", save_path)

    return comparison_data


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(message)s')
    filename = f"method_comparison_{datetime.now().strftime('%Y%m%d_%H%M%S')}.json"
    run_comparison([3, 10, 50, 100, 200], save_path=filename)
