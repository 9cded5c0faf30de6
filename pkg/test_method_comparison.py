#!/usr/bin/env python3
"""
Test script for the sweep vs Kronecker cost comparison
"""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from method_comparison import compare_methods, fit_cubic, predict_seconds, run_comparison, time_eigensolves


def test_fit_recovers_exact_cubic():
    coefficients = [2e-9, 1e-7, 0.0, 1e-4]
    samples = [(size, float(np.polyval(coefficients, size))) for size in (10, 20, 40, 80, 160)]
    assert_allclose(fit_cubic(samples), coefficients, rtol=1e-6, atol=1e-10)


def test_fit_needs_four_sizes():
    with pytest.raises(ValueError):
        fit_cubic([(10, 1.0), (20, 2.0), (20, 2.1), (30, 3.0)])


def test_prediction_is_never_negative():
    assert predict_seconds(np.array([0.0, 0.0, -1.0, 0.0]), 5.0) == 0.0


def test_compare_methods_uses_both_memory_models():
    row = compare_methods(200, grid_points=1000, coefficients=np.array([1e-9, 0.0, 0.0, 0.0]), workers=4)
    assert row['kron_memory_bytes'] == 51_200_000_000
    assert row['sweep_memory_bytes'] == 400 ** 2 * 8 * 4
    assert row['kron_matrix_size'] == 80_000
    # (2n^2)^3 against grid_points * (2n)^3 / workers
    assert row['time_ratio'] == pytest.approx(80_000 ** 3 / (1000 * 400 ** 3 / 4))


def test_timings_are_positive():
    samples = time_eigensolves([4, 8], repeats=1)
    assert [size for size, _ in samples] == [4, 8]
    assert all(seconds >= 0.0 for _, seconds in samples)


def test_run_comparison_saves_json(tmp_path):
    path = str(tmp_path / 'comparison.json')
    result = run_comparison([2, 3], grid_points=100, sizes=(8, 16, 24, 32), repeats=1, save_path=path)
    with open(path) as f:
        saved = json.load(f)
    assert [row['n'] for row in saved['methods']] == [2, 3]
    assert len(saved['cubic_coefficients']) == 4
    assert saved['grid_points'] == result['grid_points'] == 100
