#!/usr/bin/env python3
"""
Test script comparing the Rekasius sweep with the Kronecker baseline on
random delay-free-stable systems of dimension 1 to 5
"""

import math

import numpy as np
import pytest

from conftest import small_grid
from errors import SpuriousCrossingError
from kronecker_baseline import delays_from_crossing, kron_crossings
from rekasius_sweep import find_crossings
from system_model import RetardedSystem

SYSTEM_COUNT = 100
T_LIMIT = 10.0


def random_stable_systems(count: int, seed: int = 2024):
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = 1 + i % 5
        a0 = rng.standard_normal((n, n))
        a1 = rng.standard_normal((n, n)) * rng.uniform(0.5, 2.0)
        # shift A0 so that A0 + A1 is stable with some margin
        shift = max(np.linalg.eigvals(a0 + a1).real) + rng.uniform(0.2, 1.0)
        yield RetardedSystem.from_arrays(a0 - shift * np.eye(n), a1)


def baseline_crossings(system):
    """(w, tau_0, T) for every genuine baseline crossing"""
    rows = []
    for omega in kron_crossings(system):
        try:
            tau0 = delays_from_crossing(system, omega, k_max=0)[0]
        except SpuriousCrossingError:
            continue
        rows.append((omega, tau0, math.tan(omega * tau0 / 2.0) / omega))
    return rows


@pytest.mark.slow
def test_sweep_matches_baseline_on_random_systems():
    cfg = small_grid(t_min=-T_LIMIT, t_max=T_LIMIT, t_step=2e-3, k_max=0)
    compared = 0
    for system in random_stable_systems(SYSTEM_COUNT):
        sweep, _ = find_crossings(system, cfg)
        baseline = baseline_crossings(system)

        # every sweep crossing is a genuine crossing the baseline also finds
        for crossing in sweep:
            matches = [tau0 for omega, tau0, _ in baseline if abs(omega - crossing.omega_c) <= 1e-6]
            assert matches, f"sweep crossing w = {crossing.omega_c} missing from the baseline (n = {system.n})"
            assert min(abs(tau0 - crossing.tau0) for tau0 in matches) <= 1e-6

        # every baseline crossing with a grid bracket on its own side of T = 0 is found by the sweep
        for omega, tau0, t in baseline:
            if not cfg.t_step < abs(t) < T_LIMIT - cfg.t_step:
                continue
            assert any(abs(c.omega_c - omega) <= 1e-6 and abs(c.tau0 - tau0) <= 1e-6 for c in sweep), \
                f"baseline crossing w = {omega}, tau_0 = {tau0} missed by the sweep (n = {system.n})"
            compared += 1
    assert compared > 0
