#!/usr/bin/env python3
"""
Test script for the delay-margin command line
"""

import json
import math

import pandas as pd
import pytest
from click.testing import CliRunner

from app import cli, format_bytes
from conftest import SCALAR_MARGIN
from report import from_json

SMALL_GRID = ['--t-min', '-2', '--t-max', '2', '--t-step', '0.001', '--no-widen']


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


@pytest.fixture
def literature_files(data_dir):
    return [f"{data_dir}/literature_a0.txt", f"{data_dir}/literature_a1.txt"]


@pytest.fixture
def scalar_files(data_dir):
    return [f"{data_dir}/scalar_a0.txt", f"{data_dir}/scalar_a1.txt"]


def _write_system(tmp_path, a0, a1):
    p0, p1 = tmp_path / 'a0.txt', tmp_path / 'a1.txt'
    p0.write_text(a0)
    p1.write_text(a1)
    return [str(p0), str(p1)]


def test_margin_literature_json(runner, literature_files):
    result = runner.invoke(cli, ['margin', *literature_files, *SMALL_GRID])
    assert result.exit_code == 0, result.stderr
    doc = from_json(result.stdout)
    assert doc.delay_margin == pytest.approx(0.1624, abs=1e-3)
    assert len(doc.crossings) == 5


def test_margin_scalar_text(runner, scalar_files):
    result = runner.invoke(cli, ['margin', *scalar_files, *SMALL_GRID, '--format', 'text'])
    assert result.exit_code == 0, result.stderr
    assert f"Delay margin: {SCALAR_MARGIN:.6g} s" in result.stdout


def test_margin_writes_report_and_csv(runner, scalar_files, tmp_path):
    out, table = str(tmp_path / 'report.json'), str(tmp_path / 'crossings.csv')
    result = runner.invoke(cli, ['margin', *scalar_files, *SMALL_GRID, '--out', out, '--csv', table])
    assert result.exit_code == 0, result.stderr
    with open(out) as f:
        assert json.load(f)['body']['delay_margin'] == pytest.approx(SCALAR_MARGIN, abs=1e-6)
    frame = pd.read_csv(table)
    assert frame['omega'].iloc[0] == pytest.approx(math.sqrt(3.0), abs=1e-6)


def test_margin_unstable_system_exits_2(runner, tmp_path):
    files = _write_system(tmp_path, "1\n", "0\n")
    result = runner.invoke(cli, ['margin', *files, *SMALL_GRID])
    assert result.exit_code == 2
    assert 'delay-free system unstable' in result.stderr


def test_margin_bad_file_exits_1(runner, tmp_path):
    files = _write_system(tmp_path, "-1 x\n0 -1\n", "0 0\n0 0\n")
    result = runner.invoke(cli, ['margin', *files, *SMALL_GRID])
    assert result.exit_code == 1
    assert 'row 1, column 2' in result.stderr


def test_margin_bad_config_exits_1(runner, scalar_files):
    result = runner.invoke(cli, ['margin', *scalar_files, '--t-min', '1', '--t-max', '2', '--no-widen'])
    assert result.exit_code == 1
    assert 'straddle zero' in result.stderr


def test_crossings_command(runner, scalar_files):
    result = runner.invoke(cli, ['crossings', *scalar_files, *SMALL_GRID, '--k-max', '2'])
    assert result.exit_code == 0, result.stderr
    rows = json.loads(result.stdout)['crossings']
    assert len(rows) == 1
    assert len(rows[0]['taus']) == 3
    assert rows[0]['direction'] == 'Unstable'


def test_baseline_command(runner, scalar_files):
    result = runner.invoke(cli, ['baseline', *scalar_files, '--k-max', '1'])
    assert result.exit_code == 0, result.stderr
    doc = json.loads(result.stdout)
    assert doc['crossings'][0]['omega'] == pytest.approx(math.sqrt(3.0), rel=1e-12)
    assert doc['crossings'][0]['taus'][0] == pytest.approx(SCALAR_MARGIN, rel=1e-10)
    assert doc['spurious'] == []


def test_baseline_memory_guard(runner, literature_files):
    result = runner.invoke(cli, ['baseline', *literature_files, '--memory-cap', '1000'])
    assert result.exit_code == 1
    assert 'ResourceGuardError' in result.stderr


def test_baseline_agrees_with_margin(runner, literature_files):
    sweep = from_json(runner.invoke(cli, ['margin', *literature_files, *SMALL_GRID]).stdout)
    baseline = json.loads(runner.invoke(cli, ['baseline', *literature_files]).stdout)
    omegas = [row['omega'] for row in baseline['crossings']]
    for row in sweep.crossings:
        assert min(abs(row['omega'] - omega) for omega in omegas) <= 1e-6


def test_simulate_command(runner, scalar_files, tmp_path):
    out = str(tmp_path / 'traj.csv')
    result = runner.invoke(cli, ['simulate', *scalar_files, '--tau', '0.5', '--horizon', '50', '--out', out])
    assert result.exit_code == 0, result.stderr
    assert 'verdict = decaying' in result.stdout
    assert list(pd.read_csv(out).columns) == ['t', 'x1']


def test_simulate_rejects_coarse_step(runner, scalar_files):
    result = runner.invoke(cli, ['simulate', *scalar_files, '--tau', '0.5', '--dt', '0.1'])
    assert result.exit_code == 1
    assert 'too coarse' in result.stderr


def test_mem_estimate(runner):
    result = runner.invoke(cli, ['mem-estimate', '--n', '200'])
    assert result.exit_code == 0
    assert '51.2 GB' in result.stdout


def test_mem_estimate_range_csv(runner):
    result = runner.invoke(cli, ['mem-estimate', '--n-min', '1', '--n-max', '3', '--format', 'csv'])
    assert result.exit_code == 0
    lines = result.stdout.strip().splitlines()
    assert lines[0] == 'n,kron_bytes,sweep_bytes'
    assert lines[1:] == ['1,32,32', '2,512,128', '3,2592,288']


def test_mem_estimate_needs_sizes(runner):
    assert runner.invoke(cli, ['mem-estimate']).exit_code == 1


@pytest.mark.parametrize('files', ['scalar_files', 'literature_files'])
def test_validate_brackets_the_margin(runner, request, files):
    result = runner.invoke(cli, ['validate', *request.getfixturevalue(files), *SMALL_GRID])
    assert result.exit_code == 0, result.stdout + result.stderr
    summary = json.loads(result.stdout)
    assert summary['passed'] is True
    assert [check['verdict'] for check in summary['checks']] == ['decaying', 'growing']
    assert summary['max_residual'] < 1e-6


def test_validate_unbounded(runner, tmp_path):
    files = _write_system(tmp_path, "-2\n", "1\n")
    result = runner.invoke(cli, ['validate', *files, *SMALL_GRID])
    assert result.exit_code == 0
    assert json.loads(result.stdout)['delay_margin'] is None


def test_compare_command(runner, tmp_path):
    out = str(tmp_path / 'comparison.json')
    result = runner.invoke(cli, ['compare', '--n', '2', '--n', '3', '--grid-points', '100',
                                 '--repeats', '1', '--out', out])
    assert result.exit_code == 0, result.stderr
    with open(out) as f:
        assert [row['n'] for row in json.load(f)['methods']] == [2, 3]


def test_format_bytes():
    assert format_bytes(51.2e9) == '51.2 GB'
    assert format_bytes(1.0738e12) == '1.074 TB'
    assert format_bytes(288) == '288 B'
