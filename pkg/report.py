#!/usr/bin/env python3
"""
Analysis Reports
Turns a StabilityReport into the document the command line writes out: a
`header` with everything that changes between runs (timestamp, timing,
worker count) and a `body` that is byte-identical for identical inputs.
The JSON layout is documented in README.md.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from dde_simulator import Trajectory
from rekasius_sweep import Crossing, Direction, StabilityReport
from system_model import RetardedSystem

SCHEMA = 'delay-margin-report/1'


@dataclass
class ReportDocument:
    header: Dict[str, Any] = field(default_factory=dict)
    body: Dict[str, Any] = field(default_factory=dict)

    @property
    def delay_margin(self) -> Optional[float]:
        return self.body.get('delay_margin')

    @property
    def crossings(self) -> List[Dict[str, Any]]:
        return self.body.get('crossings', [])


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(65536), b''):
            digest.update(block)
    return digest.hexdigest()


def fingerprint(system: RetardedSystem, inputs: Sequence[str] = ()) -> Dict[str, Any]:
    norm_a0, norm_a1, norm_sum, norm_diff = system.norms()
    return {
        'n': system.n,
        'norms': {'a0': norm_a0, 'a1': norm_a1, 'a0_plus_a1': norm_sum, 'a0_minus_a1': norm_diff},
        'inputs': [{'path': path, 'sha256': file_sha256(path)} for path in inputs],
    }


def crossing_records(crossings: Sequence[Crossing]) -> List[Dict[str, Any]]:
    """Crossing rows sorted by tau_0 ascending"""
    ordered = sorted(crossings, key=lambda c: (c.tau0, c.omega_c))
    return [{'T': c.t_c, 'omega': c.omega_c, 'direction': c.direction.label, 'taus': list(c.taus)}
            for c in ordered]


def build_report(system: RetardedSystem, result: StabilityReport, inputs: Sequence[str] = ()) -> ReportDocument:
    cfg = result.config
    body = {
        'schema': SCHEMA,
        'system': fingerprint(system, inputs),
        'config': {
            't_min': cfg.t_min,
            't_max': cfg.t_max,
            't_step': cfg.t_step,
            'refine_tol': cfg.refine_tol,
            'eps_imag': cfg.eps_imag,
            'k_max': cfg.k_max,
        },
        'crossings': crossing_records(result.crossings),
        'delay_margin': result.delay_margin,
        'unbounded': result.is_unbounded,
        # an open upper end is written as null
        'stable_windows': [[lo, _finite_or_none(hi)] for lo, hi in result.windows],
        'walk_horizon': _finite_or_none(result.walk_horizon),
        'candidate_count': result.candidate_count,
    }
    header = {
        'generated_at': datetime.now().isoformat(),
        'elapsed_seconds': result.elapsed,
        'workers': cfg.workers,
    }
    return ReportDocument(header=header, body=body)


def body_json(doc: ReportDocument) -> str:
    return json.dumps(doc.body, indent=2, sort_keys=True, allow_nan=False)


def to_json(doc: ReportDocument) -> str:
    return json.dumps({'header': doc.header, 'body': doc.body}, indent=2, sort_keys=True,
                      allow_nan=False, default=str)


def from_json(text: str) -> ReportDocument:
    data = json.loads(text)
    if not isinstance(data, dict) or 'body' not in data:
        raise ValueError("not a delay-margin report: missing 'body'")
    body = data['body']
    if body.get('schema') != SCHEMA:
        raise ValueError(f"unsupported report schema {body.get('schema')!r}")
    for record in body.get('crossings', []):
        direction_from_label(record['direction'])
    return ReportDocument(header=data.get('header', {}), body=body)


def crossings_frame(records: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    """One row per crossing: T, omega, direction, tau_0 .. tau_k"""
    rows = []
    for record in records:
        row = {'T': record['T'], 'omega': record['omega'], 'direction': record['direction']}
        for k, tau in enumerate(record['taus']):
            row[f'tau_{k}'] = tau
        rows.append(row)
    return pd.DataFrame(rows, columns=None if rows else ['T', 'omega', 'direction'])


def to_csv(doc: ReportDocument) -> str:
    return crossings_frame(doc.crossings).to_csv(index=False, float_format='%.17g')


def _g(value: Optional[float]) -> str:
    if value is None:
        return 'inf'
    return f"{value:.6g}"


def crossings_table(records: Sequence[Dict[str, Any]], ladder: int = 2) -> str:
    lines = [f"{'T (s)':>12} {'w (rad/s)':>12} {'Stable/Unstable':>15}  Time delay (s)"]
    for record in records:
        taus = ', '.join(_g(t) for t in record['taus'][:ladder])
        lines.append(f"{_g(record['T']):>12} {_g(record['omega']):>12} {record['direction']:>15}  {taus}")
    return '\n'.join(lines)


def to_text(doc: ReportDocument) -> str:
    """Human-readable summary, numbers to 6 significant digits"""
    body = doc.body
    system = body['system']
    lines = [f"System: n = {system['n']}, ||A0|| = {_g(system['norms']['a0'])}, "
             f"||A1|| = {_g(system['norms']['a1'])}"]
    lines.append(f"Crossings: {len(body['crossings'])}")
    if body['crossings']:
        lines.append(crossings_table(body['crossings']))
    if body['unbounded']:
        lines.append("Delay margin: unbounded (stable for every delay)")
    else:
        lines.append(f"Delay margin: {_g(body['delay_margin'])} s")
    windows = ', '.join(f"({_g(lo)}, {_g(hi)})" for lo, hi in body['stable_windows'])
    lines.append(f"Stable windows: {windows}")
    return '\n'.join(lines) + '\n'


def baseline_document(omegas_taus: Sequence[Tuple[float, Sequence[float]]],
                      spurious: Sequence[float]) -> Dict[str, Any]:
    return {
        'crossings': [{'omega': omega, 'taus': list(taus)} for omega, taus in omegas_taus],
        'spurious': list(spurious),
    }


def trajectory_to_csv(trajectory: Trajectory, path: str) -> None:
    """CSV with columns t, x1..xn for external plotting"""
    trajectory.to_frame().to_csv(path, index=False, float_format='%.17g')


def direction_from_label(label: str) -> Direction:
    for direction in Direction:
        if direction.label == label:
            return direction
    raise ValueError(f"unknown crossing direction {label!r}")
