"""Shared fixtures: cached catalog runs and the acceptance summary."""

from __future__ import annotations

import dataclasses
import functools
import json
import re

import numpy as np
import pytest

from lagtherm import catalog
from lagtherm.integrate import EquilibriumHook, simulate

ACCEPTANCE_LINES: list = []


@functools.lru_cache(maxsize=None)
def _run(name, params_json, initial_json, cfg_json, stop_hold):
    params, initial, cfg = (json.loads(s) for s in (params_json, initial_json, cfg_json))
    built = catalog.build(name, params, initial)
    config = catalog.default_config(name, **cfg)
    hooks = [EquilibriumHook(dict(built.equilibrium), stop_hold)] if stop_hold is not None else []
    return built, simulate(built.system, built.y0, config, hooks)


def run_entry(name, params=None, initial=None, stop_hold=None, **cfg):
    """Integrate a catalog entry once per distinct configuration (memoised per session)."""
    dump = lambda d: json.dumps(d or {}, sort_keys=True)
    # key on the resolved config so equivalent overrides share one run
    resolved = dataclasses.asdict(catalog.default_config(name, **cfg))
    return _run(name, dump(params), dump(initial), dump(resolved), stop_hold)


def entropy_columns(traj):
    """Per-subsystem entropies of a trajectory, falling back to the total."""
    keys = [k for k in list(traj.diagnostics) + list(traj.labels) if re.fullmatch(r"S\d+", k)]
    keys = list(dict.fromkeys(keys))
    return {k: np.asarray(traj[k]) for k in keys} or {"S_total": traj["S_total"]}


def record_acceptance(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
