"""Shared fixtures: micro-scale CSVs produced by the actual simulation CLI.

Generating them through `python3 -m abos simulate` (a test-only dependency)
keeps the schemas honest: if the producer drifts, these tests fail here
rather than on real data.
"""

import subprocess
import sys

import pytest

from abos_figures import render_all

S1_CFG = """\
[run]
scenario = s1
seed = 7001
m = 200
replicates = 8
dist = student-t
gamma = 3, 10
C = 0.1, 1, 10
procedures = oracle, bh

[s1]
alpha-grid = 0.05, 0.2, 0.5
"""

S2_CFG = """\
[run]
scenario = s2
seed = 7002
m = 200
replicates = 6
dist = student-t
gamma = 3, 10
C = 0.1, 1, 10
procedures = oracle, bh-log

[s2]
p-grid = 0.05, 0.2
"""


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim-csvs")
    for name, text in (("s1.cfg", S1_CFG), ("s2.cfg", S2_CFG)):
        cfg = out / name
        cfg.write_text(text)
        proc = subprocess.run(
            [sys.executable, "-m", "abos", "simulate",
             "--config", str(cfg), "--out-dir", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="session")
def rendered(csv_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("panels")
    return out, render_all(csv_dir, out)
