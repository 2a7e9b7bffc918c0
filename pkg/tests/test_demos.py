import os
import subprocess
import sys
from pathlib import Path

import pytest

DEMOS = sorted((Path(__file__).parent.parent / "demos").glob("*.py"))


@pytest.mark.parametrize("script", DEMOS, ids=lambda p: p.stem)
def test_demo_runs(script, tmp_path):
    args = [sys.executable, str(script)]
    if script.stem == "short_time_decay":
        args += ["--csv", str(tmp_path / "d.csv")]
    proc = subprocess.run(args, capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr


def test_cli_tour(tmp_path):
    script = Path(__file__).parent.parent / "demos" / "cli_tour.sh"
    proc = subprocess.run(["sh", str(script)], capture_output=True, text=True, timeout=120,
                          env={**os.environ, "TMPDIR": str(tmp_path)})
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "decay.csv").read_text().startswith("t,norm,shifted_norm")
