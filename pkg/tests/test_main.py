# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Tests for the command line interface"""

import sys

import pytest

from degel import main as cli


def test_check_config(tmp_path, monkeypatch, capsys):
    path = tmp_path / "exp.cfg"
    path.write_text("experiment = barrier-root\n", encoding="UTF-8")
    monkeypatch.setattr(sys, "argv", ["degel", "check-config", "-c", str(path)])
    cli.main()
    printed = capsys.readouterr().out.splitlines()
    assert printed[0] == "experiment = barrier-root"
    assert "grid.n = 65" in printed


def test_run_prints_the_summary(tmp_path, monkeypatch, capsys):
    path = tmp_path / "exp.cfg"
    path.write_text("experiment = barrier-root\ndegeneracy.a = const:1\n", encoding="UTF-8")
    out = tmp_path / "results"
    monkeypatch.setattr(sys, "argv", ["degel", "run", "-q", "-c", str(path), "-o", str(out)])
    cli.main()
    assert capsys.readouterr().out.startswith("T0=")
    assert (out / "summary.csv").exists()


def test_exit_codes(tmp_path, monkeypatch):
    failing = tmp_path / "failing.cfg"
    failing.write_text(
        f"experiment = exponent\nanalysis.slope_tol = 1e-9\noutput.path = {tmp_path / 'o'}\n",
        encoding="UTF-8",
    )
    monkeypatch.setattr(sys, "argv", ["degel", "run", "-c", str(failing)])
    with pytest.raises(SystemExit) as excinfo:
        cli.main()
    assert excinfo.value.code == cli.EXIT_FAILED_CHECK

    broken = tmp_path / "broken.cfg"
    broken.write_text("experiment = barrier-root\ncolour = red\n", encoding="UTF-8")
    monkeypatch.setattr(sys, "argv", ["degel", "run", "-c", str(broken)])
    with pytest.raises(SystemExit) as excinfo:
        cli.main()
    assert excinfo.value.code == 1


def test_version(monkeypatch, capsys):
    monkeypatch.setattr(sys, "argv", ["degel", "--version"])
    with pytest.raises(SystemExit) as excinfo:
        cli.main()
    assert excinfo.value.code == 0
    assert cli.__version__ in capsys.readouterr().out
