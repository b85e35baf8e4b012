import numpy as np
import pytest

from fishermarket import EquilibriumCandidate, MarketInstance
from fishermarket.bench import experiment
from fishermarket.cli import EXIT_INVALID, EXIT_NO_CONVERGENCE, EXIT_OK, main
from fishermarket.errors import ReferenceDidNotConverge
from fishermarket.io import load_instance, save_candidate, save_instance


def test_gen_writes_instances(tmp_path, capsys):
    spec = tmp_path / "spec.txt"
    spec.write_text("utility=leontief\nsizes=3x4\nrepeats=2\nseed=9\n")
    assert main(["gen", "--spec", str(spec), "--out", str(tmp_path / "inst"), "--sparse"]) == EXIT_OK
    files = sorted((tmp_path / "inst").iterdir())
    assert len(files) == 2
    inst = load_instance(files[0])
    assert (inst.n, inst.m) == (3, 4)
    assert files[0].read_text().startswith("# seed=")


def test_run_writes_report(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("sizes=3x6\nsolvers=pgls,pr\nprice_thresholds=1e-2\nrepeats=1\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == EXIT_OK
    assert (tmp_path / "out" / "summary.csv").exists()
    assert "summary.csv" in capsys.readouterr().out


def test_run_without_output_dir(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("sizes=3x6\nprice_thresholds=1e-2\n")
    assert main(["run", "--config", str(cfg)]) == EXIT_INVALID


def test_run_reports_reference_failure(tmp_path, capsys, monkeypatch):
    def failing(inst, target_gap):
        raise ReferenceDidNotConverge(7, None, "(forced)")

    monkeypatch.setattr(experiment, "reference_solve", failing)
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("sizes=3x6\nsolvers=pr\nprice_thresholds=1e-2\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == EXIT_NO_CONVERGENCE


def test_verify(tmp_path, capsys):
    inst = tmp_path / "inst.txt"
    save_instance(inst, MarketInstance(np.ones((2, 2)), np.ones(2)))
    good = tmp_path / "good.txt"
    save_candidate(good, EquilibriumCandidate(prices=np.ones(2), allocation=np.full((2, 2), 0.5)))
    assert main(["verify", "--instance", str(inst), "--candidate", str(good), "--tol", "1e-12"]) == EXIT_OK
    assert "passed=true" in capsys.readouterr().out
    bad = tmp_path / "bad.txt"
    save_candidate(bad, EquilibriumCandidate(prices=np.array([2.0, 1.0]), allocation=np.full((2, 2), 0.5)))
    assert main(["verify", "--instance", str(inst), "--candidate", str(bad)]) == EXIT_INVALID
    assert "passed=false" in capsys.readouterr().out


def test_verify_rejects_invalid_instance(tmp_path, capsys):
    inst = tmp_path / "inst.txt"
    inst.write_text("n=2\nm=2\nutility=linear\nbudgets=1 1\ndense\n0 0\n1 1\n")
    cand = tmp_path / "c.txt"
    save_candidate(cand, EquilibriumCandidate(prices=np.ones(2), allocation=np.full((2, 2), 0.5)))
    assert main(["verify", "--instance", str(inst), "--candidate", str(cand)]) == EXIT_INVALID
    assert "ZeroRow(0)" in capsys.readouterr().err


def test_hoffman(tmp_path, capsys):
    mat = tmp_path / "m.txt"
    mat.write_text("0.5 0\n")
    assert main(["hoffman", "--matrix", str(mat)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "H=2.0" in out and "witness=0" in out


def test_missing_file(tmp_path, capsys):
    assert main(["hoffman", "--matrix", str(tmp_path / "none.txt")]) == EXIT_INVALID


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
