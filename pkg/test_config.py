# test_config.py - configuration, sources and output files

import json
import math
from fractions import Fraction
from pathlib import Path

import pytest

from snlab.core.config import ExperimentConfig, parse_ns, parse_precision, parse_rational, parse_signature
from snlab.core.errors import SNLabError
from snlab.core.hlproc import ExactLaw
from snlab.core.signature import Signature
from snlab.core.sources import MatrixChainSource, ParticleSource, SourceManager, run_trials
from snlab.core.stats import EmpiricalDist, GofReport
from snlab.core.storage import write_distribution, write_manifest, write_report, write_trajectories
from snlab.core.trajectory import Trajectory


@pytest.fixture(autouse=True)
def quiet_progress(monkeypatch):
    monkeypatch.setenv("SNLAB_QUIET", "1")


def test_parsers():
    assert parse_rational("1/2") == Fraction(1, 2)
    assert parse_rational("0.25") == Fraction(1, 4)
    assert parse_ns("4, 4,inf") == [4, 4, math.inf]
    assert parse_precision("auto") == "auto"
    assert parse_precision("12") == 12
    assert parse_signature("(2,1,0)") == Signature((2, 1, 0))
    for bad in (lambda: parse_rational("half"), lambda: parse_ns("4,x"), lambda: parse_precision("-1"),
                lambda: parse_signature("1,2"), lambda: parse_ns("9" * 300)):
        with pytest.raises(SNLabError):
            bad()


def test_validation():
    ok = ExperimentConfig("sample", p=3, n=2, Ns=[3, math.inf]).validate()
    assert ok.t_value == Fraction(1, 3)
    bad = [
        dict(p=9),
        dict(t=Fraction(1)),
        dict(x=Fraction(0)),
        dict(n=0),
        dict(Ns=[2]),
        dict(trials=0),
        dict(seed=-1),
        dict(seed=2 ** 64),
        dict(tol_p=0.0),
        dict(format="xml"),
        dict(workers=0),
    ]
    for override in bad:
        with pytest.raises(SNLabError) as e:
            ExperimentConfig("sample", **override).validate()
        assert e.value.exit_code == 2


def test_config_hash_ignores_output_location():
    a = ExperimentConfig("sample", seed=3, out=Path("a"), workers=1)
    b = ExperimentConfig("sample", seed=3, out=Path("b"), workers=8)
    c = ExperimentConfig("sample", seed=4)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
    assert len(a.config_hash()) == 40
    data = json.loads(a.canonical_json())
    assert data["t"] == "1/2"
    assert data["Ns"] == ["inf"]
    assert "out" not in data


def test_source_manager(monkeypatch):
    cfg = ExperimentConfig("sample")
    manager = SourceManager()
    assert isinstance(manager.get_source(cfg, "MATRIX"), MatrixChainSource)
    with pytest.raises(SNLabError):
        manager.get_source(cfg, "teleport")
    monkeypatch.setenv("SNLAB_SOURCE", "matrix")
    assert isinstance(manager.get_source(cfg), MatrixChainSource)
    monkeypatch.setenv("SNLAB_SOURCE", "bogus")
    assert isinstance(manager.get_source(cfg), ParticleSource)


def test_trials_are_stream_indexed():
    cfg = ExperimentConfig("sample", n=2, k=5, trials=4, seed=9, x=Fraction(1, 2)).validate()
    first = run_trials(cfg, "process")
    again = run_trials(cfg, "process", trials=2, offset=2)
    assert [t.steps for t in first[2:]] == [t.steps for t in again]
    assert [t.meta["trial"] for t in first] == [0, 1, 2, 3]
    cfg.workers = 2
    assert [t.steps for t in run_trials(cfg, "process")] == [t.steps for t in first]


def test_generalized_variable_from_extras():
    cfg = ExperimentConfig("sample", n=2, k=3, x=Fraction(1, 3), extras={"m": math.inf}).validate()
    spec = SourceManager().get_source(cfg, "process").specialization()
    assert spec.at(0).is_infinite
    assert spec.at(0).x == Fraction(1, 3)


def test_trajectory_rows():
    traj = Trajectory(2, [Signature((0, 0)), Signature((1, 0)), Signature((3, 1))])
    assert traj.k == 2
    assert traj.header() == ["k", "lambda_1", "lambda_2"]
    assert traj.rows() == [[0, 0, 0], [1, 1, 0], [2, 3, 1]]
    assert traj.part(1) == [0, 1, 3]
    assert traj.is_consistent(1)
    assert Trajectory.from_rows(traj.rows()).steps == traj.steps
    with pytest.raises(SNLabError):
        traj.append(Signature((1,)))


def test_output_files(tmp_path):
    cfg = ExperimentConfig("sample", n=1, k=2, trials=2, out=tmp_path)
    trajs = [Trajectory(1, [Signature((0,)), Signature((1,)), Signature((1,))], {"trial": i}) for i in range(2)]
    files = write_trajectories(tmp_path, trajs, cfg)
    assert [f.name for f in files] == ["trajectory_00000.csv", "trajectory_00001.csv"]
    lines = files[0].read_text(encoding="utf-8").splitlines()
    assert lines == [f"# config_hash: {cfg.config_hash()}", "k,lambda_1", "0,0", "1,1", "2,1"]

    law = ExactLaw({Signature((1,)): Fraction(3, 4)}, tail=Fraction(1, 4))
    payload = json.loads(write_distribution(tmp_path / "exact.json", law, "abc").read_text(encoding="utf-8"))
    assert payload == {
        "config_hash": "abc",
        "distribution": [{"signature": [1], "prob_num": "3", "prob_den": "4"}],
        "tail": "1/4",
    }

    reports = [GofReport("tv", "tv", 0.01, 0.02, True)]
    written = write_report(tmp_path, reports, cfg, "demo")
    manifest = json.loads(write_manifest(tmp_path, cfg, files + written).read_text(encoding="utf-8"))
    assert manifest["files"] == ["report.json", "report.md", "trajectory_00000.csv", "trajectory_00001.csv"]
    assert json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))["passed"] is True

    cfg.format = "json"
    (single,) = write_trajectories(tmp_path, trajs, cfg)
    assert len(json.loads(single.read_text(encoding="utf-8"))["trajectories"]) == 2
    assert EmpiricalDist.from_samples(t.final for t in trajs).counts == {Signature((1,)): 2}
