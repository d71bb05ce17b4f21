import sys
from pathlib import Path
from tempfile import TemporaryDirectory

import matplotlib.pyplot as plt
import numpy as np
import pytest

import graphfs.cli as cli
import graphfs.io as io
import graphfs.selftest as selftest
from graphfs.errors import ConfigError

TRAIN_FLAGS = {"m": 2, "k": 3, "gamma": 0.1, "zeta": 50, "lr": 0.1, "epochs": 5, "verbose": 0}


def gen_data(folder: str) -> str:
    path = str(Path(folder) / "data.csv")
    cli.gen(kind="blobs", n=60, seed=0, out=path)
    return path


def test_gen():
    with TemporaryDirectory() as temp:
        path = gen_data(temp)
        again = str(Path(temp) / "again.csv")
        cli.gen(kind="blobs", n=60, seed=0, out=again)
        assert Path(path).read_text() == Path(again).read_text()
        meta = io.load_json(Path(temp) / "data.json")
        assert meta["informative_indices"] == [0, 1]
        dataset = io.load_csv(path, has_header=True, label_column="label")
        assert dataset.X.shape == (60, 20)
        with pytest.raises(ConfigError):
            cli.gen(n=61, out=str(Path(temp) / "odd.csv"))


def test_resolve_config():
    with TemporaryDirectory() as temp:
        config = io.write_json({"m": 3, "k": 4, "name": "a"}, Path(temp) / "config.json")
        run_cfg = cli.resolve_config(str(config), k=6, out=temp)
        assert (run_cfg.train.m, run_cfg.train.k) == (3, 6)
        assert run_cfg.name == "a"
        assert run_cfg.out == Path(temp)
        assert run_cfg.dataset["kind"] == "blobs"
        assert cli.RunConfig.from_dict(run_cfg.to_dict()).to_dict() == run_cfg.to_dict()
    with pytest.raises(ConfigError):
        cli.resolve_config(mm=3)


@pytest.mark.parametrize(
    "seeds,expected",
    [(None, None), (3, [3]), ("0..2", [0, 1, 2]), ("1,4", [1, 4]), ((2, 5), [2, 5])]
)
def test_parse_seeds(seeds, expected):
    assert cli.parse_seeds(seeds) == expected


def test_train_eval_export():
    with TemporaryDirectory() as temp:
        data = gen_data(temp)
        cli.train(data=data, out=temp, name="run", plot=True, **TRAIN_FLAGS)
        folder = Path(temp)
        for suffix in ("config.json", "report.json", "loss.csv", "graph.csv", "selection.json", "selection.nc",
                       "run.png"):
            assert (folder / "run_{}".format(suffix)).is_file()
        assert io.load_json(folder / "run_config.json")["data"] == data
        selection = str(folder / "run_selection.json")
        cli.evaluate(selection, data=data, out=temp, name="run", seeds="0..1", recon_epochs=5, verbose=0)
        report = io.load_json(folder / "run_eval.json")
        assert report["meta"]["seeds"] == [0, 1]
        assert 0. <= report["clustering_acc"] <= 1.
        cli.export_graph(selection, data=data, out=temp, name="exported")
        S = io.load_edge_list(folder / "exported_graph.csv")
        assert S.shape == (60, 60)
        assert np.all(np.count_nonzero(S, axis=1) == 3)
    plt.close("all")


def test_evaluate_replay():
    with TemporaryDirectory() as temp:
        data = gen_data(temp)
        folder = Path(temp)
        cli.train(data=data, out=temp, name="run", **TRAIN_FLAGS)
        selection = str(folder / "run_selection.json")
        cli.evaluate(selection, data=data, out=temp, name="first", seeds="0..1", ratio=0.7, k=4, recon_epochs=5,
                     verbose=0)
        saved = io.load_json(folder / "first_eval_config.json")
        assert saved["selection"] == selection
        assert (saved["seeds"], saved["ratio"], saved["k"], saved["recon_epochs"]) == ("0..1", 0.7, 4, 5)
        replay = io.write_json(dict(saved, name="second"), folder / "replay.json")
        cli.evaluate(config=str(replay), verbose=0)
        first = io.load_json(folder / "first_eval.json")
        second = io.load_json(folder / "second_eval.json")
        assert second == first
        assert first["meta"]["k"] == 4
        assert first["meta"]["ratio"] == 0.7
        with pytest.raises(ConfigError):
            cli.evaluate(data=data, out=temp, verbose=0)


def test_train_seeds():
    with TemporaryDirectory() as temp:
        cli.train(n=40, out=temp, seeds="0..1", workers=2, **TRAIN_FLAGS)
        reports = [io.load_json(Path(temp) / "seed_{}".format(s) / "run_report.json") for s in (0, 1)]
        assert [r["config"]["seed"] for r in reports] == [0, 1]


def test_selftest(monkeypatch):
    passing = selftest.SelftestReport([selftest.CheckResult("a", 0., 1., 1)])
    failing = selftest.SelftestReport([selftest.CheckResult("a", 2., 1., 1)])
    with TemporaryDirectory() as temp:
        out = str(Path(temp) / "selftest.json")
        monkeypatch.setattr(cli, "run_selftest", lambda **kwargs: passing)
        cli.selftest(out=out, verbose=0)
        assert io.load_json(out)["passed"]
        monkeypatch.setattr(cli, "run_selftest", lambda **kwargs: failing)
        with pytest.raises(SystemExit) as info:
            cli.selftest(verbose=0)
        assert info.value.code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["train", "--n", "40", "--epochs", "0"],
        ["eval", "missing_selection.json"],
        ["train", "--n", "40", "--mm", "2"]
    ]
)
def test_main_error(monkeypatch, argv):
    with TemporaryDirectory() as temp:
        monkeypatch.setattr(sys, "argv", ["graphfs"] + argv + ["--out", temp])
        with pytest.raises(SystemExit) as info:
            cli.main()
        assert info.value.code == 1
