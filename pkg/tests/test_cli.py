import os

import pytest

from tempgen import cli
from tempgen.graph import save_edge_list
from tempgen.seqmodel import NumericalError
from tempgen.synthetic import two_community_graph

SMALL = ["--epochs", "1", "--walk-len", "4", "--d-v", "4", "--d-t", "3", "--d-o", "5", "--components", "2"]


@pytest.fixture
def edges(tmp_path):
    p = tmp_path / "src.csv"
    save_edge_list(two_community_graph(n=16, m=200, T=20), p)
    return str(p)


def run_pipeline(d, edges, seed="3"):
    d.mkdir(exist_ok=True)
    m, g, r = str(d / "model"), str(d / "gen.csv"), str(d / "report")
    assert cli.main(["train", "--input", edges, "--output", m, "--seed", seed, "--threads", "1"] + SMALL) == 0
    assert cli.main(["generate", "--checkpoint", m, "--output", g, "--seed", seed, "--input", edges,
                     "--num-walks", "500"]) == 0
    assert cli.main(["evaluate", "--input", edges, "--generated", g, "--output", r, "--per-snapshot", "1"]) == 0
    return {f: (d / f).read_bytes() for f in sorted(os.listdir(d)) if not f.endswith(".timing")}


def test_end_to_end_is_byte_identical(tmp_path, edges):
    first = run_pipeline(tmp_path / "run", edges)
    second = run_pipeline(tmp_path / "run", edges)
    assert {"model", "gen.csv", "gen.csv.provenance", "report.csv", "report.json", "model.config"} <= set(first)
    assert first == second
    assert (tmp_path / "run" / "gen.csv.timing").read_text().startswith("generation_seconds=")


def test_config_file_and_flag_precedence(tmp_path, edges):
    conf = tmp_path / "c.txt"
    conf.write_text("# settings\nepochs = 1\nseed=9\nd_v=4\nd-t=3\nd_o=5\ncomponents=2\nwalk_len=4\n")
    out = str(tmp_path / "m")
    assert cli.main(["train", "--config", str(conf), "--input", edges, "--output", out, "--seed", "2"]) == 0
    echo = (tmp_path / "m.config").read_text().splitlines()
    assert "seed=2" in echo and "epochs=1" in echo and "command=train" in echo


@pytest.mark.parametrize("argv", [
    ["train", "--output", "x"],
    ["train", "--input", "/nonexistent.csv", "--output", "x"],
    ["train", "--input", "IN", "--output", "x", "--mode", "sideways"],
    ["evaluate", "--input", "IN", "--generated", "IN", "--output", "x", "--snapshot-mode", "never"],
    ["generate", "--checkpoint", "IN", "--output", "x"],
    ["bogus"],
])
def test_usage_errors(tmp_path, edges, argv):
    argv = [edges if a == "IN" else (str(tmp_path / a) if a == "x" else a) for a in argv]
    assert cli.main(argv) == 2


def test_bad_config_key(tmp_path, edges):
    conf = tmp_path / "c.txt"
    conf.write_text("colour=blue\n")
    assert cli.main(["walks", "--config", str(conf), "--input", edges, "--output", str(tmp_path / "w")]) == 2


def test_mode_mismatch(tmp_path, edges):
    m = str(tmp_path / "m")
    assert cli.main(["train", "--input", edges, "--output", m] + SMALL) == 0
    assert cli.main(["generate", "--checkpoint", m, "--output", str(tmp_path / "g"), "--mode", "inductive"]) == 2
    assert cli.main(["generate", "--checkpoint", m, "--output", str(tmp_path / "g"), "--target-nodes", "99"]) == 2


def test_numerical_failure_exit_code(tmp_path, edges, monkeypatch):
    def boom(*a, **k):
        raise NumericalError("non-finite loss")
    monkeypatch.setattr(cli.pipeline, "fit_transductive", boom)
    assert cli.main(["train", "--input", edges, "--output", str(tmp_path / "m")]) == 3


def test_walks_command(tmp_path, edges):
    out = tmp_path / "w.txt"
    assert cli.main(["walks", "--input", edges, "--output", str(out), "--num-walks", "7", "--walk-len", "3"]) == 0
    assert len(out.read_text().splitlines()) == 7


def test_inductive_cli(tmp_path, edges):
    m, g = str(tmp_path / "m"), str(tmp_path / "g.csv")
    assert cli.main(["train", "--input", edges, "--output", m, "--mode", "inductive", "--clusters", "3",
                     "--d-z", "3", "--sage-epochs", "5", "--wgan-epochs", "2"] + SMALL) == 0
    assert cli.main(["generate", "--checkpoint", m, "--output", g, "--target-nodes", "20",
                     "--num-walks", "300", "--gen-len", "3"]) == 0
    assert "mode=inductive" in (tmp_path / "g.csv.provenance").read_text()
    assert cli.main(["evaluate", "--input", edges, "--generated", g, "--output", str(tmp_path / "r")]) == 0
    assert '"edge_overlap_pct": 0.0' in (tmp_path / "r.json").read_text()
