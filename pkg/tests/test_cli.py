import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from fdepth import (
    FunctionalDataset,
    cut_tree,
    gower_dissimilarity,
    load_csv,
    select_tau,
    silhouette,
    similarity_matrix,
    ward_linkage,
    write_csv,
)
from fdepth.cli import main
from fdepth.similarity import read_matrix_binary, read_matrix_csv


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


@pytest.fixture
def two_groups(tmp_path):
    rng = np.random.default_rng(0)
    t = np.linspace(0, 1, 20)
    X = np.vstack([np.sin(2 * np.pi * t) + off + rng.normal(0, 0.1, (10, 20)) for off in (0, 4)])
    path = tmp_path / "groups.csv"
    write_csv(FunctionalDataset.from_array(X), path)
    return path


def test_tau(capsys, d3_csv):
    code, out, _ = run(capsys, "tau", d3_csv, "--probs", "0.5")
    assert code == 0 and json.loads(out) == {"probs": [0.5], "quantiles": [1.0]}
    _, out, _ = run(capsys, "tau", d3_csv, "--probs", "0,1", "--stats")
    assert json.loads(out) == {"probs": [0.0, 1.0], "quantiles": [1.0, 2.0], "stats": [1.0, 2.0, 1.0]}


def test_missing_file(capsys, tmp_path):
    code, out, err = run(capsys, "tau", tmp_path / "absent.csv")
    assert code == 2 and out == "" and "absent.csv" in err


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    code, _, err = run(capsys, "depth", bad)
    assert code == 2 and "row 2, column 2" in err


def test_depth_global(capsys, d3_csv):
    code, out, _ = run(capsys, "depth", d3_csv, "--method", "hr")
    head, rows = table(out)
    assert code == 0 and head == ["label", "depth", "rank"]
    assert [float(r[1]) for r in rows] == [1 / 3, 2 / 3, 1 / 3]
    assert [r[2] for r in rows] == ["2", "1", "3"]


def test_depth_local_saturates(capsys, d3_csv):
    _, out, _ = run(capsys, "depth", d3_csv, "--method", "hr", "--tau", "10")
    head, rows = table(out)
    assert head == ["label", "depth", "local_depth", "rank", "local_rank"]
    assert all(r[1] == r[2] for r in rows)


def test_depth_local_mhr(capsys, d3_csv):
    _, out, _ = run(capsys, "depth", d3_csv, "--method", "mhr", "--tau", "0.5")
    _, rows = table(out)
    assert [float(r[2]) for r in rows] == pytest.approx([1 / 3] * 3, abs=1e-15)


def test_depth_tau_file_and_prob(capsys, d3_csv, tmp_path):
    tau_file = tmp_path / "tau.csv"
    tau_file.write_text("0.5\n0.5\n0.5\n0.5\n")
    _, by_file, _ = run(capsys, "depth", d3_csv, "--tau", tau_file)
    _, by_value, _ = run(capsys, "depth", d3_csv, "--tau", "0.5")
    assert by_file == by_value
    code, _, err = run(capsys, "depth", d3_csv, "--tau-prob", "0.5")
    assert code == 0 and "tau = 1.0" in err


def test_depth_negative_tau(capsys, d3_csv):
    code, out, err = run(capsys, "depth", d3_csv, "--tau", "-1")
    assert code == 2 and out == "" and "nonnegative" in err


def test_depth_json_and_out(capsys, d3_csv, tmp_path):
    target = tmp_path / "d.json"
    code, out, _ = run(capsys, "depth", d3_csv, "--method", "hr", "--tau", "0.5", "--json", "--out", target)
    data = json.loads(target.read_text())
    assert code == 0 and out == ""
    assert data["depth"]["ranks"] == [2, 1, 3]
    assert data["local_depth"]["tau"] == [0.5] * 4


def test_depth_finite(capsys, tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0\n1\n2\n3\n4\n")
    _, out, _ = run(capsys, "depth", path, "--method", "hr", "--finite", "--tau", "1")
    _, rows = table(out)
    assert float(rows[2][2]) == 2 / 5
    code, _, _ = run(capsys, "depth", path, "--method", "mhr", "--finite")
    assert code == 2


def test_ddplot(capsys, d3_csv, tmp_path):
    _, out, _ = run(capsys, "ddplot", d3_csv, "--method", "mhr", "--tau", "0.5")
    head, rows = table(out)
    assert head == ["label", "depth", "local_depth"]
    assert [(float(a), float(b)) for _, a, b in rows] == pytest.approx([(1 / 3, 1 / 3), (2 / 3, 1 / 3), (1 / 3, 1 / 3)])
    one = tmp_path / "one.csv"
    one.write_text("1,2,3\n")
    _, out, _ = run(capsys, "ddplot", one, "--tau", "1")
    assert table(out)[1] == [["1", "1.0", "1.0"]]
    code, _, _ = run(capsys, "ddplot", d3_csv)
    assert code == 2


def test_similarity_diagonal_matches_depth(capsys, d3_csv):
    _, sim, _ = run(capsys, "similarity", d3_csv, "--method", "localmhr", "--tau", "1")
    _, dep, _ = run(capsys, "depth", d3_csv, "--method", "mhr", "--tau", "1")
    S = np.array([[float(v) for v in r[1:]] for r in table(sim)[1]])
    assert list(np.diag(S)) == [float(r[2]) for r in table(dep)[1]]


def test_similarity_dissimilarity(capsys, d3_csv):
    _, out, _ = run(capsys, "similarity", d3_csv, "--tau", "1", "--dissimilarity")
    D = np.array([[float(v) for v in r[1:]] for r in table(out)[1]])
    assert np.array_equal(D, D.T) and not np.diag(D).any()


def test_similarity_tau_warnings_and_errors(capsys, d3_csv):
    code, _, err = run(capsys, "similarity", d3_csv, "--method", "hr", "--tau", "1")
    assert code == 0 and "tau ignored" in err
    code, _, err = run(capsys, "similarity", d3_csv, "--method", "localhr")
    assert code == 2 and "--tau" in err


def test_similarity_files(capsys, two_groups, tmp_path):
    run(capsys, "similarity", two_groups, "--tau", "1", "--out", tmp_path / "s.csv")
    ref, _ = read_matrix_csv(tmp_path / "s.csv")
    run(capsys, "similarity", two_groups, "--tau", "1", "--format", "binary", "--out", tmp_path / "s.bin")
    run(capsys, "similarity", two_groups, "--tau", "1", "--format", "binary", "--block-rows", "3",
        "--out", tmp_path / "b.bin")
    assert np.array_equal(read_matrix_binary(tmp_path / "s.bin"), ref)
    assert (tmp_path / "s.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()
    code, _, _ = run(capsys, "similarity", two_groups, "--tau", "1", "--format", "binary")
    assert code == 2


def test_cluster(capsys, two_groups, tmp_path):
    prefix = tmp_path / "run"
    code, out, err = run(capsys, "cluster", two_groups, "--tau-prob", "0.2", "--k", "1-3,20", "--out-prefix", prefix)
    assert code == 0 and "k=1" in err
    head, rows = table(out)
    assert head == ["k", "mean_silhouette"] and [r[0] for r in rows] == ["1", "2", "3", "20"]
    dg = json.loads((tmp_path / "run.dendrogram.json").read_text())
    assert dg["n"] == 20 and len(dg["merges"]) == 19
    _, labels = table((tmp_path / "run.k2.labels.csv").read_text())
    ds = load_csv(two_groups)
    tau = select_tau(ds, 0.2).quantiles[0]
    D = gower_dissimilarity(similarity_matrix(ds, "localmhr", tau))
    expect = cut_tree(ward_linkage(D), 2)
    assert [int(r[1]) for r in labels] == expect.labels.tolist()
    assert float(rows[1][1]) == silhouette(expect, D).mean
    _, single = table((tmp_path / "run.k1.silhouette.csv").read_text())
    assert {r[2] for r in single} == {"0.0"}
    _, ident = table((tmp_path / "run.k20.labels.csv").read_text())
    assert [int(r[1]) for r in ident] == list(range(1, 21))


def test_cluster_bad_k(capsys, two_groups, tmp_path):
    code, _, err = run(capsys, "cluster", two_groups, "--tau", "1", "--k", "0,2", "--out-prefix", tmp_path / "x")
    assert code == 2 and "k must lie" in err


def test_threads_do_not_change_output(capsys, two_groups):
    _, a, _ = run(capsys, "--threads", "1", "similarity", two_groups, "--tau", "1")
    _, b, _ = run(capsys, "--threads", "4", "similarity", two_groups, "--tau", "1")
    assert a == b


def test_consistency(capsys):
    code, out, _ = run(capsys, "consistency", "--sizes", "50,100", "--replicates", "2", "--json")
    data = json.loads(out)
    assert code == 0 and data["sizes"] == [50, 100]
    assert data["population"] == pytest.approx(0.1165162, abs=1e-7)
    _, out, _ = run(capsys, "consistency", "--sizes", "50", "--replicates", "1")
    assert out.startswith("population depth")


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["depth"])
    assert exc.value.code == 2


def test_console_script(d3_csv):
    proc = subprocess.run(
        [sys.executable, "-m", "fdepth.cli", "tau", str(d3_csv), "--probs", "0.5"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["quantiles"] == [1.0]


def test_invariant_breach_exit_code(capsys, monkeypatch, d3_csv):
    import fdepth.cli as cli
    from fdepth.similarity import SimilarityMatrix

    broken = SimilarityMatrix(np.array([[0.1, 0.5, 0.0], [0.5, 0.1, 0.0], [0.0, 0.0, 0.1]]), "hr")
    monkeypatch.setattr(cli, "similarity_matrix", lambda *a, **k: broken)
    code, out, err = run(capsys, "similarity", d3_csv, "--method", "hr", "--dissimilarity")
    assert code == 3 and out == "" and "invariant" in err
