import subprocess
import sys

import numpy as np
import pytest

from conftest import spd
from oracles import scalar_normal_logpdf
from tcplda import formats
from tcplda.cli import main
from tcplda.em import PldaModel
from tcplda.errors import FormatError
from tcplda.stats import LabeledDataset

HAND = "PLDA-TXT 1 2\nA\t0 0\nA\t2 0\nB\t4 0\nB\t6 0\n"


@pytest.fixture
def hand_file(tmp_path):
    p = tmp_path / "hand.txt"
    p.write_text(HAND)
    return p


def write_model(path, mu, phi_b, phi_w):
    formats.write_model(path, PldaModel(np.asarray(mu, float), np.asarray(phi_b, float), np.asarray(phi_w, float)))


# ---- formats --------------------------------------------------------------

def test_model_round_trip_byte_identical(tmp_path):
    rng = np.random.default_rng(0)
    model = PldaModel(rng.standard_normal(5) * 1e-3, spd(5, 1) / 3, spd(5, 2) * np.pi)
    text = formats.format_model(model)
    again = formats.parse_model(text)
    assert formats.format_model(again) == text
    assert np.array_equal(again.phi_b, model.phi_b) and np.array_equal(again.mu, model.mu)
    p = tmp_path / "m.txt"
    formats.write_model(p, model)
    assert p.read_text() == text


def test_model_header_version_rejected():
    text = formats.format_model(PldaModel(np.zeros(1), [[1.0]], [[1.0]])).replace("PLDA-MODEL 1", "PLDA-MODEL 2")
    with pytest.raises(FormatError, match="version"):
        formats.parse_model(text)


def test_model_truncated():
    with pytest.raises(FormatError):
        formats.parse_model("PLDA-MODEL 1 2\n0 0\n1 0\n0 1\n")


def test_embedding_round_trip():
    data = LabeledDataset(("spk 1", "b"), np.array([[0.1, 1e-300], [-2.5, 3.0]]))
    back = formats.parse_embeddings(formats.format_embeddings(data))
    assert back.labels == data.labels and np.array_equal(back.vectors, data.vectors)


def test_embedding_ragged_row_reports_line():
    with pytest.raises(FormatError, match="line 3"):
        formats.parse_embeddings("PLDA-TXT 1 2\na\t1 2\nb\t1 2 3\n")


@pytest.mark.parametrize("text", ["", "PLDA-TXT 1\n", "PLDA-TXT 1 2\n", "PLDA-TXT 1 2\nnotab 1 2\n", "PLDA-TXT 1 2\na\t1 x\n"])
def test_embedding_malformed(text):
    with pytest.raises(FormatError):
        formats.parse_embeddings(text)


def test_label_with_tab_refused():
    with pytest.raises(FormatError):
        formats.format_embeddings(LabeledDataset(("a\tb",), np.zeros((1, 1))))


# ---- train ----------------------------------------------------------------

def test_train_hand_dataset(tmp_path, hand_file):
    out = tmp_path / "model.txt"
    rep = tmp_path / "report.txt"
    assert main(["train", "--data", str(hand_file), "--out", str(out), "--iters", "3", "--report", str(rep)]) == 0
    model = formats.read_model(out)
    np.testing.assert_array_equal(model.mu, [3.0, 0.0])
    lines = rep.read_text().splitlines()
    assert [ln.split("\t")[0] for ln in lines] == ["1", "2", "3"]
    assert all(np.isfinite(float(ln.split("\t")[1])) for ln in lines)


def test_train_iters_zero_is_usage_error(tmp_path, hand_file, capsys):
    assert main(["train", "--data", str(hand_file), "--out", str(tmp_path / "m"), "--iters", "0"]) == 2
    assert "--iters" in capsys.readouterr().err


def test_train_bad_data_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("PLDA-TXT 1 2\na\t1 2\na\t3\n")
    assert main(["train", "--data", str(bad), "--out", str(tmp_path / "m")]) == 1
    assert "line 3" in capsys.readouterr().err
    one_class = tmp_path / "one.txt"
    one_class.write_text("PLDA-TXT 1 1\na\t1\na\t2\n")
    assert main(["train", "--data", str(one_class), "--out", str(tmp_path / "m")]) == 1
    assert main(["train", "--data", str(tmp_path / "missing"), "--out", str(tmp_path / "m")]) == 1


def test_variants_share_between_after_one_iteration(tmp_path):
    data = tmp_path / "d.txt"
    assert main(["synth", "--dim", "3", "--classes", "20", "--per-class", "5", "--seed", "4", "--out", str(data)]) == 0
    models = {}
    for variant in ("paper", "kaldi"):
        out = tmp_path / f"{variant}.txt"
        assert main(["train", "--data", str(data), "--out", str(out), "--iters", "1", "--variant", variant]) == 0
        models[variant] = formats.read_model(out)
    assert np.array_equal(models["paper"].phi_b, models["kaldi"].phi_b)
    assert not np.array_equal(models["paper"].phi_w, models["kaldi"].phi_w)


# ---- synth ----------------------------------------------------------------

def test_synth_reproducible(tmp_path):
    args = ["synth", "--dim", "4", "--classes", "6", "--per-class", "3", "--seed", "11"]
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = formats.read_embeddings(a)
    assert data.dim == 4 and len(data) == 18


def test_synth_one_class_usage_error(tmp_path):
    assert main(["synth", "--dim", "2", "--classes", "1", "--per-class", "3", "--out", str(tmp_path / "x")]) == 2


def test_synth_covariance_files(tmp_path):
    pb = tmp_path / "pb.txt"
    pb.write_text("0 0\n0 0\n")
    pw = tmp_path / "pw.txt"
    pw.write_text("0 0\n0 0\n")
    out = tmp_path / "o.txt"
    assert main(["synth", "--dim", "2", "--classes", "3", "--per-class", "2", "--phi-b", str(pb),
                 "--phi-w", str(pw), "--out", str(out)]) == 0
    assert not formats.read_embeddings(out).vectors.any()
    pb.write_text("1 0\n0 1\n0 0\n")
    assert main(["synth", "--dim", "2", "--classes", "3", "--per-class", "2", "--phi-b", str(pb), "--out", str(out)]) == 1


# ---- score ----------------------------------------------------------------

def test_score_scalar_trial(tmp_path):
    model = tmp_path / "m.txt"
    write_model(model, [0.0], [[1.0]], [[1.0]])
    (tmp_path / "e.txt").write_text("PLDA-TXT 1 1\nspk\t2.0\n")
    (tmp_path / "t.txt").write_text("PLDA-TXT 1 1\nx\t2.0\n")
    (tmp_path / "trials").write_text("spk\t0\n")
    out = tmp_path / "scores"
    assert main(["score", "--model", str(model), "--enroll", str(tmp_path / "e.txt"), "--test",
                 str(tmp_path / "t.txt"), "--trials", str(tmp_path / "trials"), "--out", str(out)]) == 0
    enroll_id, idx, llr = out.read_text().strip().split("\t")
    expected = scalar_normal_logpdf(2.0, 1.0, 1.5) - scalar_normal_logpdf(2.0, 0.0, 2.0)
    assert (enroll_id, idx) == ("spk", "0")
    assert llr == f"{expected:.9g}"


def test_score_degenerate_model(tmp_path):
    d = 3
    model = tmp_path / "m.txt"
    write_model(model, np.zeros(d), 1e-10 * np.eye(d), np.eye(d))
    data = tmp_path / "d.txt"
    assert main(["synth", "--dim", "3", "--classes", "4", "--per-class", "3", "--seed", "2", "--out", str(data)]) == 0
    (tmp_path / "trials").write_text("".join(f"c{k}\t{i}\n" for k in range(4) for i in range(0, 12, 5)))
    out = tmp_path / "scores"
    assert main(["score", "--model", str(model), "--enroll", str(data), "--test", str(data),
                 "--trials", str(tmp_path / "trials"), "--out", str(out)]) == 0
    llrs = [float(line.split("\t")[2]) for line in out.read_text().splitlines()]
    assert len(llrs) == 12 and max(abs(x) for x in llrs) <= 1e-6


def test_score_bad_index_reports_line(tmp_path, capsys):
    model = tmp_path / "m.txt"
    write_model(model, [0.0], [[1.0]], [[1.0]])
    emb = tmp_path / "e.txt"
    emb.write_text("PLDA-TXT 1 1\nspk\t2.0\n")
    (tmp_path / "trials").write_text("spk\t0\nspk\t5\n")
    args = ["score", "--model", str(model), "--enroll", str(emb), "--test", str(emb),
            "--trials", str(tmp_path / "trials"), "--out", str(tmp_path / "o")]
    assert main(args) == 1
    assert "line 2" in capsys.readouterr().err
    (tmp_path / "trials").write_text("nobody\t0\n")
    assert main(args) == 1
    assert "line 1" in capsys.readouterr().err


# ---- inspect --------------------------------------------------------------

def parse_inspect(text):
    return dict(line.split("\t") for line in text.strip().splitlines())


def test_inspect_identity(tmp_path, capsys):
    model = tmp_path / "m.txt"
    write_model(model, np.zeros(3), np.eye(3), np.eye(3))
    assert main(["inspect", "--model", str(model)]) == 0
    info = parse_inspect(capsys.readouterr().out)
    assert info["dim"] == "3"
    for name in ("phi_b", "phi_w"):
        assert float(info[f"{name}_trace"]) == 3.0
        assert float(info[f"{name}_min_pivot2"]) == float(info[f"{name}_max_pivot2"]) == 1.0
    assert float(info["mu_norm"]) == 0.0


def test_inspect_round_trip_and_bad_version(tmp_path, capsys):
    m1, m2 = tmp_path / "a.txt", tmp_path / "b.txt"
    write_model(m1, [1.0, 2.0], spd(2, 0), spd(2, 1))
    formats.write_model(m2, formats.read_model(m1))
    assert main(["inspect", "--model", str(m1)]) == 0
    first = capsys.readouterr().out
    assert main(["inspect", "--model", str(m2)]) == 0
    assert capsys.readouterr().out == first
    m2.write_text(m1.read_text().replace("PLDA-MODEL 1", "PLDA-MODEL 9"))
    assert main(["inspect", "--model", str(m2)]) == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tcplda.cli", "train", "--data", "x", "--out", "y", "--iters", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    proc = subprocess.run([sys.executable, "-m", "tcplda.cli", "inspect", "--model", str(tmp_path / "none")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
