import json

import numpy as np
import pytest

from qafs import config as cfgmod
from qafs.cli import main
from qafs.io import (
    ValidationError,
    format_feature_csv,
    read_feature_csv,
    read_signal_csv,
    write_feature_csv,
    write_signal_csv,
)
from qafs.qubo import build_bqm
from qafs.sampler import exhaustive_solve
from qafs.signals import FEATURE_NAMES, FEATURE_SOURCES, FeatureMatrix
from qafs.synth import SyntheticSpec, planted_matrix, synth_record


def signal_text(rows, header="time,ecg,hand_eda,foot_eda,resp,label"):
    return header + "\n" + "\n".join(rows) + "\n"


class TestSignalCsv:
    def test_missing_column(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text(signal_text(["0,0,0,0,low"], header="time,ecg,hand_eda,foot_eda,label"))
        with pytest.raises(ValidationError, match="resp"):
            read_signal_csv(p)

    def test_jitter(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text(signal_text([f"{t},0,0,0,0,low" for t in (0.0, 0.1, 0.2, 0.31)]))
        with pytest.raises(ValidationError, match="non-uniform"):
            read_signal_csv(p)

    def test_bad_label(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text(signal_text(["0,0,0,0,0,low", "0.1,0,0,0,0,extreme"]))
        with pytest.raises(ValidationError, match=":3"):
            read_signal_csv(p)

    def test_round_trip(self, tmp_path):
        rec = synth_record(SyntheticSpec(duration_seconds=60, seed=4))
        p = tmp_path / "s.csv"
        write_signal_csv(p, rec)
        back = read_signal_csv(p)
        assert back.sampling_rate_hz == pytest.approx(10.0)
        assert np.array_equal(back.labels, rec.labels)
        for c in rec.channels:
            assert np.allclose(back.channels[c], rec.channels[c], rtol=1e-8, atol=1e-12)


class TestFeatureCsv:
    def test_reemit_is_byte_identical(self, tmp_path):
        fm = planted_matrix(n_rows=30, seed=5)
        p = tmp_path / "f.csv"
        write_feature_csv(p, fm)
        back = read_feature_csv(p)
        assert format_feature_csv(back) == p.read_text()
        assert back.names == FEATURE_NAMES and back.sources == FEATURE_SOURCES
        assert np.allclose(back.values, fm.values, rtol=1e-8)

    def test_sources_from_prefix(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("label,ecg_custom,resp_other\nlow,1,2\nhigh,3,4\n")
        assert read_feature_csv(p).sources == ("ECG", "RESP")

    def test_unknown_prefix(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("label,mystery\nlow,1\n")
        with pytest.raises(ValidationError):
            read_feature_csv(p)


class TestConfig:
    def test_precedence(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("# comment\nseed = 3\nqubo.alpha = 2.5\n")
        s = cfgmod.load(p, {"seed": "9"})
        assert s["seed"] == 9 and s["qubo.alpha"] == 2.5 and s["anneal.sweeps"] == 1000

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("qubo.beta = 1\n")
        with pytest.raises(ValidationError, match="unknown key"):
            cfgmod.load(p)

    def test_bad_value(self):
        with pytest.raises(ValidationError):
            cfgmod.load(None, {"anneal.sweeps": "many"})


def write_matrix(tmp_path, fm):
    p = tmp_path / "features.csv"
    write_feature_csv(p, fm)
    return p


class TestCli:
    def test_select_qa_matches_exhaustive_oracle(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        y = np.repeat([0, 1, 2], 20)
        X = rng.normal(size=(60, 6))
        X[:, 3] = y
        fm = FeatureMatrix(X, y, FEATURE_NAMES[:6], FEATURE_SOURCES[:6])
        path = write_matrix(tmp_path, fm)
        out = tmp_path / "sel"
        assert main(["select", str(path), "--method", "qa", "--out", str(out)]) == 0
        sel = json.loads((out / "selection.json").read_text())
        oracle = exhaustive_solve(build_bqm(read_feature_csv(path).values, y)).selected
        assert sel["indices"] == oracle and 3 in sel["indices"]
        assert (out / "bqm.json").exists() and (out / "sampleset.json").exists()

    def test_select_pearson(self, tmp_path):
        path = write_matrix(tmp_path, planted_matrix(n_rows=90, seed=6))
        out = tmp_path / "sel"
        assert main(["select", str(path), "--method", "pearson", "--k", "3", "--out", str(out)]) == 0
        assert json.loads((out / "selection.json").read_text())["k"] == 3

    def test_unknown_method(self, tmp_path, capsys):
        path = write_matrix(tmp_path, planted_matrix(n_rows=30, seed=6))
        assert main(["select", str(path), "--method", "lasso", "--out", str(tmp_path)]) == 1
        assert "pearson" in capsys.readouterr().err

    def test_missing_input_is_validation_error(self, tmp_path):
        assert main(["extract", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 1

    def test_bad_flag_exits_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["select"])
        assert exc.value.code == 1

    def test_evaluate_single_repeat(self, tmp_path):
        path = write_matrix(tmp_path, planted_matrix(n_rows=120, seed=7))
        out = tmp_path / "ev"
        code = main(
            ["evaluate", str(path), "--repeats", "1", "--out", str(out), "--set", "anneal.sweeps=100", "--set", "anneal.n_reads=5"]
        )
        assert code == 0
        assert (out / "significance.csv").read_text().strip() == "method,class,fraction,p_value,significant"
        assert len((out / "results.csv").read_text().splitlines()) == 1 + 4 * 4 * 3
        assert not list(out.glob("*.partial"))

    def test_synth_extract(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert main(["synth", "--duration", "600", "--seed", "2", "--out", str(d)]) == 0
        assert (a / "signals.csv").read_bytes() == (b / "signals.csv").read_bytes()
        labels = [r.rsplit(",", 1)[1] for r in (a / "signals.csv").read_text().splitlines()[1:]]
        runs = [labels[0]] + [cur for prev, cur in zip(labels, labels[1:]) if cur != prev]
        assert runs == ["low", "medium", "high"]
        assert main(["extract", str(a / "signals.csv"), "--out", str(a)]) == 0
        fm = read_feature_csv(a / "features.csv")
        assert fm.n_features == 39 and fm.n_rows == 11

    def test_synth_too_short(self, tmp_path):
        assert main(["synth", "--duration", "120", "--out", str(tmp_path)]) == 1
