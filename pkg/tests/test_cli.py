import json

import numpy as np
import pytest

from prosodia.cli.main import main
from prosodia.cli.synth import SynthCorpusSpec, generate_corpus
from prosodia.features import load_corpus, make_nonparallel_split, read_feature_file
from prosodia.prosody import preprocess_f0, read_scalogram_csv


@pytest.fixture(scope="module")
def tiny_corpus(tmp_path_factory):
    """Small synthetic corpus shared by CLI tests (4+4 train, 2 eval)."""
    root = tmp_path_factory.mktemp("corpus")
    spec = SynthCorpusSpec(n_train_each=4, n_eval=2, frames_min=256, frames_max=320)
    manifest = generate_corpus(spec, seed=11, out_dir=root)
    return manifest


@pytest.fixture(scope="module")
def tiny_config(tmp_path_factory, tiny_corpus):
    root = tmp_path_factory.mktemp("config")
    cfg = {
        "manifest": str(tiny_corpus),
        "split": {
            "source_emotion": "A",
            "target_emotion": "B",
            "n_train_each": 4,
            "n_eval": 2,
        },
        "network": {"base_channels": 2, "n_residual": 1},
        "schedule": {
            "total_iters": 8,
            "constant_lr_iters": 4,
            "decay_iters": 4,
            "segment_frames": 64,
            "seed": 5,
        },
        "weights": {"lambda_cyc": 10.0, "lambda_id": 5.0, "id_cutoff_iters": 4},
        "seed": 5,
        "mode": "prosody-separate",
    }
    path = root / "config.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


class TestSynthCorpus:
    def test_counting_and_split_compatibility(self, tmp_path):
        out = tmp_path / "corpus"
        rc = main(
            [
                "synth-corpus", "--out", str(out), "--seed", "3",
                "--n-train", "3", "--n-eval", "2",
            ]
        )
        assert rc == 0
        manifest = out / "manifest.json"
        entries = json.loads(manifest.read_text())
        # 2*3+2 = 8 sentence ids, each rendered in both pseudo-emotions
        assert len(entries) == 16
        corpus = load_corpus(manifest)
        split = make_nonparallel_split(corpus, "A", "B", 3, 2, seed=0)
        assert len(split.eval_pairs) == 2
        assert not (out / ".in-progress").exists()

    def test_deterministic_given_seed(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["synth-corpus", "--out", str(a), "--seed", "9",
                     "--n-train", "2", "--n-eval", "1"]) == 0
        assert main(["synth-corpus", "--out", str(b), "--seed", "9",
                     "--n-train", "2", "--n-eval", "1"]) == 0
        for fa in sorted(a.glob("*.uff")):
            assert fa.read_bytes() == (b / fa.name).read_bytes()

    def test_eval_pair_contours_strongly_correlated(self, tmp_path):
        out = tmp_path / "corpus"
        main(["synth-corpus", "--out", str(out), "--seed", "4",
              "--n-train", "2", "--n-eval", "3"])
        corpus = load_corpus(out / "manifest.json")
        split = make_nonparallel_split(corpus, "A", "B", 2, 3, seed=0)
        for a, b in split.eval_pairs:
            ca = preprocess_f0(a.f0_hz).values
            cb = preprocess_f0(b.f0_hz).values
            assert np.corrcoef(ca, cb)[0, 1] >= 0.95


class TestPreprocess:
    def test_stats_json(self, tiny_corpus, tmp_path, capsys):
        out = tmp_path / "stats.json"
        assert main(["preprocess", "--manifest", str(tiny_corpus), "--out", str(out)]) == 0
        stats = json.loads(out.read_text())
        assert set(stats) == {"A", "B"}
        assert stats["A"]["n_utterances"] == 10
        assert stats["B"]["log_f0"]["mean"] > stats["A"]["log_f0"]["mean"]


class TestDecomposeReconstruct:
    def test_decompose_outputs(self, tiny_corpus, tmp_path):
        src = sorted(tiny_corpus.parent.glob("*_A.uff"))[0]
        out = tmp_path / "dec"
        assert main(["decompose", "--input", str(src), "--out", str(out)]) == 0
        csvs = list(out.glob("*.scalogram.csv"))
        caches = list(out.glob("*.cwt"))
        assert len(csvs) == 1 and len(caches) == 1
        utt = read_feature_file(src)
        matrix = read_scalogram_csv(csvs[0])
        assert matrix.shape == (10, utt.n_frames)

    def test_decompose_then_reconstruct_correlates(self, tiny_corpus, tmp_path):
        src = sorted(tiny_corpus.parent.glob("*_A.uff"))[0]
        dec = tmp_path / "dec"
        main(["decompose", "--input", str(src), "--out", str(dec)])
        cache = next(dec.glob("*.cwt"))
        out_uff = tmp_path / "rec.uff"
        assert main(["reconstruct", "--cache", str(cache), "--reference", str(src),
                     "--out", str(out_uff)]) == 0
        orig = read_feature_file(src)
        rec = read_feature_file(out_uff)
        voiced = orig.voicing_mask
        assert (rec.f0_hz[~voiced] == 0).all()
        corr = np.corrcoef(
            np.log(rec.f0_hz[voiced].astype(np.float64)),
            np.log(orig.f0_hz[voiced].astype(np.float64)),
        )[0, 1]
        assert corr >= 0.90

    def test_all_unvoiced_input_fails_cleanly(self, tmp_path, capsys):
        from prosodia.features import UtteranceFeatures, write_feature_file

        utt = UtteranceFeatures(
            utterance_id="silent",
            emotion_label="A",
            frame_period_ms=5.0,
            mceps=np.zeros((24, 20), dtype=np.float32),
            f0_hz=np.zeros(20, dtype=np.float32),
        )
        path = tmp_path / "silent.uff"
        write_feature_file(utt, path)
        rc = main(["decompose", "--input", str(path), "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "voiced" in capsys.readouterr().err


class TestTrainCommand:
    def test_checkpoint_artifacts(self, tiny_config, tmp_path):
        out = tmp_path / "ckpt"
        assert main(["train", "--config", str(tiny_config), "--out", str(out)]) == 0
        for fname in (
            "g_xy.prm1", "g_yx.prm1", "d_x.prm1", "d_y.prm1",
            "metadata.json", "losslog.csv", "config.json",
        ):
            assert (out / fname).exists(), fname
        assert not (out / ".in-progress").exists()
        lines = (out / "losslog.csv").read_text().strip().splitlines()
        assert lines[0] == "iter,lr,adv_g,adv_d,cyc,id"
        assert len(lines) == 9

    def test_baseline_mode_writes_lg_stats_only(self, tiny_config, tmp_path):
        out = tmp_path / "base"
        assert main(["train", "--config", str(tiny_config), "--mode", "baseline",
                     "--out", str(out)]) == 0
        files = sorted(p.name for p in out.iterdir())
        assert files == ["lg_stats.json"]
        payload = json.loads((out / "lg_stats.json").read_text())
        assert set(payload) >= {"source", "target"}

    def test_rerun_byte_identical(self, tiny_config, tmp_path):
        out1, out2 = tmp_path / "c1", tmp_path / "c2"
        assert main(["train", "--config", str(tiny_config), "--out", str(out1)]) == 0
        assert main(["train", "--config", str(tiny_config), "--out", str(out2)]) == 0
        for fname in ("g_xy.prm1", "g_yx.prm1", "d_x.prm1", "d_y.prm1", "losslog.csv"):
            assert (out1 / fname).read_bytes() == (out2 / fname).read_bytes(), fname

    def test_invalid_config_exits_1_with_all_errors(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(
            json.dumps({"mode": "bogus", "stats_policy": "mystery", "seed": "nan"}),
            encoding="utf-8",
        )
        rc = main(["train", "--config", str(bad), "--out", str(tmp_path / "o")])
        assert rc == 1
        err = capsys.readouterr().err
        assert "mode" in err and "stats_policy" in err and "seed" in err


@pytest.fixture(scope="module")
def trained(tiny_config, tmp_path_factory):
    root = tmp_path_factory.mktemp("trained")
    spec_dir, pros_dir, base_dir = root / "spec", root / "pros", root / "base"
    assert main(["train", "--config", str(tiny_config), "--mode", "spectrum",
                 "--out", str(spec_dir)]) == 0
    assert main(["train", "--config", str(tiny_config), "--mode", "prosody",
                 "--out", str(pros_dir)]) == 0
    assert main(["train", "--config", str(tiny_config), "--mode", "baseline",
                 "--out", str(base_dir)]) == 0
    return spec_dir, pros_dir, base_dir


class TestConvertCommand:
    def test_separate_conversion_preserves_voicing(self, tiny_config, trained, tmp_path):
        spec_dir, pros_dir, _ = trained
        out = tmp_path / "conv"
        rc = main([
            "convert", "--config", str(tiny_config), "--mode", "spectrum",
            "--spectrum-ckpt", str(spec_dir), "--prosody-ckpt", str(pros_dir),
            "--out", str(out),
        ])
        assert rc == 0
        files = sorted(out.glob("*.uff"))
        assert len(files) == 2  # eval sources of the split
        cfg = json.loads(tiny_config.read_text())
        corpus = load_corpus(cfg["manifest"])
        split = make_nonparallel_split(corpus, "A", "B", 4, 2, seed=5)
        for (src, _tgt), f in zip(split.eval_pairs, files):
            conv = read_feature_file(f)
            assert conv.utterance_id == src.utterance_id
            assert conv.emotion_label == "B"
            np.testing.assert_array_equal(conv.f0_hz == 0.0, src.f0_hz == 0.0)

    def test_baseline_conversion_imposes_target_stats(self, tiny_config, trained, tmp_path):
        _, _, base_dir = trained
        out = tmp_path / "conv_base"
        rc = main([
            "convert", "--config", str(tiny_config), "--mode", "baseline",
            "--baseline-ckpt", str(base_dir), "--out", str(out),
        ])
        assert rc == 0
        payload = json.loads((base_dir / "lg_stats.json").read_text())
        tgt_mean = payload["target"]["mean"]
        tgt_std = payload["target"]["std"]
        logs = []
        for f in out.glob("*.uff"):
            utt = read_feature_file(f)
            logs.append(np.log(utt.f0_hz[utt.f0_hz > 0].astype(np.float64)))
        pooled = np.concatenate(logs)
        assert abs(pooled.mean() - tgt_mean) / tgt_mean < 0.02
        assert abs(pooled.std() - tgt_std) / tgt_std < 0.10

    def test_mode_mismatch_rejected(self, tiny_config, trained, tmp_path, capsys):
        spec_dir, pros_dir, _ = trained
        rc = main([
            "convert", "--config", str(tiny_config), "--mode", "joint",
            "--joint-ckpt", str(pros_dir), "--out", str(tmp_path / "x"),
        ])
        assert rc == 1
        assert "joint" in capsys.readouterr().err

    def test_missing_checkpoint_flag_rejected(self, tiny_config, tmp_path):
        rc = main([
            "convert", "--config", str(tiny_config), "--mode", "prosody",
            "--out", str(tmp_path / "x"),
        ])
        assert rc == 1


class TestEvaluateCommand:
    def test_self_evaluation_perfect(self, tiny_corpus, tmp_path, capsys):
        ref_dir = tmp_path / "ref"
        ref_dir.mkdir()
        for f in sorted(tiny_corpus.parent.glob("*_B.uff"))[:3]:
            utt = read_feature_file(f)
            from prosodia.features import write_feature_file

            write_feature_file(utt, ref_dir / f"{utt.utterance_id}.uff")
        out_csv = tmp_path / "report.csv"
        rc = main(["evaluate", "--converted", str(ref_dir), "--reference", str(ref_dir),
                   "--out", str(out_csv)])
        assert rc == 0
        lines = out_csv.read_text().strip().splitlines()
        mean = lines[-1].split(",")
        assert mean[0] == "MEAN"
        assert float(mean[1]) == 0.0 and float(mean[2]) == 0.0
        assert float(mean[3]) == pytest.approx(1.0, abs=1e-9)

    def test_empty_intersection_rejected(self, tiny_corpus, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir(), b.mkdir()
        from prosodia.features import write_feature_file

        u1 = read_feature_file(sorted(tiny_corpus.parent.glob("*_A.uff"))[0])
        write_feature_file(u1, a / "only_here.uff")
        u2 = read_feature_file(sorted(tiny_corpus.parent.glob("*_B.uff"))[1])
        write_feature_file(u2, b / "only_there.uff")
        rc = main(["evaluate", "--converted", str(a), "--reference", str(b)])
        assert rc == 1
        assert "common" in capsys.readouterr().err


class TestCompareCommand:
    def test_comparison_table_and_determinism(self, tiny_config, tmp_path, capsys):
        out1 = tmp_path / "cmp1"
        rc = main(["compare", "--config", str(tiny_config), "--out", str(out1)])
        assert rc == 0
        csv_path = out1 / "comparison.csv"
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "pair,system,mcd_db,rmse_hz,pcc"
        body = [ln.split(",") for ln in lines[1:]]
        systems = [row[1] for row in body if row[0] != "MEAN"]
        assert systems == ["baseline", "joint", "separate"]
        mean_rows = [row for row in body if row[0] == "MEAN"]
        assert len(mean_rows) == 3
        for row in body:
            assert "FAILED" not in row[2:]
            for cell in row[2:]:
                assert np.isfinite(float(cell))
        assert (out1 / "comparison.txt").exists()
        assert not (out1 / ".in-progress").exists()

        out2 = tmp_path / "cmp2"
        assert main(["compare", "--config", str(tiny_config), "--out", str(out2)]) == 0
        assert csv_path.read_bytes() == (out2 / "comparison.csv").read_bytes()
