import numpy as np
import pytest

from typovec.cli import main, read_knn_vectors
from typovec.config import ConfigError, PipelineConfig, parse_config, write_effective_config


def write_config(path, **overrides) -> None:
    entries = {
        "workdir": str(path.parent / "work"),
        "seed": 77,
        "synth_langs": 12,
        "synth_sentences": 12,
        "synth_lexicon": 12,
        "num_merges": 30,
        "hidden_size": 8,
        "embed_size": 8,
        "lr": 0.02,
        "dropout": 0.0,
        "epochs": 2,
        "batch_size": 8,
        "n_folds": 4,
        "bootstrap_n": 1000,
        "methods": "LMVec,MTVec,MTCell,MTBoth",
        "traj_sentences": 3,
    }
    entries.update(overrides)
    path.write_text("# test config\n" + "".join(f"{k}={v}\n" for k, v in entries.items()),
                    encoding="utf-8")


class TestConfig:
    def test_round_trip_with_defaults(self, tmp_path):
        path = tmp_path / "cfg.txt"
        write_config(path)
        cfg = parse_config(path)
        out = tmp_path / "effective.txt"
        write_effective_config(out, cfg)
        assert parse_config(out) == cfg

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("workdir=w\nseed=1\nbogus=3\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="unknown config key"):
            parse_config(path)

    def test_missing_seed_rejected(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("workdir=w\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="seed"):
            parse_config(path)

    def test_seed_override(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("workdir=w\nseed=1\n", encoding="utf-8")
        assert parse_config(path, seed_override=99).seed == 99

    def test_defaults_match_documented_values(self):
        cfg = PipelineConfig(workdir="w", seed=1)
        assert cfg.num_merges == 32000
        assert cfg.hidden_size == 512
        assert cfg.lr == 0.001
        assert cfg.dropout == 0.5
        assert cfg.knn_k == 3
        assert cfg.clip_norm == 5.0


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run the full stage chain once on a tiny synthetic suite."""
    root = tmp_path_factory.mktemp("pipeline")
    cfg_path = root / "cfg.txt"
    write_config(cfg_path)
    for stage in ("synth", "ingest", "bpe-learn", "train-lm", "train-nmt",
                  "extract", "baseline", "predict", "report", "bootstrap", "traj"):
        assert main(["--config", str(cfg_path), stage]) == 0, stage
    return root / "work", cfg_path


class TestPipeline:
    def test_artifacts_exist(self, pipeline):
        work, _ = pipeline
        for name in ("registry.tsv", "corpus.txt", "features.csv", "merges.txt", "vocab.tsv",
                     "lm.ckpt", "nmt.ckpt", "vectors_LMVec.tsv", "vectors_MTBoth.tsv",
                     "knn_vectors.tsv", "distances.tsv", "report.tsv", "predictions.tsv",
                     "table_main.md", "bootstrap.txt", "trajectory.csv",
                     "effective_config.txt"):
            assert (work / name).exists(), name

    def test_rerun_is_noop(self, pipeline, capsys):
        work, cfg_path = pipeline
        before = (work / "merges.txt").read_bytes()
        assert main(["--config", str(cfg_path), "bpe-learn"]) == 0
        assert "up to date" in capsys.readouterr().out
        assert (work / "merges.txt").read_bytes() == before

    def test_knn_vectors_parse(self, pipeline):
        work, _ = pipeline
        knn = read_knn_vectors(work / "knn_vectors.tsv")
        assert len(knn) == 12
        assert all(v.shape == (3,) for v in knn.values())
        assert all(np.all((v >= 0) & (v <= 1)) for v in knn.values())

    def test_report_table_mentions_all_methods(self, pipeline):
        work, _ = pipeline
        table = (work / "table_main.md").read_text(encoding="utf-8")
        for method in ("None", "LMVec", "MTVec", "MTCell", "MTBoth"):
            assert f"| {method} |" in table

    def test_trajectory_has_header_and_rows(self, pipeline):
        work, _ = pipeline
        lines = (work / "trajectory.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "lang,sentence,step,value"
        assert len(lines) > 12

    def test_stage_flag_equivalent_to_positional(self, pipeline, capsys):
        work, cfg_path = pipeline
        assert main(["--config", str(cfg_path), "--stage", "baseline"]) == 0
        assert "up to date" in capsys.readouterr().out


class TestCliErrors:
    def test_predict_before_extract_names_stage(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.txt"
        write_config(cfg_path, workdir=str(tmp_path / "w2"))
        assert main(["--config", str(cfg_path), "synth"]) == 0
        assert main(["--config", str(cfg_path), "baseline"]) == 0
        code = main(["--config", str(cfg_path), "predict"])
        err = capsys.readouterr().err
        assert code == 1
        assert "extract" in err

    def test_missing_stage_argument(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.txt"
        write_config(cfg_path)
        assert main(["--config", str(cfg_path)]) == 1

    def test_lock_blocks_concurrent_use(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.txt"
        work = tmp_path / "w3"
        write_config(cfg_path, workdir=str(work))
        work.mkdir()
        (work / ".lock").write_text("held", encoding="utf-8")
        assert main(["--config", str(cfg_path), "synth"]) == 1
        assert "locked" in capsys.readouterr().err

    def test_bad_config_key_exits_one(self, tmp_path):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text("workdir=w\nseed=1\nnope=2\n", encoding="utf-8")
        assert main(["--config", str(cfg_path), "synth"]) == 1
