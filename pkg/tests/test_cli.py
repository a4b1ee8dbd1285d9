"""Tests for the command-line surface and its exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from radarplace.app import main
from radarplace.cli import EFFECTIVE_CONFIG, ExitCode, build_parser, exit_code_for, run
from radarplace.errors import (
    BatchConstructionError,
    CheckpointIntegrityError,
    ConfigError,
    ConfigMismatchError,
    DatasetFormatError,
    TrainingDivergedError,
    UndefinedRecallError,
)

SIM = [
    "sim.azimuths=64",
    "sim.range_bins=32",
    "sim.range_resolution=1.0",
    "sim.n_scatterers=120",
    "sim.extent=60",
    "sim.loop_radius=20",
    "sim.loop_vertices=32",
]
MODEL = [
    "grid.side_pixels=32",
    "grid.metres_per_pixel=2.0",
    "embedder.backbone=small_cnn",
    "embedder.embedding_dim=16",
    "variant.pairs_per_batch=4",
    "train.epochs=1",
    "train.steps_per_epoch=2",
    "train.log_every=1",
]


def _sets(values: list[str]) -> list[str]:
    out: list[str] = []
    for v in values:
        out += ["--set", v]
    return out


class TestExitCodes:
    @pytest.mark.parametrize(
        ("exc", "code"),
        [
            (ConfigError("x"), ExitCode.USAGE),
            (ConfigMismatchError("x", {}), ExitCode.USAGE),
            (DatasetFormatError("x"), ExitCode.BAD_INPUT),
            (CheckpointIntegrityError("x"), ExitCode.BAD_INPUT),
            (BatchConstructionError("x"), ExitCode.RUN_FAILED),
            (TrainingDivergedError(3, float("nan")), ExitCode.RUN_FAILED),
            (UndefinedRecallError("x"), ExitCode.RUN_FAILED),
            (OSError("disk"), ExitCode.RUN_FAILED),
            (KeyError("x"), ExitCode.UNEXPECTED),
        ],
    )
    def test_mapping(self, exc: BaseException, code: ExitCode) -> None:
        assert exit_code_for(exc) is code

    def test_epilog_documents_codes(self) -> None:
        help_text = build_parser().format_help()
        for code in ExitCode:
            assert f"  {int(code)}  " in help_text


class TestCommandErrors:
    def test_unknown_key_exits_two(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        code = run(["simgen", "--out", str(tmp_path), "--set", "variant.colour=red"])
        assert code == ExitCode.USAGE
        assert "variant.colour" in capsys.readouterr().err

    def test_bad_value_exits_two(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        code = run(["simgen", "--out", str(tmp_path), "--set", "sim.azimuths=lots"])
        assert code == ExitCode.USAGE
        assert "sim.azimuths" in capsys.readouterr().err

    def test_missing_dataset_exits_three(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        code = run(["train", str(tmp_path / "absent"), "--out", str(tmp_path / "run"), *_sets(MODEL)])
        assert code == ExitCode.BAD_INPUT
        err = capsys.readouterr().err
        assert err.strip().splitlines()[-1].startswith("radarplace train: error:")

    def test_train_without_sequences(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert run(["train", "--out", str(tmp_path)]) == ExitCode.USAGE
        assert "train.sequences" in capsys.readouterr().err

    def test_corrupt_checkpoint_exits_three(self, tmp_path: Path, dataset_dir: Path) -> None:
        ckpt = tmp_path / "bad.ckpt"
        ckpt.write_bytes(b"junk")
        code = run(["embed", str(dataset_dir), "--checkpoint", str(ckpt), "--out", str(tmp_path / "e")])
        assert code == ExitCode.BAD_INPUT

    def test_plot_label_count_must_match(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        a, b = tmp_path / "a", tmp_path / "b"
        code = run(["plot", str(a), str(b), "--label", "only", "--out", str(tmp_path / "p")])
        assert code == ExitCode.USAGE
        assert "--label" in capsys.readouterr().err

    def test_plot_duplicate_default_labels(self, tmp_path: Path) -> None:
        a, b = tmp_path / "x" / "eval", tmp_path / "y" / "eval"
        assert run(["plot", str(a), str(b), "--out", str(tmp_path / "p")]) == ExitCode.USAGE

    def test_argparse_usage_error(self) -> None:
        with pytest.raises(SystemExit) as info:
            run(["train"])
        assert info.value.code == 2


class TestEffectiveConfig:
    def test_train_snapshot_records_sequences(self, tmp_path: Path, dataset_dir: Path) -> None:
        run_dir = tmp_path / "run"
        assert main(["train", str(dataset_dir), "--out", str(run_dir), *_sets(MODEL)]) == 0
        snapshot = run_dir / EFFECTIVE_CONFIG
        assert f"train.sequences = {dataset_dir}" in snapshot.read_text().splitlines()

    def test_train_rerun_from_snapshot_reproduces_loss_log(
        self, tmp_path: Path, dataset_dir: Path
    ) -> None:
        run_dir, rerun_dir = tmp_path / "run", tmp_path / "rerun"
        assert main(["train", str(dataset_dir), "--out", str(run_dir), *_sets(MODEL)]) == 0
        snapshot = run_dir / EFFECTIVE_CONFIG
        assert main(["train", "--config", str(snapshot), "--out", str(rerun_dir)]) == 0
        assert (rerun_dir / "loss.csv").read_text() == (run_dir / "loss.csv").read_text()
        assert (rerun_dir / EFFECTIVE_CONFIG).read_text() == snapshot.read_text()


class TestPipeline:
    def test_simgen_train_embed_eval_plot(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        db_dir, q_dir = tmp_path / "db", tmp_path / "q"
        assert main(["simgen", "--out", str(db_dir), *_sets(SIM)]) == 0
        assert main(["simgen", "--out", str(q_dir), *_sets([*SIM, "sim.reverse=true", "sim.seed=5"])]) == 0
        assert (db_dir / "meta.txt").is_file()

        run_dir = tmp_path / "run"
        assert main(["train", str(db_dir), "--out", str(run_dir), *_sets([*MODEL, "variant.name=vTR2"])]) == 0
        effective = (run_dir / EFFECTIVE_CONFIG).read_text()
        assert "variant.name = vTR2" in effective
        assert (run_dir / "final.ckpt").is_file()
        assert len((run_dir / "loss.csv").read_text().splitlines()) == 3

        ckpt = str(run_dir / "final.ckpt")
        emb_db, emb_q = tmp_path / "emb_db", tmp_path / "emb_q"
        assert main(["embed", str(db_dir), "--checkpoint", ckpt, "--out", str(emb_db)]) == 0
        spin = ["eval.query_spin=true", "eval.rotation_audit=true"]
        assert main(["embed", str(q_dir), "--query", "--checkpoint", ckpt, "--out", str(emb_q), *_sets(spin)]) == 0
        info = json.loads((emb_q / "embedding_info.json").read_text())
        assert info["spun"] is True
        assert 0.0 <= info["rotation_invariance"] <= 1.0

        eval_dir = tmp_path / "eval"
        assert main(["eval", "--queries", str(emb_q), "--database", str(emb_db), "--out", str(eval_dir)]) == 0
        assert "R@1=" in capsys.readouterr().out
        report = json.loads((eval_dir / "report.json").read_text())
        assert set(report["recall_at_n"]) == {"1", "2", "3"}
        assert report["rotation_invariance"] == info["rotation_invariance"]

        plots = tmp_path / "plots"
        assert main(["plot", str(eval_dir), "--out", str(plots)]) == 0
        assert (plots / "pr_curve.png").is_file()
        assert (plots / "match_recall_at_p.png").is_file()

        compare = tmp_path / "compare"
        labels = ["--label", "vTR2", "--label", "again"]
        assert main(["plot", str(eval_dir), str(eval_dir), *labels, "--out", str(compare)]) == 0
        assert (compare / "compare_recall_at_p.png").is_file()
        assert (compare / "compare_recall_at_n.png").is_file()
        assert (compare / "vTR2" / "pr_curve.png").is_file()
        assert (compare / "again" / "distance.png").is_file()

        resumed = tmp_path / "resumed"
        code = main(
            [
                "train",
                str(db_dir),
                "--resume",
                ckpt,
                "--out",
                str(resumed),
                "--set",
                "train.epochs=2",
            ]
        )
        assert code == 0
        assert len((resumed / "loss.csv").read_text().splitlines()) == 3

        mismatch = main(
            ["train", str(db_dir), "--resume", ckpt, "--out", str(tmp_path / "mm"), "--set", "embedder.embedding_dim=32"]
        )
        assert mismatch == ExitCode.USAGE
