"""
Test cases for the command-line interface, experiment config and reports
"""

import argparse

import numpy as np
import pandas as pd
import pytest
import yaml

from src.active.selection import read_selection
from src.cli.commands import parse_mix, parse_size, plan_cells
from src.cli.config import (
    ExperimentConfig,
    flatten_config,
    format_flat_config,
    load_experiment_config,
    parse_flat_config,
)
from src.cli.report import (
    RESULT_COLUMNS,
    append_result,
    check_ordering,
    completed_cells,
    read_results,
    summarize,
    summary_columns,
)
from src.data.corpus import make_domain_corpus
from src.data.image_io import load_image
from src.data.manifest import read_manifest
from src.errors import ConfigError, DataIOError
from src.main import main
from src.metrics.diagnostics import uncertainty_diagnostics
from src.metrics.quality import pboost
from src.model.checkpoint import save_checkpoint


def _tree_bytes(root):
    return {
        str(path.relative_to(root)): path.read_bytes()
        for path in sorted(root.rglob("*")) if path.is_file()
    }


def _row(arm, budget, seed, psnr, dataset="mosaics"):
    return {
        "dataset": dataset, "arm": arm, "budget": budget, "seed": seed,
        "mse": 10 ** (-psnr / 10), "mae": 0.05, "psnr": psnr, "ssim": 0.8,
    }


@pytest.fixture
def checkpoint(tmp_path, small_params):
    """좁은 네트워크 체크포인트"""
    return save_checkpoint(small_params, tmp_path / "model.udc")


@pytest.fixture
def eval_corpus(tmp_path):
    """test 5장의 도메인 코퍼스"""
    make_domain_corpus("gradients", 25, (32, 32), seed=1, out_dir=tmp_path / "gradients")
    return tmp_path / "gradients" / "manifest.csv"


class TestArgumentParsing:
    """인자 파서 테스트"""

    @pytest.mark.parametrize("text,expected", [
        ("64", (64, 64)),
        ("64x48", (64, 48)),
        ("32X16", (32, 16)),
    ])
    def test_parse_size(self, text, expected):
        """'H' 또는 'HxW'"""
        assert parse_size(text) == expected

    @pytest.mark.parametrize("text", ["abc", "1x2x3", ""])
    def test_parse_size_invalid(self, text):
        """잘못된 크기"""
        with pytest.raises(argparse.ArgumentTypeError):
            parse_size(text)

    def test_parse_mix(self):
        """3개 확률"""
        assert parse_mix("0.2,0.3,0.5") == (0.2, 0.3, 0.5)
        with pytest.raises(argparse.ArgumentTypeError):
            parse_mix("0.5,0.5")
        with pytest.raises(argparse.ArgumentTypeError):
            parse_mix("a,b,c")

    def test_usage_errors(self, capsys):
        """argparse 오류는 종료 코드 2"""
        assert main([]) == 2
        assert main(["gen"]) == 2
        assert main(["gen", "--count", "2", "--size", "abc"]) == 2

    def test_help(self, capsys):
        """--help는 0"""
        assert main(["--help"]) == 0
        assert "usimdal" in capsys.readouterr().out


class TestGenCommand:
    """gen 명령 테스트"""

    def test_gen(self, tmp_path, capsys):
        """매니페스트와 이미지 생성"""
        out = tmp_path / "sim"
        code = main(["gen", "--count", "3", "--size", "32", "--seed", "4", "--out", str(out)])
        assert code == 0
        assert "generated 3 pairs" in capsys.readouterr().out

        manifest = read_manifest(out / "manifest.csv")
        assert len(manifest.select("train")) == 3

    def test_gen_rerun_is_byte_identical(self, tmp_path):
        """같은 seed → 같은 바이트"""
        args = ["gen", "--count", "3", "--size", "32", "--seed", "4", "--mix", "0.4,0.3,0.3"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
        assert _tree_bytes(tmp_path / "a") == _tree_bytes(tmp_path / "b")

    def test_gen_invalid_size(self, tmp_path):
        """4의 배수가 아닌 크기 → 종료 코드 2"""
        assert main(["gen", "--count", "2", "--size", "63", "--out", str(tmp_path / "x")]) == 2
        assert not (tmp_path / "x" / "manifest.csv").exists()

    def test_corpus(self, tmp_path, capsys):
        """corpus 명령"""
        out = tmp_path / "tex"
        code = main([
            "corpus", "--kind", "textures", "--count", "10", "--size", "16",
            "--test-ratio", "0.3", "--out", str(out),
        ])
        assert code == 0
        assert "pool=7, test=3" in capsys.readouterr().out


class TestDiagnoseCommand:
    """diagnose / eval 명령 테스트"""

    def test_diagnose(self, tmp_path, checkpoint, eval_corpus, small_params):
        """5개 패널, 5개 배율 파일, 하나의 diagnostics.yaml"""
        out = tmp_path / "diag"
        code = main([
            "diagnose", "--checkpoint", str(checkpoint), "--data", str(eval_corpus),
            "--bins", "10", "--out", str(out),
        ])
        assert code == 0
        assert len(list((out / "panels").glob("*.png"))) == 5
        assert len(list((out / "panels").glob("*.scale.txt"))) == 5

        document = yaml.safe_load((out / "diagnostics.yaml").read_text())
        pairs = read_manifest(eval_corpus).select("test").load_pairs()
        expected = uncertainty_diagnostics(small_params, pairs, bins=10)
        assert document["n_samples"] == 5
        assert document["rank_correlation"] == pytest.approx(expected.rank_correlation, abs=1e-6)
        assert sum(document["histogram"]["counts"]) == 5
        assert "shift" not in document

    def test_diagnose_panel_layout(self, tmp_path, checkpoint, eval_corpus):
        """패널은 5열 (LR, HR, 평균, 분산, 오차)"""
        out = tmp_path / "diag"
        assert main([
            "diagnose", "--checkpoint", str(checkpoint), "--data", str(eval_corpus), "--out", str(out),
        ]) == 0
        panel = load_image(next((out / "panels").glob("*.png")))
        assert panel.shape == (32, 5 * 32, 3)
        scale = next((out / "panels").glob("*.scale.txt")).read_text()
        assert scale.startswith("columns = lr, hr, mean, variance, error")

    def test_diagnose_with_reference(self, tmp_path, checkpoint, eval_corpus, sim_dataset):
        """--reference는 shift 블록 추가"""
        out = tmp_path / "diag"
        code = main([
            "diagnose", "--checkpoint", str(checkpoint), "--data", str(eval_corpus),
            "--reference", str(sim_dataset), "--out", str(out),
        ])
        assert code == 0
        shift = yaml.safe_load((out / "diagnostics.yaml").read_text())["shift"]
        assert shift["reference"].endswith(":train")
        assert shift["current"] == "gradients:test"
        assert shift["level"] in {"none", "low", "medium", "high", "critical"}
        assert 0.0 <= shift["p_value"] <= 1.0

    def test_missing_checkpoint(self, tmp_path, eval_corpus):
        """체크포인트 없음 → 종료 코드 3"""
        code = main([
            "diagnose", "--checkpoint", str(tmp_path / "nope.udc"), "--data", str(eval_corpus),
            "--out", str(tmp_path / "diag"),
        ])
        assert code == 3

    def test_eval(self, tmp_path, checkpoint, eval_corpus, capsys):
        """eval은 JSON 리포트 저장"""
        out = tmp_path / "eval.json"
        code = main(["eval", "--checkpoint", str(checkpoint), "--data", str(eval_corpus), "--out", str(out)])
        assert code == 0
        report = yaml.safe_load(out.read_text())
        assert report["n_samples"] == 5
        assert "psnr=" in capsys.readouterr().out

    def test_eval_missing_split(self, tmp_path, checkpoint, eval_corpus):
        """없는 split → 종료 코드 3"""
        code = main(["eval", "--checkpoint", str(checkpoint), "--data", str(eval_corpus), "--split", "train"])
        assert code == 3


class TestActiveLearningCommands:
    """pretrain → score → select → finetune 명령 연결 테스트"""

    TRAIN_ARGS = ["--width", "8", "--depth", "2", "--epochs", "1", "--batch-size", "8"]

    @pytest.fixture
    def pretrained(self, tmp_path, sim_dataset):
        out = tmp_path / "pretrain"
        assert main(["pretrain", "--data", str(sim_dataset), "--out", str(out)] + self.TRAIN_ARGS) == 0
        return out / "pretrain.udc"

    def test_pretrain_writes_checkpoint(self, pretrained):
        """pretrain.udc 생성"""
        assert pretrained.exists()
        assert pretrained.stat().st_size > 0

    def test_score_select_finetune(self, tmp_path, pretrained, domain_corpus, capsys):
        """점수 상위 K개를 선택하고 그 subset으로 미세조정"""
        scores_path = tmp_path / "scores.csv"
        assert main([
            "score", "--checkpoint", str(pretrained), "--pool", str(domain_corpus),
            "--out", str(scores_path),
        ]) == 0
        scores = pd.read_csv(scores_path, dtype={"id": str})
        assert list(scores.columns) == ["id", "score"]
        assert len(scores) == 16
        assert (scores["score"] > 0).all()

        selection_path = tmp_path / "selection.txt"
        assert main([
            "select", "--pool", str(domain_corpus), "--k", "4", "--scores", str(scores_path),
            "--out", str(selection_path),
        ]) == 0
        selection = read_selection(selection_path)
        expected = scores.sort_values(["score", "id"], ascending=[False, True])["id"].head(4)
        assert selection.ids == list(expected)
        assert selection.strategy == "uncertainty_topk"

        out = tmp_path / "finetune"
        assert main([
            "finetune", "--checkpoint", str(pretrained), "--pool", str(domain_corpus),
            "--selection", str(selection_path), "--epochs", "1", "--batch-size", "4",
            "--out", str(out),
        ]) == 0
        assert (out / "finetune.udc").exists()
        assert "fine-tuned on 4 pairs" in capsys.readouterr().out

    def test_select_random(self, tmp_path, domain_corpus):
        """random 전략은 점수 없이 K개 선택, 같은 seed면 같은 결과"""
        paths = [tmp_path / "a.txt", tmp_path / "b.txt"]
        for path in paths:
            assert main([
                "select", "--pool", str(domain_corpus), "--k", "5", "--strategy", "random",
                "--seed", "3", "--out", str(path),
            ]) == 0
        first, second = (read_selection(p) for p in paths)
        assert first.k == 5
        assert first.ids == second.ids

    def test_select_topk_needs_scores(self, tmp_path, domain_corpus):
        """uncertainty_topk에 --scores 없음 → 종료 코드 2"""
        code = main([
            "select", "--pool", str(domain_corpus), "--k", "4", "--out", str(tmp_path / "s.txt"),
        ])
        assert code == 2

    def test_select_budget_exceeds_pool(self, tmp_path, domain_corpus):
        """K > N → 종료 코드 2"""
        code = main([
            "select", "--pool", str(domain_corpus), "--k", "17", "--strategy", "random",
            "--out", str(tmp_path / "s.txt"),
        ])
        assert code == 2


class TestExperimentConfig:
    """flat 설정 파일 테스트"""

    def test_parse_flat_config(self):
        """dotted key → 중첩 dict, 값은 YAML 스칼라"""
        text = (
            "# desk experiment\n"
            "paths.sim = data/sim/manifest.csv\n"
            "paths.domain = data/textures/manifest.csv\n"
            "budgets = [25, 50]   # ascending\n"
            "pretrain.lr = 0.001\n"
            "\n"
            "arms = [sim, usim_dal]\n"
        )
        nested = parse_flat_config(text)
        assert nested["paths"] == {"sim": "data/sim/manifest.csv", "domain": "data/textures/manifest.csv"}
        assert nested["budgets"] == [25, 50]
        assert nested["pretrain"] == {"lr": 0.001}
        assert flatten_config(nested)["pretrain.lr"] == 0.001

        cfg = ExperimentConfig.model_validate(nested)
        assert [a.value for a in cfg.arms] == ["sim", "usim_dal"]
        assert cfg.seeds == [0, 1, 2, 3, 4]

    def test_resolved_config_round_trip(self):
        """format_flat_config 출력은 같은 설정으로 다시 파싱됨"""
        cfg = ExperimentConfig.model_validate({
            "paths": {"sim": "a/manifest.csv", "domain": "b/manifest.csv"},
            "arms": ["sim", "usim_dal"],
            "budgets": [5, 10],
            "pretrain": {"lr": 0.002, "epochs": 3},
            "metrics": ["psnr"],
        })
        text = format_flat_config(cfg.model_dump(mode="json"))
        assert "pretrain.lr = 0.002\n" in text
        assert 'arms = ["sim", "usim_dal"]\n' in text
        assert ExperimentConfig.model_validate(parse_flat_config(text)) == cfg

    @pytest.mark.parametrize("text,message", [
        ("budgets [25]", "expected 'key = value'"),
        ("rounds = 1\nrounds = 2", "duplicate key"),
        ("pretrain = 1\npretrain.lr = 0.1", "both a value and a section"),
        ("pretrain.lr = 0.1\npretrain = 1", "both a value and a section"),
        ("budgets = [25", "cannot parse"),
    ])
    def test_parse_errors(self, text, message):
        """구문 오류는 줄 번호와 함께 ConfigError"""
        with pytest.raises(ConfigError, match=message):
            parse_flat_config(text, source="bad.cfg")

    def test_load_validation(self, tmp_path):
        """검증 실패는 ConfigError, 없는 파일은 DataIOError"""
        path = tmp_path / "bad.cfg"
        path.write_text("paths.sim = a\npaths.domain = b\nbudgets = [50, 25]\n")
        with pytest.raises(ConfigError, match="ascending"):
            load_experiment_config(path)
        with pytest.raises(DataIOError):
            load_experiment_config(tmp_path / "missing.cfg")

    def test_pool_size_check(self):
        """가장 큰 예산이 pool보다 크면 오류"""
        cfg = ExperimentConfig.model_validate({"paths": {"sim": "a", "domain": "b"}, "budgets": [5, 20]})
        cfg.check_pool_size(20)
        with pytest.raises(ConfigError, match="exceeds"):
            cfg.check_pool_size(19)

    def test_plan_cells(self, tmp_path):
        """SIM은 seed당 한 번, 나머지는 예산마다, 완료된 cell은 제외"""
        cfg = ExperimentConfig.model_validate({
            "paths": {"sim": "a", "domain": "b"},
            "arms": ["sim", "sim_random", "usim_dal"],
            "budgets": [2, 4],
            "seeds": [0, 1],
        })
        cells = plan_cells(cfg, tmp_path, done=set())
        assert len(cells) == 2 * (1 + 2 + 2)
        sim_cells = [c for c in cells if c.config.arm.value == "sim"]
        assert all(c.budgets == [2, 4] for c in sim_cells)

        done = {("sim", 2, 0), ("sim", 4, 0), ("usim_dal", 2, 0)}
        remaining = plan_cells(cfg, tmp_path, done=done)
        assert len(remaining) == len(cells) - 2
        keys = {(c.config.arm.value, tuple(c.budgets), c.config.seed) for c in remaining}
        assert ("usim_dal", (4,), 0) in keys
        assert ("sim", (2, 4), 1) in keys


class TestReport:
    """결과 CSV와 요약표 테스트"""

    def test_append_and_resume_keys(self, tmp_path):
        """헤더는 한 번, 완료 cell 집합"""
        path = tmp_path / "results.csv"
        append_result(path, _row("sim", 2, 0, 24.0))
        append_result(path, _row("usim_dal", 2, 0, 25.0))
        assert path.read_text().count("dataset,arm") == 1
        assert list(read_results(path).columns) == RESULT_COLUMNS
        assert completed_cells(path) == {("sim", 2, 0), ("usim_dal", 2, 0)}
        assert completed_cells(tmp_path / "none.csv") == set()

    def test_summarize(self):
        """seed 평균/표준편차와 USIM-DAL 행의 pboost"""
        rows = [
            _row("sim", 2, 0, 24.8), _row("sim", 2, 1, 24.81),
            _row("sim_random", 2, 0, 25.0), _row("sim_random", 2, 1, 25.014),
            _row("usim_dal", 2, 0, 25.17), _row("usim_dal", 2, 1, 25.178),
            _row("random", 2, 0, 20.0),
        ]
        summary = summarize(pd.DataFrame(rows, columns=RESULT_COLUMNS))
        by_arm = {row.arm: row for row in summary.itertuples()}

        assert by_arm["sim"].n_seeds == 2
        assert by_arm["sim"].psnr_mean == pytest.approx(24.805)
        assert by_arm["sim"].psnr_std == pytest.approx(np.std([24.8, 24.81], ddof=1))
        assert by_arm["random"].psnr_std == 0.0
        assert by_arm["usim_dal"].pboost == pytest.approx(pboost(25.174, 25.007, 24.805))
        assert np.isnan(by_arm["sim"].pboost)
        assert np.isnan(by_arm["random"].pboost)

    def test_summarize_undefined_pboost(self):
        """SIM+Random == SIM이면 pboost는 NaN"""
        rows = [_row("sim", 2, 0, 24.0), _row("sim_random", 2, 0, 24.0), _row("usim_dal", 2, 0, 25.0)]
        summary = summarize(pd.DataFrame(rows, columns=RESULT_COLUMNS))
        assert summary["pboost"].isna().all()

    def test_summarize_empty(self):
        """빈 결과"""
        assert summarize(pd.DataFrame(columns=RESULT_COLUMNS)).empty

    def test_summarize_metric_subset(self):
        """선택한 지표만 요약, pboost는 PSNR로 계산"""
        rows = [_row("sim", 2, 0, 24.0), _row("sim_random", 2, 0, 25.0), _row("usim_dal", 2, 0, 25.5)]
        summary = summarize(pd.DataFrame(rows, columns=RESULT_COLUMNS), metrics=["ssim"])
        assert list(summary.columns) == ["dataset", "arm", "budget", "n_seeds", "ssim_mean", "ssim_std", "pboost"]
        usim = summary[summary["arm"] == "usim_dal"].iloc[0]
        assert usim["pboost"] == pytest.approx(pboost(25.5, 25.0, 24.0))
        assert list(summarize(pd.DataFrame(columns=RESULT_COLUMNS), metrics=["ssim"]).columns) == \
            summary_columns(["ssim"])
        with pytest.raises(ValueError, match="Unknown metrics"):
            summary_columns(["lpips"])


def _sweep(psnr_by_arm, budgets=(25, 50, 100), seeds=range(5)):
    """arm → (budget, seed) → PSNR 함수로 결과 프레임 구성"""
    rows = [
        _row(arm, budget, seed, fn(budget, seed))
        for arm, fn in psnr_by_arm.items() for budget in budgets for seed in seeds
    ]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


class TestOrderingCheck:
    """arm 간 PSNR 순서 점검 테스트"""

    def test_expected_ordering(self):
        """Random < SIM < SIM+Random < USIM-DAL → 모두 통과"""
        results = _sweep({
            "random": lambda b, s: 20.0,
            "sim": lambda b, s: 24.0 + 0.01 * s,
            "sim_random": lambda b, s: 24.5 + 0.01 * s,
            "usim_dal": lambda b, s: 24.6 + 0.01 * s,
        })
        check = check_ordering(results)
        assert check.hard_ok and check.margin_ok
        assert check.findings == []
        assert [b.budget for b in check.budgets] == [25, 50, 100]
        assert all(b.finetune_wins == 5 and b.usim_highest for b in check.budgets)
        assert check.to_dict()["dataset"] == "mosaics"

    def test_margin_failure_is_a_finding(self):
        """USIM-DAL이 margin보다 낮으면 hard는 유지, margin만 실패"""
        results = _sweep({
            "sim": lambda b, s: 24.0,
            "sim_random": lambda b, s: 24.5,
            "usim_dal": lambda b, s: 24.4,
        })
        check = check_ordering(results)
        assert check.hard_ok
        assert not check.margin_ok
        assert all(b.usim_within_margin == 0 for b in check.budgets)
        assert all(b.sim_beats_random is None for b in check.budgets)
        assert any("highest mean PSNR in 0/3" in f for f in check.findings)

    def test_within_margin_counts(self):
        """margin 안의 차이는 통과"""
        results = _sweep({
            "sim": lambda b, s: 24.0,
            "sim_random": lambda b, s: 24.5,
            "usim_dal": lambda b, s: 24.5 if s else 24.47,
        })
        check = check_ordering(results)
        assert all(b.usim_within_margin == 5 for b in check.budgets)

    def test_seed_quorum(self):
        """5 seed 중 4개 성립이면 통과, 3개면 hard 실패"""
        four = _sweep({
            "sim": lambda b, s: 24.0,
            "sim_random": lambda b, s: 23.0 if s == 0 else 25.0,
            "usim_dal": lambda b, s: 25.1,
        })
        assert check_ordering(four).hard_ok
        three = _sweep({
            "sim": lambda b, s: 24.0,
            "sim_random": lambda b, s: 23.0 if s < 2 else 25.0,
            "usim_dal": lambda b, s: 25.1,
        })
        check = check_ordering(three)
        assert not check.hard_ok
        assert "SIM+Random beat SIM in 3/5 seeds" in check.findings[0]

    def test_sim_below_random_fails(self):
        """SIM 평균이 Random 이하 → hard 실패"""
        results = _sweep({
            "random": lambda b, s: 26.0,
            "sim": lambda b, s: 24.0,
            "sim_random": lambda b, s: 24.5,
            "usim_dal": lambda b, s: 24.6,
        })
        check = check_ordering(results)
        assert not check.hard_ok
        assert all(b.sim_beats_random is False for b in check.budgets)

    def test_needs_arms(self):
        """SIM/SIM+Random/USIM-DAL 중 하나라도 없으면 ValueError"""
        results = _sweep({"sim": lambda b, s: 24.0, "usim_dal": lambda b, s: 25.0})
        with pytest.raises(ValueError, match="sim_random"):
            check_ordering(results)


class TestExperimentCommand:
    """experiment 명령 테스트"""

    @pytest.fixture
    def config_path(self, tmp_path, sim_dataset, domain_corpus):
        """작은 3-arm 설정"""
        path = tmp_path / "desk.cfg"
        path.write_text(
            f"paths.sim = {sim_dataset}\n"
            f"paths.domain = {domain_corpus}\n"
            f"paths.out = {tmp_path / 'run'}\n"
            "arms = [sim, sim_random, usim_dal]\n"
            "budgets = [2, 4]\n"
            "seeds = [0]\n"
            "width = 8\n"
            "depth = 2\n"
            "pretrain.epochs = 1\n"
            "pretrain.batch_size = 8\n"
            "finetune.epochs = 1\n"
            "finetune.batch_size = 4\n"
        )
        return path

    def test_experiment_and_resume(self, tmp_path, config_path):
        """결과 6행, SIM 행 재사용, resume은 행을 중복하지 않음"""
        assert main(["experiment", "--config", str(config_path)]) == 0
        run = tmp_path / "run"
        results = read_results(run / "results.csv")
        assert len(results) == 6
        assert set(results["arm"]) == {"sim", "sim_random", "usim_dal"}
        assert (results["dataset"] == "mosaics").all()

        sim = results[results["arm"] == "sim"].sort_values("budget")
        assert list(sim["budget"]) == [2, 4]
        assert sim["psnr"].nunique() == 1

        summary = pd.read_csv(run / "summary.csv")
        assert len(summary) == 6
        usim = summary[summary["arm"] == "usim_dal"]
        assert len(usim) == 2
        assert summary[summary["arm"] != "usim_dal"]["pboost"].isna().all()

        ordering = yaml.safe_load((run / "ordering.yaml").read_text())
        assert [b["budget"] for b in ordering["budgets"]] == [2, 4]
        assert all(b["n_seeds"] == 1 for b in ordering["budgets"])

        before = (run / "results.csv").read_bytes()
        assert main(["experiment", "--config", str(config_path), "--resume"]) == 0
        assert (run / "results.csv").read_bytes() == before

    def test_experiment_budget_exceeds_pool(self, tmp_path, config_path):
        """예산 > pool → 종료 코드 2"""
        text = config_path.read_text().replace("budgets = [2, 4]", "budgets = [2, 17]")
        config_path.write_text(text)
        assert main(["experiment", "--config", str(config_path)]) == 2

    def test_experiment_needs_config(self):
        """--config 없음 → 종료 코드 2"""
        assert main(["experiment"]) == 2

    def test_rerun_is_byte_identical(self, tmp_path, config_path):
        """처음부터 두 번 실행 → 결과 CSV와 모든 체크포인트가 바이트 단위로 같음"""
        for name in ("a", "b"):
            assert main(["experiment", "--config", str(config_path), "--out", str(tmp_path / name)]) == 0

        first, second = _tree_bytes(tmp_path / "a"), _tree_bytes(tmp_path / "b")
        checkpoints = [name for name in first if name.endswith(".udc")]
        assert "pretrain/seed_0/pretrain.udc" in checkpoints
        assert len([name for name in checkpoints if name.endswith("final.udc")]) == 5
        for name in checkpoints + ["results.csv", "summary.csv"]:
            assert first[name] == second[name], name

    def test_changed_pretrain_settings_retrain(self, tmp_path, config_path):
        """같은 out에 pretrain 설정만 바꿔 재실행 → 새 설정으로 처음부터 실행한 결과와 같음"""
        run = tmp_path / "run"
        assert main(["experiment", "--config", str(config_path)]) == 0
        stale = (run / "pretrain" / "seed_0" / "pretrain.udc").read_bytes()

        config_path.write_text(config_path.read_text().replace("pretrain.epochs = 1", "pretrain.epochs = 2"))
        assert main(["experiment", "--config", str(config_path)]) == 0
        assert (run / "pretrain" / "seed_0" / "pretrain.udc").read_bytes() != stale

        fresh = tmp_path / "fresh"
        assert main(["experiment", "--config", str(config_path), "--out", str(fresh)]) == 0
        assert (run / "results.csv").read_bytes() == (fresh / "results.csv").read_bytes()
        assert (run / "pretrain" / "seed_0" / "pretrain.udc").read_bytes() == \
            (fresh / "pretrain" / "seed_0" / "pretrain.udc").read_bytes()

    def test_resume_with_changed_config(self, tmp_path, config_path):
        """설정이 바뀐 뒤 --resume → 종료 코드 2, 기존 결과 유지"""
        assert main(["experiment", "--config", str(config_path)]) == 0
        results = tmp_path / "run" / "results.csv"
        before = results.read_bytes()
        config_path.write_text(config_path.read_text().replace("finetune.epochs = 1", "finetune.epochs = 2"))
        assert main(["experiment", "--config", str(config_path), "--resume"]) == 2
        assert results.read_bytes() == before

    def test_metric_subset_in_summary(self, tmp_path, config_path):
        """metrics 설정은 요약표 열을 정하고 결과 CSV는 네 지표 모두 유지"""
        config_path.write_text(config_path.read_text() + "metrics = [psnr, ssim]\n")
        assert main(["experiment", "--config", str(config_path)]) == 0
        run = tmp_path / "run"
        summary = pd.read_csv(run / "summary.csv")
        assert list(summary.columns) == summary_columns(["psnr", "ssim"])
        assert list(read_results(run / "results.csv").columns) == RESULT_COLUMNS
        resolved = (run / "experiment.resolved.cfg").read_text()
        assert 'metrics = ["psnr", "ssim"]' in resolved
