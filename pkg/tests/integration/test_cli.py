"""Integration tests for the gvq command line"""

import json

import pytest
import yaml

from graphvq.cli import main
from graphvq.core.bench import load_report
from graphvq.core.sequence import SequenceDataset
from graphvq.core.vectors import VectorStore
from graphvq.core.vocabulary import load_vocabulary


@pytest.fixture
def pipeline(tmp_path):
    """Training set, vocabulary and sequence produced through the CLI"""
    train = tmp_path / "train.gvq"
    vocab = tmp_path / "vocab.gvc"
    seq = tmp_path / "seq"

    assert main(["gen-train", "--count", "1200", "--dim", "12", "--clusters", "6",
                 "--intrinsic-dim", "4", "--seed", "1", "--out", str(train)]) == 0
    assert main(["build-vocab", "--train", str(train), "-C", "50", "-k", "10",
                 "--max-iters", "8", "--seed", "2", "--out", str(vocab)]) == 0
    assert main(["gen-seq", "--frames", "5", "--size", "30", "--overlap", "0.5",
                 "--sigma", "0.01", "--vocab", str(vocab), "--seed", "3",
                 "--out", str(seq)]) == 0
    return {"dir": tmp_path, "train": train, "vocab": vocab, "seq": seq}


@pytest.mark.integration
class TestPipeline:
    """Test the generate, build, quantize, bench and report commands end to end"""

    def test_artifacts(self, pipeline, capsys):
        """Test each stage writes a readable artifact"""
        assert VectorStore.load(pipeline["train"]).count == 1200
        vocab = load_vocabulary(pipeline["vocab"])
        assert (vocab.size, vocab.graph.k, vocab.words.dim) == (50, 10, 12)
        dataset = SequenceDataset.load(pipeline["seq"])
        assert dataset.frame_sizes == [30] * 5

    def test_build_vocab_prints_stats(self, tmp_path, pipeline, capsys):
        """Test build-vocab reports the final k-means iteration cost"""
        capsys.readouterr()
        main(["build-vocab", "--train", str(pipeline["train"]), "-C", "20", "-k", "5",
              "--max-iters", "3", "--out", str(tmp_path / "v2.gvc")])
        stats = json.loads(capsys.readouterr().out)

        assert stats["words"] == 20
        assert stats["centroid_distance_evals"] == 20 * 19
        assert stats["final_assignment_evals"] == 1200 * 20

    @pytest.mark.parametrize("method", ["linear", "kd", "hkm", "gnns", "sgnns"])
    def test_quantize(self, pipeline, method):
        """Test quantize writes one JSON record per frame"""
        out = pipeline["dir"] / f"{method}.jsonl"
        code = main(["quantize", "--vocab", str(pipeline["vocab"]), "--features",
                     str(pipeline["seq"]), "--method", method, "--checks", "16",
                     "--out", str(out)])
        records = [json.loads(line) for line in out.read_text().splitlines()]

        assert code == 0
        assert [r["image_id"] for r in records] == [0, 1, 2, 3, 4]
        for record in records:
            assert sum(w for _, w in record["words"]) == pytest.approx(1.0)
            assert record["evals_total"] > 0

    def test_quantize_linear_cost(self, pipeline):
        """Test linear quantization costs the vocabulary size per feature"""
        out = pipeline["dir"] / "linear.jsonl"
        main(["quantize", "--vocab", str(pipeline["vocab"]), "--features",
              str(pipeline["seq"] / "frames" / "000000.gvq"), "--method", "linear",
              "--out", str(out)])
        record = json.loads(out.read_text())

        assert record["evals_per_feature"] == 50.0

    def test_bench_and_report(self, pipeline, capsys):
        """Test bench writes a report that report re-renders identically"""
        config = pipeline["dir"] / "exp.yaml"
        config.write_text(yaml.dump({
            "id": "cli-exp",
            "name": "CLI experiment",
            "vocab_path": str(pipeline["vocab"]),
            "dataset_path": str(pipeline["seq"]),
            "methods": [{"method": "linear"}, {"method": "gnns", "E": 5},
                        {"method": "sgnns", "E": 5}],
        }))
        report_path = pipeline["dir"] / "report.json"
        capsys.readouterr()

        assert main(["bench", "--config", str(config), "--out", str(report_path)]) == 0
        bench_table = capsys.readouterr().out
        report = load_report(report_path)
        assert [m.method for m in report.methods] == ["gnns", "sgnns", "linear"]
        assert "SGNNS" in bench_table

        assert main(["report", str(report_path)]) == 0
        assert capsys.readouterr().out == bench_table

    def test_sweep_csv(self, pipeline):
        """Test sweep writes the frontier as CSV"""
        config = pipeline["dir"] / "sweep.yaml"
        config.write_text(yaml.dump({
            "id": "cli-sweep",
            "name": "CLI sweep",
            "vocab_path": str(pipeline["vocab"]),
            "dataset_path": str(pipeline["seq"]),
            "methods": [{"method": "kd", "trees": 2}],
            "grids": {"kd": {"checks": [4, 16]}},
            "feature_subsets": ["all"],
        }))
        csv_path = pipeline["dir"] / "frontier.csv"

        code = main(["sweep", "--config", str(config), "--out",
                     str(pipeline["dir"] / "sweep.json"), "--csv", str(csv_path)])

        assert code == 0
        assert len(csv_path.read_text().splitlines()) == 3

    def test_calibrate(self, pipeline, capsys):
        """Test calibrate prints the chosen sigma"""
        capsys.readouterr()
        main(["calibrate", "--vocab", str(pipeline["vocab"]), "--sigmas", "0.0", "1e6",
              "--target", "0.9", "--samples", "200"])
        result = json.loads(capsys.readouterr().out)

        assert result["sigma"] == 0.0
        assert result["shared_fraction"] == 1.0


@pytest.mark.integration
class TestErrors:
    """Test error reporting and exit codes"""

    def test_missing_vocabulary(self, tmp_path, capsys):
        """Test a missing input file exits with status 2"""
        code = main(["quantize", "--vocab", str(tmp_path / "nope.gvc"), "--features",
                     str(tmp_path), "--out", str(tmp_path / "o.jsonl")])

        assert code == 2
        assert "gvq quantize: error" in capsys.readouterr().err

    def test_unknown_config(self, capsys):
        """Test an unknown config id exits with status 2"""
        assert main(["bench", "--config", "no-such-experiment"]) == 2
        assert "not found" in capsys.readouterr().err

    def test_bad_graph_degree(self, pipeline, capsys):
        """Test k >= C is reported, not raised"""
        code = main(["build-vocab", "--train", str(pipeline["train"]), "-C", "10", "-k", "10",
                     "--out", str(pipeline["dir"] / "bad.gvc")])

        assert code == 2
        assert "graph_k" in capsys.readouterr().err

    def test_missing_command(self):
        """Test argparse rejects a call without a command"""
        with pytest.raises(SystemExit):
            main([])

    def test_configs_lists_presets(self, capsys):
        """Test configs prints the preset ids"""
        assert main(["configs"]) == 0
        assert "smoke" in capsys.readouterr().out
