"""End-to-end: sidecar-produced files drive a full evaluation run."""

import json
import subprocess
import sys

from embedkit.jobs import EmbedJob, embed_texts

RUN_CONFIG = """\
dataset: dataset.jsonl
corpus: corpus.jsonl
seed: 0
k_grid: [2, 3]
eps_rule: {kind: knn_mean, k: 2}
"""


def test_full_evaluation_over_embedded_files(dataset_input, corpus_input, tmp_path):
    embed_texts(EmbedJob(dataset_input, "hash-32", tmp_path / "dataset.jsonl"))
    embed_texts(EmbedJob(corpus_input, "hash-32", tmp_path / "corpus.jsonl"))
    (tmp_path / "config.yaml").write_text(RUN_CONFIG, encoding="utf-8")
    out_dir = tmp_path / "report"
    proc = subprocess.run(
        [
            sys.executable, "-m", "faithbench", "evaluate",
            "--config", str(tmp_path / "config.yaml"), "--out", str(out_dir),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    bundle = json.loads((out_dir / "report.json").read_text())
    assert bundle["validation"]["n_instances"] == 6
    assert bundle["robustness"]["sample_size"] == 6
    assert len(bundle["robustness"]["shift_points"]) == 6
    assert (out_dir / "robustness_shift.csv").exists()
