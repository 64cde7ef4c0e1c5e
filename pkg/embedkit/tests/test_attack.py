import json

import pytest

from embedkit.attack import perturb_text, perturb_texts, write_attack_file
from embedkit.cli import main
from embedkit.models import EmbedError, cosine_similarity, load_model


class TestPerturbText:
    def test_changes_exactly_one_token(self):
        model = load_model("hash-32")
        text = "the food at this small place was cold and bland last night"
        outcome = perturb_text(text, 0.8, model)
        assert not isinstance(outcome, str)
        adversarial, similarity = outcome
        original_tokens = text.split()
        adversarial_tokens = adversarial.split()
        assert len(original_tokens) == len(adversarial_tokens)
        assert sum(a != b for a, b in zip(original_tokens, adversarial_tokens)) == 1
        assert similarity >= 0.8

    def test_skip_reason_without_lexicon_tokens(self):
        model = load_model("hash-32")
        assert perturb_text("xyzzy quux corge", 0.5, model) == (
            "no token has a lexicon synonym"
        )

    def test_tight_floor_reports_skip(self):
        model = load_model("hash-32")
        outcome = perturb_text("cold food", 0.99, model)
        assert isinstance(outcome, str)
        assert "similarity floor" in outcome

    def test_deterministic_choice(self):
        model = load_model("hash-32")
        text = "a warm meal in a quiet spot makes the whole evening good"
        assert perturb_text(text, 0.8, model) == perturb_text(text, 0.8, model)


class TestPerturbTexts:
    def test_all_pairs_meet_floor(self, corpus_input):
        result = perturb_texts(corpus_input, 0.8, model_id="hash-32")
        assert result.pairs
        model = load_model("hash-32")
        records = {
            json.loads(ln)["id"]: json.loads(ln)["text"]
            for ln in corpus_input.read_text().splitlines()
        }
        for pair in result.pairs:
            original = model.encode(records[pair.original_id]).sentence_embedding
            adversarial = model.encode(pair.adversarial_text).sentence_embedding
            assert cosine_similarity(original, adversarial) >= 0.8
            assert pair.adversarial_text != records[pair.original_id]

    def test_high_floor_high_skip_rate_on_short_texts(self, tmp_path):
        path = tmp_path / "short.txt"
        path.write_text("cold food\nwarm meal\ngood book\n", encoding="utf-8")
        result = perturb_texts(path, 0.99, model_id="hash-32")
        assert result.skip_rate == 1.0
        assert all("similarity floor" in reason for _, reason in result.skipped)

    def test_invalid_floor_rejected(self, corpus_input):
        with pytest.raises(EmbedError, match="floor"):
            perturb_texts(corpus_input, 1.5)

    def test_output_file_shape(self, corpus_input, tmp_path):
        result = perturb_texts(corpus_input, 0.8, model_id="hash-32")
        out = tmp_path / "attacks.jsonl"
        write_attack_file(result, out)
        header, *lines = [json.loads(ln) for ln in out.read_text().splitlines()]
        assert header["schema"] == "embedkit/attack/v1"
        assert header["floor"] == 0.8
        emitted = [ln for ln in lines if "adversarial_text" in ln]
        skipped = [ln for ln in lines if "skipped" in ln]
        assert len(emitted) == len(result.pairs)
        assert len(skipped) == len(result.skipped)
        for line in emitted:
            assert set(line) == {"original_id", "adversarial_text", "similarity"}


class TestAttackCli:
    def test_attack_command(self, corpus_input, tmp_path, capsys):
        out = tmp_path / "attacks.jsonl"
        code = main([
            "attack", "--in", str(corpus_input), "--floor", "0.8",
            "--out", str(out), "--model", "hash-32",
        ])
        assert code == 0
        assert "adversarial pair(s)" in capsys.readouterr().out
        assert out.exists()
