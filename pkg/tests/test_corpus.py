import json

import numpy as np
import pytest

from faithbench.corpus import (
    DatasetError,
    MetricConfig,
    load_corpus,
    load_dataset,
    load_instances,
    loads_corpus,
    loads_instances,
    save_corpus,
    save_dataset,
    validate_dataset,
)
from faithbench.proximity import proximity_score


def header(dim=4, labels=("negative", "positive")):
    return {"schema": "faithbench/v1", "dim": dim, "labels": list(labels)}


def jsonl(*objs) -> str:
    return "\n".join(json.dumps(o) for o in objs) + "\n"


def instance_obj(id_="x1", **overrides):
    obj = {
        "id": id_,
        "text": "the food was slow",
        "fact_label": "negative",
        "foil_label": "positive",
        "sentence_embedding": [1.0, 0.5, 0.0, 0.0],
        "counterfactuals": [
            {"text": "the food was fast", "sentence_embedding": [0.0, 1.0, 0.5, 0.0]}
        ],
    }
    obj.update(overrides)
    return obj


def corpus_obj(id_="g1", label="positive", vec=(0.0, 1.0, 0.0, 0.0)):
    return {"id": id_, "text": "great", "label": label, "sentence_embedding": list(vec)}


class TestLoading:
    def test_minimal_round_trip(self, tmp_path):
        dataset = jsonl(header(), instance_obj())
        corpus = jsonl(header(), corpus_obj(), corpus_obj("g2", "negative", (1, 0, 0, 0)))
        (tmp_path / "d.jsonl").write_text(dataset)
        (tmp_path / "c.jsonl").write_text(corpus)
        instances, gt = load_dataset(tmp_path / "d.jsonl", tmp_path / "c.jsonl")
        assert len(instances) == 1
        assert instances[0].id == "x1"
        assert instances[0].foil_label == "positive"
        assert instances[0].counterfactuals[0].label == "positive"
        assert instances[0].counterfactuals[0].tokens == ("the", "food", "was", "fast")
        assert len(gt.items) == 2
        assert gt.partition_size("positive") == 1

    def test_tokens_default_to_whitespace_split(self):
        instances, _, _ = loads_instances(jsonl(header(), instance_obj()))
        assert instances[0].original.tokens == ("the", "food", "was", "slow")

    def test_explicit_tokens_kept(self):
        obj = instance_obj(tokens=["the", "food", "was", "slow", "!"])
        with pytest.raises(DatasetError, match="token embeddings"):
            loads_instances(
                jsonl(header(), {**obj, "token_embeddings": [[1.0]] * 3})
            )
        instances, _, _ = loads_instances(jsonl(header(), obj))
        assert instances[0].original.tokens[-1] == "!"

    def test_counterfactual_label_mismatch_names_id(self):
        obj = instance_obj()
        obj["counterfactuals"][0]["label"] = "negative"
        with pytest.raises(DatasetError, match="x1#cf0"):
            loads_instances(jsonl(header(), obj))

    def test_foil_equals_fact_rejected(self):
        with pytest.raises(DatasetError, match="foil_label equals fact"):
            loads_instances(jsonl(header(), instance_obj(foil_label="negative")))

    def test_malformed_json_reports_line_number(self):
        content = json.dumps(header()) + "\n{not json}\n"
        with pytest.raises(DatasetError, match=":2:"):
            loads_instances(content)

    def test_duplicate_id_rejected(self):
        with pytest.raises(DatasetError, match="duplicate id"):
            loads_instances(jsonl(header(), instance_obj(), instance_obj()))

    def test_missing_embedding_rejected(self):
        obj = instance_obj()
        del obj["sentence_embedding"]
        with pytest.raises(DatasetError, match="missing embedding"):
            loads_instances(jsonl(header(), obj))

    def test_dimension_mismatch_rejected(self):
        obj = instance_obj(sentence_embedding=[1.0, 0.0])
        with pytest.raises(DatasetError, match="dimension 2, expected 4"):
            loads_instances(jsonl(header(), obj))

    def test_non_finite_embedding_rejected(self):
        content = jsonl(header()).rstrip("\n") + "\n" + (
            json.dumps(instance_obj()).replace("0.5", "NaN")
        )
        with pytest.raises(DatasetError, match="non-finite"):
            loads_instances(content)

    def test_zero_norm_embedding_rejected(self):
        obj = instance_obj(sentence_embedding=[0.0, 0.0, 0.0, 0.0])
        with pytest.raises(DatasetError, match="zero-norm"):
            loads_instances(jsonl(header(), obj))

    def test_boolean_embedding_entry_rejected(self):
        obj = instance_obj(sentence_embedding=[1.0, True, 0.0, 0.0])
        with pytest.raises(DatasetError, match="array of numbers"):
            loads_instances(jsonl(header(), obj))

    def test_unknown_label_rejected(self):
        with pytest.raises(DatasetError, match="not in declared label set"):
            loads_instances(jsonl(header(), instance_obj(fact_label="neutral")))

    def test_missing_header_rejected(self):
        with pytest.raises(DatasetError, match="header"):
            loads_instances(jsonl(instance_obj()))

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(DatasetError, match="no-such"):
            load_corpus(tmp_path / "no-such.jsonl")

    def test_cross_file_dimension_mismatch(self, tmp_path):
        (tmp_path / "d.jsonl").write_text(jsonl(header(dim=4), instance_obj()))
        (tmp_path / "c.jsonl").write_text(
            jsonl(header(dim=3), corpus_obj(vec=(0, 1, 0)))
        )
        with pytest.raises(DatasetError, match="dimension mismatch"):
            load_dataset(tmp_path / "d.jsonl", tmp_path / "c.jsonl")

    def test_adversarial_alignment_enforced(self):
        obj = instance_obj(
            adversarial={
                "text": "the meal was slow",
                "sentence_embedding": [1.0, 0.4, 0.0, 0.0],
                "counterfactuals": [
                    {"text": "a", "sentence_embedding": [0.0, 1.0, 0.4, 0.0]},
                    {"text": "b", "sentence_embedding": [0.0, 1.0, 0.3, 0.0]},
                ],
            }
        )
        with pytest.raises(DatasetError, match="align"):
            loads_instances(jsonl(header(), obj))

    def test_mini_dataset_loads_cleanly(self, mini_paths):
        instances, corpus = load_dataset(mini_paths["dataset"], mini_paths["corpus"])
        report = validate_dataset(instances, corpus)
        assert report.warnings == ()


class TestRoundTrip:
    def test_dataset_round_trip_identity(self, mini_paths, tmp_path):
        instances, dim, labels = load_instances(mini_paths["dataset"])
        save_dataset(instances, dim, labels, tmp_path / "copy.jsonl")
        again, dim2, labels2 = load_instances(tmp_path / "copy.jsonl")
        assert (dim, labels) == (dim2, labels2)
        assert len(instances) == len(again)
        for a, b in zip(instances, again):
            assert a.id == b.id
            assert a.original.text == b.original.text
            assert a.original.tokens == b.original.tokens
            assert np.array_equal(a.original.sentence_embedding, b.original.sentence_embedding)
            assert a.foil_label == b.foil_label
            assert len(a.counterfactuals) == len(b.counterfactuals)
            for ca, cb in zip(a.counterfactuals, b.counterfactuals):
                assert ca.id == cb.id and ca.label == cb.label
                assert np.array_equal(ca.sentence_embedding, cb.sentence_embedding)
                assert all(
                    np.array_equal(ta, tb)
                    for ta, tb in zip(ca.token_embeddings, cb.token_embeddings)
                )
            assert a.has_adversarial == b.has_adversarial
            if a.has_adversarial:
                assert np.array_equal(
                    a.adversarial_original.sentence_embedding,
                    b.adversarial_original.sentence_embedding,
                )

    def test_corpus_round_trip_identity(self, mini_paths, tmp_path):
        corpus = load_corpus(mini_paths["corpus"])
        save_corpus(corpus, tmp_path / "copy.jsonl")
        again = load_corpus(tmp_path / "copy.jsonl")
        assert corpus.labels == again.labels
        assert corpus.dimension == again.dimension
        for a, b in zip(corpus.items, again.items):
            assert (a.id, a.text, a.label, a.tokens) == (b.id, b.text, b.label, b.tokens)
            assert np.array_equal(a.sentence_embedding, b.sentence_embedding)


class TestValidation:
    def test_empty_foil_class_warning(self):
        dataset = jsonl(header(), instance_obj())
        corpus = jsonl(header(), corpus_obj("g1", "negative", (1, 0, 0, 0)))
        instances, _, _ = loads_instances(dataset)
        gt = loads_corpus(corpus)
        report = validate_dataset(instances, gt)
        assert report.empty_foil_labels == ("positive",)
        assert any("empty foil class" in w for w in report.warnings)

    def test_all_adversarial_means_no_adv_warnings(self, mini_paths):
        instances, corpus = load_dataset(mini_paths["dataset"], mini_paths["corpus"])
        report = validate_dataset(instances, corpus)
        assert report.instances_without_adversarial == ()
        assert report.n_with_adversarial == report.n_instances

    def test_counts_match_generator_manifest(self, mini_paths):
        manifest = json.loads(mini_paths["manifest"].read_text())
        instances, corpus = load_dataset(mini_paths["dataset"], mini_paths["corpus"])
        report = validate_dataset(instances, corpus)
        assert report.n_instances == manifest["n_instances"]
        assert report.n_counterfactuals == manifest["n_counterfactuals"]
        assert list(report.counterfactuals_per_instance) == (
            manifest["counterfactuals_per_instance"]
        )
        assert report.corpus_sizes == manifest["corpus_sizes"]

    def test_validation_does_not_perturb_metrics(self, mini_paths):
        instances, corpus = load_dataset(mini_paths["dataset"], mini_paths["corpus"])
        inst = instances[0]
        partition = corpus.partition(inst.foil_label)
        before = proximity_score(inst.original, inst.counterfactuals[0], partition)
        validate_dataset(instances, corpus)
        after = proximity_score(inst.original, inst.counterfactuals[0], partition)
        assert before == after  # bit-identical


class TestMetricConfig:
    def test_defaults_valid(self):
        config = MetricConfig()
        assert config.k_grid == tuple(range(2, 11))
        assert config.stability_bins == ((0.0, 0.2), (0.2, 0.4), (0.4, 0.6))

    def test_k_grid_must_increase(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            MetricConfig(k_grid=(2, 2, 3))

    def test_bins_must_not_overlap(self):
        with pytest.raises(ValueError, match="non-overlapping"):
            MetricConfig(stability_bins=((0.0, 0.3), (0.2, 0.4)))

    def test_bleu_max_n_positive(self):
        with pytest.raises(ValueError, match="bleu_max_n"):
            MetricConfig(bleu_max_n=0)
