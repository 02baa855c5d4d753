import numpy as np
import pytest

from seqeval.core import (
    Cache,
    EvaluationConfigError,
    PropertyColumn,
    PropertyTable,
    SequenceSet,
    evaluate,
)
from seqeval.metrics import (
    METRIC_NAMES,
    authenticity_metric,
    diversity_metric,
    fbd_metric,
    hit_rate_metric,
    hypervolume_metric,
    identity_metric,
    kl_metric,
    metric_from_entry,
    mmd_metric,
    novelty_metric,
    precision_metric,
    recall_metric,
    threshold_metric,
    uniqueness_metric,
    vendi_metric,
)
from seqeval.representations import KmerSpec, Representations, kmer_embedder


def length_embedder(batch):
    return np.array([[float(len(s)), float(len(set(s)))] for s in batch])


class TestSequenceBuilders:
    def test_novelty_against_reference(self):
        ref = SequenceSet("ref", ["AA", "BB"])
        table = evaluate({"g": ["AA", "CC"]}, [novelty_metric(ref)])
        assert table.cell("g", "Novelty").value == 0.5

    def test_uniqueness(self):
        table = evaluate({"g": ["AA", "AA", "BB"]}, [uniqueness_metric()])
        assert table.cell("g", "Uniqueness").value == pytest.approx(2 / 3)

    def test_diversity_carries_parameters(self):
        spec = diversity_metric()
        assert spec.parameters["k"] == "exact"
        table = evaluate({"g": ["AB", "CD"]}, [spec])
        assert table.cell("g", "Diversity").value == 1.0


class TestEmbeddingBuilders:
    def test_fbd_with_direct_embedder(self):
        ref = SequenceSet("ref", ["AA", "BBBB"])
        spec = fbd_metric(ref, embedder=length_embedder)
        table = evaluate({"same": ["AA", "BBBB"]}, [spec])
        assert table.cell("same", "FBD").value == pytest.approx(0.0, abs=1e-9)

    def test_fbd_with_registered_representation(self):
        reps = Representations(cache=Cache())
        reps.register_embedder("emb", length_embedder)
        ref = SequenceSet("ref", ["AA", "BBBB"])
        spec = fbd_metric(ref, embedding="emb")
        assert spec.required_representations == ("emb",)
        table = evaluate({"g": ["A", "CCC"]}, [spec], representations=reps)
        assert table.cell("g", "FBD").ok

    def test_embedding_and_embedder_together_rejected(self):
        with pytest.raises(EvaluationConfigError):
            fbd_metric(SequenceSet("r", ["A"]), embedding="emb", embedder=length_embedder)

    def test_neither_source_rejected(self):
        with pytest.raises(EvaluationConfigError):
            mmd_metric(SequenceSet("r", ["A"]))

    def test_precision_recall_duality_through_builders(self):
        gen = ["A", "BB", "CCC", "DDDD"]
        ref = SequenceSet("ref", ["AA", "BBB", "C"])
        p = precision_metric(ref, k=1, embedder=length_embedder)
        r = recall_metric(ref, k=1, embedder=length_embedder)
        table = evaluate({"g": gen}, [p, r])
        swapped = evaluate(
            {"g": ["AA", "BBB", "C"]},
            [precision_metric(SequenceSet("ref", gen), k=1, embedder=length_embedder)],
        )
        assert table.cell("g", "Recall").value == swapped.cell("g", "Precision").value

    def test_authenticity_and_vendi_run(self):
        ref = SequenceSet("ref", ["AA", "BBBB", "CCCCCC"])
        specs = [
            authenticity_metric(ref, embedder=length_embedder),
            vendi_metric(embedder=length_embedder, name="Vendi"),
        ]
        table = evaluate({"g": ["A", "BBB", "CCCCC"]}, specs)
        assert table.cell("g", "Authenticity").ok
        assert 1.0 <= table.cell("g", "Vendi").value <= 3.0

    def test_missing_representation_is_cell_error(self):
        ref = SequenceSet("ref", ["AA"])
        spec = fbd_metric(ref, embedding="emb")
        table = evaluate({"g": ["A"]}, [spec], representations=Representations())
        err = table.cell("g", "FBD").error
        assert err is not None and "emb" in err


def _props_resolver(values_by_group):
    reps = Representations()
    for gname, cols in values_by_group.items():
        reps.register_data("props", gname, PropertyTable(cols))
    return reps


class TestPropertyBuilders:
    def test_identity_reports_mean_and_spread(self):
        reps = _props_resolver(
            {"g": [PropertyColumn("score", "real", np.array([1.0, 2.0, 3.0, 4.0]))]}
        )
        spec = identity_metric("props", "score", name="Score")
        table = evaluate({"g": ["A", "B", "C", "D"]}, [spec], representations=reps)
        cell = table.cell("g", "Score")
        assert cell.value == 2.5
        assert cell.deviation == pytest.approx(np.sqrt(1.25))
        assert spec.arity == "mean-and-deviation"

    def test_threshold_strictness(self):
        reps = _props_resolver({"g": [PropertyColumn("score", "real", np.array([1.0, 2.0, 3.0]))]})
        spec = threshold_metric("props", "score", tau=2.0)
        table = evaluate({"g": ["A", "B", "C"]}, [spec], representations=reps)
        assert table.cell("g", "Threshold").value == pytest.approx(1 / 3)

    def test_hit_rate(self):
        reps = _props_resolver({"g": [PropertyColumn("hit", "binary", np.array([1.0, 0.0, 1.0, 1.0]))]})
        table = evaluate(
            {"g": ["A", "B", "C", "D"]}, [hit_rate_metric("props", "hit")], representations=reps
        )
        assert table.cell("g", "Hit-rate").value == 0.75

    def test_hypervolume_over_two_columns(self):
        reps = _props_resolver(
            {
                "g": [
                    PropertyColumn("a", "real", np.array([2.0, 1.0])),
                    PropertyColumn("b", "real", np.array([1.0, 2.0])),
                ]
            }
        )
        spec = hypervolume_metric("props", ["a", "b"])
        table = evaluate({"g": ["X", "Y"]}, [spec], representations=reps)
        assert table.cell("g", "Hypervolume").value == pytest.approx(3.0)

    def test_kl_categorical_routing(self):
        reps = Representations()
        reps.register_data(
            "props", "g", PropertyTable([PropertyColumn("fam", "categorical", ["a", "a", "b", "b"])])
        )
        reps.register_data(
            "props", "ref", PropertyTable([PropertyColumn("fam", "categorical", ["a", "b", "a", "b"])])
        )
        ref = SequenceSet("ref", ["P", "Q", "R", "S"])
        spec = kl_metric(ref, "props", "fam")
        table = evaluate({"g": ["W", "X", "Y", "Z"]}, [spec], representations=reps)
        assert table.cell("g", "KL").value == 0.0

    def test_categorical_column_rejected_for_numeric_metric(self):
        reps = _props_resolver({"g": [PropertyColumn("fam", "categorical", ["a", "b"])]})
        spec = threshold_metric("props", "fam", tau=0.5)
        table = evaluate({"g": ["A", "B"]}, [spec], representations=reps)
        assert table.cell("g", "Threshold").error is not None


class TestMetricFromEntry:
    def test_registry_is_complete(self):
        assert set(METRIC_NAMES) == {
            "novelty", "uniqueness", "diversity", "ngram", "fbd", "mmd", "precision",
            "recall", "authenticity", "vendi", "vendi-fkea", "identity", "threshold",
            "hit-rate", "hypervolume", "conformity", "kl",
        }

    def test_unknown_name(self):
        with pytest.raises(EvaluationConfigError, match=r"metrics\[0\]\.name"):
            metric_from_entry({"name": "sparkle"}, None, "metrics[0]")

    def test_reference_requirement_checked(self):
        with pytest.raises(EvaluationConfigError, match="reference"):
            metric_from_entry({"name": "novelty"}, None, "metrics[0]")

    def test_threshold_requires_tau(self):
        entry = {"name": "threshold", "representation": "props", "parameters": {"column": "s"}}
        with pytest.raises(EvaluationConfigError, match="tau"):
            metric_from_entry(entry, None, "metrics[3]")

    def test_embedding_metric_requires_representation(self):
        ref = SequenceSet("ref", ["A"])
        with pytest.raises(EvaluationConfigError, match="representation"):
            metric_from_entry({"name": "fbd"}, ref, "metrics[1]")

    def test_fold_wraps_metric(self):
        entry = {"name": "uniqueness", "fold": {"K": 2, "seed": 0}}
        spec = metric_from_entry(entry, None, "metrics[0]")
        assert spec.arity == "mean-and-deviation"
        table = evaluate({"g": ["A", "A", "B", "B"]}, [spec])
        assert len(table.cell("g", "Uniqueness").per_fold) == 2

    def test_label_override(self):
        spec = metric_from_entry({"name": "uniqueness", "label": "Distinct"}, None, "metrics[0]")
        assert spec.name == "Distinct"

    def test_direction_override(self):
        spec = metric_from_entry(
            {"name": "identity", "representation": "props",
             "parameters": {"column": "s"}, "direction": "minimize"},
            None,
            "metrics[0]",
        )
        assert spec.direction == "minimize"

    def test_seed_defaults_flow_through(self):
        entry = {"name": "diversity", "parameters": {"k": 1}}
        spec = metric_from_entry(entry, None, "metrics[0]", default_seed=42)
        assert spec.parameters["seed"] == 42
        explicit = {"name": "diversity", "parameters": {"k": 1, "seed": 7}}
        spec2 = metric_from_entry(explicit, None, "metrics[0]", default_seed=42)
        assert spec2.parameters["seed"] == 7

    def test_every_registered_name_builds_with_full_entry(self):
        ref = SequenceSet("ref", ["AA", "BB"])
        entries = {
            "novelty": {},
            "uniqueness": {},
            "diversity": {},
            "ngram": {"parameters": {"N": 2}},
            "fbd": {"representation": "emb"},
            "mmd": {"representation": "emb"},
            "precision": {"representation": "emb"},
            "recall": {"representation": "emb"},
            "authenticity": {"representation": "emb"},
            "vendi": {"representation": "emb"},
            "vendi-fkea": {"representation": "emb", "parameters": {"num_features": 8}},
            "identity": {"representation": "props", "parameters": {"column": "s"}},
            "threshold": {"representation": "props", "parameters": {"column": "s", "tau": 0.5}},
            "hit-rate": {"representation": "props", "parameters": {"column": "s"}},
            "hypervolume": {"representation": "props", "parameters": {"columns": ["s"]}},
            "conformity": {"representation": "props", "parameters": {"columns": ["s"]}},
            "kl": {"representation": "props", "parameters": {"columns": ["s"]}},
        }
        for name in METRIC_NAMES:
            entry = {"name": name, **entries[name]}
            spec = metric_from_entry(entry, ref, "metrics[0]")
            assert spec.name, name


class TestFoldSafetyOfRepresentations:
    def test_folded_embedding_metric_slices_rows(self):
        # vendi over a fold must see only that fold's embedding rows
        seen_sizes = []

        def embedder(batch):
            seen_sizes.append(len(batch))
            return np.array([[float(len(s))] for s in batch])

        reps = Representations(cache=Cache())
        reps.register_embedder("emb", embedder)
        entry = {"name": "vendi", "representation": "emb", "fold": {"K": 2, "seed": 0}}
        spec = metric_from_entry(entry, None, "metrics[0]")
        seqs = ["S" * (i + 1) for i in range(6)]
        table = evaluate({"g": seqs}, [spec], representations=reps)
        cell = table.cell("g", "Vendi")
        assert cell.ok
        assert len(cell.per_fold) == 2
        # all six sequences embedded exactly once through the shared cache
        assert sum(seen_sizes) == 6
