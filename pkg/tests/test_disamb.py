"""Dataset generation, baseline scoring, selection, evaluation, correlation."""

import json
import math
import random
from collections import Counter

import pytest

from typog.collapse import build_collapse_index, build_vocab
from typog.corpus import CorpusStream
from typog.disamb import (
    DisambInstance,
    EvalReport,
    LabelAccuracy,
    ReconciliationError,
    ScoreProtocolError,
    ScoreVector,
    UndefinedCorrelationError,
    baseline_score,
    evaluate,
    freq_accuracy_correlation,
    generate_dataset,
    pearson,
    read_dataset_jsonl,
    read_scores_jsonl,
    select,
    train_cooc_model,
    write_dataset_jsonl,
    write_scores_jsonl,
)
from typog.textmodel import NormalizationPolicy
from typog.transforms import TransformSpec

POLICY = NormalizationPolicy()
CLASSIC = TransformSpec("classic")


def make_instance(masked, candidates, gold, iid="0:0:0", umbrella=""):
    cands = sorted(candidates)
    return DisambInstance(
        id=iid,
        masked_text=masked,
        candidates=cands,
        gold_index=cands.index(gold),
        umbrella=umbrella,
        source={},
    )


class TestGenerateDataset:
    def test_royal_cedar_example(self):
        sentence = "This chestnut was second to Royal Cedar at Newbury last month."
        corpus = CorpusStream.from_texts([sentence + " The cader variant also appears."])
        vocab = build_vocab(corpus, POLICY)
        index = build_collapse_index(vocab, CLASSIC)
        assert "cader" in index.groups  # umbrella is the scrambled form
        instances = list(generate_dataset(corpus, index, POLICY))
        first = instances[0]
        assert first.masked_text == (
            "This chestnut was second to Royal [MASK] at Newbury last month."
        )
        assert first.candidates == ["cader", "cedar"]
        assert first.gold == "cedar"
        assert first.umbrella == "cader"

    def test_no_collapsing_words_empty(self):
        corpus = CorpusStream.from_texts(["Nothing that collides here at all."])
        vocab = build_vocab(corpus, POLICY)
        index = build_collapse_index(vocab, CLASSIC)
        assert list(generate_dataset(corpus, index, POLICY)) == []

    def test_two_occurrences_two_instances(self):
        corpus = CorpusStream.from_texts(["I came from York. I signed the form."])
        vocab = build_vocab(corpus, POLICY)
        index = build_collapse_index(vocab, CLASSIC)
        instances = list(generate_dataset(corpus, index, POLICY))
        assert len(instances) == 2
        assert [i.gold for i in instances] == ["from", "form"]
        assert instances[0].candidates == instances[1].candidates == ["form", "from"]
        assert instances[0].id == "0:0:0" and instances[1].id == "0:1:0"

    def test_multiple_in_one_sentence_masked_one_at_a_time(self):
        corpus = CorpusStream.from_texts(["the form came from the form"])
        vocab = build_vocab(corpus, POLICY)
        index = build_collapse_index(vocab, CLASSIC)
        instances = list(generate_dataset(corpus, index, POLICY))
        assert len(instances) == 3
        assert instances[0].masked_text == "the [MASK] came from the form"
        assert instances[1].masked_text == "the form came [MASK] the form"
        assert instances[2].masked_text == "the form came from the [MASK]"
        assert [i.id for i in instances] == ["0:0:0", "0:0:1", "0:0:2"]
        for inst in instances:
            assert inst.masked_text.count("[MASK]") == 1

    def test_punctuation_kept_outside_mask(self):
        corpus = CorpusStream.from_texts(["Look from afar. I signed (the form)."])
        vocab = build_vocab(corpus, POLICY)
        index = build_collapse_index(vocab, CLASSIC)
        instances = list(generate_dataset(corpus, index, POLICY))
        assert instances[1].masked_text == "I signed (the [MASK])."

    def test_preexisting_mask_skipped(self):
        corpus = CorpusStream.from_texts(["The [MASK] came from nowhere. The form is here from today."])
        vocab = build_vocab(corpus, POLICY)
        index = build_collapse_index(vocab, CLASSIC)
        skips = []
        instances = list(generate_dataset(corpus, index, POLICY, on_skip=skips.append))
        assert len(skips) == 1
        assert all(i.masked_text.count("[MASK]") == 1 for i in instances)
        assert {i.gold for i in instances} == {"form", "from"}

    def test_deterministic_and_worker_invariant(self, small_corpus):
        corpus = CorpusStream.from_manifest(small_corpus.manifest)
        vocab = build_vocab(corpus, POLICY)
        index = build_collapse_index(vocab, CLASSIC)
        a = [i.to_json_dict() for i in generate_dataset(corpus, index, POLICY, workers=1)]
        b = [i.to_json_dict() for i in generate_dataset(corpus, index, POLICY, workers=2)]
        assert a == b
        assert len({i["id"] for i in a}) == len(a)


class TestCoocModel:
    def test_window_one_counts(self):
        model = train_cooc_model(CorpusStream.from_texts(["a b c"]), window=1)
        assert model.counts["a"] == Counter({"b": 1})
        assert model.counts["b"] == Counter({"a": 1, "c": 1})
        assert model.counts["c"] == Counter({"b": 1})
        assert model.totals == Counter({"a": 1, "b": 2, "c": 1})

    def test_empty_corpus(self):
        model = train_cooc_model(CorpusStream.from_texts([]), window=2)
        assert model.counts == {} and model.vocab_size == 0

    def test_matches_naive_nested_loop(self, small_corpus):
        corpus = CorpusStream.from_manifest(small_corpus.manifest)
        window = 3
        model = train_cooc_model(corpus, window=window)
        naive = {}
        for ref in corpus.iter_sentences():
            words = []
            for chunk in ref.text.split():
                core = chunk.strip('.,!?()"\'')
                if core and core.isalpha():
                    words.append(core.lower())
            for i, w in enumerate(words):
                for j in range(len(words)):
                    if j != i and abs(j - i) <= window:
                        naive.setdefault(w, Counter())[words[j]] += 1
        assert model.counts == naive
        for w, ctx in model.counts.items():
            assert model.totals[w] == sum(ctx.values())

    def test_bad_params(self):
        with pytest.raises(ValueError):
            train_cooc_model(CorpusStream.from_texts([]), window=0)
        with pytest.raises(ValueError):
            train_cooc_model(CorpusStream.from_texts([]), window=1, alpha=0)


class TestBaselineScore:
    def _model(self):
        return train_cooc_model(
            CorpusStream.from_texts(["i am from york .", "sign the form now ."]), window=5
        )

    def test_hand_evaluated_formula(self):
        model = self._model()
        inst = make_instance("i am [MASK] york", ["form", "from"], "from")
        sv = baseline_score(inst, model, POLICY)
        # context {i, am, york}; V = 8; totals(c) = 3 for both candidates
        expected_from = 3 * math.log((1 + 1) / (3 + 8))
        expected_form = 3 * math.log((0 + 1) / (3 + 8))
        assert math.isclose(sv.scores[inst.candidates.index("from")], expected_from, rel_tol=1e-12)
        assert math.isclose(sv.scores[inst.candidates.index("form")], expected_form, rel_tol=1e-12)
        assert select(sv, inst.candidates) == "from"

    def test_no_context_in_vocab_scores_uniform(self):
        model = self._model()
        inst = make_instance("zzz qqq [MASK] qqq", ["form", "from"], "from")
        sv = baseline_score(inst, model, POLICY)
        assert sv.scores[0] == sv.scores[1]

    def test_unseen_candidate_smoothed_not_error(self):
        model = self._model()
        inst = make_instance("i am [MASK] york", ["brandnew", "from"], "from")
        sv = baseline_score(inst, model, POLICY)
        assert all(math.isfinite(s) for s in sv.scores)
        assert select(sv, inst.candidates) == "from"


class TestSelect:
    def test_argmax(self):
        sv = ScoreVector("x", [0.2, 0.9])
        assert select(sv, ["cader", "cedar"]) == "cedar"

    def test_tie_breaks_lexicographic(self):
        sv = ScoreVector("x", [1.5, 1.5])
        assert select(sv, ["from", "form"]) == "form"

    def test_monotone_rescaling_invariance(self):
        rng = random.Random(31)
        cands = ["alpha", "beta", "gamma", "delta"]
        for _ in range(300):
            scores = [rng.uniform(-5, 5) for _ in cands]
            base = select(ScoreVector("x", scores), cands)
            scale = rng.uniform(0.1, 4.0)
            shift = rng.uniform(-10, 10)
            rescaled = [math.tanh(s / 10) * scale + shift for s in scores]
            assert select(ScoreVector("x", rescaled), cands) == base

    def test_non_finite_rejected_with_id(self):
        with pytest.raises(ScoreProtocolError, match="bad-id"):
            select(ScoreVector("bad-id", [0.1, float("nan")]), ["a", "b"])

    def test_length_mismatch(self):
        with pytest.raises(ScoreProtocolError):
            select(ScoreVector("x", [0.1]), ["a", "b"])


class TestEvaluate:
    def _dataset(self, n=10):
        insts, scores = [], []
        for i in range(n):
            gold = "form" if i % 2 == 0 else "from"
            inst = make_instance(f"word {i} [MASK] here", ["form", "from"], gold, iid=f"0:{i}:0")
            s = [0.0, 0.0]
            s[inst.gold_index] = 1.0
            insts.append(inst)
            scores.append(ScoreVector(inst.id, s))
        return insts, scores

    def test_all_correct(self):
        insts, scores = self._dataset()
        report = evaluate(insts, scores)
        assert report.accuracy == 1.0
        assert report.n_instances == 10
        assert report.per_label["form"].n == 5 and report.per_label["form"].accuracy == 1.0
        assert sum(la.n for la in report.per_label.values()) == report.n_instances

    def test_out_of_order_scores_fine(self):
        insts, scores = self._dataset()
        report = evaluate(insts, list(reversed(scores)))
        assert report.accuracy == 1.0

    def test_missing_and_extra_ids(self):
        insts, scores = self._dataset()
        with pytest.raises(ReconciliationError) as exc:
            evaluate(insts, scores[:-1])
        assert exc.value.missing == [insts[-1].id]
        with pytest.raises(ReconciliationError) as exc:
            evaluate(insts[:-1], scores)
        assert exc.value.extra == [insts[-1].id]

    def test_mixed_accuracy_per_label(self):
        insts, scores = self._dataset()
        # flip two "form" predictions
        for i in (0, 2):
            scores[i] = ScoreVector(insts[i].id, [0.0, 1.0])
        report = evaluate(insts, scores)
        assert report.per_label["form"].correct == 3
        assert math.isclose(report.per_label["form"].accuracy, 0.6)
        assert math.isclose(report.accuracy, 0.8)


class TestCorrelation:
    def _report(self, label_stats):
        per_label = {
            w: LabelAccuracy(n=100, correct=int(round(acc * 100))) for w, acc in label_stats
        }
        n = sum(la.n for la in per_label.values())
        return EvalReport(n_instances=n, accuracy=0.5, per_label=per_label)

    def test_perfect_correlation(self):
        report = self._report([("a", 0.01), ("b", 0.02), ("c", 0.03)])
        vocab = {"a": 1, "b": 2, "c": 3}
        assert math.isclose(freq_accuracy_correlation(report, vocab), 1.0, abs_tol=1e-12)

    def test_zero_variance_undefined(self):
        report = self._report([("a", 0.5), ("b", 0.5), ("c", 0.5)])
        with pytest.raises(UndefinedCorrelationError):
            freq_accuracy_correlation(report, {"a": 1, "b": 2, "c": 3})

    def test_closed_form_half(self):
        report = self._report([("a", 0.02), ("b", 0.01), ("c", 0.03)])
        vocab = {"a": 1, "b": 2, "c": 3}
        assert math.isclose(freq_accuracy_correlation(report, vocab), 0.5, abs_tol=1e-12)

    def test_pearson_matches_closed_form(self):
        assert math.isclose(pearson([1, 2, 3], [1, 2, 3]), 1.0, abs_tol=1e-12)
        assert math.isclose(pearson([1, 2, 3], [2, 1, 3]), 0.5, abs_tol=1e-12)

    def test_too_few_points(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1], [1])


class TestJsonlContract:
    def test_dataset_roundtrip(self, tmp_path):
        corpus = CorpusStream.from_texts(["I came from York. I signed the form."])
        vocab = build_vocab(corpus, POLICY)
        index = build_collapse_index(vocab, CLASSIC)
        instances = list(generate_dataset(corpus, index, POLICY))
        path = tmp_path / "dataset.jsonl"
        write_dataset_jsonl(instances, path)
        loaded = list(read_dataset_jsonl(path))
        assert [i.to_json_dict() for i in loaded] == [i.to_json_dict() for i in instances]
        fields = set(json.loads(path.read_text().splitlines()[0]))
        assert fields == {"id", "masked_text", "candidates", "gold_index", "umbrella", "source"}

    def test_scores_roundtrip(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        svs = [ScoreVector("0:0:0", [0.25, -1.5]), ScoreVector("0:1:0", [3.0, 4.0])]
        write_scores_jsonl(svs, path, meta={"scorer": "test"})
        loaded = list(read_scores_jsonl(path))
        assert [(s.id, s.scores) for s in loaded] == [(s.id, s.scores) for s in svs]

    def test_schema_errors_name_lines(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "scores": [1.0]}\n{"id": "b"}\n', encoding="utf-8")
        with pytest.raises(ValueError, match="line 2"):
            list(read_scores_jsonl(path))
        dpath = tmp_path / "bad_dataset.jsonl"
        dpath.write_text(
            json.dumps(
                {
                    "id": "a",
                    "masked_text": "no mask here",
                    "candidates": ["x", "y"],
                    "gold_index": 0,
                    "umbrella": "u",
                    "source": {},
                }
            )
            + "\n",
            encoding="utf-8",
        )
        with pytest.raises(ValueError, match="line 1"):
            list(read_dataset_jsonl(dpath))
