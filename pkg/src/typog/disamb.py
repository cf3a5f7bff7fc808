"""Masked-word disambiguation: dataset generation, baseline scoring, evaluation.

Every sentence occurrence of a collapsing word becomes one instance: the
occurrence is replaced by "[MASK]" and the instance carries the full
candidate set of its collapse group.  Any scorer that maps instances to
one real score per candidate can be evaluated; a smoothed co-occurrence
baseline is built in, and external scorers plug in through the JSONL
dataset/score file contract.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .collapse import CollapseIndex
from .corpus import CorpusStream, Document, map_documents
from .textmodel import (
    NormalizationPolicy,
    normalize,
    segment_words,
    split_edges,
    split_sentences,
)

MASK = "[MASK]"


class ScoreProtocolError(ValueError):
    """A score vector violates the scoring contract (shape or finiteness)."""


class ReconciliationError(ValueError):
    """Instance and score files do not carry the same ids."""

    def __init__(self, missing: List[str], extra: List[str]):
        self.missing = missing
        self.extra = extra
        parts = []
        if missing:
            parts.append(f"missing score ids: {', '.join(missing[:20])}")
        if extra:
            parts.append(f"unmatched score ids: {', '.join(extra[:20])}")
        super().__init__("; ".join(parts) or "id mismatch")


class UndefinedCorrelationError(ValueError):
    """Pearson r is undefined (zero variance or too few points)."""


@dataclass(slots=True)
class DisambInstance:
    """One masked sentence with its candidate set and gold answer."""

    id: str
    masked_text: str
    candidates: List[str]  # lexicographically sorted, >= 2 distinct words
    gold_index: int
    umbrella: str
    source: dict

    @property
    def gold(self) -> str:
        return self.candidates[self.gold_index]

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "masked_text": self.masked_text,
            "candidates": self.candidates,
            "gold_index": self.gold_index,
            "umbrella": self.umbrella,
            "source": self.source,
        }


@dataclass(slots=True)
class ScoreVector:
    id: str
    scores: List[float]


@dataclass(slots=True)
class Skip:
    """A collapsing-word occurrence that could not become an instance."""

    doc_id: str
    sent_index: int
    reason: str


def _sentence_instances(
    doc: Document,
    member_map: Dict[str, Tuple[str, List[str]]],
    policy: NormalizationPolicy,
) -> Tuple[List[DisambInstance], List[Skip]]:
    instances: List[DisambInstance] = []
    skips: List[Skip] = []
    for sent_index, sentence in enumerate(split_sentences(doc.text)):
        occurrence = 0
        preexisting_mask = MASK in sentence
        for token in segment_words(sentence, policy):
            word = normalize(token, policy)
            if word is None:
                continue
            hit = member_map.get(word)
            if hit is None:
                continue
            if preexisting_mask:
                skips.append(
                    Skip(doc.doc_id, sent_index, "sentence already contains the mask placeholder")
                )
                occurrence += 1
                continue
            umbrella, candidates = hit
            # Mask only the alphabetic core; edge punctuation stays put.
            lead, core, _ = split_edges(token.text)
            core_start = token.char_start + len(lead)
            core_end = core_start + len(core)
            masked = sentence[:core_start] + MASK + sentence[core_end:]
            instances.append(
                DisambInstance(
                    id=f"{doc.index}:{sent_index}:{occurrence}",
                    masked_text=masked,
                    candidates=candidates,
                    gold_index=candidates.index(word),
                    umbrella=umbrella,
                    source={
                        "document": doc.doc_id,
                        "sentence": sent_index,
                        "char_start": core_start,
                        "char_end": core_end,
                    },
                )
            )
            occurrence += 1
    return instances, skips


def generate_dataset(
    corpus: CorpusStream,
    index: CollapseIndex,
    policy: NormalizationPolicy = NormalizationPolicy(),
    workers: int = 1,
    on_skip: Optional[Callable[[Skip], None]] = None,
) -> Iterator[DisambInstance]:
    """Yield one instance per collapsing-word occurrence, in corpus order.

    A sentence with k collapsing occurrences yields k instances, each
    masking one occurrence and leaving the others intact.  Ids are
    document:sentence:occurrence and stable across runs and worker
    counts.  Occurrences that cannot be masked unambiguously are skipped
    and reported through `on_skip`.
    """
    member_map: Dict[str, Tuple[str, List[str]]] = {}
    for g in index.groups.values():
        candidates = sorted(w for w, _ in g.members)
        for w in candidates:
            member_map[w] = (g.umbrella, candidates)
    fn = partial(_sentence_instances, member_map=member_map, policy=policy)
    for instances, skips in map_documents(fn, corpus, workers=workers):
        if on_skip is not None:
            for s in skips:
                on_skip(s)
        yield from instances


# --- co-occurrence baseline ----------------------------------------------

@dataclass
class CoocModel:
    """Symmetric-window co-occurrence counts with additive smoothing."""

    window: int
    alpha: float
    counts: Dict[str, Counter] = field(default_factory=dict)
    totals: Counter = field(default_factory=Counter)
    vocab: set = field(default_factory=set)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)


def train_cooc_model(
    corpus: CorpusStream,
    window: int = 5,
    alpha: float = 1.0,
    policy: NormalizationPolicy = NormalizationPolicy(),
) -> CoocModel:
    """Count word/context pairs within a symmetric window, per sentence."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if alpha <= 0:
        raise ValueError("smoothing constant must be > 0")
    model = CoocModel(window=window, alpha=alpha)
    counts = model.counts
    totals = model.totals
    for ref in corpus.iter_sentences():
        words = [
            w
            for tok in segment_words(ref.text, policy)
            if (w := normalize(tok, policy)) is not None
        ]
        model.vocab.update(words)
        n = len(words)
        for i, w in enumerate(words):
            lo = max(0, i - window)
            hi = min(n, i + window + 1)
            ctx = counts.get(w)
            if ctx is None:
                ctx = counts[w] = Counter()
            for j in range(lo, hi):
                if j == i:
                    continue
                ctx[words[j]] += 1
                totals[w] += 1
    return model


def _mask_context(instance: DisambInstance, model: CoocModel, policy: NormalizationPolicy) -> List[str]:
    """In-vocabulary words within the model's window of the mask."""
    tokens = segment_words(instance.masked_text, policy)
    slots: List[Optional[str]] = []  # None marks the mask position
    mask_pos = -1
    for tok in tokens:
        if MASK in tok.text:
            mask_pos = len(slots)
            slots.append(None)
            continue
        w = normalize(tok, policy)
        if w is not None:
            slots.append(w)
    if mask_pos < 0:
        raise ScoreProtocolError(f"instance {instance.id}: masked_text has no {MASK}")
    lo = max(0, mask_pos - model.window)
    hi = min(len(slots), mask_pos + model.window + 1)
    return [w for w in slots[lo:hi] if w is not None and w in model.vocab]


def baseline_score(
    instance: DisambInstance,
    model: CoocModel,
    policy: NormalizationPolicy = NormalizationPolicy(),
) -> ScoreVector:
    """Sum of smoothed log co-occurrence probabilities of the mask's context.

    score(c) = sum over context words x of
               log[(counts(c, x) + alpha) / (totals(c) + alpha * V)]

    Candidates the model never saw fall back to all-zero counts, which the
    smoothing keeps finite; an instance with no usable context words scores
    every candidate identically.
    """
    context = _mask_context(instance, model, policy)
    v = model.vocab_size
    alpha = model.alpha
    scores: List[float] = []
    for cand in instance.candidates:
        ctx_counts = model.counts.get(cand)
        total = model.totals.get(cand, 0)
        denom = total + alpha * v
        s = 0.0
        for x in context:
            c = ctx_counts[x] if ctx_counts is not None else 0
            s += math.log((c + alpha) / denom)
        scores.append(s)
    return ScoreVector(id=instance.id, scores=scores)


def select(scores: ScoreVector, candidates: Sequence[str]) -> str:
    """Argmax candidate; exact ties go to the lexicographically smallest."""
    if len(scores.scores) != len(candidates):
        raise ScoreProtocolError(
            f"instance {scores.id}: {len(scores.scores)} scores for {len(candidates)} candidates"
        )
    best: Optional[str] = None
    best_score = -math.inf
    for cand, s in zip(candidates, scores.scores):
        if not math.isfinite(s):
            raise ScoreProtocolError(f"instance {scores.id}: non-finite score {s!r}")
        if s > best_score or (s == best_score and (best is None or cand < best)):
            best = cand
            best_score = s
    if best is None:
        raise ScoreProtocolError(f"instance {scores.id}: empty candidate list")
    return best


@dataclass(slots=True)
class LabelAccuracy:
    n: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.n


@dataclass
class EvalReport:
    n_instances: int
    accuracy: float
    per_label: Dict[str, LabelAccuracy]
    pearson_r: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "accuracy": self.accuracy,
            "pearson_r": self.pearson_r,
            "per_label": {
                w: {"n": la.n, "correct": la.correct, "accuracy": la.accuracy}
                for w, la in sorted(self.per_label.items())
            },
        }


def evaluate(
    instances: Iterable[DisambInstance],
    scores: Iterable[ScoreVector],
) -> EvalReport:
    """Match instances to scores by id and accumulate per-label accuracy.

    Only per-label accumulators are kept.  Score vectors may arrive in
    any order; ids must match one-to-one or a ReconciliationError lists
    the offenders.
    """
    score_iter = iter(scores)
    buffered: Dict[str, ScoreVector] = {}
    missing: List[str] = []
    per_label: Dict[str, LabelAccuracy] = defaultdict(lambda: LabelAccuracy(0, 0))
    n = correct = 0

    for inst in instances:
        sv = buffered.pop(inst.id, None)
        while sv is None:
            nxt = next(score_iter, None)
            if nxt is None:
                break
            if nxt.id == inst.id:
                sv = nxt
            else:
                if nxt.id in buffered:
                    raise ScoreProtocolError(f"duplicate score id {nxt.id}")
                buffered[nxt.id] = nxt
        if sv is None:
            missing.append(inst.id)
            continue
        pred = select(sv, inst.candidates)
        gold = inst.gold
        n += 1
        acc = per_label[gold]
        acc.n += 1
        if pred == gold:
            correct += 1
            acc.correct += 1

    extra = sorted(buffered) + sorted(sv.id for sv in score_iter)
    if missing or extra:
        raise ReconciliationError(missing, extra)
    if n == 0:
        return EvalReport(0, 0.0, {})
    return EvalReport(n, correct / n, dict(per_label))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson r; raises UndefinedCorrelationError on degenerate input."""
    import statistics

    if len(xs) != len(ys):
        raise ValueError("paired samples required")
    if len(xs) < 2:
        raise UndefinedCorrelationError("need at least two points")
    # Constant inputs must error, never round-trip to ~0 through float noise.
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        raise UndefinedCorrelationError("zero variance in one of the variables")
    try:
        return statistics.correlation(xs, ys)
    except statistics.StatisticsError as e:
        raise UndefinedCorrelationError(str(e)) from None


def freq_accuracy_correlation(report: EvalReport, vocab: Mapping[str, int]) -> float:
    """Pearson r between per-word corpus frequency and per-word accuracy."""
    xs: List[float] = []
    ys: List[float] = []
    for word in sorted(report.per_label):
        la = report.per_label[word]
        freq = vocab.get(word)
        if freq is None or la.n == 0:
            continue
        xs.append(float(freq))
        ys.append(la.accuracy)
    return pearson(xs, ys)


# --- JSONL file contract --------------------------------------------------

_INSTANCE_FIELDS = ("id", "masked_text", "candidates", "gold_index", "umbrella", "source")


def write_dataset_jsonl(instances: Iterable[DisambInstance], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for inst in instances:
            fh.write(json.dumps(inst.to_json_dict(), ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    return count


def read_dataset_jsonl(path: str | Path) -> Iterator[DisambInstance]:
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                d = json.loads(raw)
                inst = DisambInstance(
                    id=str(d["id"]),
                    masked_text=str(d["masked_text"]),
                    candidates=[str(c) for c in d["candidates"]],
                    gold_index=int(d["gold_index"]),
                    umbrella=str(d["umbrella"]),
                    source=dict(d.get("source") or {}),
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as e:
                raise ValueError(f"{path}: line {ln}: invalid instance record: {e}") from None
            if inst.masked_text.count(MASK) != 1:
                raise ValueError(f"{path}: line {ln}: masked_text must contain exactly one {MASK}")
            if not 0 <= inst.gold_index < len(inst.candidates):
                raise ValueError(f"{path}: line {ln}: gold_index out of range")
            if len(inst.candidates) < 2 or len(set(inst.candidates)) != len(inst.candidates):
                raise ValueError(f"{path}: line {ln}: candidates must be >= 2 distinct words")
            yield inst


def write_scores_jsonl(scores: Iterable[ScoreVector], path: str | Path, meta: dict | None = None) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sv in scores:
            d: dict = {"id": sv.id, "scores": sv.scores}
            if meta:
                d["meta"] = meta
            fh.write(json.dumps(d, ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    return count


def read_scores_jsonl(path: str | Path) -> Iterator[ScoreVector]:
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                d = json.loads(raw)
                yield ScoreVector(id=str(d["id"]), scores=[float(s) for s in d["scores"]])
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as e:
                raise ValueError(f"{path}: line {ln}: invalid score record: {e}") from None
