"""Word-collapse analysis: vocabularies, umbrella groups, and their statistics.

Two distinct words "collapse" when a scrambler maps them onto the same
string (salt/slat under classic, listen/silent under extreme).  This
module partitions a frequency vocabulary into such groups and summarizes
how large a slice of the vocabulary they cover.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .corpus import CorpusStream, Document, map_documents
from .textmodel import NormalizationPolicy, iter_normalized_words, segment_words
from .transforms import TransformSpec, transform_word


def _count_document(doc: Document, policy: NormalizationPolicy) -> Counter:
    return Counter(iter_normalized_words(segment_words(doc.text, policy), policy))


def build_vocab(
    corpus: CorpusStream,
    policy: NormalizationPolicy = NormalizationPolicy(),
    workers: int = 1,
) -> Counter:
    """Exact occurrence counts of normalized words over the whole corpus.

    Counting is partition-and-merge over documents; the merge is a
    commutative sum, so the result is identical for any worker count.
    """
    total: Counter = Counter()
    for part in map_documents(partial(_count_document, policy=policy), corpus, workers=workers):
        total.update(part)
    return total


@dataclass(slots=True)
class CollapseGroup:
    """One umbrella form and the distinct words that map onto it."""

    umbrella: str
    members: List[Tuple[str, int]]  # (word, frequency), sorted by -freq then word


@dataclass
class CollapseIndex:
    """Partition of a vocabulary into collapse groups under one spec."""

    spec: TransformSpec
    groups: Dict[str, CollapseGroup] = field(default_factory=dict)

    def member_words(self) -> Dict[str, str]:
        """word -> umbrella, over every collapsing word in the index."""
        return {w: g.umbrella for g in self.groups.values() for w, _ in g.members}

    @property
    def ed_count(self) -> int:
        return len(self.groups)

    @property
    def ing_count(self) -> int:
        return sum(len(g.members) for g in self.groups.values())


def build_collapse_index(vocab: Mapping[str, int], spec: TransformSpec) -> CollapseIndex:
    """Group vocabulary words by their scrambled form.

    Only umbrella forms with two or more distinct pre-images are kept;
    every vocab word lands in at most one group.
    """
    if not vocab:
        raise ValueError("cannot build a collapse index from an empty vocabulary")
    buckets: Dict[str, List[str]] = defaultdict(list)
    for word in vocab:
        buckets[transform_word(word, spec)].append(word)
    groups: Dict[str, CollapseGroup] = {}
    for umbrella in sorted(buckets):
        words = buckets[umbrella]
        if len(words) < 2:
            continue
        members = sorted(((w, vocab[w]) for w in words), key=lambda wf: (-wf[1], wf[0]))
        groups[umbrella] = CollapseGroup(umbrella, members)
    return CollapseIndex(spec=spec, groups=groups)


@dataclass
class CollapseReport:
    """Corpus-level collapse statistics.

    avg_freq/std_freq are the mean and population standard deviation of
    the corpus frequencies of all unique collapsing words; both are None
    (serialized as empty fields, never NaN) when the index is empty.
    """

    ed_count: int
    ing_count: int
    avg_freq: Optional[float]
    std_freq: Optional[float]
    vocab_size: int
    ing_proportion: float
    spec: TransformSpec
    policy: NormalizationPolicy

    FIELDS = (
        "ed_count",
        "ing_count",
        "avg_freq",
        "std_freq",
        "vocab_size",
        "ing_proportion",
        "spec",
        "policy",
    )

    def to_dict(self) -> dict:
        return {
            "ed_count": self.ed_count,
            "ing_count": self.ing_count,
            "avg_freq": self.avg_freq,
            "std_freq": self.std_freq,
            "vocab_size": self.vocab_size,
            "ing_proportion": self.ing_proportion,
            "spec": self.spec.to_dict(),
            "policy": self.policy.to_dict(),
        }


def collapse_frequencies(index: CollapseIndex) -> List[int]:
    """Corpus frequency of every unique collapsing word in the index."""
    return [f for g in index.groups.values() for _, f in g.members]


def summarize(
    index: CollapseIndex,
    vocab_size: int,
    policy: NormalizationPolicy = NormalizationPolicy(),
) -> CollapseReport:
    freqs = collapse_frequencies(index)
    ing = len(freqs)
    ed = index.ed_count
    if vocab_size < ing:
        raise ValueError(f"vocab_size {vocab_size} < collapsing-word count {ing}")
    if ing == 0:
        avg = std = None
        proportion = 0.0
    else:
        avg = sum(freqs) / ing
        std = math.sqrt(sum((f - avg) ** 2 for f in freqs) / ing)
        proportion = ing / vocab_size
    return CollapseReport(ed, ing, avg, std, vocab_size, proportion, index.spec, policy)


@dataclass(slots=True)
class HistogramBin:
    lo: Optional[float]  # None = open underflow edge
    hi: Optional[float]  # None = open overflow edge
    count: int


def decade_edges(max_value: int) -> List[float]:
    """Log-spaced decade edges [1, 10, 100, ...] covering max_value."""
    top = max(max_value, 1)
    edges = [1.0]
    while edges[-1] <= top:
        edges.append(edges[-1] * 10)
    return edges


def histogram(index: CollapseIndex, edges: Sequence[float] | None = None) -> List[HistogramBin]:
    """Bin collapsing-word frequencies into half-open [lo, hi) intervals.

    Values outside the outermost edges land in open under/overflow bins
    rather than being dropped, so counts always sum to the collapsing-
    word total.
    """
    freqs = collapse_frequencies(index)
    if edges is None:
        edges = decade_edges(max(freqs) if freqs else 1)
    edges = [float(e) for e in edges]
    if len(edges) < 2:
        raise ValueError("need at least two bin edges")
    if any(a >= b for a, b in zip(edges, edges[1:])):
        raise ValueError("bin edges must be strictly increasing")

    bins = [HistogramBin(edges[i], edges[i + 1], 0) for i in range(len(edges) - 1)]
    underflow = HistogramBin(None, edges[0], 0)
    overflow = HistogramBin(edges[-1], None, 0)
    for f in freqs:
        if f < edges[0]:
            underflow.count += 1
        elif f >= edges[-1]:
            overflow.count += 1
        else:
            # rightmost edge <= f (bisect over the sorted edges)
            lo, hi = 0, len(edges) - 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if edges[mid] <= f:
                    lo = mid
                else:
                    hi = mid
            bins[lo].count += 1
    out: List[HistogramBin] = []
    if underflow.count:
        out.append(underflow)
    out.extend(bins)
    if overflow.count:
        out.append(overflow)
    return out


# --- serialization ------------------------------------------------------

def write_index_jsonl(index: CollapseIndex, path: str | Path) -> None:
    """One group per line: {"umbrella", "spec", "members": [[word, freq], ...]}."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        spec_dict = index.spec.to_dict()
        for umbrella in sorted(index.groups):
            g = index.groups[umbrella]
            line = {
                "umbrella": g.umbrella,
                "spec": spec_dict,
                "members": [[w, f] for w, f in g.members],
            }
            fh.write(json.dumps(line, ensure_ascii=False, sort_keys=True) + "\n")


def read_index_jsonl(path: str | Path) -> CollapseIndex:
    groups: Dict[str, CollapseGroup] = {}
    spec: Optional[TransformSpec] = None
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                d = json.loads(raw)
                umbrella = d["umbrella"]
                members = [(str(w), int(f)) for w, f in d["members"]]
                line_spec = TransformSpec.from_dict(d["spec"])
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as e:
                raise ValueError(f"{path}: line {ln}: invalid group record: {e}") from None
            if spec is None:
                spec = line_spec
            groups[umbrella] = CollapseGroup(umbrella, members)
    if spec is None:
        raise ValueError(f"{path}: no groups found")
    return CollapseIndex(spec=spec, groups=groups)


def write_report_csv(report: CollapseReport, path: str | Path) -> None:
    d = report.to_dict()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CollapseReport.FIELDS)
        w.writerow(
            [
                d["ed_count"],
                d["ing_count"],
                "" if d["avg_freq"] is None else repr(d["avg_freq"]),
                "" if d["std_freq"] is None else repr(d["std_freq"]),
                d["vocab_size"],
                repr(d["ing_proportion"]),
                json.dumps(d["spec"], sort_keys=True),
                json.dumps(d["policy"], sort_keys=True),
            ]
        )


def write_histogram_csv(bins: Iterable[HistogramBin], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count"])
        for b in bins:
            w.writerow(
                [
                    "" if b.lo is None else repr(b.lo),
                    "" if b.hi is None else repr(b.hi),
                    b.count,
                ]
            )


def write_vocab_csv(vocab: Mapping[str, int], path: str | Path) -> None:
    """Frequency table, highest first (ties alphabetical) for stable bytes."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word", "count"])
        for word, count in sorted(vocab.items(), key=lambda wc: (-wc[1], wc[0])):
            w.writerow([word, count])


def read_vocab_csv(path: str | Path) -> Counter:
    vocab: Counter = Counter()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["word", "count"]:
            raise ValueError(f"{path}: expected header word,count")
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                vocab[row[0]] = int(row[1])
            except (IndexError, ValueError) as e:
                raise ValueError(f"{path}: line {ln}: bad vocab row: {e}") from None
    return vocab
