"""WordPiece subword vocabularies: training, encoding, decoding, statistics.

Training is the likelihood-style pair-merge procedure: starting from
single characters, repeatedly merge the adjacent pair maximizing

    score(a, b) = count(ab) / (count(a) * count(b))

until the vocabulary reaches its target size or no pair is frequent
enough.  Ties break on higher pair count, then lexicographically, so a
given corpus and configuration always yield the same vocabulary
byte-for-byte.

Encoding is greedy longest-match-first from the left; continuations
carry the "##" prefix; a word that cannot be covered becomes [UNK].
"""

from __future__ import annotations

import csv
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .corpus import CorpusStream
from .textmodel import NormalizationPolicy

SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
CONTINUATION = "##"
UNK = "[UNK]"
MAX_WORD_CHARS = 100


class TrainingError(ValueError):
    """The corpus/configuration cannot produce a vocabulary."""


@dataclass(slots=True)
class MergeRecord:
    """One trainer step, kept for inspection and property checks."""

    left: str
    right: str
    merged: str
    pair_count: int
    score: float
    corpus_tokens_after: int


@dataclass
class SubwordVocab:
    """An ordered subword vocabulary with the specials at the head."""

    tokens: List[str]
    continuation_prefix: str = CONTINUATION
    specials: Tuple[str, ...] = SPECIALS
    target_size: Optional[int] = None
    merges: List[MergeRecord] = field(default_factory=list)

    def __post_init__(self):
        if list(self.tokens[: len(self.specials)]) != list(self.specials):
            raise ValueError("special tokens must occupy the first ids")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        self._ids = {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def id_of(self, token: str) -> int:
        return self._ids[token]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for tok in self.tokens:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SubwordVocab":
        tokens = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                tok = line.rstrip("\n")
                if tok:
                    tokens.append(tok)
        return cls(tokens=tokens)


def pre_tokenize(text: str, policy: NormalizationPolicy = NormalizationPolicy()) -> List[str]:
    """Split text into wordpiece-ready pieces.

    Whitespace separates chunks; within a chunk, alphanumeric runs stay
    together and every other character stands alone, so punctuation gets
    its own tokens.  Case folds per policy.
    """
    pieces: List[str] = []
    for chunk in text.split():
        if policy.case_fold:
            chunk = chunk.lower()
        start = None
        for i, ch in enumerate(chunk):
            if ch.isalnum():
                if start is None:
                    start = i
            else:
                if start is not None:
                    pieces.append(chunk[start:i])
                    start = None
                pieces.append(ch)
        if start is not None:
            pieces.append(chunk[start:])
    return pieces


def _word_counts(corpus: CorpusStream, policy: NormalizationPolicy) -> Counter:
    counts: Counter = Counter()
    for doc in corpus:
        counts.update(pre_tokenize(doc.text, policy))
    return counts


def train(
    corpus: CorpusStream,
    vocab_size: int,
    specials: Sequence[str] = SPECIALS,
    min_pair_count: int = 2,
    policy: NormalizationPolicy = NormalizationPolicy(),
) -> SubwordVocab:
    """Train a WordPiece vocabulary of at most `vocab_size` entries.

    The initial alphabet is every character seen in the corpus plus its
    "##"-prefixed continuation form; `vocab_size` must leave room for it
    beyond the specials.
    """
    word_counts = _word_counts(corpus, policy)
    if not word_counts:
        raise TrainingError("cannot train on an empty corpus")

    alphabet = sorted({c for w in word_counts for c in w})
    base = list(specials) + alphabet + [CONTINUATION + c for c in alphabet]
    if vocab_size <= len(base):
        raise TrainingError(
            f"vocab_size {vocab_size} does not exceed specials + initial alphabet ({len(base)})"
        )

    # Word types as symbol sequences: first char bare, the rest "##"-prefixed.
    types: List[Tuple[List[str], int]] = []
    for w, f in sorted(word_counts.items()):
        syms = [w[0]] + [CONTINUATION + c for c in w[1:]]
        types.append((syms, f))

    symbol_counts: Counter = Counter()
    pair_counts: Counter = Counter()
    pair_types: Dict[Tuple[str, str], set] = defaultdict(set)
    total_tokens = 0
    for ti, (syms, f) in enumerate(types):
        total_tokens += len(syms) * f
        for s in syms:
            symbol_counts[s] += f
        for a, b in zip(syms, syms[1:]):
            pair_counts[(a, b)] += f
            pair_types[(a, b)].add(ti)

    vocab_set = set(base)
    tokens = list(base)
    merges: List[MergeRecord] = []

    while len(tokens) < vocab_size:
        best_pair = None
        best_score = 0.0
        best_count = 0
        for pair, c in pair_counts.items():
            if c < min_pair_count:
                continue
            a, b = pair
            s = c / (symbol_counts[a] * symbol_counts[b])
            if (
                best_pair is None
                or s > best_score
                or (s == best_score and (c > best_count or (c == best_count and pair < best_pair)))
            ):
                best_pair, best_score, best_count = pair, s, c
        if best_pair is None:
            break

        a, b = best_pair
        merged = a + (b[len(CONTINUATION):] if b.startswith(CONTINUATION) else b)

        for ti in sorted(pair_types[best_pair]):
            syms, f = types[ti]
            i = 0
            while i < len(syms) - 1:
                if syms[i] != a or syms[i + 1] != b:
                    i += 1
                    continue
                if i > 0:
                    pair_counts[(syms[i - 1], a)] -= f
                if i + 2 < len(syms):
                    pair_counts[(b, syms[i + 2])] -= f
                pair_counts[best_pair] -= f
                symbol_counts[a] -= f
                symbol_counts[b] -= f
                symbol_counts[merged] += f
                syms[i : i + 2] = [merged]
                total_tokens -= f
                if i > 0:
                    left = (syms[i - 1], merged)
                    pair_counts[left] += f
                    pair_types[left].add(ti)
                if i + 1 < len(syms):
                    right = (merged, syms[i + 1])
                    pair_counts[right] += f
                    pair_types[right].add(ti)
                i += 1
        if pair_counts.get(best_pair, 0) <= 0:
            pair_counts.pop(best_pair, None)
            pair_types.pop(best_pair, None)

        merges.append(
            MergeRecord(a, b, merged, best_count, best_score, total_tokens)
        )
        if merged not in vocab_set:
            vocab_set.add(merged)
            tokens.append(merged)

    return SubwordVocab(
        tokens=tokens,
        specials=tuple(specials),
        target_size=vocab_size,
        merges=merges,
    )


def encode_word(word: str, vocab: SubwordVocab) -> List[str]:
    """Greedy longest-match-first segmentation of a single word."""
    if not word:
        return []
    if len(word) > MAX_WORD_CHARS:
        return [UNK]
    pieces: List[str] = []
    i = 0
    n = len(word)
    while i < n:
        j = n
        found = None
        while j > i:
            sub = word[i:j] if i == 0 else vocab.continuation_prefix + word[i:j]
            if sub in vocab:
                found = sub
                break
            j -= 1
        if found is None:
            return [UNK]
        pieces.append(found)
        i = j
    return pieces


def encode(
    text: str,
    vocab: SubwordVocab,
    policy: NormalizationPolicy = NormalizationPolicy(),
) -> List[str]:
    """Tokenize text: pre-tokenize, then encode each piece."""
    out: List[str] = []
    for word in pre_tokenize(text, policy):
        out.extend(encode_word(word, vocab))
    return out


def decode(tokens: Iterable[str], vocab: SubwordVocab | None = None) -> str:
    """Rejoin tokens into text: continuations attach, words get single spaces.

    Non-[UNK] specials are dropped; [UNK] stays visible.
    """
    specials = set(vocab.specials if vocab is not None else SPECIALS) - {UNK}
    prefix = vocab.continuation_prefix if vocab is not None else CONTINUATION
    words: List[str] = []
    for tok in tokens:
        if tok in specials:
            continue
        if tok.startswith(prefix) and words:
            words[-1] += tok[len(prefix):]
        else:
            words.append(tok)
    return " ".join(words)


@dataclass
class TokenStats:
    """Occurrence counts per vocabulary token over an encoded corpus."""

    counts: Counter
    total: int

    def ranked(self, vocab: SubwordVocab) -> List[Tuple[str, int, int, int]]:
        """(token, id, count, rank) rows; rank 1 = most frequent."""
        order = sorted(vocab.tokens, key=lambda t: (-self.counts.get(t, 0), vocab.id_of(t)))
        return [
            (tok, vocab.id_of(tok), self.counts.get(tok, 0), rank)
            for rank, tok in enumerate(order, start=1)
        ]

    def top_decile_mass(self, vocab: SubwordVocab) -> float:
        """Share of all emitted tokens held by the top 10% of vocab entries."""
        if self.total == 0:
            return 0.0
        k = max(1, len(vocab) // 10)
        top = sorted((self.counts.get(t, 0) for t in vocab.tokens), reverse=True)[:k]
        return sum(top) / self.total


def token_stats(
    corpus: CorpusStream,
    vocab: SubwordVocab,
    policy: NormalizationPolicy = NormalizationPolicy(),
) -> TokenStats:
    counts: Counter = Counter()
    for doc in corpus:
        counts.update(encode(doc.text, vocab, policy))
    return TokenStats(counts=counts, total=sum(counts.values()))


def write_stats_csv(stats: TokenStats, vocab: SubwordVocab, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["token", "id", "count", "rank"])
        for tok, tid, count, rank in stats.ranked(vocab):
            w.writerow([tok, tid, count, rank])


def write_stats_summary(stats: TokenStats, vocab: SubwordVocab, path: str | Path) -> None:
    summary = {
        "total_tokens": stats.total,
        "vocab_size": len(vocab),
        "unk_count": stats.counts.get(UNK, 0),
        "top_decile_mass": stats.top_decile_mass(vocab),
    }
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
