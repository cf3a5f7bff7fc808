"""Typoglycemic transformations.

Two deterministic scramblers:

* classic — keep a word's first and last characters, sort the interior
  ascending by Unicode scalar ("embedding" -> "ebddeimng").  Identity for
  words shorter than 4 characters.
* extreme — sort all characters ("silence" -> "ceeilns").

Stream mode rewrites whole corpora token by token: word cores are
scrambled, everything else (punctuation, digits, whitespace) is copied
byte-for-byte, so transformed corpora line up with their sources
character for character.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import partial
from typing import Iterator, Optional

from .corpus import CorpusStream, Document, map_documents
from .textmodel import NormalizationPolicy, RawToken, split_edges

CLASSIC = "classic"
EXTREME = "extreme"

_DEFAULT_MIN_LEN = {CLASSIC: 4, EXTREME: 2}


@dataclass(frozen=True)
class TransformSpec:
    """Which scrambler applies, and from what word length.

    ``training_min_len`` optionally overrides ``min_len`` for training-
    corpus preparation, where both variants corrupt only words of length
    4+ to keep their outputs comparable.  The spec is serialized into
    every artifact it produced.
    """

    kind: str
    min_len: Optional[int] = None
    training_min_len: Optional[int] = None

    def __post_init__(self):
        if self.kind not in (CLASSIC, EXTREME):
            raise ValueError(f"unknown transform kind: {self.kind!r}")
        if self.min_len is None:
            object.__setattr__(self, "min_len", _DEFAULT_MIN_LEN[self.kind])
        if self.kind == CLASSIC and self.min_len < 4:
            raise ValueError(
                "classic transform requires min_len >= 4 (it is the identity below 4)"
            )
        if self.min_len < 1:
            raise ValueError("min_len must be positive")
        if self.training_min_len is not None:
            if self.kind == CLASSIC and self.training_min_len < 4:
                raise ValueError("classic training_min_len must be >= 4")
            if self.training_min_len < 1:
                raise ValueError("training_min_len must be positive")

    @property
    def effective_min_len(self) -> int:
        return self.training_min_len if self.training_min_len is not None else self.min_len

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "min_len": self.min_len,
            "training_min_len": self.training_min_len,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransformSpec":
        return cls(
            kind=d["kind"],
            min_len=d.get("min_len"),
            training_min_len=d.get("training_min_len"),
        )


def be_sort(word: str) -> str:
    """Sort a word's interior characters; anchors stay in place.

    Words shorter than 4 characters come back unchanged (there is at
    most one interior character to sort).
    """
    if len(word) < 4:
        return word
    return word[0] + "".join(sorted(word[1:-1])) + word[-1]


def full_sort(word: str, min_len: int = 2) -> str:
    """Sort all of a word's characters ascending by Unicode scalar."""
    if len(word) < min_len:
        return word
    return "".join(sorted(word))


def transform_word(word: str, spec: TransformSpec) -> str:
    """Apply the spec's scrambler to one (already normalized) word."""
    if len(word) < spec.effective_min_len:
        return word
    if spec.kind == CLASSIC:
        return be_sort(word)
    return "".join(sorted(word))


def _transform_core(core: str, spec: TransformSpec) -> str:
    """Scramble a raw word core, preserving sentence casing.

    The core is lowercased, scrambled, and the original first-character
    capitalization is reapplied to the first output character.  Cores
    whose length changes under lower() (rare Unicode edge) are scrambled
    with their original casing so character counts never drift.
    """
    lowered = core.lower()
    if len(lowered) != len(core):
        return transform_word(core, spec)
    out = transform_word(lowered, spec)
    if core[0].isupper():
        cap = out[0].upper()
        if len(cap) == 1:
            out = cap + out[1:]
    return out


def transform_token(token: RawToken, spec: TransformSpec, policy: NormalizationPolicy) -> str:
    """Rewrite one token: scramble word cores, pass everything else through."""
    return _transform_chunk(token.text, spec, policy)


def _transform_chunk(chunk: str, spec: TransformSpec, policy: NormalizationPolicy) -> str:
    if policy.trim_edge_punctuation:
        lead, core, trail = split_edges(chunk)
    else:
        lead, core, trail = "", chunk, ""
    if not core or not core.isalpha():
        return chunk
    return lead + _transform_core(core, spec) + trail


_CHUNK_RE = re.compile(r"\S+")


def transform_text(
    text: str,
    spec: TransformSpec,
    policy: NormalizationPolicy = NormalizationPolicy(),
    _cache: dict | None = None,
) -> str:
    """Rewrite a whole text, keeping whitespace and non-words byte-identical.

    A per-call memo (or a caller-provided one, reusable across documents)
    exploits the Zipfian repetition of real text.
    """
    cache = _cache if _cache is not None else {}
    out = []
    last = 0
    for m in _CHUNK_RE.finditer(text):
        chunk = m.group()
        got = cache.get(chunk)
        if got is None:
            got = _transform_chunk(chunk, spec, policy)
            cache[chunk] = got
        out.append(text[last : m.start()])
        out.append(got)
        last = m.end()
    out.append(text[last:])
    return "".join(out)


def _transform_document(doc: Document, spec: TransformSpec, policy: NormalizationPolicy) -> Document:
    return Document(doc.index, doc.doc_id, transform_text(doc.text, spec, policy))


def transform_stream(
    corpus: CorpusStream,
    spec: TransformSpec,
    policy: NormalizationPolicy = NormalizationPolicy(),
    workers: int = 1,
) -> CorpusStream:
    """Lazily scrambled view of a corpus; document structure is preserved."""
    fn = partial(_transform_document, spec=spec, policy=policy)

    def gen() -> Iterator[Document]:
        return map_documents(fn, corpus, workers=workers)

    return CorpusStream(gen)
