"""Word segmentation, normalization, and sentence splitting.

Every other module shares this file's definition of "word": a
whitespace-separated chunk whose core (after optional edge-punctuation
trimming) is purely alphabetic.  Chunks with internal digits, hyphens,
or apostrophes are classified as ``mixed`` and excluded from analysis;
transforms pass them through verbatim.

Byte offsets on tokens refer to the UTF-8 encoding of the source string
so that gaps + token spans reconstruct the input bit-exactly; character
offsets are carried alongside for in-place string surgery.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, List, Optional

# A normalized word is a plain string: NFC-normalized, case-folded per
# policy, purely alphabetic.  Using str directly makes "equal chars =>
# equal identity" hold in every dict keyed by it.
NormalizedWord = str

WORD = "word"
PUNCTUATION = "punctuation"
MIXED = "mixed"
WHITESPACE = "whitespace"


class DecodeError(ValueError):
    """Raised when input bytes are not valid UTF-8."""

    def __init__(self, byte_offset: int, detail: str):
        self.byte_offset = byte_offset
        super().__init__(f"invalid UTF-8 at byte offset {byte_offset}: {detail}")


@dataclass(frozen=True)
class NormalizationPolicy:
    """How raw tokens become normalized words.

    The policy is immutable and is serialized into every report header
    so results can be traced back to the exact word definition used.
    """

    case_fold: bool = True
    trim_edge_punctuation: bool = True
    unicode_nfc: bool = True

    def to_dict(self) -> dict:
        return {
            "case_fold": self.case_fold,
            "trim_edge_punctuation": self.trim_edge_punctuation,
            "unicode_nfc": self.unicode_nfc,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationPolicy":
        return cls(
            case_fold=bool(d.get("case_fold", True)),
            trim_edge_punctuation=bool(d.get("trim_edge_punctuation", True)),
            unicode_nfc=bool(d.get("unicode_nfc", True)),
        )


@dataclass(slots=True)
class RawToken:
    """One whitespace-delimited chunk of source text.

    ``start``/``end`` are byte offsets into the UTF-8 encoding of the
    source; ``char_start``/``char_end`` are the matching character
    offsets.  Slicing the encoded source at [start, end) yields exactly
    ``text`` encoded.
    """

    text: str
    start: int
    end: int
    kind: str
    char_start: int
    char_end: int


def split_edges(chunk: str) -> tuple[str, str, str]:
    """Split a chunk into (leading punctuation, core, trailing punctuation).

    Edges are maximal runs of non-alphanumeric characters; the core is
    whatever remains (possibly empty).
    """
    i, j = 0, len(chunk)
    while i < j and not chunk[i].isalnum():
        i += 1
    while j > i and not chunk[j - 1].isalnum():
        j -= 1
    return chunk[:i], chunk[i:j], chunk[j:]


def classify_chunk(chunk: str, policy: NormalizationPolicy) -> str:
    """Assign a token kind to a non-whitespace chunk under the policy."""
    probe = unicodedata.normalize("NFC", chunk) if policy.unicode_nfc else chunk
    if policy.trim_edge_punctuation:
        _, core, _ = split_edges(probe)
    else:
        core = probe
    if not core:
        # No alphanumeric content at all (with trimming on), or an
        # untrimmed chunk that is pure punctuation.
        if any(c.isalnum() for c in probe):
            return MIXED
        return PUNCTUATION
    if core.isalpha():
        return WORD
    if not any(c.isalnum() for c in probe):
        return PUNCTUATION
    return MIXED


def segment_words(text: str | bytes, policy: NormalizationPolicy = NormalizationPolicy()) -> List[RawToken]:
    """Split text into non-whitespace tokens, preserving provenance.

    Whitespace is skipped, never emitted; joining token spans with the
    skipped gaps reconstructs the input byte-for-byte.  Accepts bytes
    for callers reading raw files; invalid UTF-8 raises DecodeError
    naming the offending byte offset.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DecodeError(e.start, e.reason) from None

    tokens: List[RawToken] = []
    ascii_fast = text.isascii()
    byte_pos = 0  # byte offset matching char offset `char_pos`
    char_pos = 0
    n = len(text)
    i = 0
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        chunk = text[i:j]
        if ascii_fast:
            start, end = i, j
        else:
            byte_pos += len(text[char_pos:i].encode("utf-8"))
            start = byte_pos
            byte_pos += len(chunk.encode("utf-8"))
            char_pos = j
            end = byte_pos
        tokens.append(
            RawToken(
                text=chunk,
                start=start,
                end=end,
                kind=classify_chunk(chunk, policy),
                char_start=i,
                char_end=j,
            )
        )
        i = j
    return tokens


def normalize(token: RawToken, policy: NormalizationPolicy = NormalizationPolicy()) -> Optional[NormalizedWord]:
    """Reduce a token to its normalized word, or None for non-words."""
    return normalize_chunk(token.text, policy)


def normalize_chunk(chunk: str, policy: NormalizationPolicy) -> Optional[NormalizedWord]:
    """normalize() on a bare string, for callers without a RawToken."""
    if policy.unicode_nfc:
        chunk = unicodedata.normalize("NFC", chunk)
    if policy.trim_edge_punctuation:
        _, core, _ = split_edges(chunk)
    else:
        core = chunk
    if not core or not core.isalpha():
        return None
    if policy.case_fold:
        core = core.casefold()
        if policy.unicode_nfc:
            # Case folding can denormalize (rarely); keep keys canonical.
            core = unicodedata.normalize("NFC", core)
    return core


# Common abbreviations that end with '.' without ending a sentence.
_ABBREVIATIONS = frozenset(
    """
    mr mrs ms dr prof rev hon st sr jr vs etc eg ie cf al no nos vol vols
    fig figs approx dept est inc ltd co corp mt capt col gen lt sgt maj
    pp ed eds ca
    """.split()
)

_TERMINATORS = ".!?"
_CLOSERS = "\"')]’”"


def split_sentences(document: str) -> List[str]:
    """Rule-based sentence splitting.

    A sentence boundary is a run of {., !, ?} (plus any closing quotes
    or brackets) followed by whitespace and an uppercase letter, or by a
    line break.  A '.' preceded by a known abbreviation or a single
    capital initial does not end a sentence.  A document with no
    terminator is returned whole.
    """
    sentences: List[str] = []
    n = len(document)
    start = 0
    i = 0
    while i < n:
        if document[i] in _TERMINATORS:
            run_end = i + 1
            while run_end < n and document[run_end] in _TERMINATORS:
                run_end += 1
            close_end = run_end
            while close_end < n and document[close_end] in _CLOSERS:
                close_end += 1
            ws_end = close_end
            while ws_end < n and document[ws_end].isspace():
                ws_end += 1
            if ws_end == close_end:
                # No whitespace after the terminator: not a boundary.
                i = run_end
                continue
            newline_gap = "\n" in document[close_end:ws_end]
            next_upper = ws_end < n and document[ws_end].isupper()
            if not (next_upper or newline_gap or ws_end == n):
                i = run_end
                continue
            if document[i] == "." and run_end - i == 1 and _is_abbreviation(document, i):
                i = run_end
                continue
            piece = document[start:close_end].strip()
            if piece:
                sentences.append(piece)
            start = ws_end
            i = ws_end
            continue
        i += 1
    tail = document[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def _is_abbreviation(document: str, dot_index: int) -> bool:
    j = dot_index
    while j > 0 and document[j - 1].isalpha():
        j -= 1
    word = document[j:dot_index]
    if not word:
        return False
    if len(word) == 1 and word.isupper():
        return True  # single-letter initial, e.g. "J. Smith"
    return word.lower() in _ABBREVIATIONS


def iter_normalized_words(
    tokens: Iterable[RawToken], policy: NormalizationPolicy
) -> Iterable[NormalizedWord]:
    """Yield the normalized form of every word-like token, in order."""
    for tok in tokens:
        w = normalize(tok, policy)
        if w is not None:
            yield w
