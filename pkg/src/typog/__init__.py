"""Typoglycemia toolkit: scrambling transforms and their corpus analysis."""

from .corpus import CorpusStream, Document, SentenceRef
from .textmodel import (
    NormalizationPolicy,
    NormalizedWord,
    RawToken,
    normalize,
    segment_words,
    split_sentences,
)
from .transforms import TransformSpec, be_sort, full_sort, transform_text, transform_stream, transform_word

__all__ = [
    "CorpusStream",
    "Document",
    "SentenceRef",
    "NormalizationPolicy",
    "NormalizedWord",
    "RawToken",
    "normalize",
    "segment_words",
    "split_sentences",
    "TransformSpec",
    "be_sort",
    "full_sort",
    "transform_text",
    "transform_stream",
    "transform_word",
]

__version__ = "0.1.0"
