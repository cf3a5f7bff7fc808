"""Corpus streams: manifest-driven, deterministic, re-iterable document sources.

A corpus is an ordered sequence of documents.  Order always follows the
manifest, so two runs (with any worker count) see documents in the same
order and produce identical artifacts.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, List, Sequence, TypeVar

from .textmodel import split_sentences

T = TypeVar("T")


class CorpusError(OSError):
    """I/O or manifest problem, with provenance in the message."""


@dataclass(slots=True)
class Document:
    index: int
    doc_id: str
    text: str


@dataclass(slots=True)
class SentenceRef:
    """A sentence plus where it came from."""

    doc_index: int
    doc_id: str
    sent_index: int
    text: str


class CorpusStream:
    """Re-iterable, lazily loaded sequence of documents."""

    def __init__(self, factory: Callable[[], Iterator[Document]]):
        self._factory = factory

    def __iter__(self) -> Iterator[Document]:
        return self._factory()

    def iter_documents(self) -> Iterator[Document]:
        return self._factory()

    def iter_sentences(self) -> Iterator[SentenceRef]:
        for doc in self:
            for si, sent in enumerate(split_sentences(doc.text)):
                yield SentenceRef(doc.index, doc.doc_id, si, sent)

    @classmethod
    def from_texts(cls, texts: Sequence[str], ids: Sequence[str] | None = None) -> "CorpusStream":
        texts = list(texts)
        if ids is None:
            ids = [f"doc{i}" for i in range(len(texts))]
        else:
            ids = list(ids)

        def gen() -> Iterator[Document]:
            for i, (doc_id, text) in enumerate(zip(ids, texts)):
                yield Document(i, doc_id, text)

        return cls(gen)

    @classmethod
    def from_files(cls, paths: Sequence[str | Path], line_documents: bool = False) -> "CorpusStream":
        paths = [Path(p) for p in paths]

        def gen() -> Iterator[Document]:
            index = 0
            for path in paths:
                try:
                    raw = path.read_text(encoding="utf-8")
                except OSError as e:
                    raise CorpusError(f"cannot read corpus file {path}: {e}") from e
                except UnicodeDecodeError as e:
                    raise CorpusError(
                        f"cannot decode {path} as UTF-8 at byte offset {e.start}"
                    ) from e
                if line_documents:
                    for ln, line in enumerate(raw.splitlines(), start=1):
                        if not line.strip():
                            continue
                        yield Document(index, f"{path}#{ln}", line)
                        index += 1
                else:
                    yield Document(index, str(path), raw)
                    index += 1

        return cls(gen)

    @classmethod
    def from_manifest(
        cls,
        manifest_path: str | Path,
        root: str | Path | None = None,
        line_documents: bool = False,
    ) -> "CorpusStream":
        """Build a stream from a manifest: one corpus file path per line.

        Relative entries resolve against `root` (default: the manifest's
        directory).  Blank lines and '#' comments are skipped.
        """
        paths = resolve_manifest(manifest_path, root)
        return cls.from_files(paths, line_documents=line_documents)


def resolve_manifest(manifest_path: str | Path, root: str | Path | None = None) -> List[Path]:
    manifest_path = Path(manifest_path)
    base = Path(root) if root is not None else manifest_path.parent
    try:
        lines = manifest_path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise CorpusError(f"cannot read manifest {manifest_path}: {e}") from e
    paths: List[Path] = []
    for ln, line in enumerate(lines, start=1):
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        p = Path(entry)
        paths.append(p if p.is_absolute() else base / p)
    if not paths:
        raise CorpusError(f"manifest {manifest_path} lists no corpus files")
    return paths


def manifest_relative_entries(manifest_path: str | Path) -> List[str]:
    """The manifest's entries as written (for mirroring output layouts)."""
    lines = Path(manifest_path).read_text(encoding="utf-8").splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.strip().startswith("#")]


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def map_documents(
    fn: Callable[[Document], T],
    corpus: Iterable[Document],
    workers: int = 1,
    chunksize: int = 4,
) -> Iterator[T]:
    """Apply a pure function to every document, preserving corpus order.

    `fn` must be picklable (a module-level function or functools.partial
    over picklable arguments) when workers > 1.
    """
    if workers <= 1:
        for doc in corpus:
            yield fn(doc)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, corpus, chunksize=chunksize)
