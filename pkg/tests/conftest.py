"""Shared fixtures: a deterministic ~1 MB synthetic corpus with planted
collapse pairs, regenerated bit-identically from a fixed seed."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import List

import pytest

# Word pairs/sets that collapse under the classic transform (same first and
# last letter, same interior multiset) ...
CLASSIC_SETS = [
    ("form", "from"),
    ("salt", "slat"),
    ("there", "three"),
    ("except", "expect"),
    ("course", "crusoe"),
    ("cedar", "cader"),
    ("part", "prat"),
    ("rewarding", "redrawing"),
    ("enquire", "enrique"),
    ("spectre", "sceptre"),
]

# ... and sets that collapse only under the extreme transform (anagrams).
EXTREME_SETS = [
    ("with", "whit"),
    ("sauce", "cause"),
    ("silence", "license"),
    ("who", "how", "woh"),
    ("marlon", "normal"),
    ("listen", "silent"),
    ("presume", "supreme"),
]

FILLERS = """
    about above after again against almost alone along already although always
    among animal answer anything around because become before began behind
    below between both bright bring brought cannot carry certain change
    children city close cold common could country dark decide deep
    different direction does down during early earth enough even evening ever
    every example eyes face family famous fast father feel field finally find
    fire first follow food found four friend front garden gave girl give goes
    gold gone good great green ground group grow half hand happy hard head hear
    heard heavy help here high hill himself hold home horse hour house however
    hundred idea important inside instead island just keep kind king know land
    large last late learn leave left letter life light like line little live
    long look made make many mean measure might mile mind miss money moon more
    morning most mother mountain move much music must name near never night
    north nothing notice number often once only open order other over own page
    paper pattern perhaps person picture place plant play point power probably
    problem pull push question quick quite rain reach read ready real remember
    rest right river road rock room round run said same saw says school sea
    second seem seen sentence several shall ship short should show side simple
    since sing sleep slow small someone something song soon sound south space
    spell stand start state stay step still stop story street strong study such
    sure table take talk tell than that their them then these they thing think
    this those thought through time today together told took toward town tree
    true turn under until upon usually very voice walk want warm watch water
    weather week well went were what when where which while white whole whose
    wind winter wood word work world would write year young
    """.split()

ALL_PLANTED = [w for s in CLASSIC_SETS + EXTREME_SETS for w in s]


@dataclass
class FixtureCorpus:
    root: Path
    manifest: Path
    doc_paths: List[Path]
    texts: List[str]
    seed: int


def build_fixture_texts(seed: int = 20250811, n_docs: int = 24, sentences_per_doc: int = 640) -> List[str]:
    """Deterministic synthetic documents (~1 MB total across defaults)."""
    rng = random.Random(seed)
    pool = list(FILLERS)
    weights = [1.0 / (i + 1) ** 0.6 for i in range(len(pool))]
    planted = list(ALL_PLANTED)
    texts = []
    for _ in range(n_docs):
        sentences = []
        for _ in range(sentences_per_doc):
            n_words = rng.randint(7, 14)
            words = rng.choices(pool, weights=weights, k=n_words)
            # Sprinkle planted collapse words into most sentences.
            for _ in range(rng.randint(0, 3)):
                words[rng.randrange(n_words)] = rng.choice(planted)
            # Occasional non-word material that transforms must pass through.
            r = rng.random()
            if r < 0.08:
                words.insert(rng.randrange(n_words), str(rng.randint(1, 1990)))
            elif r < 0.12:
                words.insert(rng.randrange(n_words), "well-known")
            if rng.random() < 0.25:
                words[rng.randrange(1, len(words))] += ","
            sentence = " ".join(words)
            sentence = sentence[0].upper() + sentence[1:]
            sentence += rng.choice("....??!")
            sentences.append(sentence)
        texts.append(" ".join(sentences) + "\n")
    return texts


def write_fixture_corpus(root: Path, seed: int = 20250811, n_docs: int = 24,
                         sentences_per_doc: int = 640) -> FixtureCorpus:
    root.mkdir(parents=True, exist_ok=True)
    texts = build_fixture_texts(seed=seed, n_docs=n_docs, sentences_per_doc=sentences_per_doc)
    doc_paths = []
    for i, text in enumerate(texts):
        p = root / f"doc{i:03d}.txt"
        p.write_text(text, encoding="utf-8")
        doc_paths.append(p)
    manifest = root / "manifest.txt"
    manifest.write_text("".join(f"doc{i:03d}.txt\n" for i in range(len(texts))), encoding="utf-8")
    return FixtureCorpus(root=root, manifest=manifest, doc_paths=doc_paths, texts=texts, seed=seed)


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory) -> FixtureCorpus:
    root = tmp_path_factory.mktemp("fixture_corpus")
    return write_fixture_corpus(root)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory) -> FixtureCorpus:
    """A few-document corpus for tests that re-run pipelines repeatedly."""
    root = tmp_path_factory.mktemp("small_corpus")
    return write_fixture_corpus(root, seed=99, n_docs=4, sentences_per_doc=60)
