"""A tiny randomly initialized masked LM saved locally, so scoring runs
offline and deterministically."""

import json
import string

import pytest
import torch

WORDS = [
    "the", "a", "cat", "sat", "on", "mat", "play", "##ing",
    "i", "am", "from", "form", "york", "sign", "now", "river", "bank",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    from tokenizers import BertWordPieceTokenizer
    from transformers import BertConfig, BertForMaskedLM, PreTrainedTokenizerFast

    d = tmp_path_factory.mktemp("tiny_mlm")
    letters = list(string.ascii_lowercase)
    vocab = (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        + letters
        + ["##" + c for c in letters]
        + WORDS
    )
    vocab_file = d / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    backend = BertWordPieceTokenizer(vocab=str(vocab_file), lowercase=True)
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=24,
    )
    torch.manual_seed(1234)
    model = BertForMaskedLM(config)
    model.eval()
    model.save_pretrained(d)
    tokenizer.save_pretrained(d)
    return d


def write_dataset(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


@pytest.fixture()
def sample_dataset(tmp_path):
    rows = [
        {
            "id": "0:0:0",
            "masked_text": "i am [MASK] york",
            "candidates": ["form", "from"],
            "gold_index": 1,
            "umbrella": "form",
            "source": {},
        },
        {
            "id": "0:1:0",
            "masked_text": "the cat sat on the [MASK]",
            "candidates": ["mat", "playing"],
            "gold_index": 0,
            "umbrella": "amt",
            "source": {},
        },
        {
            "id": "1:0:0",
            "masked_text": "sign the [MASK] now",
            "candidates": ["form", "from"],
            "gold_index": 0,
            "umbrella": "form",
            "source": {},
        },
    ]
    return write_dataset(tmp_path / "dataset.jsonl", rows)
