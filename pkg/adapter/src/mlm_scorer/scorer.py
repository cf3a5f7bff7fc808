"""Masked-LM candidate scoring over the disambiguation JSONL contract.

Input lines need (id, masked_text, candidates); the masked text carries
exactly one "[MASK]".  For each candidate the scorer takes the model's
logits at the mask position and averages them over the candidate's
subword tokens; the resulting one-scalar-per-candidate vectors are
written as JSONL (id, scores, meta) in input order.

Raw-logit averaging is the default; a log-probability mode exists
behind a flag because raw logits are not calibrated across candidates
with different subword counts (documented caveat, same selection rule).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import torch

RAW_LOGIT_MEAN = "raw-logit-mean"
LOG_PROB_MEAN = "log-prob-mean"
AGGREGATIONS = (RAW_LOGIT_MEAN, LOG_PROB_MEAN)

MASK = "[MASK]"


class DatasetError(ValueError):
    """A dataset line violates the JSONL contract."""


class ModelLoadError(RuntimeError):
    """The configured model or tokenizer could not be loaded."""


@dataclass(frozen=True)
class AdapterConfig:
    model: str = "bert-base-uncased"
    batch_size: int = 32
    aggregation: str = RAW_LOGIT_MEAN
    device: str = "auto"
    max_length: Optional[int] = None  # context budget override (tokens)

    def __post_init__(self):
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass(slots=True)
class Instance:
    id: str
    masked_text: str
    candidates: List[str]


@dataclass
class ScoreRun:
    n_instances: int = 0
    n_truncated: int = 0


def read_instances(path: str | Path) -> Iterator[Instance]:
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                d = json.loads(raw)
                inst = Instance(
                    id=str(d["id"]),
                    masked_text=str(d["masked_text"]),
                    candidates=[str(c) for c in d["candidates"]],
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as e:
                raise DatasetError(f"{path}: line {ln}: invalid instance: {e}") from None
            if inst.masked_text.count(MASK) != 1:
                raise DatasetError(f"{path}: line {ln}: expected exactly one {MASK}")
            if not inst.candidates:
                raise DatasetError(f"{path}: line {ln}: empty candidate list")
            yield inst


def resolve_device(hint: str) -> torch.device:
    if hint == "auto":
        return torch.device("cuda" if torch.cuda.is_available() else "cpu")
    return torch.device(hint)


def load_model(config: AdapterConfig):
    """Load tokenizer + masked LM; failures surface as ModelLoadError."""
    from transformers import AutoModelForMaskedLM, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.model)
        model = AutoModelForMaskedLM.from_pretrained(config.model)
    except Exception as e:
        raise ModelLoadError(f"cannot load model {config.model!r}: {e}") from e
    device = resolve_device(config.device)
    model.to(device)
    model.eval()
    return tokenizer, model, device


def _context_budget(config: AdapterConfig, tokenizer, model) -> int:
    if config.max_length is not None:
        return config.max_length
    budget = getattr(model.config, "max_position_embeddings", None) or 512
    model_max = getattr(tokenizer, "model_max_length", None)
    if model_max and model_max < 100_000:
        budget = min(budget, model_max)
    return budget


def _truncate_around_mask(ids: List[int], mask_index: int, budget: int) -> Tuple[List[int], int]:
    """Symmetric window around the mask, keeping the outer special tokens."""
    inner = ids[1:-1]
    mask_inner = mask_index - 1
    keep = budget - 2
    half = keep // 2
    start = mask_inner - half
    if start < 0:
        start = 0
    elif start + keep > len(inner):
        start = len(inner) - keep
    window = inner[start : start + keep]
    new_ids = [ids[0]] + window + [ids[-1]]
    return new_ids, mask_inner - start + 1


class Scorer:
    """Batched mask-position scoring with a fixed tokenizer/model pair."""

    def __init__(self, tokenizer, model, device: torch.device, config: AdapterConfig):
        self.tokenizer = tokenizer
        self.model = model
        self.device = device
        self.config = config
        self._candidate_ids: Dict[str, List[int]] = {}
        if tokenizer.mask_token_id is None:
            raise ModelLoadError(f"tokenizer for {config.model!r} has no mask token")

    def candidate_token_ids(self, candidate: str) -> List[int]:
        ids = self._candidate_ids.get(candidate)
        if ids is None:
            pieces = self.tokenizer.tokenize(candidate)
            if not pieces:
                pieces = [self.tokenizer.unk_token]
            ids = self.tokenizer.convert_tokens_to_ids(pieces)
            self._candidate_ids[candidate] = ids
        return ids

    def _prepare(self, inst: Instance, budget: int) -> Tuple[List[int], int, bool]:
        ids = self.tokenizer(inst.masked_text, add_special_tokens=True)["input_ids"]
        mask_id = self.tokenizer.mask_token_id
        positions = [i for i, t in enumerate(ids) if t == mask_id]
        if len(positions) != 1:
            raise DatasetError(
                f"instance {inst.id}: tokenization produced {len(positions)} mask tokens"
            )
        truncated = False
        mask_index = positions[0]
        if len(ids) > budget:
            ids, mask_index = _truncate_around_mask(ids, mask_index, budget)
            truncated = True
        return ids, mask_index, truncated

    def score_batch(self, batch: List[Instance], budget: int) -> Iterator[Tuple[Instance, List[float], bool]]:
        prepared = [self._prepare(inst, budget) for inst in batch]
        pad_id = self.tokenizer.pad_token_id or 0
        width = max(len(ids) for ids, _, _ in prepared)
        input_ids = torch.full((len(batch), width), pad_id, dtype=torch.long)
        attention = torch.zeros((len(batch), width), dtype=torch.long)
        for row, (ids, _, _) in enumerate(prepared):
            input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            attention[row, : len(ids)] = 1
        with torch.no_grad():
            logits = self.model(
                input_ids=input_ids.to(self.device),
                attention_mask=attention.to(self.device),
            ).logits
        for row, (inst, (_, mask_index, truncated)) in enumerate(zip(batch, prepared)):
            mask_logits = logits[row, mask_index]
            if self.config.aggregation == LOG_PROB_MEAN:
                mask_logits = torch.log_softmax(mask_logits, dim=-1)
            scores = []
            for cand in inst.candidates:
                ids = self.candidate_token_ids(cand)
                scores.append(float(mask_logits[ids].mean()))
            yield inst, scores, truncated


def score_file(
    dataset_path: str | Path,
    out_path: str | Path,
    config: AdapterConfig,
    scorer: Scorer | None = None,
) -> ScoreRun:
    """Score every instance of a dataset file, preserving input order."""
    if scorer is None:
        tokenizer, model, device = load_model(config)
        scorer = Scorer(tokenizer, model, device, config)
    budget = _context_budget(config, scorer.tokenizer, scorer.model)
    run = ScoreRun()
    meta_base = {"aggregation": config.aggregation, "model": config.model}
    with open(out_path, "w", encoding="utf-8", newline="\n") as out:
        batch: List[Instance] = []

        def flush():
            for inst, scores, truncated in scorer.score_batch(batch, budget):
                if not all(math.isfinite(s) for s in scores):
                    raise DatasetError(f"instance {inst.id}: non-finite score")
                line = {
                    "id": inst.id,
                    "scores": scores,
                    "meta": {**meta_base, "truncated": truncated},
                }
                out.write(json.dumps(line, ensure_ascii=False, sort_keys=True) + "\n")
                run.n_instances += 1
                run.n_truncated += int(truncated)
            batch.clear()

        for inst in read_instances(dataset_path):
            batch.append(inst)
            if len(batch) >= config.batch_size:
                flush()
        if batch:
            flush()
    return run
