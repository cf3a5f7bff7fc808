"""mlm-score: masked-LM scoring over disambiguation JSONL files.

Exit codes: 0 success, 1 invalid input, 2 model/runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .scorer import (
    AGGREGATIONS,
    AdapterConfig,
    DatasetError,
    ModelLoadError,
    RAW_LOGIT_MEAN,
    score_file,
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlm-score", description=__doc__)
    p.add_argument("--dataset", required=True, help="input dataset JSONL")
    p.add_argument("--out", required=True, help="output scores JSONL")
    p.add_argument("--model", default="bert-base-uncased", help="model name or local path")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--aggregation", choices=list(AGGREGATIONS), default=RAW_LOGIT_MEAN)
    p.add_argument("--device", default="auto", help="auto | cpu | cuda | cuda:N")
    p.add_argument("--max-length", type=int, default=None, help="context budget override")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = AdapterConfig(
            model=args.model,
            batch_size=args.batch_size,
            aggregation=args.aggregation,
            device=args.device,
            max_length=args.max_length,
        )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        run = score_file(args.dataset, args.out, config)
    except (DatasetError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ModelLoadError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(
        f"scored {run.n_instances} instances ({run.n_truncated} truncated) -> {args.out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
