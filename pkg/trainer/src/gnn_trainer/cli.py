"""Command line: train on a sample file, snapshot one container per epoch."""

from __future__ import annotations

import argparse
import sys

from .gradcheck import gradient_check
from .train import TrainConfig, train_gnn


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gnn-trainer",
        description="Train hypergraph clause scorers from prover samples")
    ap.add_argument("--samples", help="training samples JSONL")
    ap.add_argument("--out-dir", help="where epoch-<e>.gnn containers go")
    ap.add_argument("--epochs", type=int, default=10)
    ap.add_argument("--learning-rate", type=float, default=1e-3)
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--rounds", type=int, default=5)
    ap.add_argument("--batch-clauses", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grad-check", action="store_true",
                    help="run the toy-graph gradient check and exit")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.grad_check:
        err = gradient_check()
        print(f"max relative gradient error {err:.3e}")
        return 0 if err < 1e-4 else 1
    if not args.samples or not args.out_dir:
        print("error: --samples and --out-dir are required", file=sys.stderr)
        return 2
    config = TrainConfig(epochs=args.epochs,
                         learning_rate=args.learning_rate, dim=args.dim,
                         rounds=args.rounds,
                         batch_clauses=args.batch_clauses, seed=args.seed)
    try:
        history = train_gnn(args.samples, args.out_dir, config)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"trained {config.epochs} epochs; "
          f"loss {history[0]:.4f} -> {history[-1]:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
