"""Command-line interface.

Exit codes: 0 success (for `prove`: proof found), 1 no proof (saturated or
resource limit), 2 usage or configuration error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .driver import (
    ABSTRACT_CAP_DEFAULT,
    GBDT_LEAF_GRID,
    GBDT_LEVEL_GRID,
    GNN_GRID,
    REAL_TIME_DEFAULT,
    SampleArchive,
    StrategySpec,
    collision_report,
    evaluate_strategy,
    greedy_cover,
    grid_search_gbdt,
    grid_search_gnn,
    learning_loop,
    read_records_csv,
    read_samples_jsonl,
    samples_to_training_data,
    solved_sets,
    write_records_csv,
    write_samples_jsonl,
)
from .features import DEFAULT_BASE, dump_line, feature_triple
from .gbdt import GbdtParams, load_model, save_model, train_gbdt
from .gnn import load_weights
from .guidance import GbdtClauseEvaluator
from .saturation import PROVED, Limits, format_proof, format_trace, given_clause_loop
from .terms import ROLE_GOAL
from .tptp import TptpError, parse_problem


class CliError(Exception):
    """Configuration problem; reported with exit code 2."""


def _jobs_default() -> int:
    try:
        return max(1, int(os.environ.get("ANON_ENIGMA_THREADS", "1")))
    except ValueError:
        return 1


def _load_problem(path: str):
    p = Path(path)
    if not p.is_file():
        raise CliError(f"problem file not found: {path}")
    return parse_problem(p.read_text(encoding="utf-8"), p.stem)


def _load_corpus(paths: list[str]):
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(p.glob("*.p")))
        elif p.is_file():
            files.append(p)
        else:
            raise CliError(f"no such problem file or directory: {raw}")
    if not files:
        raise CliError("no problems found")
    return [(f.stem, parse_problem(f.read_text(encoding="utf-8"), f.stem))
            for f in files]


def _load_any_model(path: str):
    """Returns ("gbdt", model) or ("gnn", weights), sniffing the format."""
    p = Path(path)
    if not p.is_file():
        raise CliError(f"model file not found: {path}")
    with open(p, "rb") as fh:
        first = fh.read(1)
    if first == b"{":
        return "gbdt", load_model(p)
    return "gnn", load_weights(p)


def _spec_from_args(args) -> StrategySpec:
    if args.mode == "base":
        return StrategySpec(mode="base", id="base")
    if not getattr(args, "model", None):
        raise CliError(f"--mode {args.mode} requires --model")
    kind, model = _load_any_model(args.model)
    anonymize = args.anonymize == "on"
    if kind == "gbdt":
        return StrategySpec(mode=args.mode, id=f"{args.mode}:gbdt",
                            gbdt_model=model, anonymize=anonymize)
    return StrategySpec(mode=args.mode, id=f"{args.mode}:gnn",
                        gnn_weights=model, query_size=args.query_size,
                        context_size=args.context_size)


def _limits_from_args(args) -> Limits:
    if getattr(args, "wall", None) is not None and not args.abstract:
        return Limits(wall_time=args.wall)
    return Limits(max_generated=args.cap)


def _add_common(sub, with_model=True):
    sub.add_argument("--mode", choices=("base", "solo", "coop"),
                     default="base")
    if with_model:
        sub.add_argument("--model", help="GBDT .json or GNN .gnn container")
    sub.add_argument("--anonymize", choices=("on", "off"), default="on")
    sub.add_argument("--query-size", type=int, default=128,
                     help="GNN evaluation batch size q")
    sub.add_argument("--context-size", type=int, default=512,
                     help="GNN context clauses c")
    sub.add_argument("--abstract", action="store_true",
                     help="use the generated-clause cap (default)")
    sub.add_argument("--cap", type=int, default=ABSTRACT_CAP_DEFAULT,
                     help="generated-clause cap for abstract time")
    sub.add_argument("--wall", type=float, nargs="?", default=None,
                     const=REAL_TIME_DEFAULT,
                     help=f"real-time mode: per-problem wall-clock seconds "
                          f"(default {REAL_TIME_DEFAULT})")
    sub.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="satguide",
        description="Learning-guided saturation prover for first-order CNF")
    sp = ap.add_subparsers(dest="command", required=True)

    prove = sp.add_parser("prove", help="prove one problem")
    prove.add_argument("--problem", required=True)
    _add_common(prove)
    prove.add_argument("--no-trace", action="store_true")

    ev = sp.add_parser("eval", help="evaluate a strategy over a corpus")
    ev.add_argument("--problems", nargs="+", required=True,
                    help="problem files or directories of .p files")
    _add_common(ev)
    ev.add_argument("--records", help="write eval records CSV here")
    ev.add_argument("--samples", help="write training samples JSONL here")
    ev.add_argument("--jobs", type=int, default=_jobs_default())

    tg = sp.add_parser("train-gbdt", help="train a GBDT from sample files")
    tg.add_argument("--samples", required=True)
    tg.add_argument("--out", required=True)
    tg.add_argument("--growth", choices=("level", "leaf"), default="leaf")
    tg.add_argument("--depth", type=int, default=6)
    tg.add_argument("--leaves", type=int, default=32)
    tg.add_argument("--eta", type=float, default=0.2)
    tg.add_argument("--rounds", type=int, default=20)
    tg.add_argument("--base", type=int, default=DEFAULT_BASE,
                    help="feature hash base (power of two)")
    tg.add_argument("--anonymize", choices=("on", "off"), default="on")

    sc = sp.add_parser("score", help="print clause weights under a model")
    sc.add_argument("--model", required=True)
    sc.add_argument("--problem", required=True)
    sc.add_argument("--anonymize", choices=("on", "off"), default="on")
    sc.add_argument("--query-size", type=int, default=128)
    sc.add_argument("--context-size", type=int, default=512)

    gr = sp.add_parser("grid", help="meta-parameter grid search")
    gr.add_argument("--family", choices=("gbdt", "gnn"), required=True)
    gr.add_argument("--samples", help="training samples JSONL (gbdt)")
    gr.add_argument("--containers", help="directory of epoch-<e>.gnn (gnn)")
    gr.add_argument("--problems", nargs="+", required=True,
                    help="dev problems")
    gr.add_argument("--grid", help="JSON grid spec (file or inline)")
    gr.add_argument("--out", help="write the winning GBDT model here")
    gr.add_argument("--base", type=int, default=DEFAULT_BASE)
    gr.add_argument("--anonymize", choices=("on", "off"), default="on")
    gr.add_argument("--cap", type=int, default=ABSTRACT_CAP_DEFAULT)
    gr.add_argument("--jobs", type=int, default=_jobs_default())

    lp = sp.add_parser("loop", help="learning/evaluation loop")
    lp.add_argument("--family", choices=("gbdt", "gnn"), required=True)
    lp.add_argument("--problems", nargs="+", required=True)
    lp.add_argument("--iterations", type=int, default=3)
    lp.add_argument("--out-dir", required=True)
    lp.add_argument("--cap", type=int, default=ABSTRACT_CAP_DEFAULT)
    lp.add_argument("--seed", type=int, default=0)
    lp.add_argument("--base", type=int, default=DEFAULT_BASE)
    lp.add_argument("--anonymize", choices=("on", "off"), default="on")
    lp.add_argument("--jobs", type=int, default=_jobs_default())
    lp.add_argument("--grid", help="JSON grid spec (file or inline)")
    lp.add_argument("--trainer-cmd", default="gnn-trainer",
                    help="external GNN trainer command")
    lp.add_argument("--trainer-epochs", type=int, default=4)
    lp.add_argument("--gnn-dim", type=int, default=32)
    lp.add_argument("--gnn-rounds", type=int, default=5)

    cv = sp.add_parser("cover", help="greedy cover over eval records")
    cv.add_argument("--records", nargs="+", required=True)
    cv.add_argument("--top", type=int, default=None)

    cl = sp.add_parser("collisions", help="feature-vector collision report")
    cl.add_argument("--samples", help="training samples JSONL")
    cl.add_argument("--problems", nargs="+",
                    help="problem files; their clauses form the corpus")
    cl.add_argument("--base", type=int, default=DEFAULT_BASE)
    cl.add_argument("--dump", help="write the feature dump here")

    gen = sp.add_parser("gen-corpus", help="write the bundled corpora")
    gen.add_argument("--out-dir", required=True)
    gen.add_argument("--family-size", type=int, default=200)
    return ap


def _cmd_prove(args) -> int:
    problem = _load_problem(args.problem)
    spec = _spec_from_args(args)
    result = given_clause_loop(problem, spec.bind(problem),
                               _limits_from_args(args))
    print(f"status {result.status}")
    print(f"processed {result.processed_count} generated {result.generated}")
    if not args.no_trace:
        print(format_trace(result))
    if result.status == PROVED:
        print("proof:")
        print(format_proof(result))
        return 0
    return 1


def _cmd_eval(args) -> int:
    problems = _load_corpus(args.problems)
    spec = _spec_from_args(args)
    records, samples = evaluate_strategy(problems, spec,
                                         _limits_from_args(args), args.jobs)
    solved = sum(1 for r in records if r.status == PROVED)
    print(f"solved {solved}/{len(records)}")
    if args.records:
        write_records_csv(records, args.records)
    if args.samples:
        archive = SampleArchive()
        archive.add_all(samples)
        write_samples_jsonl(archive.merged_samples(), args.samples)
    return 0


def _cmd_train_gbdt(args) -> int:
    samples = read_samples_jsonl(args.samples)
    if not samples:
        raise CliError("sample file is empty")
    data = samples_to_training_data(samples, args.anonymize == "on",
                                    args.base)
    params = GbdtParams(growth=args.growth, depth=args.depth,
                        leaves=args.leaves, eta=args.eta, rounds=args.rounds)
    model = train_gbdt(data, params)
    model.params["feature_base"] = args.base
    model.params["anonymize"] = args.anonymize
    save_model(model, args.out)
    print(f"trained {len(model.trees)} trees, "
          f"log-loss {model.train_loss[0]:.4f} -> {model.train_loss[-1]:.4f}")
    return 0


def _cmd_score(args) -> int:
    problem = _load_problem(args.problem)
    kind, model = _load_any_model(args.model)
    if kind == "gbdt":
        evaluator = GbdtClauseEvaluator(model, problem,
                                        args.anonymize == "on")
        for clause in problem.clauses:
            print(f"{clause.id} {evaluator.weight(clause):g}")
    else:
        from .gnn import BatchedGnnEvaluator

        evaluator = BatchedGnnEvaluator(model, problem, args.query_size,
                                        args.context_size)
        queries = [c for c in problem.clauses if c.role != ROLE_GOAL]
        for clause in queries:
            evaluator.enqueue(clause)
        weights = dict(evaluator.force_batch())
        for clause in queries:
            print(f"{clause.id} {weights[clause.id]:g}")
    return 0


def _parse_grid(raw: str | None, family: str):
    if raw is None:
        if family == "gbdt":
            return GBDT_LEVEL_GRID + GBDT_LEAF_GRID
        return GNN_GRID
    text = Path(raw).read_text() if Path(raw).is_file() else raw
    doc = json.loads(text)
    if family == "gbdt":
        return tuple(GbdtParams(**entry) for entry in doc)
    return tuple((e["e"], e["q"], e["c"]) for e in doc)


def _cmd_grid(args) -> int:
    problems = _load_corpus(args.problems)
    limits = Limits(max_generated=args.cap)
    grid = _parse_grid(args.grid, args.family)
    if args.family == "gbdt":
        if not args.samples:
            raise CliError("gbdt grid search needs --samples")
        samples = read_samples_jsonl(args.samples)
        config, model, outcomes = grid_search_gbdt(
            grid, samples, problems, limits, args.anonymize == "on",
            args.base, args.jobs)
        for o in outcomes:
            label = o.error or f"solved {o.solved} processed {o.total_processed}"
            print(f"{dict(o.config.sort_key())} -> {label}")
        print(f"best: {dict(config.sort_key())}")
        if args.out:
            model.params["feature_base"] = args.base
            model.params["anonymize"] = args.anonymize
            save_model(model, args.out)
    else:
        if not args.containers:
            raise CliError("gnn grid search needs --containers")
        containers = {}
        for path in sorted(Path(args.containers).glob("epoch-*.gnn")):
            containers[int(path.stem.split("-")[1])] = load_weights(path)
        if not containers:
            raise CliError(f"no epoch-*.gnn in {args.containers}")
        grid = [(e, q, c) for e, q, c in grid if e in containers]
        if not grid:
            raise CliError("grid epochs do not match available containers")
        config, _, outcomes = grid_search_gnn(grid, containers, problems,
                                              limits, args.jobs)
        for o in outcomes:
            label = o.error or f"solved {o.solved} processed {o.total_processed}"
            print(f"e{o.config[0]} q{o.config[1]} c{o.config[2]} -> {label}")
        print(f"best: e{config[0]} q{config[1]} c{config[2]}")
    return 0


def _cmd_loop(args) -> int:
    problems = _load_corpus(args.problems)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kwargs = {}
    if args.grid:
        grid = _parse_grid(args.grid, args.family)
        kwargs["gbdt_grid" if args.family == "gbdt" else "gnn_grid"] = grid
    state = learning_loop(
        problems, args.family, args.iterations,
        limits=Limits(max_generated=args.cap), seed=args.seed,
        anonymize=args.anonymize == "on", base=args.base, jobs=args.jobs,
        trainer_cmd=args.trainer_cmd.split(),
        trainer_epochs=args.trainer_epochs, gnn_dim=args.gnn_dim,
        gnn_rounds=args.gnn_rounds, work_dir=out_dir / "trainer",
        **kwargs)
    write_records_csv(state.base_records, out_dir / "iter0-base.csv")
    tag = "D" if args.family == "gbdt" else "N"
    for it in state.iterations:
        write_records_csv(it.coop_records,
                          out_dir / f"iter{it.index}-coop.csv")
        write_records_csv(it.solo_records,
                          out_dir / f"iter{it.index}-solo.csv")
        if args.family == "gbdt":
            save_model(it.model, out_dir / f"{tag}{it.index}.json")
        coop_solved = sum(1 for r in it.coop_records if r.status == PROVED)
        solo_solved = sum(1 for r in it.solo_records if r.status == PROVED)
        rates = ""
        if it.rates is not None:
            rates = f" tpr={it.rates[0]:.3f} tnr={it.rates[1]:.3f}"
        print(f"{tag}{it.index}: config={it.config} coop={coop_solved} "
              f"solo={solo_solved} archive={it.archive_clauses}{rates}")
    return 0


def _cmd_cover(args) -> int:
    records = []
    for path in args.records:
        records.extend(read_records_csv(path))
    order = greedy_cover(solved_sets(records), args.top)
    total = 0
    for strategy, gain in order:
        total += gain
        print(f"{strategy} +{gain} (cum {total})")
    return 0


def _cmd_collisions(args) -> int:
    if bool(args.samples) == bool(args.problems):
        raise CliError("give exactly one of --samples or --problems")
    if args.samples:
        samples = read_samples_jsonl(args.samples)
    else:
        from .saturation import TrainingSample

        samples = []
        for name, problem in _load_corpus(args.problems):
            samples.append(TrainingSample(list(problem.clauses), [], name,
                                          list(problem.goal)))
    report = collision_report(samples, args.base)
    print(f"clauses {int(report['clauses'])}")
    print(f"named {report['named']:.6f}")
    print(f"anonymized {report['anonymized']:.6f}")
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            for s in samples:
                problem = _sample_problem_for_dump(s)
                for label, clauses in ((1, s.positives), (0, s.negatives)):
                    for c in clauses:
                        triple = feature_triple(c, problem, True, args.base)
                        fh.write(dump_line(s.problem, c.id, label, triple)
                                 + "\n")
    return 0


def _sample_problem_for_dump(sample):
    from .driver import sample_problem

    return sample_problem(sample)


def _cmd_gen_corpus(args) -> int:
    out = Path(args.out_dir)
    sets = {
        "family": corpus_mod.chain_family(args.family_size, seed=0),
        "provable": corpus_mod.provable_suite(),
        "satisfiable": corpus_mod.satisfiable_suite(),
        "invariance": corpus_mod.invariance_corpus(),
    }
    for group, problems in sets.items():
        gdir = out / group
        gdir.mkdir(parents=True, exist_ok=True)
        for name, text in problems:
            (gdir / f"{name}.p").write_text(text, encoding="utf-8")
        print(f"{group}: {len(problems)} problems")
    return 0


_COMMANDS = {
    "prove": _cmd_prove,
    "eval": _cmd_eval,
    "train-gbdt": _cmd_train_gbdt,
    "score": _cmd_score,
    "grid": _cmd_grid,
    "loop": _cmd_loop,
    "cover": _cmd_cover,
    "collisions": _cmd_collisions,
    "gen-corpus": _cmd_gen_corpus,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (CliError, TptpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
