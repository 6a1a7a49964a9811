"""Experiment orchestration: corpus evaluation, grid search, learning loop,
greedy cover and the feature-collision report.

All batch operations merge per-problem results in problem-name order, so
output does not depend on worker scheduling; abstract-time runs (generated
clause cap) are machine independent.
"""

from __future__ import annotations

import csv
import json
import random
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .features import DEFAULT_BASE, clause_vector, feature_triple, goal_vector, problem_features
from .gbdt import GbdtModel, GbdtParams, classification_rates, train_gbdt
from .gnn import BatchedGnnEvaluator, GnnWeights, load_weights
from .guidance import GbdtClauseEvaluator
from .saturation import (
    PROVED,
    Limits,
    Strategy,
    TrainingSample,
    extract_training_sample,
    given_clause_loop,
)
from .terms import (
    ROLE_AXIOM,
    ROLE_GOAL,
    Clause,
    Problem,
    clause_key,
    collect_signature,
)
from .tptp import format_clause_body, parse_clause_body

ABSTRACT_CAP_DEFAULT = 5000
REAL_TIME_DEFAULT = 10.0

RECORD_FIELDS = ("problem", "strategy", "status", "processed", "generated",
                 "seconds")


@dataclass
class EvalRecord:
    problem: str
    strategy: str
    status: str
    processed: int
    generated: int
    seconds: float


@dataclass
class StrategySpec:
    """A strategy description that can be bound to any problem.

    Evaluators hold per-problem state (goal/problem vectors, context), so
    each proof attempt gets a fresh binding.
    """

    mode: str = "base"
    id: str = "base"
    gbdt_model: GbdtModel | None = None
    gnn_weights: GnnWeights | None = None
    query_size: int = 128
    context_size: int = 512
    anonymize: bool = True

    def bind(self, problem: Problem) -> Strategy:
        evaluator = None
        if self.mode != "base":
            if self.gbdt_model is not None:
                evaluator = GbdtClauseEvaluator(self.gbdt_model, problem,
                                                self.anonymize)
            elif self.gnn_weights is not None:
                evaluator = BatchedGnnEvaluator(self.gnn_weights, problem,
                                                self.query_size,
                                                self.context_size)
            else:
                raise ValueError(f"mode {self.mode!r} needs a model")
        return Strategy(mode=self.mode, evaluator=evaluator, id=self.id)


def _run_one(args):
    name, problem, spec, limits = args
    try:
        result = given_clause_loop(problem, spec.bind(problem), limits)
    except Exception as exc:  # recorded, never aborts the batch
        return (EvalRecord(name, spec.id, f"error: {exc}", 0, 0, 0.0), None)
    record = EvalRecord(name, spec.id, result.status, result.processed_count,
                        result.generated, round(result.seconds, 3))
    sample = None
    if result.status == PROVED:
        sample = extract_training_sample(result, problem)
    return (record, sample)


def evaluate_strategy(problems: list[tuple[str, Problem]], spec: StrategySpec,
                      limits: Limits | None = None, jobs: int = 1
                      ) -> tuple[list[EvalRecord], list[TrainingSample]]:
    """Run every problem independently; never aborts on one failure.

    Default limits are the abstract-time cap of 5000 generated clauses.
    Results are merged in problem-name order regardless of jobs.
    """
    limits = limits or Limits(max_generated=ABSTRACT_CAP_DEFAULT)
    tasks = [(name, problem, spec, limits)
             for name, problem in sorted(problems, key=lambda np_: np_[0])]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_one, tasks))
    else:
        outcomes = [_run_one(t) for t in tasks]
    records = [rec for rec, _ in outcomes]
    samples = [s for _, s in outcomes if s is not None]
    return records, samples


# ---------------------------------------------------------------------------
# Records and samples on disk


def write_records_csv(records: list[EvalRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for r in records:
            writer.writerow([r.problem, r.strategy, r.status, r.processed,
                             r.generated, r.seconds])


def read_records_csv(path) -> list[EvalRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            records.append(EvalRecord(row["problem"], row["strategy"],
                                      row["status"], int(row["processed"]),
                                      int(row["generated"]),
                                      float(row["seconds"])))
    return records


class SampleArchive:
    """Cumulative training samples, one merged record per problem.

    Clauses are deduplicated per problem by structural equality after
    variable normalization; a clause that was proof-useful in any run stays
    positive.
    """

    def __init__(self):
        self._by_problem: dict[str, dict] = {}

    def add(self, sample: TrainingSample) -> None:
        entry = self._by_problem.setdefault(
            sample.problem, {"goal": list(sample.goal), "pos": {}, "neg": {}})
        entry["goal"] = list(sample.goal)
        for c in sample.positives:
            key = clause_key(c)
            entry["pos"][key] = c
            entry["neg"].pop(key, None)
        for c in sample.negatives:
            key = clause_key(c)
            if key not in entry["pos"]:
                entry["neg"][key] = c

    def add_all(self, samples) -> None:
        for s in samples:
            self.add(s)

    def total_clauses(self) -> int:
        return sum(len(e["pos"]) + len(e["neg"])
                   for e in self._by_problem.values())

    def problems(self) -> list[str]:
        return sorted(self._by_problem)

    def merged_samples(self) -> list[TrainingSample]:
        out = []
        for name in self.problems():
            e = self._by_problem[name]
            out.append(TrainingSample(list(e["pos"].values()),
                                      list(e["neg"].values()), name,
                                      e["goal"]))
        return out


def write_samples_jsonl(samples: list[TrainingSample], path) -> None:
    """One JSON record per sample: problem, goal, pos, neg clause strings."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            doc = {"problem": s.problem,
                   "goal": [format_clause_body(c) for c in s.goal],
                   "pos": [format_clause_body(c) for c in s.positives],
                   "neg": [format_clause_body(c) for c in s.negatives]}
            fh.write(json.dumps(doc, sort_keys=True) + "\n")


def read_samples_jsonl(path) -> list[TrainingSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            signature: dict = {}
            cid = 0

            def clause(text, role):
                nonlocal cid
                cid += 1
                return parse_clause_body(text, signature, cid, role)

            goal = [clause(t, ROLE_GOAL) for t in doc["goal"]]
            pos = [clause(t, ROLE_AXIOM) for t in doc["pos"]]
            neg = [clause(t, ROLE_AXIOM) for t in doc["neg"]]
            samples.append(TrainingSample(pos, neg, doc["problem"], goal))
    return samples


def sample_problem(sample: TrainingSample) -> Problem:
    """Reconstruct a problem view of one sample for featurization.

    Goal clauses keep their role; positives and negatives count as axioms.
    Used when training from sample files, where the original axiom set is
    not available.
    """
    clauses = []
    for c in sample.goal:
        clauses.append(Clause(len(clauses) + 1, c.literals, ROLE_GOAL))
    for c in sample.positives + sample.negatives:
        clauses.append(Clause(len(clauses) + 1, c.literals, ROLE_AXIOM))
    return Problem(sample.problem, clauses, collect_signature(clauses))


def samples_to_training_data(samples: list[TrainingSample],
                             anonymize: bool = True,
                             base: int = DEFAULT_BASE):
    """Labeled feature triples (label 1 for proof-useful clauses)."""
    data = []
    for s in samples:
        problem = sample_problem(s)
        gvec = goal_vector(problem, anonymize, base)
        pvec = problem_features(problem)
        for c in s.positives:
            data.append((feature_triple(c, problem, anonymize, base,
                                        goal_vec=gvec, problem_vec=pvec), 1))
        for c in s.negatives:
            data.append((feature_triple(c, problem, anonymize, base,
                                        goal_vec=gvec, problem_vec=pvec), 0))
    return data


# ---------------------------------------------------------------------------
# Grid search


GBDT_LEVEL_GRID = tuple(GbdtParams(growth="level", depth=d) for d in (9, 12, 16))
GBDT_LEAF_GRID = tuple(GbdtParams(growth="leaf", depth=d, leaves=l)
                       for d in (10, 20, 30, 40) for l in (1200, 1500, 1800))
GNN_GRID = tuple((e, q, c) for e in (10, 20, 50, 75, 100)
                 for q in (64, 128, 192, 256, 512)
                 for c in (512, 768, 1024, 1536))


@dataclass
class GridOutcome:
    config: object
    solved: int
    total_processed: int
    records: list[EvalRecord]
    model: object = None
    error: str | None = None


def _solved_count(records: list[EvalRecord]) -> tuple[int, int]:
    solved = sum(1 for r in records if r.status == PROVED)
    processed = sum(r.processed for r in records)
    return solved, processed


def grid_search_gbdt(grid, archive_samples, dev_problems,
                     limits: Limits | None = None, anonymize: bool = True,
                     base: int = DEFAULT_BASE, jobs: int = 1
                     ) -> tuple[GbdtParams, GbdtModel, list[GridOutcome]]:
    """Train each configuration and keep the best on the dev subset.

    Best = most problems solved in cooperative mode; ties prefer fewer
    total processed clauses, then the lexicographically smaller params.
    """
    data = samples_to_training_data(archive_samples, anonymize, base)
    outcomes = []
    for params in grid:
        try:
            model = train_gbdt(data, params)
        except Exception as exc:
            outcomes.append(GridOutcome(params, -1, 0, [], None, str(exc)))
            continue
        spec = StrategySpec(mode="coop", id=f"grid:{params.sort_key()}",
                            gbdt_model=model, anonymize=anonymize)
        records, _ = evaluate_strategy(dev_problems, spec, limits, jobs)
        solved, processed = _solved_count(records)
        outcomes.append(GridOutcome(params, solved, processed, records, model))
    viable = [o for o in outcomes if o.error is None]
    if not viable:
        raise RuntimeError("every grid configuration failed to train")
    best = min(viable, key=lambda o: (-o.solved, o.total_processed,
                                      o.config.sort_key()))
    return best.config, best.model, outcomes


def grid_search_gnn(grid, containers: dict[int, GnnWeights], dev_problems,
                    limits: Limits | None = None, jobs: int = 1
                    ) -> tuple[tuple, GnnWeights, list[GridOutcome]]:
    """Pick the best (epoch, query size, context size) on the dev subset."""
    outcomes = []
    for config in grid:
        epoch, q, c = config
        weights = containers.get(epoch)
        if weights is None:
            outcomes.append(GridOutcome(config, -1, 0, [], None,
                                        f"no container for epoch {epoch}"))
            continue
        spec = StrategySpec(mode="coop", id=f"grid:e{epoch},q{q},c{c}",
                            gnn_weights=weights, query_size=q, context_size=c)
        records, _ = evaluate_strategy(dev_problems, spec, limits, jobs)
        solved, processed = _solved_count(records)
        outcomes.append(GridOutcome(config, solved, processed, records,
                                    weights))
    viable = [o for o in outcomes if o.error is None]
    if not viable:
        raise RuntimeError("no GNN grid configuration was usable")
    best = min(viable, key=lambda o: (-o.solved, o.total_processed, o.config))
    return best.config, best.model, outcomes


# ---------------------------------------------------------------------------
# Learning / evaluation loop


def dev_split(names: list[str], seed: int = 0) -> list[str]:
    """Fixed random 10% of the corpus (at least one problem)."""
    ordered = sorted(names)
    random.Random(seed).shuffle(ordered)
    return sorted(ordered[:max(1, len(ordered) // 10)])


@dataclass
class LoopIteration:
    index: int
    config: object
    model: object
    coop_records: list[EvalRecord]
    solo_records: list[EvalRecord]
    grid_outcomes: list[GridOutcome]
    archive_clauses: int
    rates: tuple[float, float] | None = None  # TPR/TNR on this round's runs


@dataclass
class LoopState:
    base_records: list[EvalRecord]
    iterations: list[LoopIteration] = field(default_factory=list)


def run_trainer(samples_path, out_dir, trainer_cmd, epochs: int, dim: int,
                rounds: int, seed: int, batch_clauses: int = 256,
                learning_rate: float = 1e-3) -> dict[int, GnnWeights]:
    """Invoke the external trainer command and load its epoch containers."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cmd = list(trainer_cmd) + [
        "--samples", str(samples_path), "--out-dir", str(out_dir),
        "--epochs", str(epochs), "--dim", str(dim), "--rounds", str(rounds),
        "--seed", str(seed), "--batch-clauses", str(batch_clauses),
        "--learning-rate", str(learning_rate),
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"trainer failed ({proc.returncode}):\n"
                           f"{proc.stdout}\n{proc.stderr}")
    containers = {}
    for path in sorted(out_dir.glob("epoch-*.gnn")):
        epoch = int(path.stem.split("-")[1])
        containers[epoch] = load_weights(path)
    if not containers:
        raise RuntimeError(f"trainer produced no containers in {out_dir}")
    return containers


def learning_loop(problems: list[tuple[str, Problem]], family: str,
                  iterations: int, base_spec: StrategySpec | None = None,
                  limits: Limits | None = None, seed: int = 0,
                  gbdt_grid=None, gnn_grid=None, anonymize: bool = True,
                  base: int = DEFAULT_BASE, jobs: int = 1,
                  trainer_cmd=("gnn-trainer",), trainer_epochs: int = 4,
                  gnn_dim: int = 32, gnn_rounds: int = 5,
                  work_dir=None) -> LoopState:
    """Iterate evaluate -> train -> grid-search -> evaluate.

    Iteration 0 evaluates the base strategy to seed the archive; each
    iteration trains on the cumulative archive, grid-searches on the fixed
    dev subset, and evaluates the winner in cooperative and solo modes on
    the full corpus.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    if family not in ("gbdt", "gnn"):
        raise ValueError(f"unknown model family {family!r}")
    base_spec = base_spec or StrategySpec()
    limits = limits or Limits(max_generated=ABSTRACT_CAP_DEFAULT)
    names = [n for n, _ in problems]
    dev_names = set(dev_split(names, seed))
    dev_problems = [(n, p) for n, p in problems if n in dev_names]

    base_records, base_samples = evaluate_strategy(problems, base_spec,
                                                   limits, jobs)
    if not base_samples:
        raise RuntimeError("base strategy solved nothing; cannot bootstrap")
    archive = SampleArchive()
    archive.add_all(base_samples)
    state = LoopState(base_records)

    if family == "gbdt" and gbdt_grid is None:
        gbdt_grid = GBDT_LEVEL_GRID
    if family == "gnn" and gnn_grid is None:
        gnn_grid = GNN_GRID

    work_dir = Path(work_dir) if work_dir is not None else None

    for i in range(iterations):
        merged = archive.merged_samples()
        if family == "gbdt":
            config, model, outcomes = grid_search_gbdt(
                gbdt_grid, merged, dev_problems, limits, anonymize, base, jobs)
            coop = StrategySpec(mode="coop", id=f"coop:D{i}",
                                gbdt_model=model, anonymize=anonymize)
            solo = StrategySpec(mode="solo", id=f"solo:D{i}",
                                gbdt_model=model, anonymize=anonymize)
        else:
            if work_dir is None:
                raise ValueError("gnn family needs work_dir for the trainer")
            it_dir = work_dir / f"iter{i}"
            it_dir.mkdir(parents=True, exist_ok=True)
            samples_path = it_dir / "samples.jsonl"
            write_samples_jsonl(merged, samples_path)
            containers = run_trainer(samples_path, it_dir / "containers",
                                     trainer_cmd, trainer_epochs, gnn_dim,
                                     gnn_rounds, seed)
            usable = [(e, q, c) for e, q, c in gnn_grid if e in containers]
            if not usable:
                # Grid epochs beyond what was trained: fall back to the last.
                qc_pairs = sorted({(q, c) for _, q, c in gnn_grid})
                usable = [(max(containers), q, c) for q, c in qc_pairs]
            config, model, outcomes = grid_search_gnn(
                usable, containers, dev_problems, limits, jobs)
            _, q, c = config
            coop = StrategySpec(mode="coop", id=f"coop:N{i}",
                                gnn_weights=model, query_size=q,
                                context_size=c)
            solo = StrategySpec(mode="solo", id=f"solo:N{i}",
                                gnn_weights=model, query_size=q,
                                context_size=c)

        coop_records, coop_samples = evaluate_strategy(problems, coop,
                                                       limits, jobs)
        solo_records, solo_samples = evaluate_strategy(problems, solo,
                                                       limits, jobs)
        rates = None
        if family == "gbdt" and (coop_samples or solo_samples):
            # classifier accuracy on samples from this model's own runs,
            # which were not part of its training archive
            held_out = samples_to_training_data(coop_samples + solo_samples,
                                                anonymize, base)
            rates = classification_rates(model, held_out)
        archive.add_all(coop_samples)
        archive.add_all(solo_samples)
        state.iterations.append(LoopIteration(
            i, config, model, coop_records, solo_records, outcomes,
            archive.total_clauses(), rates))
    return state


# ---------------------------------------------------------------------------
# Greedy cover


def solved_sets(records: list[EvalRecord]) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for r in records:
        out.setdefault(r.strategy, set())
        if r.status == PROVED:
            out[r.strategy].add(r.problem)
    return out


def greedy_cover(by_strategy: dict[str, set[str]],
                 max_size: int | None = None) -> list[tuple[str, int]]:
    """Order strategies by marginal problems covered; ties by strategy id.

    Stops when no remaining strategy adds coverage (or at max_size).
    """
    covered: set[str] = set()
    remaining = dict(by_strategy)
    order: list[tuple[str, int]] = []
    while remaining:
        if max_size is not None and len(order) >= max_size:
            break
        best = min(remaining,
                   key=lambda s: (-len(remaining[s] - covered), s))
        gain = len(remaining[best] - covered)
        if gain == 0:
            break
        order.append((best, gain))
        covered |= remaining.pop(best)
    return order


# ---------------------------------------------------------------------------
# Collision report


def collision_fraction(clauses: list[Clause], anonymize: bool,
                       base: int = DEFAULT_BASE) -> float:
    """Fraction of distinct clauses sharing a flattened clause vector."""
    distinct: dict[tuple, Clause] = {}
    for c in clauses:
        distinct.setdefault(clause_key(c), c)
    if len(distinct) < 2:
        return 0.0
    groups: dict[tuple, int] = {}
    for c in distinct.values():
        vec = clause_vector(c, anonymize, base)
        key = tuple(sorted(vec.entries.items()))
        groups[key] = groups.get(key, 0) + 1
    colliding = sum(n for n in groups.values() if n > 1)
    return colliding / len(distinct)


def collision_report(samples: list[TrainingSample],
                     base: int = DEFAULT_BASE) -> dict[str, float]:
    """Collision fractions with and without anonymization, side by side."""
    clauses: list[Clause] = []
    for s in samples:
        clauses.extend(s.positives)
        clauses.extend(s.negatives)
    return {
        "named": collision_fraction(clauses, anonymize=False, base=base),
        "anonymized": collision_fraction(clauses, anonymize=True, base=base),
        "clauses": float(len(clauses)),
    }
