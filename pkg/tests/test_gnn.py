import random
import warnings
from pathlib import Path

import numpy as np
import pytest

from satguide.gnn import (
    BatchedGnnEvaluator,
    NonFiniteError,
    ShapeError,
    SizeError,
    UnknownVersionError,
    build_hypergraph,
    forward,
    forward_reference,
    init_weights,
    load_weights,
    save_weights,
    tensor_spec,
    tensorize,
)
from satguide.gnn.probe import check_probe, probe_scores
from satguide.saturation import Limits, Strategy, given_clause_loop
from satguide.terms import rename_problem
from satguide.tptp import parse_clause_body, parse_problem

FIXTURE = Path(__file__).resolve().parents[1] / "src/satguide/gnn/_fixture"


def clauses_from(texts, start_id=1, role="axiom"):
    sig = {}
    return [parse_clause_body(t, sig, start_id + i, role)
            for i, t in enumerate(texts)]


def test_shared_subterm_single_node():
    cs = clauses_from(["p(a)", "~p(a)"])
    hg = build_hypergraph(cs, [], [])
    # one node for the constant a, two polarity-distinct literal nodes
    assert hg.n_terms == 3
    assert hg.n_symbols == 2
    assert hg.n_clauses == 2


def test_single_ground_unit_counts():
    (c,) = clauses_from(["p(a)"])
    hg = build_hypergraph([c], [], [])
    assert (hg.n_clauses, hg.n_symbols, hg.n_terms) == (1, 2, 2)
    # term edge for a, literal edge for p(a)
    assert len(hg.app_edges) == 2
    kinds = sorted(e.etype for e in hg.app_edges)
    assert kinds == [0, 1]


def test_variable_normalization_shares_nodes():
    # p(X)|q(X) and p(Y)|q(Y) are the same up to variable naming:
    # their literals must collapse onto the same term nodes.
    c1, c2 = clauses_from(["p(X)|q(X)", "p(Y)|q(Y)"])
    hg = build_hypergraph([c1, c2], [], [])
    assert hg.n_terms == 3  # one variable node + two literal nodes
    assert len(hg.clause_edges) == 4


def test_unique_terms_equal_distinct_subterm_count():
    cs = clauses_from(["p(f(g(a)),g(a))", "~p(g(a),f(g(a)))"])
    hg = build_hypergraph(cs, [], [])
    # distinct subterms: a, g(a), f(g(a)); distinct literals: 2
    assert hg.n_terms == 5


def test_disjointness_enforced():
    c1, c2 = clauses_from(["p(a)", "q(a)"])
    with pytest.raises(ValueError):
        build_hypergraph([c1], [c2, c1], [])


def test_renamed_batch_identical_tensorization():
    text = ("cnf(a,axiom,p(f(X),c)|~q(X)).\n"
            "cnf(b,axiom,q(g(c))).\n"
            "cnf(g,negated_conjecture,~p(Y,c)).\n")
    p1 = parse_problem(text)
    p2, _ = rename_problem(p1, seed=3)

    def tensors(p):
        return tensorize(build_hypergraph(p.clauses[:2], [], [p.clauses[2]]))

    t1, t2 = tensors(p1), tensors(p2)
    for name in ("clause_edge_c", "clause_edge_u", "app_result", "app_symbol",
                 "app_etype", "arg_edge", "arg_node", "arg_pos", "goal_mask",
                 "query_mask"):
        assert np.array_equal(getattr(t1, name), getattr(t2, name)), name


def test_renamed_batch_scores_exactly_equal():
    text = ("cnf(a,axiom,p(f(X),c)|~q(X)).\n"
            "cnf(b,axiom,q(g(c))).\n"
            "cnf(g,negated_conjecture,~p(Y,c)).\n")
    p1 = parse_problem(text)
    p2, _ = rename_problem(p1, seed=6)
    w = init_weights(dim=8, rounds=2, seed=8)

    def score(p):
        tg = tensorize(build_hypergraph(p.clauses[:2], [], [p.clauses[2]]))
        return forward(w, tg)

    assert np.array_equal(score(p1), score(p2))


def test_gnn_guided_run_invariant_under_renaming():
    from satguide.corpus import chain_problem
    from satguide.saturation import Limits, Strategy, given_clause_loop

    text = chain_problem(33)
    weights = init_weights(dim=8, rounds=2, seed=12)

    def run(problem):
        ev = BatchedGnnEvaluator(weights, problem, 8, 16)
        return given_clause_loop(problem,
                                 Strategy(mode="coop", evaluator=ev, id="g"),
                                 Limits(max_generated=300))

    original = run(parse_problem(text, "c"))
    renamed, _ = rename_problem(parse_problem(text, "c"), seed=44)
    again = run(renamed)
    assert [(t.clause_id, t.queue) for t in original.trace] == \
        [(t.clause_id, t.queue) for t in again.trace]
    assert original.generated == again.generated
    assert original.status == again.status


def test_zero_weights_equal_scores():
    w = init_weights(dim=8, rounds=2, seed=0, scale=0.0)
    cs = clauses_from(["p(a)", "q(f(a),a)|p(b)", "~r(X)"])
    goal = clauses_from(["~p(c)"], start_id=10, role="negated_conjecture")
    tg = tensorize(build_hypergraph(cs, [], goal))
    scores = forward(w, tg)
    assert len(scores) == 3
    assert np.all(scores == scores[0])


def random_clause_texts(rng):
    preds = ["p", "q"]
    terms = ["a", "b", "X", "Y", "f(a)", "f(X)", "g(a,b)", "g(X,f(Y))"]
    out = []
    for _ in range(rng.randint(1, 4)):
        lits = []
        for _ in range(rng.randint(1, 3)):
            sign = "~" if rng.random() < 0.5 else ""
            nargs = rng.randint(1, 2)
            args = ",".join(rng.choice(terms) for _ in range(nargs))
            lits.append(f"{sign}{rng.choice(preds)}{nargs}({args})")
        out.append("|".join(lits))
    return out


def test_forward_matches_scalar_reference_on_random_graphs():
    rng = random.Random(0)
    worst = 0.0
    for i in range(20):
        sig = {}
        queries = [parse_clause_body(t, sig, j + 1)
                   for j, t in enumerate(random_clause_texts(rng))]
        nq = len(queries)
        context = [parse_clause_body(t, sig, 100 + j)
                   for j, t in enumerate(random_clause_texts(rng))]
        goal = [parse_clause_body(t, sig, 200 + j, "negated_conjecture")
                for j, t in enumerate(random_clause_texts(rng))]
        tg = tensorize(build_hypergraph(queries, context, goal))
        w = init_weights(dim=16, rounds=3, seed=i)
        vec = forward(w, tg)
        ref = forward_reference(w, tg)
        assert vec.shape == (nq,)
        worst = max(worst, float(np.max(np.abs(vec - ref))))
    assert worst <= 1e-6


def test_forward_pure_function_bit_identical():
    cs = clauses_from(["p(f(a))|~q(a)", "q(b)"])
    tg = tensorize(build_hypergraph(cs, [], []))
    w = init_weights(dim=8, rounds=2, seed=4)
    s1 = forward(w, tg)
    s2 = forward(w, tg)
    assert np.array_equal(s1, s2)


def test_query_order_permutation_same_scores():
    texts = ["p(a)|q(b)", "~p(f(a))", "q(g(a,b))"]
    goal_texts = ["~q(X)"]
    sig1 = {}
    q1 = [parse_clause_body(t, sig1, i + 1) for i, t in enumerate(texts)]
    g1 = [parse_clause_body(t, sig1, 50, "negated_conjecture")
          for t in goal_texts]
    sig2 = {}
    # permuted input order, same ids per clause text
    order = [2, 0, 1]
    q2 = [parse_clause_body(texts[j], sig2, j + 1) for j in order]
    g2 = [parse_clause_body(t, sig2, 50, "negated_conjecture")
          for t in goal_texts]
    w = init_weights(dim=8, rounds=2, seed=9)
    s1 = probe_scores(w, q1, [], g1)
    by_id1 = {c.id: s for c, s in zip(q1, s1)}
    s2 = probe_scores(w, sorted(q2, key=lambda c: c.id), [], g2)
    by_id2 = {c.id: s for c, s in
              zip(sorted(q2, key=lambda c: c.id), s2)}
    for cid in by_id1:
        assert by_id1[cid] == pytest.approx(by_id2[cid], abs=1e-5)


def test_nonfinite_error_names_round():
    w = init_weights(dim=4, rounds=10, seed=1)
    for r in range(10):
        w.tensors[f"round{r}.u_self"][:] = np.float32(1e38)
        w.tensors[f"round{r}.u_bias"][:] = np.float32(1.0)
    cs = clauses_from(["p(f(f(f(a))))"])
    tg = tensorize(build_hypergraph(cs, [], []))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        with pytest.raises(NonFiniteError, match=r"round \d"):
            forward(w, tg)


def test_container_roundtrip_and_errors(tmp_path):
    w = init_weights(dim=8, rounds=2, seed=3)
    path = tmp_path / "w.gnn"
    save_weights(w, path)
    save_weights(w, tmp_path / "w2.gnn")
    assert path.read_bytes() == (tmp_path / "w2.gnn").read_bytes()
    loaded = load_weights(path)
    for name, shape in tensor_spec(8, 2):
        assert loaded.tensors[name].shape == tuple(shape)
        assert np.array_equal(loaded.tensors[name], w.tensors[name])

    data = path.read_bytes()
    (tmp_path / "trunc.gnn").write_bytes(data[:-16])
    with pytest.raises(SizeError):
        load_weights(tmp_path / "trunc.gnn")

    import json
    import struct

    mlen = struct.unpack("<Q", data[:8])[0]
    manifest = json.loads(data[8:8 + mlen])
    manifest["dim"] = 64
    raw = json.dumps(manifest, sort_keys=True,
                     separators=(",", ":")).encode()
    (tmp_path / "dim.gnn").write_bytes(
        struct.pack("<Q", len(raw)) + raw + data[8 + mlen:])
    with pytest.raises(ShapeError):
        load_weights(tmp_path / "dim.gnn")

    manifest = json.loads(data[8:8 + mlen])
    manifest["version"] = 2
    raw = json.dumps(manifest, sort_keys=True,
                     separators=(",", ":")).encode()
    (tmp_path / "ver.gnn").write_bytes(
        struct.pack("<Q", len(raw)) + raw + data[8 + mlen:])
    with pytest.raises(UnknownVersionError):
        load_weights(tmp_path / "ver.gnn")

    bad = bytearray(data)
    payload = np.frombuffer(bad[8 + mlen:], dtype="<f4").copy()
    payload[0] = np.float32("nan")
    (tmp_path / "nan.gnn").write_bytes(bytes(bad[:8 + mlen])
                                       + payload.tobytes())
    with pytest.raises(NonFiniteError):
        load_weights(tmp_path / "nan.gnn")


def test_checked_in_fixture_reproduces_scores():
    weights = load_weights(FIXTURE / "weights.gnn")
    assert check_probe(weights, FIXTURE / "probe.json") <= 1e-5


class Recorder:
    """Wraps an evaluator run to inspect batch behavior."""

    def __init__(self, problem, q, c, seed=0):
        self.weights = init_weights(dim=8, rounds=2, seed=seed)
        self.evaluator = BatchedGnnEvaluator(self.weights, problem, q, c)


def test_batching_threshold_exact_batches():
    p = parse_problem("cnf(g,negated_conjecture,~p0(c)).")
    ev = Recorder(p, q=8, c=4).evaluator
    for i, text in enumerate(f"p{i}(c)" for i in range(10)):
        ev.enqueue(parse_clause_body(text, {}, 100 + i))
    batches = ev.ready_batches()
    assert len(batches) == 1 and len(batches[0]) == 8
    assert len(ev.pending) == 2
    rest = ev.force_batch()
    assert len(rest) == 2
    assert [b.size for b in ev.batch_log] == [8, 2]
    assert [b.forced for b in ev.batch_log] == [False, True]


def test_batching_never_scores_twice_and_context_bounded():
    from satguide.corpus import chain_problem

    problem = parse_problem(chain_problem(12), "c")
    weights = init_weights(dim=8, rounds=2, seed=5)
    q, c = 16, 8
    ev = BatchedGnnEvaluator(weights, problem, q, c)
    strategy = Strategy(mode="coop", evaluator=ev, id="gnn")
    result = given_clause_loop(problem, strategy, Limits(max_generated=600))
    assert result.status in ("proved", "resource_out")
    assert len(ev.batch_log) >= 1
    for record in ev.batch_log:
        assert record.context_size <= c
        assert record.size == q or record.forced
    # scored_ids is a set; re-scoring raises inside _evaluate.
    assert len(ev.scored_ids) == sum(b.size for b in ev.batch_log)


def test_solo_gnn_runs_and_is_deterministic():
    from satguide.corpus import chain_problem

    text = chain_problem(21)
    weights = init_weights(dim=8, rounds=2, seed=6)

    def run():
        problem = parse_problem(text, "c")
        ev = BatchedGnnEvaluator(weights, problem, 8, 16)
        return given_clause_loop(problem, Strategy(mode="solo", evaluator=ev),
                                 Limits(max_generated=400))

    r1, r2 = run(), run()
    assert [t.clause_id for t in r1.trace] == [t.clause_id for t in r2.trace]
    assert all(t.queue == "eval" for t in r1.trace)
