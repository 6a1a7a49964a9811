from pathlib import Path

import pytest
import torch

from gnn_trainer.clauses import (
    ClauseSyntaxError,
    Signature,
    format_clause,
    parse_clause,
)
from gnn_trainer.data import load_training_graphs, read_samples
from gnn_trainer.graph import build_graph
from gnn_trainer.model import (
    ClauseScorer,
    ExportError,
    export_weights,
    load_into_model,
    quantized_copy,
)
from gnn_trainer.train import DivergenceError, TrainConfig, train_gnn

DATA = Path(__file__).parent / "data"
TOY = DATA / "toy.jsonl"


def test_parse_and_format_roundtrip():
    sig = Signature()
    for text in ("p(a)", "~q(f(X),c)|p(X)", "r", "~s(g(a,b))|~s(X)|t"):
        clause = parse_clause(text, sig, 1)
        assert format_clause(clause) == text


def test_parse_rejects_bad_input():
    sig = Signature()
    with pytest.raises(ClauseSyntaxError):
        parse_clause("p(", sig)
    with pytest.raises(ClauseSyntaxError):
        parse_clause("p(a) q", sig)
    parse_clause("p(a)", sig)
    with pytest.raises(ClauseSyntaxError):
        parse_clause("p(a,b)", sig)  # arity conflict


def test_read_samples_and_graphs():
    records = read_samples(TOY)
    assert records
    for r in records:
        assert r.goal and (r.pos or r.neg)
    graphs = load_training_graphs(TOY, batch_clauses=16)
    for g in graphs:
        assert int(g.labels.numel()) <= 16
        assert bool(g.tg.goal_mask.any())
        assert int(g.tg.query_mask.sum()) == g.labels.numel()


def test_graph_counts_tiny():
    sig = Signature()
    c = parse_clause("p(a)", sig, 1)
    tg = build_graph([c], [], [])
    assert (tg.n_clauses, tg.n_symbols, tg.n_terms) == (1, 2, 2)


def test_export_byte_identical(tmp_path):
    model = ClauseScorer(dim=6, rounds=2, seed=5)
    export_weights(model, tmp_path / "a.gnn")
    export_weights(model, tmp_path / "b.gnn")
    assert (tmp_path / "a.gnn").read_bytes() == (tmp_path / "b.gnn").read_bytes()


def test_export_load_quantized_forward(tmp_path):
    model = ClauseScorer(dim=6, rounds=2, seed=6)
    path = tmp_path / "m.gnn"
    export_weights(model, path)
    back = load_into_model(path)
    sig = Signature()
    qs = [parse_clause(t, sig, i + 1)
          for i, t in enumerate(["p(f(X))|~q(X)", "q(a)"])]
    goal = [parse_clause("~p(Y)", sig, 9, "negated_conjecture")]
    tg = build_graph(qs, [], goal)
    with torch.no_grad():
        got = back(tg)
        want = quantized_copy(model)(tg)
    assert torch.allclose(got, want, atol=0, rtol=0)


def test_export_rejects_nonfinite(tmp_path):
    model = ClauseScorer(dim=4, rounds=1, seed=0)
    with torch.no_grad():
        model.tensor("head_out_b").fill_(float("nan"))
    with pytest.raises(ExportError):
        export_weights(model, tmp_path / "bad.gnn")


def test_export_rejects_dim_mismatch(tmp_path):
    model = ClauseScorer(dim=4, rounds=1, seed=0)
    model.params["head_out_w"] = torch.nn.Parameter(
        torch.zeros((1, 8), dtype=torch.float64))
    with pytest.raises(ExportError, match="shape"):
        export_weights(model, tmp_path / "bad.gnn")


def test_training_writes_epoch_containers(tmp_path):
    config = TrainConfig(epochs=3, dim=6, rounds=2, batch_clauses=64, seed=2)
    history = train_gnn(TOY, tmp_path, config)
    assert len(history) == 3
    for e in (1, 2, 3):
        assert (tmp_path / f"epoch-{e}.gnn").is_file()
        assert (tmp_path / f"epoch-{e}.gnn.probe.json").is_file()


def test_training_deterministic(tmp_path):
    config = TrainConfig(epochs=2, dim=6, rounds=2, batch_clauses=64, seed=3)
    train_gnn(TOY, tmp_path / "run1", config)
    train_gnn(TOY, tmp_path / "run2", config)
    for e in (1, 2):
        a = (tmp_path / "run1" / f"epoch-{e}.gnn").read_bytes()
        b = (tmp_path / "run2" / f"epoch-{e}.gnn").read_bytes()
        assert a == b


def test_training_loss_decreases(tmp_path):
    config = TrainConfig(epochs=10, dim=8, rounds=2, batch_clauses=64,
                         seed=1, learning_rate=3e-3)
    history = train_gnn(TOY, tmp_path, config)
    assert history[9] < history[0]
    # non-increasing when smoothed over 5-epoch windows
    smoothed = [sum(history[i:i + 5]) / 5 for i in range(len(history) - 4)]
    for a, b in zip(smoothed, smoothed[1:]):
        assert b <= a + 1e-6


def test_divergence_reports_epoch_and_batch(tmp_path):
    config = TrainConfig(epochs=2, dim=4, rounds=2, batch_clauses=64,
                         seed=0, learning_rate=1e200)
    with pytest.raises(DivergenceError, match=r"epoch \d+ batch \d+"):
        train_gnn(TOY, tmp_path, config)


def test_cli_entry(tmp_path):
    from gnn_trainer.cli import main

    code = main(["--samples", str(TOY), "--out-dir", str(tmp_path / "out"),
                 "--epochs", "1", "--dim", "4", "--rounds", "1",
                 "--batch-clauses", "64", "--seed", "0"])
    assert code == 0
    assert (tmp_path / "out" / "epoch-1.gnn").is_file()
    assert main([]) == 2
