"""Regenerates the checked-in GNN weight container and probe fixture.

Run from the repository root:

    python scripts/make_gnn_fixture.py
"""

from pathlib import Path

from satguide.gnn import init_weights, save_weights
from satguide.gnn.probe import probe_scores, write_probe
from satguide.tptp import parse_problem

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "src/satguide/gnn/_fixture"

PROBE_TEXT = """
cnf(q1,axiom,p(f(X),c)|~s(X)).
cnf(q2,axiom,~p(f(c),c)).
cnf(q3,axiom,s(g(c,d))|s(d)).
cnf(x1,axiom,p(f(g(c,d)),c)).
cnf(x2,axiom,~s(c)|s(f(c))).
cnf(g1,negated_conjecture,~p(X,Y)|~s(Y)).
cnf(g2,negated_conjecture,~s(f(f(c)))).
"""


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    weights = init_weights(dim=32, rounds=5, seed=2026)
    save_weights(weights, FIXTURE_DIR / "weights.gnn")

    problem = parse_problem(PROBE_TEXT, "probe")
    queries = problem.clauses[0:3]
    context = problem.clauses[3:5]
    goal = problem.clauses[5:7]
    scores = probe_scores(weights, queries, context, goal)
    write_probe(FIXTURE_DIR / "probe.json", queries, context, goal, scores)
    print(f"wrote fixture to {FIXTURE_DIR}: scores {scores}")


if __name__ == "__main__":
    main()
