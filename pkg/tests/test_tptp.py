import pytest

from satguide.terms import (
    FUNCTION,
    PREDICATE,
    ROLE_AXIOM,
    ROLE_GOAL,
    Var,
    invert_renaming,
    rename_problem,
    apply_renaming,
    clause_key,
    symbol_count,
)
from satguide.tptp import (
    ArityConflictError,
    TptpSyntaxError,
    format_problem,
    parse_clause_body,
    parse_problem,
)


def test_minimal_problem():
    p = parse_problem("cnf(a1,axiom,p(c)).")
    assert len(p.clauses) == 1
    assert p.signature[("p", PREDICATE)].arity == 1
    assert p.signature[("c", FUNCTION)].arity == 0
    assert p.clauses[0].role == ROLE_AXIOM
    assert p.clauses[0].id == 1


def test_negated_conjecture_role_and_variable():
    p = parse_problem("cnf(g,negated_conjecture,~p(X)).")
    (clause,) = p.clauses
    assert clause.role == ROLE_GOAL
    (lit,) = clause.literals
    assert not lit.positive
    assert lit.atom.args == (Var("X"),)


def test_hypothesis_maps_to_axiom():
    p = parse_problem("cnf(h,hypothesis,p(c)).")
    assert p.clauses[0].role == ROLE_AXIOM


def test_arity_conflict_names_symbol():
    with pytest.raises(ArityConflictError) as exc:
        parse_problem("cnf(a,axiom,p(c)). cnf(b,axiom,p(c,c)).")
    assert exc.value.symbol == "p"


def test_function_vs_predicate_namespaces_are_separate():
    # c is a constant and cc a predicate; no conflict between kinds.
    p = parse_problem("cnf(a,axiom,c(c)).")
    assert p.signature[("c", PREDICATE)].arity == 1
    assert p.signature[("c", FUNCTION)].arity == 0


def test_syntax_error_reports_position():
    with pytest.raises(TptpSyntaxError) as exc:
        parse_problem("cnf(a,axiom,\np(c)")
    assert exc.value.line == 2


def test_comments_and_whitespace():
    text = "% a comment\ncnf(a, axiom, p(X) | ~q(f(X), c)). % trailing\n"
    p = parse_problem(text)
    assert len(p.clauses[0].literals) == 2


def test_parenthesized_formula():
    p = parse_problem("cnf(a,axiom,(p(X)|~q(X))).")
    assert len(p.clauses[0].literals) == 2
    p2 = parse_problem("cnf(a,axiom,(p(c))).")
    assert len(p2.clauses[0].literals) == 1


def test_unknown_role_rejected():
    with pytest.raises(TptpSyntaxError):
        parse_problem("cnf(a,conjecture,p(c)).")


def test_roundtrip_parse_print_parse():
    text = """
    cnf(a,axiom,p(f(X),g(X,Y))|~q(c)).
    cnf(b,axiom,r).
    cnf(g,negated_conjecture,~p(c,d)|~r).
    """
    p1 = parse_problem(text)
    p2 = parse_problem(format_problem(p1))
    assert len(p1.clauses) == len(p2.clauses)
    for c1, c2 in zip(p1.clauses, p2.clauses):
        assert c1.role == c2.role
        assert clause_key(c1) == clause_key(c2)
        assert c1.literals == c2.literals


def test_parse_clause_body_shared_signature():
    sig = {}
    c1 = parse_clause_body("p(X)|~q(f(X))", sig, 1)
    c2 = parse_clause_body("q(c)", sig, 2)
    assert c1.id == 1 and c2.id == 2
    with pytest.raises(ArityConflictError):
        parse_clause_body("q(c,c)", sig, 3)


def test_rename_examples():
    p = parse_problem("cnf(a,axiom,p(c)).")
    mapping = {("p", PREDICATE): "q", ("c", FUNCTION): "d"}
    renamed = apply_renaming(p, mapping)
    assert format_problem(renamed).strip() == "cnf(c1,axiom,q(d))."


def test_rename_inverse_roundtrip_and_determinism():
    text = "cnf(a,axiom,p(f(X),c)|~q(X)).\ncnf(g,negated_conjecture,~p(Y,c)).\n"
    p = parse_problem(text)
    r1, mapping = rename_problem(p, seed=7)
    r2, _ = rename_problem(p, seed=7)
    assert format_problem(r1) == format_problem(r2)
    back = apply_renaming(r1, invert_renaming(mapping))
    assert format_problem(back) == format_problem(p)


def test_rename_preserves_structure_counts():
    text = "cnf(a,axiom,p(f(X),c)|~q(X)).\ncnf(g,negated_conjecture,~p(Y,c)).\n"
    p = parse_problem(text)
    renamed, mapping = rename_problem(p, seed=3)
    assert len(renamed.clauses) == len(p.clauses)
    assert len(set(mapping.values())) == len(mapping)
    for c1, c2 in zip(p.clauses, renamed.clauses):
        assert len(c1.literals) == len(c2.literals)
        assert symbol_count(c1) == symbol_count(c2)
    for (name, kind), new in mapping.items():
        assert p.signature[(name, kind)].arity == \
            renamed.signature[(new, kind)].arity
