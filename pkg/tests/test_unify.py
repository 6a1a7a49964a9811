from hypothesis import given, settings
from hypothesis import strategies as st

from satguide.terms import (
    FUNCTION,
    App,
    Symbol,
    Var,
    apply_to_term,
    apply_substitution,
    clause_key,
)
from satguide.tptp import parse_clause_body
from satguide.unify import unify

f = Symbol("f", FUNCTION, 2)
g = Symbol("g", FUNCTION, 1)
a = Symbol("a", FUNCTION, 0)
c = Symbol("c", FUNCTION, 0)


def T(head, *args):
    return App(head, tuple(args))


def test_mgu_example():
    # f(X, g(Y)) vs f(g(Z), g(a))
    t1 = T(f, Var("X"), T(g, Var("Y")))
    t2 = T(f, T(g, Var("Z")), T(g, T(a)))
    sigma = unify(t1, t2)
    assert sigma == {"X": T(g, Var("Z")), "Y": T(a)}


def test_occurs_check():
    assert unify(Var("X"), T(g, Var("X"))) is None


def test_identity_unification():
    assert unify(T(c), T(c)) == {}


def test_clash():
    assert unify(T(a), T(c)) is None
    assert unify(T(g, T(a)), T(f, T(a), T(a))) is None


def test_substitution_examples():
    clause = parse_clause_body("p(X)|q(X,Y)")
    out = apply_substitution({"X": T(a)}, clause)
    assert clause_key(out) == clause_key(parse_clause_body("p(a)|q(a,Y)"))
    assert apply_substitution({}, clause).literals == clause.literals
    out2 = apply_substitution({"X": T(g, Var("Y"))}, parse_clause_body("p(X)"))
    assert clause_key(out2) == clause_key(parse_clause_body("p(g(Y))"))


# A bounded random term strategy over a tiny signature.
def terms(depth=3):
    leaf = st.one_of(
        st.sampled_from([Var("X"), Var("Y"), Var("Z"), T(a), T(c)]))
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.builds(lambda x: T(g, x), sub),
            st.builds(lambda x, y: T(f, x, y), sub, sub)),
        max_leaves=depth * 3)


@settings(max_examples=200, deadline=None)
@given(terms(), terms())
def test_unify_properties(t1, t2):
    sigma = unify(t1, t2)
    if sigma is None:
        return
    u1 = apply_to_term(sigma, t1)
    u2 = apply_to_term(sigma, t2)
    assert u1 == u2
    # Idempotence: applying sigma twice changes nothing.
    for term in sigma.values():
        assert apply_to_term(sigma, term) == term
    assert apply_to_term(sigma, u1) == u1


@settings(max_examples=100, deadline=None)
@given(terms())
def test_unify_reflexive(t):
    assert unify(t, t) == {}
