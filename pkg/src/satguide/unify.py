"""Robinson unification with occurs check.

Failure is a return value (None), never an exception: the saturation loop
probes many literal pairs that simply do not unify.
"""

from __future__ import annotations

from .terms import App, Substitution, Term, Var, apply_to_term


def _walk(term: Term, subst: Substitution) -> Term:
    while isinstance(term, Var):
        bound = subst.get(term.name)
        if bound is None:
            return term
        term = bound
    return term


def _occurs(name: str, term: Term, subst: Substitution) -> bool:
    term = _walk(term, subst)
    if isinstance(term, Var):
        return term.name == name
    return any(_occurs(name, a, subst) for a in term.args)


def _resolve(term: Term, subst: Substitution) -> Term:
    term = _walk(term, subst)
    if isinstance(term, Var) or not term.args:
        return term
    return App(term.head, tuple(_resolve(a, subst) for a in term.args))


def unify(t1: Term, t2: Term) -> Substitution | None:
    """Most general unifier of t1 and t2, or None on clash/occurs failure.

    The returned substitution is idempotent: applying it twice equals
    applying it once.
    """
    subst: Substitution = {}
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = _walk(a, subst)
        b = _walk(b, subst)
        if a == b:
            continue
        if isinstance(a, Var):
            if _occurs(a.name, b, subst):
                return None
            subst[a.name] = b
        elif isinstance(b, Var):
            if _occurs(b.name, a, subst):
                return None
            subst[b.name] = a
        else:
            if a.head != b.head or len(a.args) != len(b.args):
                return None
            stack.extend(zip(a.args, b.args))
    # Solve the triangular substitution so the result is idempotent.
    return {name: _resolve(Var(name), subst) for name in subst}


def unify_atoms(a1: App, a2: App) -> Substitution | None:
    """Unify two atoms; requires the same predicate symbol."""
    if a1.head != a2.head:
        return None
    return unify(a1, a2)


def terms_equal_under(subst: Substitution, t1: Term, t2: Term) -> bool:
    return apply_to_term(subst, t1) == apply_to_term(subst, t2)
