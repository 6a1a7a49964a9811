"""Generators for the bundled problem corpora.

Three families, all equality-free CNF:

* chain problems: a forward implication chain over unary predicates whose
  refutation is forced, drowned in a bounded cloud of binary-predicate
  distractor facts and rules. The distractors keep the base strategy busy
  while arity-based features separate them cleanly from the chain, which is
  what the guidance experiments need.
* ground unsatisfiable problems: propositional-style CNF over arity-0
  predicates, checkable by truth-table enumeration.
* ground satisfiable problems: built around a chosen model, so saturation
  must terminate without a proof.

Everything is deterministic in the seed; scripts/gen_corpus.py writes the
checked-in problem files from these generators.
"""

from __future__ import annotations

import random


def chain_problem(seed: int, length: int | None = None,
                  n_consts: int | None = None,
                  extra_rule: bool = True) -> str:
    """A provable chain problem with distractor clutter; see module doc.

    The goal is the deep ground instance the chain produces, so neither it
    nor its backward resolvents are small enough for the symbol-count queue
    to shortcut past the distractors.
    """
    rng = random.Random(seed)
    length = length or rng.choice((3, 4, 5))
    n_consts = n_consts or rng.choice((3, 4))
    consts = [f"d{i}" for i in range(n_consts)]
    lines = []
    k = 0

    def emit(role: str, body: str):
        nonlocal k
        k += 1
        lines.append(f"cnf(c{k},{role},{body}).")

    # Distractors: small clauses with a bounded ground closure, so the
    # symbol-count queue chews through all of them first.
    n_facts = rng.randint(n_consts + 1, 2 * n_consts)
    seen = set()
    for _ in range(n_facts):
        a, b = rng.choice(consts), rng.choice(consts)
        if (a, b) in seen:
            continue
        seen.add((a, b))
        emit("axiom", f"q({a},{b})")
    emit("axiom", "~q(X,Y)|q(Y,X)")
    emit("axiom", "~q(X,Y)|~q(Y,Z)|r(X,Z)")
    emit("axiom", "~r(X,Y)|r(Y,X)")
    if extra_rule and rng.random() < 0.5:
        emit("axiom", "~r(X,Y)|~q(Y,Z)|r(X,Z)")

    # The chain rides on wide terms, keeping every step heavier than the
    # distractors under the symbol-count ordering.
    emit("axiom", "p1(w(c0,c1))")
    term = "w(c0,c1)"
    for j in range(1, length):
        emit("axiom", f"~p{j}(X)|p{j + 1}(w(g{j}(X),c0))")
        term = f"w(g{j}({term}),c0)"
    emit("negated_conjecture", f"~p{length}({term})")
    return "\n".join(lines) + "\n"


def ground_unsat_problem(seed: int) -> str:
    """Ground CNF that is unsatisfiable by construction.

    Takes a full chain a1..an of implications plus the two endpoints
    forced apart, then pads with satisfiable-by-anything noise clauses.
    """
    rng = random.Random(seed)
    n = rng.randint(3, 5)
    atoms = [f"a{i}" for i in range(n)]
    lines = [f"cnf(s,axiom,{atoms[0]})."]
    for i in range(n - 1):
        lines.append(f"cnf(i{i},axiom,~{atoms[i]}|{atoms[i + 1]}).")
    lines.append(f"cnf(g,negated_conjecture,~{atoms[-1]}).")
    for j in range(rng.randint(1, 3)):
        a, b = rng.sample(atoms, 2)
        lines.append(f"cnf(n{j},axiom,{a}|{b}|~{rng.choice(atoms)}).")
    return "\n".join(lines) + "\n"


def ground_sat_problem(seed: int) -> str:
    """Ground CNF satisfied by a model chosen up front.

    Atom a<i> is true iff i is even; every emitted clause contains at least
    one literal that the model makes true, so the problem saturates.
    """
    rng = random.Random(seed)
    n = rng.randint(3, 4)
    atoms = [f"b{i}" for i in range(n)]
    truth = {a: (i % 2 == 0) for i, a in enumerate(atoms)}
    lines = []
    for j in range(rng.randint(4, 6)):
        size = rng.randint(1, 2)
        members = rng.sample(atoms, size)
        lits = []
        has_true = False
        for a in members:
            positive = rng.random() < 0.5
            if positive == truth[a]:
                has_true = True
            lits.append(a if positive else f"~{a}")
        if not has_true:
            a = members[0]
            lits[0] = a if truth[a] else f"~{a}"
        role = "negated_conjecture" if j == 0 else "axiom"
        lines.append(f"cnf(k{j},{role},{'|'.join(lits)}).")
    return "\n".join(lines) + "\n"


def factoring_problem(seed: int) -> str:
    """Needs positive factoring to terminate quickly: two-literal positive
    clause against a two-literal negative constraint."""
    rng = random.Random(seed)
    f = rng.choice(("s", "t"))
    return "\n".join([
        f"cnf(a1,axiom,m({f}(U))|m({f}(V))).",
        "cnf(g,negated_conjecture,~m(X)|~m(Y)).",
    ]) + "\n"


def chain_family(count: int, seed: int = 0) -> list[tuple[str, str]]:
    """The generated problem family used for the guidance experiments."""
    return [(f"chain{seed + i:04d}", chain_problem(seed + i))
            for i in range(count)]


def provable_suite() -> list[tuple[str, str]]:
    """30 provable problems: chains, ground refutations, factoring cases.

    Chains here are kept mild (short, no extra distractor rule) so the base
    strategy proves every one of them within the 5000-generated cap.
    """
    problems = []
    for i in range(14):
        problems.append((f"prov_chain{i:02d}",
                         chain_problem(1000 + i, length=3, n_consts=3,
                                       extra_rule=False)))
    for i in range(10):
        problems.append((f"prov_ground{i:02d}", ground_unsat_problem(2000 + i)))
    for i in range(4):
        problems.append((f"prov_factor{i:02d}", factoring_problem(3000 + i)))
    problems.append(("prov_tiny00",
                     "cnf(a,axiom,p(a)).\ncnf(g,negated_conjecture,~p(X)).\n"))
    problems.append(("prov_tiny01",
                     "cnf(a,axiom,e(X,X)).\n"
                     "cnf(g,negated_conjecture,~e(f(c),f(c))).\n"))
    return problems


def satisfiable_suite() -> list[tuple[str, str]]:
    """10 ground satisfiable problems; saturation must terminate."""
    return [(f"sat_ground{i:02d}", ground_sat_problem(4000 + i))
            for i in range(10)]


def invariance_corpus() -> list[tuple[str, str]]:
    """50 provable problems for the renaming-invariance check."""
    problems = []
    for i in range(30):
        problems.append((f"inv_chain{i:02d}", chain_problem(5000 + i)))
    for i in range(14):
        problems.append((f"inv_ground{i:02d}", ground_unsat_problem(6000 + i)))
    for i in range(6):
        problems.append((f"inv_factor{i:02d}", factoring_problem(7000 + i)))
    return problems
