"""Brute-force ground truth: SAT, 2QBF truth and answer-set existence.

Nothing here learns clauses or uses heuristics beyond unit propagation and a
most-occurrences branching rule; these deciders define the expected values
for the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .formula import (
    Block,
    CnfFormula,
    CnfQbf,
    DnfQbf,
    FlatNumbering,
    MultiCnf,
    Var,
    restrict,
    universal_assignment,
)
from .transforms import Atom, DisjunctiveProgram, Rule


class ResourceError(RuntimeError):
    """An instance exceeds the configured oracle limits; no verdict is given."""


@dataclass(frozen=True)
class OracleLimits:
    max_universals: int = 16
    max_existentials: int = 24
    max_program_atoms: int = 22
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if min(self.max_universals, self.max_existentials, self.max_program_atoms) <= 0 or self.timeout <= 0:
            raise ValueError("oracle limits must be positive")


DEFAULT_LIMITS = OracleLimits()

# beyond this many universals, 2^A restrictions cost more than CEGAR refinement
AUTO_ENUMERATE_MAX = 8


# -- SAT over integer clauses ------------------------------------------------


def dpll(clauses: Iterable[Sequence[int]], nvars: int) -> list[int] | None:
    """Backtracking search with unit propagation.

    Returns a satisfying list of true literals (one per assigned variable;
    unassigned variables may take either value), or ``None`` when
    unsatisfiable. Propagation rescans only the clauses containing the
    literal just falsified.
    """
    cls = [list(c) for c in clauses]
    if any(not c for c in cls):
        return None
    value = [0] * (nvars + 1)
    trail: list[int] = []
    occurs: dict[int, list[list[int]]] = {}
    for c in cls:
        for lit in c:
            occurs.setdefault(lit, []).append(c)

    def assign(lit: int) -> None:
        value[abs(lit)] = 1 if lit > 0 else -1
        trail.append(abs(lit))

    def status(c: list[int]) -> tuple[int, int]:
        """(number of open literals, last open literal); (-1, 0) if satisfied."""
        unassigned = 0
        last = 0
        for lit in c:
            val = value[abs(lit)]
            if val == 0:
                unassigned += 1
                last = lit
            elif (val > 0) == (lit > 0):
                return -1, 0
        return unassigned, last

    def propagate(queue: list[int]) -> bool:
        while queue:
            lit = queue.pop()
            for c in occurs.get(-lit, ()):
                n, last = status(c)
                if n == 0:
                    return False
                if n == 1:
                    assign(last)
                    queue.append(last)
        return True

    def pick() -> int:
        counts: dict[int, int] = {}
        best = None
        for c in cls:
            n, _ = status(c)
            if n <= 0 or (best is not None and n > best):
                continue
            if best is None or n < best:
                best = n
                counts = {}
            for lit in c:
                if value[abs(lit)] == 0:
                    counts[lit] = counts.get(lit, 0) + 1
        if not counts:
            return 0
        return max(counts, key=lambda lit: (counts[lit], -abs(lit), lit))

    def undo(mark: int) -> None:
        while len(trail) > mark:
            value[trail.pop()] = 0

    def search() -> bool:
        lit = pick()
        if lit == 0:
            return True
        mark = len(trail)
        for choice in (lit, -lit):
            assign(choice)
            if propagate([choice]) and search():
                return True
            undo(mark)
        return False

    units = []
    for c in cls:
        if len(c) == 1 and value[abs(c[0])] == 0:
            assign(c[0])
            units.append(c[0])
        elif len(c) == 1 and (value[abs(c[0])] > 0) != (c[0] > 0):
            return None
    if not propagate(units) or not search():
        return None
    return [i if value[i] > 0 else -i for i in range(1, nvars + 1) if value[i]]


def exhaustive_sat(clauses: Iterable[Sequence[int]], nvars: int) -> bool:
    """Truth-table check over all 2^nvars assignments (vectorised)."""
    cls = [list(c) for c in clauses]
    if any(not c for c in cls):
        return False
    if not cls:
        return True
    if nvars > 24:
        raise ResourceError(f"exhaustive enumeration over {nvars} variables refused")
    rows = np.arange(2**nvars, dtype=np.int64)
    alive = np.ones(rows.shape, dtype=bool)
    for c in cls:
        sat = np.zeros(rows.shape, dtype=bool)
        for lit in c:
            bit = (rows >> (abs(lit) - 1)) & 1
            sat |= bit.astype(bool) if lit > 0 else ~bit.astype(bool)
        alive &= sat
        if not alive.any():
            return False
    return True


def _components(f: CnfFormula | MultiCnf) -> tuple[CnfFormula, ...]:
    return f.components if isinstance(f, MultiCnf) else (f,)


def sat_decide(
    f: CnfFormula | MultiCnf,
    limits: OracleLimits = DEFAULT_LIMITS,
    method: str = "dpll",
) -> bool:
    """Satisfiability of a CNF, or of a disjunction of CNF components."""
    comps = _components(f)
    first = comps[0]
    if first.num_universal:
        raise ValueError("sat_decide: formula has universal variables; use qbf_decide")
    if first.num_vars > limits.max_existentials:
        raise ResourceError(
            f"{first.num_vars} variables exceed max_existentials={limits.max_existentials}"
        )
    num = FlatNumbering.of(first)
    for comp in comps:
        clauses = num.clauses(comp)
        if method == "dpll":
            found = dpll(clauses, num.size) is not None
        elif method == "exhaustive":
            found = exhaustive_sat(clauses, num.size)
        else:
            raise ValueError(f"unknown SAT method {method!r}")
        if found:
            return True
    return False


# -- 2QBF --------------------------------------------------------------------


def qbf_decide(q: CnfQbf, limits: OracleLimits = DEFAULT_LIMITS, method: str = "enumerate") -> bool:
    """Truth of ``forall X exists Y`` over a disjunction of CNF components.

    ``method="enumerate"`` restricts the matrix under each of the 2^A
    universal assignments and asks :func:`sat_decide`. ``method="cegar"``
    refines candidate counter-assignments with existential witnesses and is
    not bounded by ``max_universals``. ``"auto"`` enumerates small universal
    blocks (at most ``AUTO_ENUMERATE_MAX`` variables) and uses CEGAR otherwise.
    """
    if method == "auto":
        method = "enumerate" if q.universals <= min(AUTO_ENUMERATE_MAX, limits.max_universals) else "cegar"
    if q.existentials + q.aux > limits.max_existentials:
        raise ResourceError(
            f"{q.existentials + q.aux} existential variables exceed max_existentials={limits.max_existentials}"
        )
    if method == "cegar":
        return _qbf_cegar(q, limits)
    if method != "enumerate":
        raise ValueError(f"unknown QBF method {method!r}")
    if q.universals > limits.max_universals:
        raise ResourceError(f"{q.universals} universals exceed max_universals={limits.max_universals}")
    for bits in range(2**q.universals):
        sigma = universal_assignment(bits, q.universals)
        residual = MultiCnf(tuple(restrict(c, sigma) for c in q.components))
        if not sat_decide(residual, limits):
            return False
    return True


def _qbf_cegar(q: CnfQbf, limits: OracleLimits) -> bool:
    """Counterexample-guided 2QBF check.

    The abstraction is a CNF over x1..xA (plus auxiliary conjunction
    variables) whose models are the universal assignments not yet shown
    satisfiable. Each existential witness found for a candidate adds the
    requirement that the next candidate falsifies, in every component, some
    clause whose existential part the witness falsifies.
    """
    A = q.universals
    if A == 0:
        return sat_decide(q.matrix, limits)
    num = FlatNumbering(q.universals, q.existentials, 0, q.aux)
    comps = [num.clauses(c) for c in q.components]
    abstraction: list[list[int]] = []
    nvars = A
    while True:
        model = dpll(abstraction, nvars)
        if model is None:
            return True
        truth = {abs(l): l > 0 for l in model}
        sigma = {Var(Block.UNIVERSAL, i): truth.get(i, False) for i in range(1, A + 1)}
        witness = None
        for comp in q.components:
            residual = restrict(comp, sigma)
            rnum = FlatNumbering.of(residual)
            found = dpll(rnum.clauses(residual), rnum.size)
            if found is not None:
                witness = {l + (A if l > 0 else -A) for l in found}
                break
        if witness is None:
            return False
        wvals = {abs(l): l > 0 for l in witness}
        for clauses in comps:
            options: list[int] = []
            for c in clauses:
                inner = [l for l in c if abs(l) > A]
                if any(wvals.get(abs(l), False) == (l > 0) for l in inner):
                    continue
                outer = [l for l in c if abs(l) <= A]
                if not outer:
                    break  # component falsified by the witness everywhere
                if len(outer) == 1:
                    options.append(-outer[0])
                else:
                    nvars += 1
                    for l in outer:
                        abstraction.append([-nvars, -l])
                    options.append(nvars)
            else:
                if not options:
                    return True  # witness satisfies this component under every X
                abstraction.append(options)


def dual_decide(d: DnfQbf, limits: OracleLimits = DEFAULT_LIMITS) -> bool:
    """Truth of ``exists X forall Y`` over a conjunction of DNF components, by enumeration."""
    A, E = d.exist_outer, d.univ_inner + d.aux
    if A > limits.max_universals or E > limits.max_existentials or E > 24:
        raise ResourceError("dual evaluator limits exceeded")
    num = FlatNumbering(d.exist_outer, d.univ_inner, 0, d.aux)
    ys = np.arange(2**E, dtype=np.int64)
    comps = [[num.clause(p) for p in comp] for comp in d.components]
    for bits in range(2**A):
        xval = {i + 1: bool(bits >> i & 1) for i in range(A)}
        every_y = np.ones(ys.shape, dtype=bool)
        for prods in comps:
            some = np.zeros(ys.shape, dtype=bool)
            for p in prods:
                term = np.ones(ys.shape, dtype=bool)
                for lit in p:
                    var = abs(lit)
                    if var <= A:
                        if xval[var] != (lit > 0):
                            term[:] = False
                            break
                    else:
                        bit = ((ys >> (var - A - 1)) & 1).astype(bool)
                        term &= bit if lit > 0 else ~bit
                some |= term
            every_y &= some
            if not every_y.any():
                break
        if every_y.all():
            return True
    return False


# -- answer sets ---------------------------------------------------------------


def reduct(p: DisjunctiveProgram, m: Iterable[Atom]) -> DisjunctiveProgram:
    """Gelfond-Lifschitz reduct of ``p`` with respect to ``m``."""
    mset = set(m)
    rules = tuple(
        Rule(r.head, r.pos_body, ())
        for r in p.rules
        if not mset.intersection(r.neg_body)
    )
    return DisjunctiveProgram(rules, p.atoms)


def is_model(p: DisjunctiveProgram, m: Iterable[Atom]) -> bool:
    mset = set(m)
    for r in p.rules:
        if mset.issuperset(r.pos_body) and not mset.intersection(r.neg_body):
            if not mset.intersection(r.head):
                return False
    return True


def _check_atoms(p: DisjunctiveProgram, limits: OracleLimits) -> None:
    if len(p.atoms) > limits.max_program_atoms:
        raise ResourceError(
            f"{len(p.atoms)} atoms exceed max_program_atoms={limits.max_program_atoms}"
        )


def _program_clauses(p: DisjunctiveProgram, index: dict[Atom, int]) -> list[list[int]]:
    return [
        [index[a] for a in r.head] + [-index[a] for a in r.pos_body] + [index[a] for a in r.neg_body]
        for r in p.rules
    ]


def _has_smaller_model(positive: DisjunctiveProgram, m: set[Atom]) -> bool:
    """Is some proper subset of ``m`` a model of the negation-free ``positive``?"""
    inside = sorted(m, key=lambda a: a.name)
    index = {a: i + 1 for i, a in enumerate(inside)}
    clauses = []
    for r in positive.rules:
        if not m.issuperset(r.pos_body):
            continue  # body false for every subset of m
        clauses.append([index[a] for a in r.head if a in m] + [-index[a] for a in r.pos_body])
    clauses.append([-i for i in index.values()])
    return dpll(clauses, len(inside)) is not None


def is_answer_set(p: DisjunctiveProgram, m: Iterable[Atom], limits: OracleLimits = DEFAULT_LIMITS) -> bool:
    """``m`` is a minimal model of the reduct of ``p`` with respect to ``m``."""
    _check_atoms(p, limits)
    mset = set(m)
    red = reduct(p, mset)
    return is_model(red, mset) and not _has_smaller_model(red, mset)


def is_answer_set_bruteforce(p: DisjunctiveProgram, m: Iterable[Atom]) -> bool:
    """Minimality by scanning every proper subset of ``m``; exponential in |m|."""
    mset = set(m)
    red = reduct(p, mset)
    if not is_model(red, mset):
        return False
    atoms = sorted(mset, key=lambda a: a.name)
    for size in range(len(atoms)):
        for sub in combinations(atoms, size):
            if is_model(red, sub):
                return False
    return True


def _minimal_models(p: DisjunctiveProgram) -> Iterable[set[Atom]]:
    """Every subset-minimal classical model of ``p``.

    Each model found is shrunk by SAT calls until minimal; a clause then
    blocks all of its supersets, so no minimal model is produced twice.
    Answer sets are minimal models, so this is a complete candidate list.
    """
    atoms = list(p.atoms)
    index = {a: i + 1 for i, a in enumerate(atoms)}
    clauses = _program_clauses(p, index)
    while True:
        model = dpll(clauses, len(atoms))
        if model is None:
            return
        # unassigned atoms default to false; that completion is also a model
        true = {l for l in model if l > 0}
        while True:
            smaller = clauses + [[-i] for i in range(1, len(atoms) + 1) if i not in true]
            smaller.append([-i for i in true])
            found = dpll(smaller, len(atoms))
            if found is None:
                break
            true = {l for l in found if l > 0}
        yield {atoms[i - 1] for i in true}
        clauses.append([-i for i in true])


def answer_sets(p: DisjunctiveProgram, limits: OracleLimits = DEFAULT_LIMITS) -> Iterable[frozenset[Atom]]:
    _check_atoms(p, limits)
    for m in _minimal_models(p):
        red = reduct(p, m)
        if not _has_smaller_model(red, m):
            yield frozenset(m)


def has_answer_set(p: DisjunctiveProgram, limits: OracleLimits = DEFAULT_LIMITS) -> bool:
    return next(iter(answer_sets(p, limits)), None) is not None


def has_answer_set_bruteforce(p: DisjunctiveProgram, limits: OracleLimits = DEFAULT_LIMITS) -> bool:
    """Scan interpretations in increasing cardinality; only for very small programs."""
    _check_atoms(p, limits)
    atoms = list(p.atoms)
    for size in range(len(atoms) + 1):
        for m in combinations(atoms, size):
            if is_answer_set_bruteforce(p, m):
                return True
    return False
