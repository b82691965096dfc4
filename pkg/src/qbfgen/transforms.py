"""Clausification of multi-component matrices and the QBF-to-program translation.

Atom names follow the ASP output: ``x3``/``nx3`` for a universal variable of
the primal formula and its primed copy, ``y2``/``ny2`` for existential ones,
``s1``/``ns1`` for Tseitin selectors, ``w`` and ``w1..wt`` for the goal atoms.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .formula import (
    Block,
    Clause,
    CnfFormula,
    CnfQbf,
    DnfQbf,
    Literal,
    MultiCnf,
    Var,
    dualize,
)


class AtomKind(enum.Enum):
    BASE = "base"
    PRIMED = "primed"
    W = "w"
    W_INDEXED = "w_indexed"
    OTHER = "other"


class Atom(NamedTuple):
    name: str
    kind: AtomKind = AtomKind.OTHER

    @classmethod
    def parse(cls, name: str) -> Atom:
        if name == "w":
            return cls(name, AtomKind.W)
        if re.fullmatch(r"w[1-9][0-9]*", name):
            return cls(name, AtomKind.W_INDEXED)
        if re.fullmatch(r"[xys][1-9][0-9]*", name):
            return cls(name, AtomKind.BASE)
        if re.fullmatch(r"n[xys][1-9][0-9]*", name):
            return cls(name, AtomKind.PRIMED)
        return cls(name, AtomKind.OTHER)

    def __str__(self) -> str:
        return self.name


_PREFIX = {Block.UNIVERSAL: "x", Block.EXISTENTIAL: "y", Block.AUX: "s", Block.PLAIN: "v"}

W = Atom("w", AtomKind.W)


def base_atom(var: Var) -> Atom:
    return Atom(f"{_PREFIX[var.block]}{var.index}", AtomKind.BASE)


def primed_atom(var: Var) -> Atom:
    return Atom(f"n{_PREFIX[var.block]}{var.index}", AtomKind.PRIMED)


def w_atom(h: int) -> Atom:
    return Atom(f"w{h}", AtomKind.W_INDEXED)


def sigma(lit: Literal) -> Atom:
    return base_atom(lit.var) if lit.positive else primed_atom(lit.var)


@dataclass(frozen=True)
class Rule:
    """``head_1 | ... | head_n :- pos_body, not neg_body``."""

    head: tuple[Atom, ...]
    pos_body: tuple[Atom, ...] = ()
    neg_body: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        for name in ("head", "pos_body", "neg_body"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.head:
            raise ValueError("rule head must be nonempty")
        if set(self.pos_body) & set(self.neg_body):
            raise ValueError("positive and negative body overlap")

    @property
    def is_fact(self) -> bool:
        return not self.pos_body and not self.neg_body


@dataclass(frozen=True)
class DisjunctiveProgram:
    rules: tuple[Rule, ...]
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        atoms = list(self.atoms)
        seen = set(atoms)
        for r in self.rules:
            for a in (*r.head, *r.pos_body, *r.neg_body):
                if a not in seen:
                    seen.add(a)
                    atoms.append(a)
        object.__setattr__(self, "atoms", tuple(atoms))


# -- Tseitin -----------------------------------------------------------------


def _selector_clauses(components: tuple[CnfFormula, ...], first_aux: int) -> list[Clause]:
    sel = [Literal(Var(Block.AUX, first_aux + i), True) for i in range(len(components))]
    clauses = [Clause(sel)]
    for s, comp in zip(sel, components):
        clauses.extend(Clause((s.complement(), *c)) for c in comp.clauses)
    return clauses


def tseitin(q: CnfQbf | MultiCnf) -> CnfQbf | CnfFormula:
    """Single-component equisatisfiable form of a disjunction of CNFs.

    Adds selectors s_1..s_t (innermost existential), the clause
    ``s_1 | ... | s_t`` and ``-s_i | C`` for every clause C of component i.
    Single-component input is returned unchanged.
    """
    if isinstance(q, MultiCnf):
        if q.t == 1:
            return q.components[0]
        base = q.components[0]
        clauses = _selector_clauses(q.components, base.num_aux + 1)
        return CnfFormula(tuple(clauses), num_plain=base.num_plain, num_aux=base.num_aux + q.t,
                          num_existential=base.num_existential)
    if q.t == 1:
        return q
    clauses = _selector_clauses(q.components, q.aux + 1)
    aux = q.aux + q.t
    matrix = CnfFormula(tuple(clauses), q.universals, q.existentials, 0, aux)
    return CnfQbf(q.universals, q.existentials, MultiCnf((matrix,)), aux)


# -- Eiter-Gottlob ---------------------------------------------------------------


def _fixed_part(d: DnfQbf) -> tuple[list[Atom], list[Rule], list[Rule]]:
    outer = [Var(Block.UNIVERSAL, i) for i in range(1, d.exist_outer + 1)]
    inner = [Var(Block.EXISTENTIAL, j) for j in range(1, d.univ_inner + 1)]
    inner += [Var(Block.AUX, j) for j in range(1, d.aux + 1)]
    atoms: list[Atom] = []
    facts = []
    for z in outer + inner:
        atoms += [base_atom(z), primed_atom(z)]
        facts.append(Rule((base_atom(z), primed_atom(z))))
    guards = []
    for z in inner:
        guards.append(Rule((base_atom(z),), (W,)))
        guards.append(Rule((primed_atom(z),), (W,)))
    atoms.append(W)
    return atoms, facts, guards


def _core(products: Iterable[Clause], head: Atom) -> list[Rule]:
    return [Rule((head,), tuple(sigma(l) for l in p)) for p in products]


def eiter_gottlob(d: DnfQbf) -> DisjunctiveProgram:
    """Program with an answer set iff ``exists X forall Y`` of the DNF ``d`` is true."""
    if d.t != 1:
        raise ValueError("eiter_gottlob takes a single DNF; use eiter_gottlob_multi")
    atoms, facts, guards = _fixed_part(d)
    core = _core(d.components[0], W)
    return DisjunctiveProgram(tuple(facts + guards + core + [Rule((W,), (), (W,))]), tuple(atoms))


def eiter_gottlob_multi(d: DnfQbf) -> DisjunctiveProgram:
    """Translation of a conjunction of t DNFs; goal atom w_h per component.

    For t = 1 the rule ``w :- w1`` is removed and ``w1`` renamed to ``w``, so
    the result equals :func:`eiter_gottlob`.
    """
    if d.t == 1:
        return eiter_gottlob(d)
    atoms, facts, guards = _fixed_part(d)
    heads = [w_atom(h) for h in range(1, d.t + 1)]
    atoms += heads
    join = [Rule((W,), tuple(heads))]
    core = [r for h, comp in zip(heads, d.components) for r in _core(comp, h)]
    return DisjunctiveProgram(
        tuple(facts + guards + join + core + [Rule((W,), (), (W,))]), tuple(atoms)
    )


def qbf_to_program(q: CnfQbf) -> DisjunctiveProgram:
    """Program with an answer set iff the ``forall exists`` CNF QBF ``q`` is false."""
    return eiter_gottlob_multi(dualize(q))


def expected_program_size(universals: int, existentials: int, products: list[int]) -> tuple[int, int]:
    """(atom count, rule count) of a translated program."""
    t = len(products)
    z = universals + existentials
    atoms = 2 * z + 1 + (t if t > 1 else 0)
    rules = z + 2 * existentials + sum(products) + 1 + (1 if t > 1 else 0)
    return atoms, rules
