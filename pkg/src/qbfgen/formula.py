"""Variables, literals, clauses and the CNF/DNF containers used by every model.

Formulas are ordered tuples of clauses; repeated clauses are kept. An empty
clause is FALSE and an empty formula is TRUE.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence


class Block(enum.Enum):
    UNIVERSAL = "x"
    EXISTENTIAL = "y"
    PLAIN = "v"
    AUX = "s"


class Var(NamedTuple):
    block: Block
    index: int

    def __str__(self) -> str:
        return f"{self.block.value}{self.index}"


class Literal(NamedTuple):
    var: Var
    positive: bool = True

    def __neg__(self) -> Literal:
        return Literal(self.var, not self.positive)

    def complement(self) -> Literal:
        return Literal(self.var, not self.positive)

    def __str__(self) -> str:
        return str(self.var) if self.positive else f"-{self.var}"


def x(i: int, positive: bool = True) -> Literal:
    return Literal(Var(Block.UNIVERSAL, i), positive)


def y(j: int, positive: bool = True) -> Literal:
    return Literal(Var(Block.EXISTENTIAL, j), positive)


def v(j: int, positive: bool = True) -> Literal:
    return Literal(Var(Block.PLAIN, j), positive)


def s(j: int, positive: bool = True) -> Literal:
    return Literal(Var(Block.AUX, j), positive)


Assignment = Mapping[Var, bool]


class FormulaError(ValueError):
    pass


class Clause(tuple):
    """An ordered disjunction of literals over pairwise distinct variables."""

    __slots__ = ()

    def __new__(cls, literals: Iterable[Literal] = ()) -> Clause:
        lits = tuple(literals)
        if len({lit.var for lit in lits}) != len(lits):
            raise FormulaError(f"repeated variable in clause {lits}")
        return super().__new__(cls, lits)

    @property
    def literals(self) -> tuple[Literal, ...]:
        return tuple(self)

    def block_part(self, block: Block) -> Clause:
        return Clause(lit for lit in self if lit.var.block is block)

    def evaluate(self, assignment: Assignment) -> bool:
        return any(assignment[lit.var] == lit.positive for lit in self)

    def __repr__(self) -> str:
        return "(" + " | ".join(map(str, self)) + ")"


@dataclass(frozen=True)
class CnfFormula:
    """Conjunction of clauses over a universe split into blocks.

    ``num_plain`` is used for unquantified SAT instances; quantified matrices
    use ``num_universal``/``num_existential``. ``num_aux`` counts selector
    variables introduced by the Tseitin encoding.
    """

    clauses: tuple[Clause, ...]
    num_universal: int = 0
    num_existential: int = 0
    num_plain: int = 0
    num_aux: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if self.num_plain and (self.num_universal or self.num_existential):
            raise FormulaError("PLAIN variables cannot be mixed with quantified blocks")
        sizes = self.block_sizes()
        for clause in self.clauses:
            for lit in clause:
                block, index = lit.var
                if not 1 <= index <= sizes[block]:
                    raise FormulaError(f"literal {lit} outside declared block size {sizes[block]}")

    def block_sizes(self) -> dict[Block, int]:
        return {
            Block.UNIVERSAL: self.num_universal,
            Block.EXISTENTIAL: self.num_existential,
            Block.PLAIN: self.num_plain,
            Block.AUX: self.num_aux,
        }

    def variables(self) -> list[Var]:
        """All declared variables in flat order: X, Y (or PLAIN), AUX."""
        out: list[Var] = []
        for block in (Block.UNIVERSAL, Block.EXISTENTIAL, Block.PLAIN, Block.AUX):
            out.extend(Var(block, i) for i in range(1, self.block_sizes()[block] + 1))
        return out

    @property
    def num_vars(self) -> int:
        return self.num_universal + self.num_existential + self.num_plain + self.num_aux

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def evaluate(self, assignment: Assignment) -> bool:
        return all(c.evaluate(assignment) for c in self.clauses)

    def project(self, block: Block) -> CnfFormula:
        """Keep only the literals of ``block`` in every clause (e.g. F^Y)."""
        return CnfFormula(
            tuple(c.block_part(block) for c in self.clauses),
            **{k: getattr(self, k) for k in ("num_universal", "num_existential", "num_plain", "num_aux")},
        )

    def with_clauses(self, clauses: Iterable[Clause]) -> CnfFormula:
        return CnfFormula(
            tuple(clauses), self.num_universal, self.num_existential, self.num_plain, self.num_aux
        )


@dataclass(frozen=True)
class MultiCnf:
    """Disjunction of CNF components over a shared universe."""

    components: tuple[CnfFormula, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise FormulaError("a MultiCnf needs at least one component")
        first = self.components[0].block_sizes()
        if any(c.block_sizes() != first for c in self.components[1:]):
            raise FormulaError("components must share the same variable universe")

    @property
    def t(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[CnfFormula]:
        return iter(self.components)

    def evaluate(self, assignment: Assignment) -> bool:
        return any(c.evaluate(assignment) for c in self.components)


@dataclass(frozen=True)
class CnfQbf:
    """``forall X exists Y`` over a disjunction of CNF components."""

    universals: int
    existentials: int
    matrix: MultiCnf
    aux: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.matrix, CnfFormula):
            object.__setattr__(self, "matrix", MultiCnf((self.matrix,)))
        for comp in self.matrix:
            if comp.num_plain:
                raise FormulaError("QBF matrices use UNIVERSAL/EXISTENTIAL blocks, not PLAIN")
            if (comp.num_universal, comp.num_existential, comp.num_aux) != (
                self.universals,
                self.existentials,
                self.aux,
            ):
                raise FormulaError("matrix block sizes disagree with the prefix")

    @property
    def t(self) -> int:
        return self.matrix.t

    @property
    def components(self) -> tuple[CnfFormula, ...]:
        return self.matrix.components

    def evaluate(self, assignment: Assignment) -> bool:
        return self.matrix.evaluate(assignment)


Product = Clause  # a conjunction of non-complementary literals; same shape as a clause


@dataclass(frozen=True)
class DnfQbf:
    """``exists X forall Y`` over a conjunction of DNF components.

    ``exist_outer`` counts the variables of the UNIVERSAL block of the primal
    formula (now existentially quantified); ``univ_inner`` counts the
    EXISTENTIAL block (now universal). Literals keep their original blocks.
    """

    exist_outer: int
    univ_inner: int
    components: tuple[tuple[Product, ...], ...]
    aux: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(tuple(c) for c in self.components))
        if not self.components:
            raise FormulaError("a DnfQbf needs at least one component")

    @property
    def t(self) -> int:
        return len(self.components)

    def evaluate(self, assignment: Assignment) -> bool:
        return all(
            any(all(assignment[l.var] == l.positive for l in p) for p in comp)
            for comp in self.components
        )


def restrict(f: CnfFormula, assignment: Assignment) -> CnfFormula:
    """Simplify ``f`` under a total assignment of its universal block.

    Clauses with a true universal literal are dropped; the remaining ones keep
    only their non-universal literals.
    """
    for i in range(1, f.num_universal + 1):
        if Var(Block.UNIVERSAL, i) not in assignment:
            raise FormulaError("incomplete universal assignment")
    kept = []
    for clause in f.clauses:
        rest = []
        satisfied = False
        for lit in clause:
            if lit.var.block is Block.UNIVERSAL:
                if assignment[lit.var] == lit.positive:
                    satisfied = True
                    break
            else:
                rest.append(lit)
        if not satisfied:
            kept.append(Clause(rest))
    return CnfFormula(tuple(kept), 0, f.num_existential, f.num_plain, f.num_aux)


def universal_assignment(bits: int, count: int) -> dict[Var, bool]:
    """Assignment of x1..x_count read from the low bits of ``bits`` (x1 = bit 0)."""
    return {Var(Block.UNIVERSAL, i + 1): bool(bits >> i & 1) for i in range(count)}


def _negate_all(lits: Sequence[Literal]) -> Clause:
    return Clause(lit.complement() for lit in lits)


def dualize(q: CnfQbf) -> DnfQbf:
    """De Morgan dual: every clause becomes the product of its negated literals."""
    comps = tuple(tuple(_negate_all(c) for c in comp.clauses) for comp in q.matrix)
    return DnfQbf(q.universals, q.existentials, comps, q.aux)


def undualize(d: DnfQbf) -> CnfQbf:
    """Inverse of :func:`dualize`."""
    comps = tuple(
        CnfFormula(tuple(_negate_all(p) for p in comp), d.exist_outer, d.univ_inner, 0, d.aux)
        for comp in d.components
    )
    return CnfQbf(d.exist_outer, d.univ_inner, MultiCnf(comps), d.aux)


@dataclass(frozen=True)
class FlatNumbering:
    """Bijection from block variables to DIMACS integers: X, then Y/PLAIN, then AUX."""

    num_universal: int = 0
    num_existential: int = 0
    num_plain: int = 0
    num_aux: int = 0
    _offsets: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        offsets = {
            Block.UNIVERSAL: 0,
            Block.EXISTENTIAL: self.num_universal,
            Block.PLAIN: self.num_universal + self.num_existential,
            Block.AUX: self.num_universal + self.num_existential + self.num_plain,
        }
        object.__setattr__(self, "_offsets", offsets)

    @classmethod
    def of(cls, f: CnfFormula) -> FlatNumbering:
        return cls(f.num_universal, f.num_existential, f.num_plain, f.num_aux)

    @property
    def size(self) -> int:
        return self.num_universal + self.num_existential + self.num_plain + self.num_aux

    def number(self, var: Var) -> int:
        return self._offsets[var.block] + var.index

    def literal(self, lit: Literal) -> int:
        n = self.number(lit.var)
        return n if lit.positive else -n

    def var(self, number: int) -> Var:
        for block in (Block.AUX, Block.PLAIN, Block.EXISTENTIAL, Block.UNIVERSAL):
            off = self._offsets[block]
            if number > off and getattr(self, "num_" + block.name.lower()) >= number - off:
                return Var(block, number - off)
        raise FormulaError(f"variable {number} outside numbering of size {self.size}")

    def clause(self, clause: Clause) -> list[int]:
        return [self.literal(lit) for lit in clause]

    def clauses(self, f: CnfFormula) -> list[list[int]]:
        return [self.clause(c) for c in f.clauses]
