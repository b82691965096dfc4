"""Random instance generators for the five base models and their t-component wrappers.

Every instance draws from its own stream, derived from ``(seed, instance_index,
component_index)`` via :class:`numpy.random.SeedSequence` spawn keys feeding a
PCG64 bit generator. Streams therefore do not depend on generation order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb

import numpy as np

from .formula import Block, Clause, CnfFormula, CnfQbf, Literal, MultiCnf, Var

RNG_ALGORITHM = "numpy PCG64 via SeedSequence(entropy=seed, spawn_key=(instance, component))"


class ParameterError(ValueError):
    pass


class Model(str, enum.Enum):
    KCNF = "kcnf"
    CHEN_INTERIAN = "ci"
    CONTROLLED = "ctd"
    GEN_CONTROLLED = "gctd"
    SMOOTH_GCTD = "sgctd"


# parameters each model takes, in canonical order
MODEL_PARAMS: dict[Model, tuple[str, ...]] = {
    Model.KCNF: ("k", "n", "m"),
    Model.CHEN_INTERIAN: ("a", "e", "A", "E", "m"),
    Model.CONTROLLED: ("k", "A", "E"),
    Model.GEN_CONTROLLED: ("h", "k", "A", "E"),
    Model.SMOOTH_GCTD: ("h", "k", "E", "m"),
}


def rng_for(seed: int, instance_index: int = 0, component: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(instance_index, component))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class GenSpec:
    """One model with its parameters, a component count and a seed."""

    model: Model
    params: dict = field(hash=False)
    components: int = 1
    seed: int = 0
    instance_index: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        names = MODEL_PARAMS[self.model]
        missing = [p for p in names if p not in self.params]
        extra = [p for p in self.params if p not in names]
        if missing or extra:
            raise ParameterError(
                f"{self.model.value} takes parameters {names}; missing {missing}, unexpected {extra}"
            )
        object.__setattr__(self, "params", {p: int(self.params[p]) for p in names})
        if self.components < 1:
            raise ParameterError("component count t must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if self.instance_index < 0:
            raise ParameterError("instance_index must be non-negative")
        check_params(self.model, **self.params)

    def __getitem__(self, name: str) -> int:
        return self.params[name]

    def replace(self, **changes) -> GenSpec:
        params = dict(self.params)
        for key in list(changes):
            if key in params:
                params[key] = changes.pop(key)
        fields = dict(
            model=self.model,
            params=params,
            components=self.components,
            seed=self.seed,
            instance_index=self.instance_index,
        )
        fields.update(changes)
        return GenSpec(**fields)

    @property
    def universals(self) -> int:
        if self.model is Model.KCNF:
            return 0
        if self.model is Model.SMOOTH_GCTD:
            return smooth_num_universals(self["h"], self["m"])
        return self["A"]

    @property
    def existentials(self) -> int:
        return self["n"] if self.model is Model.KCNF else self["E"]

    def label(self) -> str:
        """Stable identifier used in file names and CSV rows."""
        params = "_".join(f"{k}{v}" for k, v in self.params.items())
        return f"{self.model.value}_{params}_t{self.components}"

    def describe(self) -> str:
        params = " ".join(f"{k}={v}" for k, v in self.params.items())
        return (
            f"model={self.model.value} {params} t={self.components} "
            f"seed={self.seed} instance={self.instance_index}"
        )


def check_params(model: Model, **p: int) -> None:
    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise ParameterError(f"{model.value}: {msg}")

    if model is Model.KCNF:
        need(1 <= p["k"] <= p["n"], "requires 1 <= k <= n")
        need(p["m"] >= 0, "requires m >= 0")
    elif model is Model.CHEN_INTERIAN:
        need(p["a"] >= 0 and p["e"] >= 0, "requires a, e >= 0")
        need(p["a"] <= p["A"] and p["e"] <= p["E"], "requires a <= A and e <= E")
        need(p["a"] + p["e"] >= 1, "requires a + e >= 1")
        need(p["m"] >= 0, "requires m >= 0")
    elif model is Model.CONTROLLED:
        need(p["k"] >= 2, "requires k >= 2")
        need(p["A"] >= 1, "requires A >= 1")
        need(p["E"] >= p["k"] - 1, "requires E >= k - 1")
    elif model is Model.GEN_CONTROLLED:
        need(1 <= p["h"] < p["k"], "requires 1 <= h < k")
        need(p["A"] >= p["h"], "requires A >= h")
        need(p["E"] >= p["k"] - p["h"], "requires E >= k - h")
    elif model is Model.SMOOTH_GCTD:
        need(1 <= p["h"] < p["k"], "requires 1 <= h < k")
        need(p["m"] >= 1, "requires m >= 1")
        need(p["E"] >= p["k"] - p["h"], "requires E >= k - h")


def _sample_clauses(
    rng: np.random.Generator, width: int, nvars: int, count: int, block: Block
) -> list[list[Literal]]:
    """``count`` independent uniform ``width``-literal clauses over ``nvars`` variables.

    Variables come from a partial Fisher-Yates shuffle, signs from fair coins.
    """
    if count == 0:
        return []
    if width == 0:
        return [[] for _ in range(count)]
    picks = rng.integers(0, nvars - np.arange(width), size=(count, width)).tolist()
    signs = rng.integers(0, 2, size=(count, width)).tolist()
    out = []
    for row, sgn in zip(picks, signs):
        swapped: dict[int, int] = {}
        lits = []
        for j, r in enumerate(row):
            pos = j + r
            chosen = swapped.get(pos, pos)
            swapped[pos] = swapped.get(j, j)
            lits.append(Literal(Var(block, chosen + 1), not sgn[j]))
        out.append(lits)
    return out


def gen_kcnf(k: int, n: int, m: int, rng: np.random.Generator) -> CnfFormula:
    check_params(Model.KCNF, k=k, n=n, m=m)
    clauses = tuple(Clause(c) for c in _sample_clauses(rng, k, n, m, Block.PLAIN))
    return CnfFormula(clauses, num_plain=n)


def _chen_interian_matrix(a: int, e: int, A: int, E: int, m: int, rng) -> CnfFormula:
    xs = _sample_clauses(rng, a, A, m, Block.UNIVERSAL)
    ys = _sample_clauses(rng, e, E, m, Block.EXISTENTIAL)
    return CnfFormula(tuple(Clause(cx + cy) for cx, cy in zip(xs, ys)), A, E)


def gen_chen_interian(a: int, e: int, A: int, E: int, m: int, rng: np.random.Generator) -> CnfQbf:
    check_params(Model.CHEN_INTERIAN, a=a, e=e, A=A, E=E, m=m)
    return CnfQbf(A, E, MultiCnf((_chen_interian_matrix(a, e, A, E, m, rng),)))


def _controlled_matrix(k: int, A: int, E: int, rng) -> CnfFormula:
    ys = _sample_clauses(rng, k - 1, E, 2 * A, Block.EXISTENTIAL)
    clauses = []
    for i in range(1, A + 1):
        clauses.append(Clause([Literal(Var(Block.UNIVERSAL, i), True)] + ys[2 * i - 2]))
        clauses.append(Clause([Literal(Var(Block.UNIVERSAL, i), False)] + ys[2 * i - 1]))
    return CnfFormula(tuple(clauses), A, E)


def gen_controlled(k: int, A: int, E: int, rng: np.random.Generator) -> CnfQbf:
    """Controlled model: clause 2i-1 carries x_i, clause 2i carries -x_i."""
    check_params(Model.CONTROLLED, k=k, A=A, E=E)
    return CnfQbf(A, E, MultiCnf((_controlled_matrix(k, A, E, rng),)))


def consistent_xsets(h: int, A: int) -> list[tuple[Literal, ...]]:
    """All consistent h-literal sets over x1..xA.

    Variable combinations in lexicographic order; within a combination the
    sign patterns count in binary with the first variable as the low bit
    (bit set = negated).
    """
    out = []
    for combo in combinations(range(1, A + 1), h):
        for pattern in range(2**h):
            out.append(
                tuple(
                    Literal(Var(Block.UNIVERSAL, i), not (pattern >> b & 1))
                    for b, i in enumerate(combo)
                )
            )
    return out


def _gctd_matrix(h: int, k: int, A: int, E: int, rng) -> CnfFormula:
    xsets = consistent_xsets(h, A)
    ys = _sample_clauses(rng, k - h, E, len(xsets), Block.EXISTENTIAL)
    return CnfFormula(tuple(Clause(list(xs) + cy) for xs, cy in zip(xsets, ys)), A, E)


def gen_gctd(h: int, k: int, A: int, E: int, rng: np.random.Generator) -> CnfQbf:
    check_params(Model.GEN_CONTROLLED, h=h, k=k, A=A, E=E)
    return CnfQbf(A, E, MultiCnf((_gctd_matrix(h, k, A, E, rng),)))


def smooth_num_universals(h: int, m: int) -> int:
    """The A with 2^h C(A-1,h) + 1 <= m <= 2^h C(A,h)."""
    if m < 1:
        raise ParameterError("smooth model requires m >= 1")
    A = h
    while 2**h * comb(A, h) < m:
        A += 1
    return A


def _sgctd_matrix(h: int, k: int, E: int, m: int, rng) -> CnfFormula:
    A = smooth_num_universals(h, m)
    full = _gctd_matrix(h, k, A, E, rng)
    if m == len(full.clauses):
        return full
    keep = np.sort(rng.choice(len(full.clauses), size=m, replace=False))
    return full.with_clauses(full.clauses[i] for i in keep.tolist())


def gen_sgctd(h: int, k: int, E: int, m: int, rng: np.random.Generator) -> CnfQbf:
    """Smooth generalized controlled model: m clauses of a gctd instance, without replacement.

    Selected clauses keep their relative order from the full enumeration.
    """
    check_params(Model.SMOOTH_GCTD, h=h, k=k, E=E, m=m)
    A = smooth_num_universals(h, m)
    return CnfQbf(A, E, MultiCnf((_sgctd_matrix(h, k, E, m, rng),)))


def _component(spec: GenSpec, rng: np.random.Generator) -> CnfFormula:
    p = spec.params
    if spec.model is Model.KCNF:
        return gen_kcnf(p["k"], p["n"], p["m"], rng)
    if spec.model is Model.CHEN_INTERIAN:
        return _chen_interian_matrix(p["a"], p["e"], p["A"], p["E"], p["m"], rng)
    if spec.model is Model.CONTROLLED:
        return _controlled_matrix(p["k"], p["A"], p["E"], rng)
    if spec.model is Model.GEN_CONTROLLED:
        return _gctd_matrix(p["h"], p["k"], p["A"], p["E"], rng)
    return _sgctd_matrix(p["h"], p["k"], p["E"], p["m"], rng)


def gen_multi(spec: GenSpec) -> MultiCnf | CnfQbf:
    """Disjunction of ``spec.components`` independent draws from the base model.

    KCNF specs give a :class:`MultiCnf`; the quantified models give a
    :class:`CnfQbf`.
    """
    comps = tuple(
        _component(spec, rng_for(spec.seed, spec.instance_index, c))
        for c in range(spec.components)
    )
    matrix = MultiCnf(comps)
    if spec.model is Model.KCNF:
        return matrix
    return CnfQbf(spec.universals, spec.existentials, matrix)


def clause_space(width: int, nvars: int, block: Block = Block.PLAIN) -> list[frozenset[Literal]]:
    """Every ``width``-literal clause over ``nvars`` variables, as literal sets."""
    out = []
    for combo in combinations(range(1, nvars + 1), width):
        for signs in product((True, False), repeat=width):
            out.append(frozenset(Literal(Var(block, i), s) for i, s in zip(combo, signs)))
    return out
