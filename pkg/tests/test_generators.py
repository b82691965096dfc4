from collections import Counter
from math import comb, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2_contingency, chisquare

from qbfgen.formula import Block, FlatNumbering, MultiCnf, restrict, universal_assignment
from qbfgen.generators import (
    GenSpec,
    Model,
    ParameterError,
    clause_space,
    consistent_xsets,
    gen_chen_interian,
    gen_controlled,
    gen_gctd,
    gen_kcnf,
    gen_multi,
    gen_sgctd,
    rng_for,
    smooth_num_universals,
)
from qbfgen.oracle import exhaustive_sat

ALPHA = 0.01


def test_kcnf_shape():
    f = gen_kcnf(3, 5, 4, rng_for(1))
    assert len(f.clauses) == 4
    for c in f.clauses:
        assert len(c) == 3
        assert len({l.var for l in c}) == 3
        assert all(l.var.block is Block.PLAIN and 1 <= l.var.index <= 5 for l in c)


def test_kcnf_clause_uniformity():
    space = clause_space(3, 3)
    assert len(space) == 8
    counts = Counter(frozenset(gen_kcnf(3, 3, 1, rng_for(9, i)).clauses[0]) for i in range(8000))
    assert set(counts) == set(space)
    assert chisquare([counts[c] for c in space]).pvalue > ALPHA


def test_kcnf_uniformity_wider_space():
    # 2^2 * C(4,2) = 24 clauses, 100x space-size draws spread over clause positions
    space = clause_space(2, 4)
    counts = Counter()
    for i in range(240):
        counts.update(frozenset(c) for c in gen_kcnf(2, 4, 10, rng_for(3, i)).clauses)
    assert chisquare([counts[c] for c in space]).pvalue > ALPHA


def test_determinism_by_reexecution():
    a = gen_kcnf(3, 20, 50, rng_for(123, 7))
    b = gen_kcnf(3, 20, 50, rng_for(123, 7))
    c = gen_kcnf(3, 20, 50, rng_for(123, 8))
    assert a == b
    assert a != c
    spec = GenSpec("ctd", dict(k=4, A=6, E=5), components=3, seed=2**64 - 1, instance_index=4)
    assert gen_multi(spec) == gen_multi(spec)


def test_kcnf_parameter_errors():
    with pytest.raises(ParameterError):
        gen_kcnf(4, 3, 1, rng_for(0))
    with pytest.raises(ParameterError):
        GenSpec("kcnf", dict(k=3, n=2, m=1))
    with pytest.raises(ParameterError):
        GenSpec("kcnf", dict(k=3, n=5))


def test_chen_interian_shape():
    q = gen_chen_interian(1, 3, 70, 70, 350, rng_for(5))
    f = q.components[0]
    assert q.t == 1 and len(f.clauses) == 350
    for c in f.clauses:
        assert len(c.block_part(Block.UNIVERSAL)) == 1
        assert len(c.block_part(Block.EXISTENTIAL)) == 3


def test_chen_interian_without_universal_literals_is_kcnf():
    q = gen_chen_interian(0, 3, 4, 6, 5, rng_for(8))
    k = gen_kcnf(3, 6, 5, rng_for(8))
    f = q.components[0]
    assert all(not c.block_part(Block.UNIVERSAL) for c in f.clauses)
    # same stream, same draws: the vacuous X part consumes no randomness
    assert [[(l.var.index, l.positive) for l in c] for c in f.clauses] == [
        [(l.var.index, l.positive) for l in c] for c in k.clauses
    ]


def test_chen_interian_parameter_errors():
    with pytest.raises(ParameterError):
        gen_chen_interian(3, 1, 2, 4, 5, rng_for(0))
    with pytest.raises(ParameterError):
        gen_chen_interian(0, 0, 2, 4, 5, rng_for(0))


def test_chen_interian_expected_restriction_count():
    rng = np.random.default_rng(99)
    kept = []
    for i in range(2000):
        f = gen_chen_interian(1, 3, 8, 8, 32, rng_for(31, i)).components[0]
        sigma = universal_assignment(int(rng.integers(0, 2**8)), 8)
        kept.append(len(restrict(f, sigma).clauses))
    se = sqrt(32 * 0.25 / 2000)
    assert abs(np.mean(kept) - 16) <= 3 * se


def test_controlled_shape():
    q = gen_controlled(4, 3, 5, rng_for(3))
    f = q.components[0]
    assert len(f.clauses) == 6
    for i in range(1, 4):
        assert f.clauses[2 * i - 2].block_part(Block.UNIVERSAL)[0] == (
            (Block.UNIVERSAL, i),
            True,
        )
        assert f.clauses[2 * i - 1].block_part(Block.UNIVERSAL)[0] == ((Block.UNIVERSAL, i), False)
    assert all(len(c) == 4 for c in f.clauses)
    xlits = [l for c in f.clauses for l in c.block_part(Block.UNIVERSAL)]
    assert len(set(xlits)) == len(xlits) == 6


@pytest.mark.parametrize("k,A,E", [(4, 3, 5), (3, 6, 4), (2, 5, 3)])
def test_controlled_restriction_count_exact(k, A, E):
    for seed in range(5):
        f = gen_controlled(k, A, E, rng_for(seed)).components[0]
        for bits in range(2**A):
            assert len(restrict(f, universal_assignment(bits, A)).clauses) == A


def test_controlled_parameter_error():
    with pytest.raises(ParameterError):
        gen_controlled(5, 2, 3, rng_for(0))


def test_controlled_y_projection_uniform():
    space = clause_space(2, 3, Block.EXISTENTIAL)
    counts = Counter()
    for i in range(5000):
        fy = gen_controlled(3, 2, 3, rng_for(17, i)).components[0].project(Block.EXISTENTIAL)
        assert len(fy.clauses) == 4
        counts.update(frozenset(c) for c in fy.clauses)
    assert chisquare([counts[c] for c in space]).pvalue > ALPHA


def test_gctd_worked_example_counts():
    q = gen_gctd(2, 5, 3, 4, rng_for(0))
    f = q.components[0]
    assert len(f.clauses) == comb(3, 2) * 2**2 == 12
    assert all(len(c) == 5 for c in f.clauses)
    for bits in range(8):
        r = restrict(f, universal_assignment(bits, 3))
        assert len(r.clauses) == 3 and all(len(c) == 3 for c in r.clauses)


def test_gctd_enumeration_order():
    names = [
        " ".join(("" if l.positive else "-") + f"x{l.var.index}" for l in xs)
        for xs in consistent_xsets(2, 3)
    ]
    assert names == [
        "x1 x2", "-x1 x2", "x1 -x2", "-x1 -x2",
        "x1 x3", "-x1 x3", "x1 -x3", "-x1 -x3",
        "x2 x3", "-x2 x3", "x2 -x3", "-x2 -x3",
    ]


def test_gctd_parameter_errors():
    with pytest.raises(ParameterError):
        gen_gctd(3, 3, 4, 4, rng_for(0))
    with pytest.raises(ParameterError):
        gen_gctd(2, 4, 1, 4, rng_for(0))


def test_gctd_h1_matches_controlled_distribution():
    def key(q):
        return tuple(frozenset(c) for c in q.components[0].clauses)

    a = Counter(key(gen_gctd(1, 3, 2, 2, rng_for(41, i))) for i in range(5000))
    b = Counter(key(gen_controlled(3, 2, 2, rng_for(42, i))) for i in range(5000))
    cells = sorted(set(a) | set(b), key=repr)
    table = np.array([[a[c] for c in cells], [b[c] for c in cells]])
    assert chi2_contingency(table).pvalue > ALPHA


def test_smooth_inverts_m():
    assert smooth_num_universals(2, 420) == 15
    assert smooth_num_universals(2, 364) == 14
    assert smooth_num_universals(2, 365) == 15
    assert smooth_num_universals(2, 150) == 10
    assert smooth_num_universals(2, 612) == 18
    q = gen_sgctd(2, 5, 32, 420, rng_for(1))
    assert q.universals == 15 and len(q.components[0].clauses) == 420
    assert gen_sgctd(2, 5, 32, 364, rng_for(1)).universals == 14


def test_smooth_full_selection_is_full_enumeration():
    q = gen_sgctd(2, 5, 6, 4 * comb(5, 2), rng_for(2))
    xparts = Counter(frozenset(c.block_part(Block.UNIVERSAL)) for c in q.components[0].clauses)
    assert xparts == Counter(frozenset(s) for s in consistent_xsets(2, 5))


def test_smooth_partial_selection_without_replacement():
    q = gen_sgctd(2, 4, 5, 30, rng_for(3))
    assert q.universals == 5
    xparts = [frozenset(c.block_part(Block.UNIVERSAL)) for c in q.components[0].clauses]
    assert len(xparts) == 30 and len(set(xparts)) == 30


def test_multi_t1_is_base():
    spec = GenSpec("kcnf", dict(k=3, n=200, m=852), seed=4)
    mc = gen_multi(spec)
    assert isinstance(mc, MultiCnf) and mc.t == 1 and len(mc.components[0].clauses) == 852
    assert mc.components[0] == gen_kcnf(3, 200, 852, rng_for(4, 0, 0))


def test_multi_t11_chen_interian():
    q = gen_multi(GenSpec("ci", dict(a=1, e=3, A=24, E=12, m=76), components=11, seed=8))
    assert q.t == 11
    assert {(c.num_universal, c.num_existential) for c in q.components} == {(24, 12)}
    assert all(len(c.clauses) == 76 for c in q.components)


def test_multi_components_independent():
    n = 2000
    sat = np.zeros((n, 3), dtype=bool)
    for i in range(n):
        mc = gen_multi(GenSpec("kcnf", dict(k=3, n=10, m=42), components=3, seed=55, instance_index=i))
        for j, comp in enumerate(mc.components):
            sat[i, j] = exhaustive_sat(FlatNumbering.of(comp).clauses(comp), 10)
    p = sat.mean(axis=0)
    for a, b in [(0, 1), (0, 2), (1, 2)]:
        joint = (sat[:, a] & sat[:, b]).mean()
        expect = p[a] * p[b]
        se = sqrt(expect * (1 - expect) / n)
        assert abs(joint - expect) <= 3 * se


def _check_structure(spec: GenSpec) -> None:
    inst = gen_multi(spec)
    comps = inst.components
    assert len(comps) == spec.components
    p = spec.params
    for f in comps:
        if spec.model is Model.KCNF:
            assert len(f.clauses) == p["m"]
            assert all(len(c) == p["k"] for c in f.clauses)
            continue
        widths = {
            Model.CHEN_INTERIAN: (p.get("a"), p.get("e")),
            Model.CONTROLLED: (1, p.get("k", 0) - 1),
            Model.GEN_CONTROLLED: (p.get("h"), p.get("k", 0) - p.get("h", 0)),
            Model.SMOOTH_GCTD: (p.get("h"), p.get("k", 0) - p.get("h", 0)),
        }[spec.model]
        for c in f.clauses:
            assert len(c.block_part(Block.UNIVERSAL)) == widths[0]
            assert len(c.block_part(Block.EXISTENTIAL)) == widths[1]


models = st.one_of(
    st.builds(lambda k, extra, m: ("kcnf", dict(k=k, n=k + extra, m=m)), st.integers(1, 4), st.integers(0, 6), st.integers(0, 30)),
    st.builds(lambda a, e, A, E, m: ("ci", dict(a=a, e=e, A=a + A, E=e + E, m=m)), st.integers(0, 2), st.integers(1, 3), st.integers(0, 4), st.integers(0, 4), st.integers(0, 20)),
    st.builds(lambda k, A, E: ("ctd", dict(k=k, A=A, E=k - 1 + E)), st.integers(2, 5), st.integers(1, 8), st.integers(0, 4)),
    st.builds(lambda h, d, A, E: ("gctd", dict(h=h, k=h + d, A=h + A, E=d + E)), st.integers(1, 3), st.integers(1, 3), st.integers(0, 3), st.integers(0, 3)),
    st.builds(lambda h, d, E, m: ("sgctd", dict(h=h, k=h + d, E=d + E, m=m)), st.integers(1, 2), st.integers(1, 3), st.integers(0, 3), st.integers(1, 60)),
)


@settings(max_examples=200, deadline=None)
@given(model=models, t=st.integers(1, 3), seed=st.integers(0, 2**64 - 1), index=st.integers(0, 10**6))
def test_structure_property(model, t, seed, index):
    name, params = model
    _check_structure(GenSpec(name, params, components=t, seed=seed, instance_index=index))
