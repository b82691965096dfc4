from pathlib import Path

import pytest

from qbfgen.formats import (
    FormatError,
    ParseError,
    parse_aspcore,
    parse_dimacs,
    parse_problem,
    parse_qdimacs,
    write_aspcore,
    write_dimacs,
    write_qdimacs,
)
from qbfgen.formula import Block, Clause, CnfFormula, CnfQbf, DnfQbf, FlatNumbering, v, x, y
from qbfgen.generators import GenSpec, gen_multi
from qbfgen.oracle import qbf_decide
from qbfgen.solvers import render_instance
from qbfgen.transforms import eiter_gottlob, qbf_to_program, tseitin

GOLDEN = Path(__file__).parent / "golden"

MODELS = [
    ("ci", dict(a=1, e=2, A=3, E=4, m=6)),
    ("ctd", dict(k=3, A=3, E=3)),
    ("gctd", dict(h=2, k=4, A=3, E=4)),
    ("sgctd", dict(h=1, k=3, E=4, m=5)),
]


def test_dimacs_two_var_example():
    f = CnfFormula((Clause([v(1), v(2, False)]),), num_plain=2)
    assert write_dimacs(f) == "p cnf 2 1\n1 -2 0\n"


def test_dimacs_empty_formula():
    assert write_dimacs(CnfFormula((), num_plain=5)) == "p cnf 5 0\n"
    assert parse_dimacs("p cnf 5 0\n") == CnfFormula((), num_plain=5)


def test_dimacs_rejects_universals():
    q = gen_multi(GenSpec("ctd", dict(k=3, A=2, E=2), seed=0))
    with pytest.raises(FormatError):
        write_dimacs(q.components[0])


def test_qdimacs_tiny_example():
    f = CnfFormula((Clause([x(1), y(1), y(2)]), Clause([x(1, False), y(1, False), y(2, False)])), 1, 2)
    text = write_qdimacs(CnfQbf(1, 2, f))
    assert text == "p cnf 3 2\na 1 0\ne 2 3 0\n1 2 3 0\n-1 -2 -3 0\n"
    assert parse_qdimacs(text) == CnfQbf(1, 2, f)


def test_qdimacs_requires_single_component():
    q = gen_multi(GenSpec("ctd", dict(k=3, A=2, E=2), components=2, seed=0))
    with pytest.raises(FormatError):
        write_qdimacs(q)


def test_qdimacs_aux_after_existentials():
    q = gen_multi(GenSpec("ctd", dict(k=3, A=2, E=3), components=2, seed=0))
    lines = write_qdimacs(tseitin(q)).splitlines()
    assert lines[1] == "a 1 2 0"
    assert lines[2] == "e 3 4 5 6 7 0"  # Y = 3..5, selectors 6, 7


def test_aspcore_fact_and_loop():
    text = write_aspcore(eiter_gottlob(DnfQbf(1, 1, ((Clause([x(1), y(1)]),),))))
    lines = text.splitlines()
    assert lines[0] == "x1 | nx1."
    assert lines[-1] == "w :- not w."


def test_dimacs_round_trip_1000():
    for i in range(1000):
        t = 1 + i % 3
        f = gen_multi(GenSpec("kcnf", dict(k=3, n=6 + i % 10, m=i % 30), components=t, seed=17, instance_index=i))
        flat = tseitin(f)
        back = parse_dimacs(write_dimacs(flat))
        assert FlatNumbering.of(back).clauses(back) == FlatNumbering.of(flat).clauses(flat)
        assert back.num_vars == flat.num_vars
        if t == 1:
            assert back == flat


@pytest.mark.parametrize("model,params", MODELS)
def test_qdimacs_round_trip(model, params):
    for i in range(50):
        t = 1 + i % 3
        q = gen_multi(GenSpec(model, params, components=t, seed=23, instance_index=i))
        flat = tseitin(q)
        text = write_qdimacs(flat)
        back = parse_qdimacs(text)
        if t == 1:
            assert back == q
        # selectors come back as ordinary existentials; numbering is unchanged
        assert write_qdimacs(back) == text
        assert qbf_decide(back) == qbf_decide(q)


@pytest.mark.parametrize("model,params", MODELS)
def test_aspcore_round_trip(model, params):
    for i in range(25):
        q = gen_multi(GenSpec(model, params, components=1 + i % 3, seed=29, instance_index=i))
        p = qbf_to_program(q)
        back = parse_aspcore(write_aspcore(p, "comment line"))
        assert back.rules == p.rules
        assert back.atoms == p.atoms


def test_writers_deterministic():
    spec = GenSpec("ci", dict(a=1, e=2, A=4, E=4, m=9), components=2, seed=5)
    for fmt in ("qdimacs", "aspcore"):
        assert render_instance(gen_multi(spec), fmt, spec.describe()) == render_instance(
            gen_multi(spec), fmt, spec.describe()
        )


def test_no_trailing_whitespace_single_newlines():
    spec = GenSpec("gctd", dict(h=2, k=5, A=3, E=4), components=2, seed=1)
    for fmt in ("qdimacs", "aspcore"):
        text = render_instance(gen_multi(spec), fmt, spec.describe())
        assert "\r" not in text and text.endswith("\n") and not text.endswith("\n\n")
        assert all(line == line.rstrip() for line in text.split("\n"))


def test_header_counts_match_bodies():
    spec = GenSpec("sgctd", dict(h=2, k=4, E=5, m=13), components=3, seed=2)
    text = render_instance(gen_multi(spec), "qdimacs", spec.describe())
    lines = [l for l in text.splitlines() if not l.startswith("c")]
    _, _, nv, nc = lines[0].split()
    body = [l for l in lines[1:] if l[0] not in "ae"]
    assert int(nc) == len(body) == 1 + 3 * 13


@pytest.mark.parametrize("text,line,message", [
    ("p cnf 2 1\n1 1 0\n", 2, "duplicate variable in clause"),
    ("p cnf 2 1\n1 -1 0\n", 2, "duplicate variable in clause"),
    ("p cnf x 1\n1 0\n", 1, "malformed header"),
    ("p cnf 2 1\n1 3 0\n", 2, "out of range"),
    ("c hi\np cnf 2 1\n1 2\n", 3, "missing terminating 0"),
    ("1 2 0\n", 1, "before the 'p cnf' header"),
    ("p cnf 2 1\na 1\n1 2 0\n", 2, "missing terminating 0"),
])
def test_parse_errors_name_line(text, line, message):
    with pytest.raises(ParseError, match=message) as info:
        parse_problem(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_parse_clause_count_mismatch():
    with pytest.raises(ParseError, match="declares 2 clauses"):
        parse_dimacs("p cnf 2 2\n1 2 0\n")


def test_qdimacs_rejects_free_and_wrong_prefix():
    with pytest.raises(ParseError, match="free variable"):
        parse_qdimacs("p cnf 3 1\na 1 0\ne 2 0\n1 2 3 0\n")
    with pytest.raises(ParseError, match="not forall-exists"):
        parse_qdimacs("p cnf 3 1\ne 2 0\na 1 0\n1 2 0\n")


def test_aspcore_parse_errors():
    with pytest.raises(ParseError, match="terminating"):
        parse_aspcore("x1 | nx1\n")
    with pytest.raises(ParseError) as info:
        parse_aspcore("w.\nw :- 3a.\n")
    assert info.value.line == 2


def test_golden_gctd_example():
    spec = GenSpec("gctd", dict(h=2, k=5, A=3, E=4), seed=2024)
    text = render_instance(gen_multi(spec), "qdimacs", spec.describe())
    golden = (GOLDEN / "gctd_h2_k5_A3_E4_seed2024.qdimacs").read_text()
    assert text == golden
    q = parse_qdimacs(golden)
    assert len(q.components[0].clauses) == 12
    xparts = [tuple(lit for lit in c if lit.var.block is Block.UNIVERSAL) for c in q.components[0].clauses]
    expected = [
        (x(i, bool(~b & 1)), x(j, bool(~b >> 1 & 1)))
        for i, j in ((1, 2), (1, 3), (2, 3))
        for b in range(4)
    ]
    assert xparts == expected


def test_golden_worked_translation():
    d = DnfQbf(1, 1, ((Clause([x(1), y(1)]), Clause([x(1, False), y(1, False)])),))
    golden = (GOLDEN / "worked_dnf.lp").read_text()
    assert write_aspcore(eiter_gottlob(d)) == golden
    assert parse_aspcore(golden) == eiter_gottlob(d)
