"""DIMACS, QDIMACS and ASPCore-2 writers and readers.

Output uses ``\\n`` line endings, no trailing whitespace and a final newline.
Comment lines (``c ...`` / ``% ...``) carry the generating parameters.
"""

from __future__ import annotations

import re

from .formula import Block, Clause, CnfFormula, CnfQbf, FlatNumbering, Literal, MultiCnf, Var
from .transforms import Atom, DisjunctiveProgram, Rule


class FormatError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _comments(prefix: str, comments: list[str] | str | None) -> list[str]:
    if comments is None:
        return []
    if isinstance(comments, str):
        comments = comments.splitlines()
    return [f"{prefix} {c}".rstrip() for c in comments]


def _clause_lines(num: FlatNumbering, f: CnfFormula) -> list[str]:
    return [" ".join([*map(str, num.clause(c)), "0"]) for c in f.clauses]


def write_dimacs(f: CnfFormula | MultiCnf, comments: list[str] | str | None = None) -> str:
    if isinstance(f, MultiCnf):
        if f.t != 1:
            raise FormatError("DIMACS needs a single component; apply tseitin first")
        f = f.components[0]
    if f.num_universal:
        raise FormatError("formula has universal variables; write QDIMACS instead")
    num = FlatNumbering.of(f)
    lines = _comments("c", comments)
    lines.append(f"p cnf {num.size} {len(f.clauses)}")
    lines += _clause_lines(num, f)
    return "\n".join(lines) + "\n"


def write_qdimacs(q: CnfQbf, comments: list[str] | str | None = None) -> str:
    if q.t != 1:
        raise FormatError("QDIMACS needs a single component; apply tseitin first")
    f = q.components[0]
    num = FlatNumbering.of(f)
    lines = _comments("c", comments)
    lines.append(f"p cnf {num.size} {len(f.clauses)}")
    if q.universals:
        lines.append(" ".join(["a", *map(str, range(1, q.universals + 1)), "0"]))
    if q.existentials + q.aux:
        lines.append(" ".join(["e", *map(str, range(q.universals + 1, num.size + 1)), "0"]))
    lines += _clause_lines(num, f)
    return "\n".join(lines) + "\n"


def _parse(text: str) -> tuple[int, list[tuple[str, list[int], int]], list[list[int]]]:
    header = None
    prefix: list[tuple[str, list[int], int]] = []
    clauses: list[list[int]] = []
    pending: list[int] = []
    pending_line = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise ParseError("second problem line", lineno)
            m = re.fullmatch(r"p\s+cnf\s+(\d+)\s+(\d+)", line)
            if not m:
                raise ParseError(f"malformed header {line!r}", lineno)
            header = (int(m.group(1)), int(m.group(2)))
            continue
        if header is None:
            raise ParseError("content before the 'p cnf' header", lineno)
        nvars = header[0]
        if line[0] in "ae":
            if clauses or pending:
                raise ParseError("quantifier line after clauses", lineno)
            toks = line.split()
            try:
                nums = [int(t) for t in toks[1:]]
            except ValueError:
                raise ParseError(f"malformed quantifier line {line!r}", lineno) from None
            if not nums or nums[-1] != 0:
                raise ParseError("quantifier line missing terminating 0", lineno)
            for v in nums[:-1]:
                if not 1 <= v <= nvars:
                    raise ParseError(f"variable {v} out of range 1..{nvars}", lineno)
            prefix.append((toks[0], nums[:-1], lineno))
            continue
        try:
            nums = [int(t) for t in line.split()]
        except ValueError:
            raise ParseError(f"malformed clause line {line!r}", lineno) from None
        if not pending:
            pending_line = lineno
        for lit in nums:
            if lit == 0:
                if len({abs(l) for l in pending}) != len(pending):
                    raise ParseError("duplicate variable in clause", pending_line)
                clauses.append(pending)
                pending = []
                continue
            if abs(lit) > nvars:
                raise ParseError(f"literal {lit} out of range 1..{nvars}", lineno)
            pending.append(lit)
            if not pending_line:
                pending_line = lineno
    if header is None:
        raise ParseError("missing 'p cnf' header")
    if pending:
        raise ParseError("clause missing terminating 0", pending_line)
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}")
    return header[0], prefix, clauses


def parse_dimacs(text: str) -> CnfFormula:
    """Read DIMACS CNF; variables become PLAIN v1..vn."""
    nvars, prefix, clauses = _parse(text)
    if prefix:
        raise ParseError(f"quantifier line in DIMACS input", prefix[0][2])
    return CnfFormula(
        tuple(Clause(Literal(Var(Block.PLAIN, abs(l)), l > 0) for l in c) for c in clauses),
        num_plain=nvars,
    )


def parse_qdimacs(text: str) -> CnfQbf:
    """Read a QDIMACS ``a ... e ...`` 2QBF.

    Universal variables are renumbered x1.. and existential ones y1.. in
    order of appearance in the prefix. Declared but unquantified variables
    that never occur are dropped; occurring free variables are rejected.
    """
    nvars, prefix, clauses = _parse(text)
    blocks = [q for q, _, _ in prefix]
    merged: list[tuple[str, list[int], int]] = []
    for q, vs, ln in prefix:
        if merged and merged[-1][0] == q:
            merged[-1][1].extend(vs)
        else:
            merged.append((q, list(vs), ln))
    if [q for q, _, _ in merged] not in ([], ["a"], ["e"], ["a", "e"]):
        raise ParseError(f"prefix {''.join(blocks)} is not forall-exists", merged[0][2])
    mapping: dict[int, Var] = {}
    counts = {"a": 0, "e": 0}
    for q, vs, ln in merged:
        block = Block.UNIVERSAL if q == "a" else Block.EXISTENTIAL
        for v in vs:
            if v in mapping:
                raise ParseError(f"variable {v} quantified twice", ln)
            counts[q] += 1
            mapping[v] = Var(block, counts[q])
    out = []
    for c in clauses:
        lits = []
        for l in c:
            if abs(l) not in mapping:
                raise ParseError(f"free variable {abs(l)} in a 2QBF")
            lits.append(Literal(mapping[abs(l)], l > 0))
        out.append(Clause(lits))
    matrix = CnfFormula(tuple(out), counts["a"], counts["e"])
    return CnfQbf(counts["a"], counts["e"], MultiCnf((matrix,)))


def parse_problem(text: str) -> CnfFormula | CnfQbf:
    """DIMACS when there are no quantifier lines, QDIMACS otherwise."""
    _, prefix, _ = _parse(text)
    return parse_qdimacs(text) if prefix else parse_dimacs(text)


# -- ASPCore-2 ----------------------------------------------------------------


def format_rule(r: Rule) -> str:
    head = " | ".join(a.name for a in r.head)
    body = [a.name for a in r.pos_body] + [f"not {a.name}" for a in r.neg_body]
    return f"{head} :- {', '.join(body)}." if body else f"{head}."


def write_aspcore(p: DisjunctiveProgram, comments: list[str] | str | None = None) -> str:
    lines = _comments("%", comments)
    lines += [format_rule(r) for r in p.rules]
    return "\n".join(lines) + "\n"


_ATOM = r"[a-z][A-Za-z0-9_]*"


def parse_aspcore(text: str) -> DisjunctiveProgram:
    """Reader for the rule fragment :func:`write_aspcore` emits."""
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if not line.endswith("."):
            raise ParseError("rule missing terminating '.'", lineno)
        line = line[:-1]
        head_txt, sep, body_txt = line.partition(":-")
        heads = [h.strip() for h in head_txt.split("|")]
        if not all(re.fullmatch(_ATOM, h) for h in heads):
            raise ParseError(f"malformed head {head_txt.strip()!r}", lineno)
        pos, neg = [], []
        if sep:
            for lit in body_txt.split(","):
                lit = lit.strip()
                m = re.fullmatch(rf"not\s+({_ATOM})", lit)
                if m:
                    neg.append(Atom.parse(m.group(1)))
                elif re.fullmatch(_ATOM, lit):
                    pos.append(Atom.parse(lit))
                else:
                    raise ParseError(f"malformed body literal {lit!r}", lineno)
        try:
            rules.append(Rule(tuple(Atom.parse(h) for h in heads), tuple(pos), tuple(neg)))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    return DisjunctiveProgram(tuple(rules))
