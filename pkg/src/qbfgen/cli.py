"""Command-line interface: ``qbfgen {gen,translate,eval,sweep,bounds}``.

Exit codes: 0 ok, 1 usage/parse error; ``eval`` answers 10 (SAT/true/answer
set), 20 (UNSAT/false/no answer set) or 30 (oracle limits exceeded).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .experiments import (
    Backend,
    SweepConfig,
    crossing_point,
    load_constants,
    parse_points,
    sweep,
    theorem2_bounds,
    to_csv,
)
from .formats import ParseError, parse_aspcore, parse_problem, parse_qdimacs, write_aspcore
from .formula import CnfFormula, FormulaError
from .generators import MODEL_PARAMS, RNG_ALGORITHM, GenSpec, Model, ParameterError, gen_multi
from .oracle import OracleLimits, ResourceError, has_answer_set, qbf_decide, sat_decide
from .solvers import BUILTIN_ADAPTERS, Adapter, load_adapters, render_instance
from .transforms import qbf_to_program

OUT_ENV = "QBFGEN_OUT"
EVAL_FORMAT_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_TRUE, EXIT_FALSE, EXIT_RESOURCE = 0, 1, 10, 20, 30

PARAM_FLAGS = ("k", "n", "m", "a", "e", "A", "E", "h")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=[m.value for m in Model], help="generator model")
    for name in PARAM_FLAGS:
        p.add_argument(f"--{name}", type=int, dest=f"param_{name}", metavar="INT")
    p.add_argument("--t", type=int, default=1, help="number of components (default 1)")
    p.add_argument("--seed", type=int, default=0)


def spec_from_args(args: argparse.Namespace, fill: dict[str, int] | None = None) -> GenSpec:
    if not args.model:
        raise UsageError("--model is required")
    model = Model(args.model)
    params = {}
    for name in MODEL_PARAMS[model]:
        value = getattr(args, f"param_{name}", None)
        if value is None and fill and name in fill:
            value = fill[name]
        if value is None:
            raise UsageError(f"model {model.value} needs --{name}")
        params[name] = value
    given = [n for n in PARAM_FLAGS if getattr(args, f"param_{n}", None) is not None]
    stray = [n for n in given if n not in MODEL_PARAMS[model]]
    if stray:
        raise UsageError(f"model {model.value} does not take " + ", ".join(f"--{n}" for n in stray))
    try:
        return GenSpec(model, params, components=args.t, seed=args.seed)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    with os.fdopen(fd, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _formats_for(spec: GenSpec, formats: list[str] | None) -> list[str]:
    if spec.model is Model.KCNF:
        wanted = formats or ["dimacs"]
        if set(wanted) - {"dimacs"}:
            raise UsageError("kcnf instances are written as DIMACS only")
    else:
        wanted = formats or ["qdimacs", "aspcore"]
        if "dimacs" in wanted:
            raise UsageError("quantified instances are written as QDIMACS/ASPCore")
    return list(dict.fromkeys(wanted))


def instance_files(spec: GenSpec, formats: list[str] | None = None) -> dict[str, str]:
    """File name -> contents for one instance (Tseitin applied when t > 1)."""
    stem = f"{spec.label()}_seed{spec.seed}_i{spec.instance_index}"
    header = [f"qbfgen {__version__}", spec.describe(), f"rng {RNG_ALGORITHM}"]
    wanted = _formats_for(spec, formats)
    inst = gen_multi(spec)
    ext = {"dimacs": "cnf", "qdimacs": "qdimacs", "aspcore": "lp"}
    return {f"{stem}.{ext[f]}": render_instance(inst, f, header) for f in wanted}


def _gen_one(task: tuple[GenSpec, list[str] | None, str]) -> list[str]:
    spec, formats, out = task
    written = []
    for name, text in instance_files(spec, formats).items():
        path = Path(out) / name
        _atomic_write(path, text)
        written.append(str(path))
    return written


def cmd_gen(args: argparse.Namespace) -> int:
    spec = spec_from_args(args)
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    out = Path(args.out or os.environ.get(OUT_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    formats = _formats_for(spec, args.format)
    tasks = [(spec.replace(instance_index=i), formats, str(out)) for i in range(args.count)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_gen_one, tasks))
    else:
        results = [_gen_one(t) for t in tasks]
    for files in results:
        for f in files:
            print(f)
    return EXIT_OK


def _limits(args: argparse.Namespace) -> OracleLimits:
    return OracleLimits(args.max_universals, args.max_existentials, args.max_program_atoms)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def cmd_translate(args: argparse.Namespace) -> int:
    q = parse_qdimacs(_read(args.file))
    program = qbf_to_program(q)
    text = write_aspcore(program, [f"translated from {args.file}", "answer set exists iff the QBF is false"])
    if args.output:
        _atomic_write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    text = _read(args.file)
    limits = _limits(args)
    print(f"c qbfgen eval v{EVAL_FORMAT_VERSION}")
    is_dimacs = any(line.lstrip().startswith("p ") for line in text.splitlines())
    try:
        if not is_dimacs:
            program = parse_aspcore(text)
            print(f"c program atoms={len(program.atoms)} rules={len(program.rules)}")
            verdict = has_answer_set(program, limits)
            print("s ANSWER-SET" if verdict else "s NO-ANSWER-SET")
            return EXIT_TRUE if verdict else EXIT_FALSE
        inst = parse_problem(text)
        if isinstance(inst, CnfFormula):
            print(f"c cnf vars={inst.num_vars} clauses={len(inst.clauses)}")
            verdict = sat_decide(inst, limits)
            print("s SATISFIABLE" if verdict else "s UNSATISFIABLE")
        else:
            method = {"oracle": "enumerate", "cegar": "cegar", "program": "answer-set"}[args.backend]
            print(
                f"c qbf universals={inst.universals} existentials={inst.existentials} "
                f"clauses={len(inst.components[0].clauses)} method={method}"
            )
            if args.backend == "program":
                verdict = not has_answer_set(qbf_to_program(inst), limits)
            else:
                verdict = qbf_decide(inst, limits, method=method)
            print("s TRUE" if verdict else "s FALSE")
    except ResourceError as exc:
        print(f"c {exc}")
        print("s UNKNOWN")
        return EXIT_RESOURCE
    return EXIT_TRUE if verdict else EXIT_FALSE


def _backend(args: argparse.Namespace) -> Backend:
    limits = _limits(args)
    if args.backend != "external":
        return Backend(args.backend, limits)
    table = dict(BUILTIN_ADAPTERS)
    if args.adapters:
        table.update(load_adapters(args.adapters))
    if args.solver_command:
        adapter = Adapter("custom", args.solver_command, args.solver_input or "qdimacs")
    elif args.solver:
        if args.solver not in table:
            raise UsageError(f"unknown solver {args.solver!r}; known: {sorted(table)}")
        adapter = table[args.solver]
    else:
        raise UsageError("external backend needs --solver or --solver-command")
    return Backend("external", limits, adapter, args.timeout)


def cmd_sweep(args: argparse.Namespace) -> int:
    if not args.points:
        raise UsageError("--points NAME=START:STOP:STEP is required")
    try:
        axis, values = parse_points(args.points)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    base = spec_from_args(args, fill={axis: values[0]})
    try:
        config = SweepConfig(base, axis, values, args.samples, _backend(args), args.timing, args.jobs)
        # validate every grid point up front
        config.points()
    except (ValueError, ParameterError) as exc:
        raise UsageError(str(exc)) from None
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        result = sweep(config)
    text = to_csv(result)
    if args.output:
        _atomic_write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    cross = crossing_point(result)
    print(f"crossing ratio: {'none' if cross is None else f'{cross:.4f}'}", file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    try:
        b = theorem2_bounds(args.k)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    print(f"controlled k={args.k}: lower={b.lower:g} upper={b.upper:g}")
    observed = load_constants()["controlled_observed"].get(str(args.k))
    if observed:
        print(f"observed A/E transition at large E: {observed['ratio']:g}")
    print(f"source: {b.provenance}")
    return EXIT_OK


def _add_limit_flags(p: argparse.ArgumentParser) -> None:
    d = OracleLimits()
    p.add_argument("--max-universals", type=int, default=d.max_universals)
    p.add_argument("--max-existentials", type=int, default=d.max_existentials)
    p.add_argument("--max-program-atoms", type=int, default=d.max_program_atoms)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qbfgen", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qbfgen {__version__}")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", help="generate instance files")
    _add_model_flags(g)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    g.add_argument("--format", action="append", choices=["dimacs", "qdimacs", "aspcore"])
    g.add_argument("--jobs", type=int, default=1)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("translate", help="QDIMACS 2QBF -> ASPCore-2 program")
    t.add_argument("file")
    t.add_argument("--format", choices=["aspcore"], default="aspcore")
    t.add_argument("--output")
    t.set_defaults(func=cmd_translate)

    e = sub.add_parser("eval", help="decide a DIMACS/QDIMACS/ASPCore file")
    e.add_argument("file")
    e.add_argument("--backend", choices=["oracle", "cegar", "program"], default="oracle")
    _add_limit_flags(e)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="satisfiability-frequency sweep, CSV output")
    s.add_argument("--config", help="JSON file whose keys mirror the long flag names")
    _add_model_flags(s)
    s.add_argument("--points", help="swept axis, e.g. m=40:120:4 or A=12,18,24")
    s.add_argument("--samples", type=int, default=128)
    s.add_argument("--backend", choices=["oracle", "program", "external"], default="oracle")
    s.add_argument("--solver", help="adapter name (built-in or from --adapters)")
    s.add_argument("--adapters", help="INI solver adapter table")
    s.add_argument("--solver-command", help="command template with {file}")
    s.add_argument("--solver-input", choices=["dimacs", "qdimacs", "aspcore"])
    s.add_argument("--timeout", type=float, default=60.0)
    s.add_argument("--timing", action="store_true", help="record mean decision time")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--output")
    _add_limit_flags(s)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bounds", help="threshold bounds for the controlled model")
    b.add_argument("--k", type=int, required=True)
    b.set_defaults(func=cmd_bounds)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "command", None) != "sweep" or not args.config:
        return args
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    sweep_parser = parser._subparsers._group_actions[0].choices["sweep"]
    dests = {a.dest for a in sweep_parser._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest in PARAM_FLAGS:
            dest = f"param_{dest}"
        if dest not in dests:
            raise UsageError(f"unknown config key {key!r}")
        defaults[dest] = value
    sweep_parser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"qbfgen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, FormulaError, OSError) as exc:
        print(f"qbfgen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
