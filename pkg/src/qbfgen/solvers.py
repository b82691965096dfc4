"""Running third-party SAT/QBF/ASP solvers as subprocesses.

Adapter table format (INI, one section per solver)::

    [clasp]
    command = clasp {file}
    input = aspcore
    exit_codes = 10:SAT 20:UNSAT 30:SAT

``input`` is one of ``dimacs``, ``qdimacs``, ``aspcore``. Exit codes not in
the map fall back to scanning stdout for ``s SATISFIABLE`` /
``s UNSATISFIABLE`` / ``s cnf 1|0`` / ``SATISFIABLE`` / ``UNSATISFIABLE``.
For ASP solvers SAT means "an answer set exists".
"""

from __future__ import annotations

import configparser
import enum
import os
import re
import shlex
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .formula import CnfFormula, CnfQbf, MultiCnf
from .transforms import tseitin


class Outcome(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    TIMEOUT = "TIMEOUT"
    ERROR = "ERROR"


GRACE_SECONDS = 2.0


@dataclass(frozen=True)
class Adapter:
    name: str
    command: str
    input_format: str = "dimacs"
    exit_codes: dict = field(default_factory=lambda: {10: Outcome.SAT, 20: Outcome.UNSAT}, hash=False)

    def __post_init__(self) -> None:
        if "{file}" not in self.command:
            raise ValueError(f"command template {self.command!r} lacks a {{file}} placeholder")
        if self.input_format not in ("dimacs", "qdimacs", "aspcore"):
            raise ValueError(f"unknown input format {self.input_format!r}")


BUILTIN_ADAPTERS = {
    "minisat": Adapter("minisat", "minisat {file}", "dimacs"),
    "depqbf": Adapter("depqbf", "depqbf {file}", "qdimacs"),
    "rareqs": Adapter("rareqs", "rareqs {file}", "qdimacs"),
    "clasp": Adapter(
        "clasp", "clasp {file}", "aspcore", {10: Outcome.SAT, 20: Outcome.UNSAT, 30: Outcome.SAT}
    ),
    "wasp": Adapter("wasp", "gringo {file} | wasp", "aspcore"),
}


def _parse_exit_codes(text: str) -> dict[int, Outcome]:
    out = {}
    for item in text.replace(",", " ").split():
        code, _, verdict = item.partition(":")
        out[int(code)] = Outcome(verdict.strip().upper())
    return out


def load_adapters(path: str | os.PathLike) -> dict[str, Adapter]:
    parser = configparser.ConfigParser(interpolation=None)
    with open(path) as fh:
        parser.read_file(fh)
    table = {}
    for name in parser.sections():
        sec = parser[name]
        codes = sec.get("exit_codes")
        table[name] = Adapter(
            name,
            sec["command"],
            sec.get("input", "dimacs"),
            _parse_exit_codes(codes) if codes else {10: Outcome.SAT, 20: Outcome.UNSAT},
        )
    return table


@dataclass(frozen=True)
class SolverRun:
    outcome: Outcome
    elapsed: float
    returncode: int | None = None
    output: str = ""


_SAT_PATTERNS = [
    (re.compile(r"^s\s+(SATISFIABLE|TRUE)\b", re.M), Outcome.SAT),
    (re.compile(r"^s\s+(UNSATISFIABLE|FALSE)\b", re.M), Outcome.UNSAT),
    (re.compile(r"^s\s+cnf\s+1\b", re.M), Outcome.SAT),
    (re.compile(r"^s\s+cnf\s+0\b", re.M), Outcome.UNSAT),
    (re.compile(r"^UNSATISFIABLE\b", re.M), Outcome.UNSAT),
    (re.compile(r"^SATISFIABLE\b", re.M), Outcome.SAT),
]


def classify(returncode: int, output: str, adapter: Adapter) -> Outcome:
    if returncode in adapter.exit_codes:
        return adapter.exit_codes[returncode]
    for pattern, outcome in _SAT_PATTERNS:
        if pattern.search(output):
            return outcome
    return Outcome.ERROR


def run_external_solver(path: str | os.PathLike, adapter: Adapter | str, timeout: float) -> SolverRun:
    """Run one solver on one file with a wall-clock limit.

    A string ``adapter`` is taken as a command template with the default
    10/20 exit-code map. The process group is killed at ``timeout``.
    """
    if isinstance(adapter, str):
        adapter = Adapter("custom", adapter)
    cmd = adapter.command.replace("{file}", shlex.quote(str(path)))
    start = time.monotonic()
    try:
        proc = subprocess.Popen(
            cmd,
            shell=True,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
            start_new_session=True,
        )
    except OSError as exc:
        return SolverRun(Outcome.ERROR, time.monotonic() - start, None, str(exc))
    try:
        out, _ = proc.communicate(timeout=timeout)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        try:
            out, _ = proc.communicate(timeout=GRACE_SECONDS)
        except subprocess.TimeoutExpired:
            out = ""
        return SolverRun(Outcome.TIMEOUT, time.monotonic() - start, None, out or "")
    elapsed = time.monotonic() - start
    if proc.returncode == 127:
        return SolverRun(Outcome.ERROR, elapsed, 127, f"command not found: {out[-500:]}")
    outcome = classify(proc.returncode, out, adapter)
    excerpt = out if outcome is not Outcome.ERROR else out[-500:]
    return SolverRun(outcome, elapsed, proc.returncode, excerpt)


def render_instance(inst: CnfQbf | MultiCnf | CnfFormula, fmt: str, comments=None) -> str:
    from .formats import write_aspcore, write_dimacs, write_qdimacs
    from .transforms import qbf_to_program

    if fmt == "aspcore":
        if not isinstance(inst, CnfQbf):
            raise ValueError("only quantified instances translate to programs")
        return write_aspcore(qbf_to_program(inst), comments)
    flat = tseitin(inst) if isinstance(inst, (CnfQbf, MultiCnf)) else inst
    if fmt == "qdimacs" and isinstance(flat, CnfQbf):
        return write_qdimacs(flat, comments)
    if fmt == "dimacs" and isinstance(flat, CnfFormula):
        return write_dimacs(flat, comments)
    raise ValueError(f"cannot write {type(inst).__name__} as {fmt}")


def write_instance_file(inst, fmt: str, workdir: str | None = None, spec=None) -> str:
    suffix = {"dimacs": ".cnf", "qdimacs": ".qdimacs", "aspcore": ".lp"}[fmt]
    fd, path = tempfile.mkstemp(suffix=suffix, dir=workdir)
    with os.fdopen(fd, "w") as fh:
        fh.write(render_instance(inst, fmt, spec.describe() if spec is not None else None))
    return path
