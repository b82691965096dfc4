"""Monte-Carlo satisfiability sweeps, crossing points and threshold bounds."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from math import sqrt
from pathlib import Path
from typing import Sequence

import numpy as np

from .formula import CnfQbf, MultiCnf
from .generators import GenSpec, Model, gen_multi
from .oracle import DEFAULT_LIMITS, OracleLimits, ResourceError, has_answer_set, qbf_decide, sat_decide
from .solvers import Adapter, Outcome, run_external_solver, write_instance_file
from .transforms import qbf_to_program

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "model",
    "params",
    "axis",
    "value",
    "ratio",
    "frequency",
    "sat_count",
    "samples",
    "mean_time",
    "timeouts",
)


# -- threshold constants --------------------------------------------------------


@dataclass(frozen=True)
class ThresholdBounds:
    lower: float
    upper: float
    provenance: str

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    def __contains__(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def load_constants() -> dict:
    return json.loads(resources.files("qbfgen").joinpath("data/thresholds.json").read_text())


def rho_bounds(k: int) -> ThresholdBounds:
    table = load_constants()["rho"]
    if str(k) not in table:
        raise KeyError(f"no k-CNF threshold bounds for k={k}; known: {sorted(map(int, table))}")
    entry = table[str(k)]
    return ThresholdBounds(entry["lower"], entry["upper"], entry["citation"])


def theorem2_bounds(k: int) -> ThresholdBounds:
    """Bounds on the A/E transition of the controlled model with k-literal clauses.

    The lower bound is half the (k-1)-CNF lower threshold, the upper bound the
    (k-1)-CNF upper threshold.
    """
    table = load_constants()["rho"]
    if str(k - 1) not in table:
        known = sorted(int(j) + 1 for j in table)
        raise KeyError(f"no (k-1)-CNF threshold entry for k={k}; known k: {known}")
    rho = rho_bounds(k - 1)
    return ThresholdBounds(
        rho.lower / 2,
        rho.upper,
        f"controlled model, k={k}: [rho_l({k - 1})/2, rho_u({k - 1})] from {rho.provenance}",
    )


def predicted_multi_frequency(p: float, t: int) -> float:
    """Satisfiability probability of a disjunction of t independent formulas."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if t < 1:
        raise ValueError("t must be >= 1")
    return 1.0 - (1.0 - p) ** t


def binomial_se(p: float, n: int) -> float:
    return sqrt(max(p * (1 - p), 0.0) / n)


# -- sweeps ----------------------------------------------------------------------


@dataclass(frozen=True)
class Backend:
    """How instances are decided.

    ``oracle`` runs the internal SAT/QBF deciders; ``program`` translates QBFs
    to disjunctive programs and checks answer-set existence internally;
    ``external`` runs a solver subprocess per instance.
    """

    kind: str = "oracle"
    limits: OracleLimits = DEFAULT_LIMITS
    adapter: Adapter | None = None
    timeout: float = 60.0
    workdir: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("oracle", "program", "external"):
            raise ValueError(f"unknown backend {self.kind!r}")
        if self.kind == "external" and self.adapter is None:
            raise ValueError("external backend needs a solver adapter")


INTERNAL_ORACLE = Backend()


@dataclass(frozen=True)
class SweepRow:
    model: str
    params: str
    axis: str
    value: int
    ratio: float
    sat_count: int
    samples: int
    mean_time: float = 0.0
    timeouts: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.sat_count <= self.samples:
            raise ValueError("sat_count must lie in [0, samples]")

    @property
    def frequency(self) -> float:
        return self.sat_count / self.samples if self.samples else float("nan")


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def ratios(self) -> list[float]:
        return [r.ratio for r in self.rows]

    @property
    def frequencies(self) -> list[float]:
        return [r.frequency for r in self.rows]


def ratio_of(spec: GenSpec) -> float:
    """Natural density of each model: m/n, m/(A+E), A/E or m/E."""
    p = spec.params
    if spec.model is Model.KCNF:
        return p["m"] / p["n"]
    if spec.model is Model.CHEN_INTERIAN:
        return p["m"] / (p["A"] + p["E"])
    if spec.model in (Model.CONTROLLED, Model.GEN_CONTROLLED):
        return p["A"] / p["E"]
    return p["m"] / p["E"]


def decide(spec: GenSpec, backend: Backend = INTERNAL_ORACLE) -> bool:
    """True when the instance is satisfiable / the QBF is true.

    The ``program`` backend and ASP-input external solvers report answer-set
    existence, which is the negation of QBF truth.
    """
    inst = gen_multi(spec)
    if backend.kind == "oracle":
        if isinstance(inst, MultiCnf):
            return sat_decide(inst, backend.limits)
        return qbf_decide(inst, backend.limits, method="auto")
    if backend.kind == "program":
        if not isinstance(inst, CnfQbf):
            raise ValueError("the program backend needs a quantified model")
        return not has_answer_set(qbf_to_program(inst), backend.limits)
    adapter = backend.adapter
    path = write_instance_file(inst, adapter.input_format, backend.workdir, spec)
    try:
        run = run_external_solver(path, adapter, backend.timeout)
    finally:
        Path(path).unlink(missing_ok=True)
    if run.outcome is Outcome.TIMEOUT:
        raise TimeoutError(f"solver timed out after {run.elapsed:.1f}s")
    if run.outcome is Outcome.ERROR:
        raise RuntimeError(f"solver error: {run.output[-200:]}")
    answer = run.outcome is Outcome.SAT
    return not answer if adapter.input_format == "aspcore" else answer


def _decide_timed(args: tuple[GenSpec, Backend, bool]) -> tuple[bool | None, float]:
    spec, backend, timing = args
    start = time.perf_counter()
    try:
        verdict: bool | None = decide(spec, backend)
    except (ResourceError, TimeoutError, RuntimeError) as exc:
        log.debug("instance %s undecided: %s", spec.describe(), exc)
        verdict = None
    return verdict, (time.perf_counter() - start) if timing else 0.0


def _row(point: GenSpec, axis: str, outcomes: Sequence[tuple[bool | None, float]]) -> SweepRow:
    decided = [(v, t) for v, t in outcomes if v is not None]
    timeouts = len(outcomes) - len(decided)
    if timeouts:
        warnings.warn(
            f"{timeouts} of {len(outcomes)} instances at {point.label()} undecided; excluded from frequency",
            stacklevel=3,
        )
    mean_time = sum(t for _, t in decided) / len(decided) if decided else 0.0
    return SweepRow(
        model=point.model.value,
        params=point.label(),
        axis=axis,
        value=point.params.get(axis, 0) if axis else 0,
        ratio=ratio_of(point),
        sat_count=sum(v for v, _ in decided),
        samples=len(decided),
        mean_time=mean_time,
        timeouts=timeouts,
    )


def _run(tasks: list, jobs: int) -> list[tuple[bool | None, float]]:
    if jobs <= 1:
        return [_decide_timed(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_decide_timed, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def estimate_frequency(
    point: GenSpec,
    samples: int,
    backend: Backend = INTERNAL_ORACLE,
    *,
    axis: str = "",
    timing: bool = False,
    jobs: int = 1,
) -> SweepRow:
    """Fraction of ``samples`` instances (instance_index 0..samples-1) that are SAT/true."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    tasks = [(point.replace(instance_index=i), backend, timing) for i in range(samples)]
    return _row(point, axis, _run(tasks, jobs))


def parse_points(text: str) -> tuple[str, list[int]]:
    """``"m=40:120:4"`` (inclusive range) or ``"A=12,18,24"``."""
    name, sep, rng = text.partition("=")
    name = name.strip()
    if not sep or not name.isidentifier():
        raise ValueError(f"malformed points spec {text!r}; expected NAME=START:STOP:STEP")
    try:
        if ":" in rng:
            parts = [int(p) for p in rng.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in rng.split(",")]
    except ValueError:
        raise ValueError(f"malformed points spec {text!r}; expected NAME=START:STOP:STEP") from None
    if not values:
        raise ValueError(f"empty range in {text!r}")
    return name, values


@dataclass(frozen=True)
class SweepConfig:
    base: GenSpec
    axis: str
    values: tuple[int, ...]
    samples: int
    backend: Backend = field(default=INTERNAL_ORACLE)
    timing: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.values:
            raise ValueError("sweep range is empty")
        if self.axis not in self.base.params and self.axis != "t":
            raise ValueError(f"axis {self.axis!r} is not a parameter of {self.base.model.value}")

    def point_seed(self, index: int) -> int:
        ss = np.random.SeedSequence(entropy=self.base.seed, spawn_key=(index,))
        return int(ss.generate_state(1, dtype=np.uint64)[0])

    def points(self) -> list[GenSpec]:
        out = []
        for i, value in enumerate(self.values):
            change = {"components": value} if self.axis == "t" else {self.axis: value}
            out.append(self.base.replace(seed=self.point_seed(i), instance_index=0, **change))
        return out


def sweep(config: SweepConfig) -> SweepResult:
    """Estimate the satisfiability frequency at every grid point.

    All (point, sample) tasks are flattened and reduced by key, so results do
    not depend on worker scheduling.
    """
    points = config.points()
    tasks = [
        (p.replace(instance_index=i), config.backend, config.timing)
        for p in points
        for i in range(config.samples)
    ]
    outcomes = _run(tasks, config.jobs)
    rows = []
    for j, p in enumerate(points):
        chunk = outcomes[j * config.samples : (j + 1) * config.samples]
        row = _row(p, config.axis, chunk)
        if config.axis == "t":
            row = replace(row, value=p.components)
        rows.append(row)
    return SweepResult(tuple(rows))


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in result:
        writer.writerow(
            [r.model, r.params, r.axis, r.value, repr(r.ratio), repr(r.frequency),
             r.sat_count, r.samples, repr(r.mean_time), r.timeouts]
        )
    return buf.getvalue()


def from_csv(text: str) -> SweepResult:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV columns {reader.fieldnames}")
    rows = [
        SweepRow(
            model=d["model"],
            params=d["params"],
            axis=d["axis"],
            value=int(d["value"]),
            ratio=float(d["ratio"]),
            sat_count=int(d["sat_count"]),
            samples=int(d["samples"]),
            mean_time=float(d["mean_time"]),
            timeouts=int(d["timeouts"]),
        )
        for d in reader
    ]
    return SweepResult(tuple(rows))


# -- transition location -----------------------------------------------------------


def crossing_point(result: SweepResult, *, x: str = "ratio", method: str = "linear") -> float | None:
    """Where the frequency passes 0.5.

    ``linear`` interpolates within the first adjacent pair bracketing 0.5
    (``None`` if there is none); ``logistic`` fits a decreasing logistic
    curve to every point and returns its midpoint.
    """
    xs = [getattr(r, x) for r in result]
    fs = [r.frequency for r in result]
    if method == "logistic":
        return _logistic_midpoint(xs, fs, [r.samples for r in result])
    if method != "linear":
        raise ValueError(f"unknown crossing method {method!r}")
    for (x0, f0), (x1, f1) in zip(zip(xs, fs), zip(xs[1:], fs[1:])):
        if f0 == 0.5:
            return float(x0)
        if (f0 - 0.5) * (f1 - 0.5) < 0 or f1 == 0.5:
            return x0 + (0.5 - f0) * (x1 - x0) / (f1 - f0)
    return None


def _logistic_midpoint(xs: Sequence[float], fs: Sequence[float], ns: Sequence[int]) -> float | None:
    from scipy.optimize import curve_fit

    def curve(v, mid, scale):
        return 1.0 / (1.0 + np.exp((np.asarray(v) - mid) / scale))

    xs_a, fs_a = np.asarray(xs, float), np.asarray(fs, float)
    sigma = np.sqrt(np.clip(fs_a * (1 - fs_a), 0.25 / max(ns), None) / np.asarray(ns))
    guess = (float(np.median(xs_a)), (xs_a.max() - xs_a.min()) / 10 or 1.0)
    try:
        (mid, _), _ = curve_fit(curve, xs_a, fs_a, p0=guess, sigma=sigma, maxfev=10_000)
    except RuntimeError:
        return None
    return float(mid) if xs_a.min() <= mid <= xs_a.max() else None


def nonincreasing_violations(result: SweepResult, z: float = 3.0) -> list[tuple[float, float]]:
    """Adjacent pairs whose frequency rises by more than ``z`` combined standard errors."""
    bad = []
    for a, b in zip(result.rows, result.rows[1:]):
        se = sqrt(binomial_se(a.frequency, a.samples) ** 2 + binomial_se(b.frequency, b.samples) ** 2)
        if b.frequency - a.frequency > z * max(se, 1e-12):
            bad.append((a.ratio, b.ratio))
    return bad
