"""
Configuration-driven scenario execution.

A config file is flat ``key = value`` text with ``#`` comments. Any numeric key
may carry a ``_pi`` suffix to be read in units of pi (``phi_pi = 1`` is phi=pi).
Recognised keys::

    scenario   one of SCENARIOS
    kappa1, kappa2, delta, t, phi
    n          one step count or a comma-separated ascending list
    N          photon number (number_state)
    alpha      complex amplitude, e.g. ``1`` or ``0.5+0.5j`` (coherent_state)
    cutoff     photon cutoff for coherent runs
    trials, seed                         (random_phase)
    sweep, grid                          parameter sweep over phi/delta/theta/t
    output, format                       csv (default) or jsonl

Rows come out in input order whatever ``jobs`` is, and floats are written with
17 significant digits, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import analytic
from .analytic import PhaseSchedule
from .model import ChainParams, derived_mode_params
from .simulate import CoherentState, EvolutionConfig, NumberState, random_phase_batch, run_atomic, \
    run_postselected

OUTPUT_DIR_ENV = "ZENO_CHAIN_OUTPUT_DIR"
CSV_HEADER = "scenario,n,t,phi,delta,kappa1,kappa2,P,p,p_limit,abs_error,entropy_final,seed"
PROB_TOL = 1e-9
ATOMIC_TOL = 1e-12

SCENARIOS = {
    "standard": ("kappa1", "kappa2", "t", "n"),
    "dephasing": ("kappa1", "kappa2", "t", "n", "phi"),
    "detuning": ("kappa1", "kappa2", "t", "n", "delta"),
    "combined": ("kappa1", "kappa2", "t", "n", "delta", "phi"),
    "random_phase": ("kappa1", "kappa2", "t", "n", "trials", "seed"),
    "number_state": ("kappa1", "kappa2", "t", "n", "N"),
    "coherent_state": ("kappa1", "kappa2", "t", "n", "alpha"),
    "atomic_equivalence": ("kappa1", "kappa2", "t", "n"),
}
SWEEP_VARIABLES = ("phi", "delta", "theta", "t")

_FLOAT_KEYS = {"kappa1", "kappa2", "delta", "t", "phi"}
_INT_KEYS = {"N", "trials", "seed", "cutoff"}
_STR_KEYS = {"scenario", "output", "format", "sweep"}
_KNOWN = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | {"n", "alpha", "grid"}


class ConfigError(ValueError):
    """Malformed scenario specification; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: str
    kappa1: float
    kappa2: float
    t: float
    n_list: tuple[int, ...]
    delta: float = 0.0
    phi: float = 0.0
    N: int | None = None
    alpha: complex | None = None
    cutoff: int | None = None
    trials: int | None = None
    seed: int | None = None
    sweep_variable: str | None = None
    grid: tuple[float, ...] = ()
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        validate(self)

    @property
    def params(self) -> ChainParams:
        return ChainParams(self.kappa1, self.kappa2, self.delta)


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    n: int
    t: float
    phi: float
    delta: float
    kappa1: float
    kappa2: float
    P: float
    p: float
    p_limit: float
    abs_error: float
    entropy_final: float
    seed: int | None = None
    extras: dict = field(default_factory=dict, compare=False)

    def csv_fields(self) -> list[str]:
        vals = []
        for f in fields(self):
            if f.name == "extras":
                continue
            v = getattr(self, f.name)
            if v is None:
                vals.append("")
            elif isinstance(v, float):
                vals.append(format_float(v))
            else:
                vals.append(str(v))
        return vals

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "extras"}
        d.update(self.extras)
        return d


def format_float(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _parse_number(key: str, raw: str, scale: float) -> float:
    try:
        return float(raw) * scale
    except ValueError:
        raise ConfigError(key, f"expected a number, got {raw!r}") from None


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into typed values (no scenario validation)."""
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        scale = 1.0
        if key.endswith("_pi"):
            key, scale = key[:-3], math.pi
        if key not in _KNOWN:
            raise ConfigError(key, "unknown key")
        if key in out:
            raise ConfigError(key, "given twice")
        if key in _FLOAT_KEYS:
            out[key] = _parse_number(key, raw, scale)
        elif key in _INT_KEYS:
            try:
                out[key] = int(raw)
            except ValueError:
                raise ConfigError(key, f"expected an integer, got {raw!r}") from None
        elif key == "n":
            try:
                out["n_list"] = tuple(int(v) for v in raw.split(",") if v.strip())
            except ValueError:
                raise ConfigError("n", f"expected integers, got {raw!r}") from None
        elif key == "grid":
            out["grid"] = tuple(_parse_number("grid", v, scale) for v in raw.split(",") if v.strip())
        elif key == "alpha":
            try:
                out["alpha"] = complex(raw.replace(" ", "")) * scale
            except ValueError:
                raise ConfigError("alpha", f"expected a complex number, got {raw!r}") from None
        elif key == "sweep":
            out["sweep_variable"] = raw
        else:
            out[key] = raw
    return out


def spec_from_mapping(values: dict) -> ScenarioSpec:
    if "scenario" not in values:
        raise ConfigError("scenario", "missing")
    scenario = values["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError("scenario", f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    swept = values.get("sweep_variable")
    for key in SCENARIOS[scenario]:
        if key == swept:
            continue
        if (key == "n" and "n_list" not in values) or (key != "n" and key not in values):
            raise ConfigError(key, f"required by scenario {scenario!r}")
    return ScenarioSpec(**values)


def load_config(path: str | os.PathLike) -> ScenarioSpec:
    return spec_from_mapping(parse_config_text(Path(path).read_text()))


def validate(spec: ScenarioSpec) -> None:
    s = spec.scenario
    if s not in SCENARIOS:
        raise ConfigError("scenario", f"unknown scenario {s!r}")
    if spec.kappa1 ** 2 + spec.kappa2 ** 2 == 0:
        raise ConfigError("kappa1", "kappa1 and kappa2 cannot both be zero")
    if spec.t < 0:
        raise ConfigError("t", "must be nonnegative")
    if not spec.n_list or any(n < 1 for n in spec.n_list):
        raise ConfigError("n", "needs at least one step count >= 1")
    if list(spec.n_list) != sorted(set(spec.n_list)):
        raise ConfigError("n", "step counts must be strictly ascending")
    if s in ("standard", "dephasing") and spec.delta != 0:
        raise ConfigError("delta", f"scenario {s!r} has no detuning")
    if s in ("standard", "detuning") and spec.phi != 0:
        raise ConfigError("phi", f"scenario {s!r} has no dephasing")
    if s in ("detuning", "combined") and spec.delta == 0:
        raise ConfigError("delta", f"scenario {s!r} needs nonzero detuning")
    if s == "random_phase":
        if spec.trials is None or spec.trials < 2:
            raise ConfigError("trials", "random_phase needs trials >= 2")
        if spec.seed is None or spec.seed < 0:
            raise ConfigError("seed", "random_phase needs a nonnegative seed")
    if s == "number_state" and (spec.N is None or spec.N < 1):
        raise ConfigError("N", "number_state needs N >= 1")
    if s == "coherent_state" and spec.alpha is None:
        raise ConfigError("alpha", "coherent_state needs alpha")
    if spec.cutoff is not None and spec.cutoff < 1:
        raise ConfigError("cutoff", "must be >= 1")
    if spec.sweep_variable is not None:
        if spec.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError("sweep", f"unknown variable {spec.sweep_variable!r}; choose from {SWEEP_VARIABLES}")
        if not spec.grid:
            raise ConfigError("grid", "a sweep needs a nonempty grid")
    if spec.format not in ("csv", "jsonl"):
        raise ConfigError("format", "must be csv or jsonl")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _p_limit(spec: ScenarioSpec) -> float:
    dm = derived_mode_params(spec.params)
    if spec.scenario == "random_phase":
        return analytic.random_phase_average(spec.kappa1, spec.kappa2)
    delta = spec.delta if spec.delta != 0 else None
    return analytic.limit_transfer_prob(dm.theta, spec.phi, dm.kappa, spec.t, delta)


def _initial(spec: ScenarioSpec):
    if spec.scenario == "number_state":
        return NumberState(spec.N)
    if spec.scenario == "coherent_state":
        return CoherentState(spec.alpha, spec.cutoff)
    return NumberState(1)


def evaluate_point(spec: ScenarioSpec, n: int, jobs: int = 1) -> ResultRow:
    """One row: simulate the scenario at step count ``n``."""
    extras: dict = {}
    seed = None
    if spec.scenario == "random_phase":
        cfg = EvolutionConfig(spec.params, spec.t, n, PhaseSchedule.uniform_random(spec.seed))
        p_samples, ent, succ = random_phase_batch(cfg, spec.trials, jobs)
        p = float(p_samples.mean())
        extras["std_error"] = float(p_samples.std(ddof=1) / math.sqrt(spec.trials))
        P = float(succ.mean())
        entropy = float(ent.mean())
        seed = spec.seed
    else:
        cfg = EvolutionConfig(spec.params, spec.t, n, PhaseSchedule.spread(spec.phi, n), _initial(spec))
        traj = run_postselected(cfg, track=False)
        P, p, entropy = traj.P, traj.p, float(traj.entropy[-1])
        if spec.scenario == "atomic_equivalence":
            atomic = run_atomic(spec.params, spec.t, n, cfg.phases)
            extras["max_amplitude_discrepancy"] = float(np.max(np.abs(atomic[-1] - traj.final_state.amplitudes)))
    p_limit = _p_limit(spec)
    return ResultRow(spec.scenario, n, spec.t, spec.phi, spec.delta, spec.kappa1, spec.kappa2,
                     P, p, p_limit, abs(p - p_limit), entropy, seed, extras)


def _evaluate_many(points: list[tuple[ScenarioSpec, int]], jobs: int) -> list[ResultRow]:
    if spec_is_stochastic(points[0][0]) or jobs <= 1 or len(points) == 1:
        return [evaluate_point(s, n, jobs) for s, n in points]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(evaluate_point, *zip(*points)))


def spec_is_stochastic(spec: ScenarioSpec) -> bool:
    return spec.scenario == "random_phase"


def convergence_scan(spec: ScenarioSpec, jobs: int = 1) -> list[ResultRow]:
    """One row per step count in ``spec.n_list`` (ascending)."""
    return _evaluate_many([(spec, n) for n in spec.n_list], jobs)


def sweep(spec: ScenarioSpec, variable: str, grid, jobs: int = 1) -> list[ResultRow]:
    """One row per grid value of ``variable`` at the largest configured ``n``.

    Sweeping ``theta`` keeps kappa = hypot(kappa1, kappa2) fixed.
    """
    if variable not in SWEEP_VARIABLES:
        raise ConfigError("sweep", f"unknown variable {variable!r}; choose from {SWEEP_VARIABLES}")
    grid = list(grid)
    if not grid:
        raise ConfigError("grid", "a sweep needs a nonempty grid")
    base = replace(spec, sweep_variable=None, grid=())
    points = []
    for value in grid:
        if variable == "theta":
            kappa = math.hypot(spec.kappa1, spec.kappa2)
            point = replace(base, kappa1=kappa * math.cos(value), kappa2=kappa * math.sin(value))
        else:
            point = replace(base, **{variable: float(value)})
        points.append((point, spec.n_list[-1]))
    return _evaluate_many(points, jobs)


def run_scenario(spec: ScenarioSpec, jobs: int = 1) -> list[ResultRow]:
    if spec.sweep_variable is not None:
        return sweep(spec, spec.sweep_variable, spec.grid, jobs)
    return convergence_scan(spec, jobs)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2:
        raise ValueError("a slope needs at least two points")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def check_rows(rows: list[ResultRow]) -> list[str]:
    """Invariant violations in emitted rows (empty when everything holds)."""
    problems = []
    for k, r in enumerate(rows):
        for name in ("P", "p"):
            v = getattr(r, name)
            if not (0.0 <= v <= 1.0 + PROB_TOL):
                problems.append(f"row {k}: {name}={v!r} outside [0, 1]")
        if r.abs_error != abs(r.p - r.p_limit):
            problems.append(f"row {k}: abs_error does not equal |p - p_limit|")
        disc = r.extras.get("max_amplitude_discrepancy")
        if disc is not None and not disc < ATOMIC_TOL:
            problems.append(f"row {k}: atomic/bosonic amplitude discrepancy {disc:.3g}")
    return problems


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def render(rows: list[ResultRow], fmt: str = "csv") -> str:
    buf = io.StringIO()
    if fmt == "csv":
        buf.write(CSV_HEADER + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        for r in rows:
            writer.writerow(r.csv_fields())
    elif fmt == "jsonl":
        for r in rows:
            buf.write(json.dumps(r.as_dict()) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def default_output_path(spec: ScenarioSpec, fmt: str) -> Path:
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "results"))
    return base / f"{spec.scenario}.{fmt}"


def write_rows(rows: list[ResultRow], path: str | os.PathLike, fmt: str = "csv") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(render(rows, fmt))
    return path
