"""Experiment orchestration: noise synthesis, solver comparison runs, the
noise-level scaling study, and CSV emission.

Experiments are described by small YAML files (see ``iterreg/configs``); the
schema is documented in the README.  Every run is deterministic given the
spec and seed: noise is the only random ingredient and is drawn from a
generator seeded explicitly.
"""

import csv
import importlib.resources
import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from . import autoconv, diagonal, fourier
from .diagnostics import energy_series, write_diagnostics_csv
from .hilbert import BallConstraint
from .operators import ObservedData, estimate_operator_bound
from .solvers import (IterationTrace, SolverConfig, constant_lambda,
                      landweber_run, nesterov_run, tpg_run)
from .stopping import StoppingRule, constants_c1_c2

log = logging.getLogger(__name__)

RESULT_HEADER = ["method", "k_star", "time_s", "rel_error", "stop_reason"]


def synthesize_noise(y, noise_rel, seed, space, law="proportional"):
    """Additive noise with an exactly known level.

    The perturbation direction is normalized in the space's norm, so the
    stored bound delta = noise_rel * ||y|| is tight: ||y_noisy - y|| == delta
    up to roundoff.  noise_rel = 0 returns the data unchanged with delta = 0.

    Two direction laws:

    - ``proportional`` (default): the raw draw is weighted componentwise by
      the data before normalization, i.e. relative noise.  This concentrates
      the perturbation on the components that carry signal, which is the only
      reading consistent with the benchmark iteration counts: an isotropic
      draw parks most of its energy on components the iteration cannot reach,
      leaving a residual floor just below delta.
    - ``isotropic``: the raw standard-normal draw is normalized as is.
    """
    if noise_rel < 0:
        raise ValueError("noise_rel must be nonnegative")
    y = np.asarray(y, dtype=np.float64)
    ynorm = space.norm(y)
    delta = noise_rel * ynorm
    if delta == 0.0:
        return ObservedData(y_noisy=y.copy(), delta=0.0, y_exact=y.copy())
    rng = np.random.default_rng(seed)
    xi = space.randn(rng)
    if law == "proportional":
        xi = y * xi
    elif law != "isotropic":
        raise ValueError(f"unknown noise law {law!r}")
    direction = xi / space.norm(xi)
    return ObservedData(y_noisy=y + delta * direction, delta=delta,
                        y_exact=y.copy())


@dataclass
class MethodSpec:
    name: str
    kind: str                 # "landweber" | "nesterov" | "tpg"
    momentum: float | None = None   # constant combination parameter for tpg


@dataclass
class ExperimentSpec:
    """Parsed experiment description (one YAML file)."""

    name: str
    problem: dict
    solution: dict
    x0: dict
    noise_rel: float
    seed: int
    solver: dict
    methods: list
    stop: dict = field(default_factory=lambda: {"variant": "discrepancy"})
    prox: dict = field(default_factory=lambda: {"enabled": False})
    diagnostics: bool = False
    noise_law: str = "proportional"

    @classmethod
    def from_dict(cls, raw):
        methods = []
        for entry in raw.get("methods", []):
            if isinstance(entry, str):
                methods.append(MethodSpec(name=entry, kind=entry))
            else:
                methods.append(MethodSpec(name=entry.get("name", entry["method"]),
                                          kind=entry["method"],
                                          momentum=entry.get("momentum")))
        if not methods:
            raise ValueError("experiment spec lists no methods")
        return cls(name=raw.get("name", "experiment"),
                   problem=dict(raw["problem"]),
                   solution=dict(raw["solution"]),
                   x0=dict(raw["x0"]),
                   noise_rel=float(raw["noise_rel"]),
                   seed=int(raw.get("seed", 0)),
                   solver=dict(raw["solver"]),
                   methods=methods,
                   stop=dict(raw.get("stop", {"variant": "discrepancy"})),
                   prox=dict(raw.get("prox", {"enabled": False})),
                   diagnostics=bool(raw.get("diagnostics", False)),
                   noise_law=raw.get("noise_law", "proportional"))

    @classmethod
    def from_yaml(cls, path):
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))


def packaged_config(name):
    """Load one of the shipped experiment specs (table1, table2a, ...)."""
    resource = importlib.resources.files("iterreg.configs") / f"{name}.yaml"
    if not resource.is_file():
        raise FileNotFoundError(f"no packaged experiment config named {name!r}")
    return ExperimentSpec.from_dict(yaml.safe_load(resource.read_text()))


def build_problem(spec):
    """Instantiate the forward problem plus reference solution and start."""
    params = dict(spec.problem)
    kind = params.pop("kind")
    if kind == "diagonal":
        problem = diagonal.DiagonalProblem(**params)
        x_dag = _diagonal_profile(spec.solution, problem.dim)
        x0 = _diagonal_start(spec.x0, x_dag, problem.dim)
    elif kind == "autoconv":
        problem = autoconv.AutoconvProblem(**params)
        x_dag = fourier.synthesize(_coeff_map(spec.solution), problem.n_intervals)
        x0 = fourier.synthesize(_coeff_map(spec.x0), problem.n_intervals)
    else:
        raise ValueError(f"unknown problem kind {kind!r}")
    return problem, x_dag, x0


def _coeff_map(section):
    if section.get("type", "fourier") != "fourier":
        raise ValueError("autoconv profiles are specified by Fourier coefficients")
    return {int(k): float(v) for k, v in section["coeffs"].items()}


def _diagonal_profile(section, dim):
    kind = section.get("type", "reciprocal")
    if kind == "reciprocal":
        return diagonal.reciprocal_solution(dim, float(section.get("amplitude", 100.0)))
    if kind == "values":
        return np.asarray(section["values"], dtype=np.float64)
    raise ValueError(f"unknown diagonal solution type {kind!r}")


def _diagonal_start(section, x_dag, dim):
    kind = section.get("type", "alternating")
    if kind == "alternating":
        offset = diagonal.alternating_offset(dim, float(section["amplitude"]),
                                             float(section.get("decay", 1.0)))
        return x_dag + offset
    if kind == "values":
        return np.asarray(section["values"], dtype=np.float64)
    raise ValueError(f"unknown diagonal x0 type {kind!r}")


@dataclass
class ResultRow:
    method: str
    k_star: int
    time_s: float | None
    rel_error: float
    stop_reason: str


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list
    traces: dict
    finals: dict
    energies: dict
    problem: object
    data: ObservedData
    x_dag: np.ndarray
    x0: np.ndarray
    ball: BallConstraint | None
    stop_rules: dict
    config: SolverConfig


def _build_stop_rule(spec, config, data, problem, ball_center, rho):
    stop = dict(spec.stop)
    variant = stop.get("variant", "discrepancy")
    if variant == "discrepancy":
        return StoppingRule(variant="discrepancy", tau=config.tau,
                            delta=data.delta, alpha=config.alpha)
    if variant == "delta_corrected":
        if rho is None or rho <= 0:
            raise ValueError("delta_corrected stop needs a positive rho")
        omega_bar = stop.get("omega_bar")
        if omega_bar is None:
            region = BallConstraint(ball_center, 6.0 * rho)
            omega_bar = estimate_operator_bound(
                problem, region,
                samples=int(stop.get("bound_samples", 8)),
                seed=int(stop.get("bound_seed", spec.seed)))
        c1, c2 = constants_c1_c2(omega_bar, config.omega, rho)
        return StoppingRule(variant="delta_corrected", tau=config.tau,
                            delta=data.delta, alpha=config.alpha, c1=c1, c2=c2)
    raise ValueError(f"unknown stopping variant {variant!r}")


def run_experiment(spec):
    """Run every configured method on one shared noisy data realization."""
    problem, x_dag, x0 = build_problem(spec)
    y = problem.apply(x_dag)
    data = synthesize_noise(y, spec.noise_rel, spec.seed, problem.range_space,
                            law=spec.noise_law)
    if not data.validate(problem.range_space):
        raise AssertionError("noise synthesis violated its own bound")

    config = SolverConfig(**spec.solver)
    rho = spec.prox.get("rho", spec.stop.get("rho"))
    ball = None
    if spec.prox.get("enabled", False):
        if rho is None or rho <= 0:
            raise ValueError("prox.enabled requires a positive rho")
        ball = BallConstraint(center=x0, radius=2.0 * float(rho), enabled=True)
    stop_rule = _build_stop_rule(spec, config, data, problem, x0,
                                 None if rho is None else float(rho))

    xdag_norm = problem.domain.norm(x_dag)
    rows, traces, finals, energies, stop_rules = [], {}, {}, {}, {}
    for method in spec.methods:
        t0 = time.perf_counter()
        if method.kind == "landweber":
            x_final, trace = landweber_run(
                problem, data, config, x0, stop=stop_rule, x_reference=x_dag,
                store_iterates=spec.diagnostics)
        elif method.kind == "nesterov":
            x_final, trace = nesterov_run(
                problem, data, config, x0, ball=ball, stop=stop_rule,
                x_reference=x_dag, store_iterates=spec.diagnostics)
        elif method.kind == "tpg":
            lam = constant_lambda(float(method.momentum or 0.0))
            x_final, trace = tpg_run(
                problem, data, config, x0, ball=ball, stop=stop_rule,
                lambda_fn=lam, x_reference=x_dag,
                store_iterates=spec.diagnostics)
        else:
            raise ValueError(f"unknown method kind {method.kind!r}")
        elapsed = time.perf_counter() - t0
        rel_error = problem.domain.norm(x_dag - x_final) / xdag_norm
        rows.append(ResultRow(method=method.name, k_star=trace.k_star,
                              time_s=elapsed, rel_error=rel_error,
                              stop_reason=trace.stop_reason))
        traces[method.name] = trace
        finals[method.name] = x_final
        stop_rules[method.name] = stop_rule
        if trace.stop_reason == "diverged":
            log.warning("method %s diverged at k=%d", method.name, trace.k_star)
        if spec.diagnostics:
            energies[method.name] = energy_series(
                trace, problem, data, ball, config, x_dag)

    return ExperimentResult(spec=spec, rows=rows, traces=traces, finals=finals,
                            energies=energies, problem=problem, data=data,
                            x_dag=x_dag, x0=x0, ball=ball,
                            stop_rules=stop_rules, config=config)


def fit_loglog_slope(deltas, kstars):
    """Least-squares slope of log(k*) against log(delta)."""
    deltas = np.asarray(deltas, dtype=np.float64)
    kstars = np.asarray(kstars, dtype=np.float64)
    if len(deltas) != len(kstars) or len(deltas) < 2:
        raise ValueError("need at least two matching (delta, k*) pairs")
    return float(np.polyfit(np.log(deltas), np.log(kstars), 1)[0])


@dataclass
class ScalingEntry:
    noise_rel: float
    delta: float
    k_star: int
    stop_reason: str
    included: bool


@dataclass
class ScalingReport:
    entries: dict                  # method -> list[ScalingEntry]
    slopes: dict                   # method -> float | None
    excluded: dict                 # method -> list[noise_rel]


def scaling_study(spec, noise_levels):
    """k* against noise level for every method, with a log-log slope fit.

    Levels whose run does not terminate by the stopping rule (or stops at
    k = 0, which carries no rate information) are excluded from the fit and
    flagged.  Requires at least three levels spanning two decades.
    """
    levels = sorted(float(d) for d in noise_levels)
    if len(levels) < 3:
        raise ValueError("need at least 3 noise levels")
    if levels[-1] / levels[0] < 99.999:
        raise ValueError("noise levels must span at least two decades")

    entries = {m.name: [] for m in spec.methods}
    for i, noise_rel in enumerate(levels):
        level_spec = replace(spec, noise_rel=noise_rel, seed=spec.seed + i,
                             diagnostics=False)
        result = run_experiment(level_spec)
        for row in result.rows:
            ok = row.stop_reason == "discrepancy_met" and row.k_star >= 1
            entries[row.method].append(ScalingEntry(
                noise_rel=noise_rel, delta=result.data.delta,
                k_star=row.k_star, stop_reason=row.stop_reason, included=ok))

    slopes, excluded = {}, {}
    for name, ents in entries.items():
        good = [e for e in ents if e.included]
        excluded[name] = [e.noise_rel for e in ents if not e.included]
        if len(good) >= 2:
            slopes[name] = fit_loglog_slope([e.delta for e in good],
                                            [e.k_star for e in good])
        else:
            slopes[name] = None
    return ScalingReport(entries=entries, slopes=slopes, excluded=excluded)


def _fmt(value):
    if value is None:
        return ""
    return f"{value:.17g}"


def write_results_csv(rows, path, include_times=False):
    """Result table; times are volatile, so they are left blank unless asked
    for (deterministic reruns must produce byte-identical files)."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_HEADER)
        for row in rows:
            t = _fmt(row.time_s) if include_times else ""
            writer.writerow([row.method, str(row.k_star), t,
                             _fmt(row.rel_error), row.stop_reason])


def read_results_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != RESULT_HEADER:
            raise ValueError(f"unexpected results header {header!r} in {path}")
        for rec in reader:
            rows.append(ResultRow(method=rec[0], k_star=int(rec[1]),
                                  time_s=float(rec[2]) if rec[2] else None,
                                  rel_error=float(rec[3]), stop_reason=rec[4]))
    return rows


def write_reconstruction_csv(series, path):
    """Long-format nodal values: one row per (node index, series name)."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "series", "value"])
        for name, values in series.items():
            for k, v in enumerate(np.asarray(values)):
                writer.writerow([str(k), name, _fmt(v)])


def emit_outputs(result, out_dir, include_times=False):
    """Write the results table, reconstruction series and optional traces.

    Returns the list of written paths.  I/O errors propagate with the path
    in the message.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        results_path = out_dir / "results.csv"
        write_results_csv(result.rows, results_path, include_times=include_times)
        written.append(results_path)

        series = {"x0": result.x0, "xdag": result.x_dag}
        for name, x in result.finals.items():
            series[name] = x
        recon_path = out_dir / "reconstruction.csv"
        write_reconstruction_csv(series, recon_path)
        written.append(recon_path)

        if result.spec.diagnostics:
            for name, trace in result.traces.items():
                trace_path = out_dir / f"trace_{name}.csv"
                write_diagnostics_csv(trace_path, trace,
                                      result.energies.get(name))
                written.append(trace_path)
    except OSError as exc:
        raise OSError(f"failed writing experiment outputs under {out_dir}: {exc}") from exc
    return written
