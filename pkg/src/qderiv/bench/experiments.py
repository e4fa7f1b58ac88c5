"""Experiment configs and the benchmark commands behind the CLI.

Each command returns a :class:`CommandResult` (CSV columns plus row dicts).
Rows come out in a canonical cell order and every row carries the seed, the
stream id that drove its randomness and a hash of the resolved config, so a
config file plus a seed reproduces the CSV byte for byte.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from ..circuit import PauliString, load_circuit
from ..derivatives import (
    ExactEvaluator, derivative_tensor, fd_tensor, metric_tensor,
)
from ..estimators import (
    EstimatorSpec, empirical_report, estimate, exact_derivatives, optimal_lambda, optimal_mse,
    optimal_step, theory_inputs,
)
from ..optimizers import OptimizerConfig, optimize
from ..reconstruct import trig_reconstruct
from ..shifts import HALF_PI
from ..simulator import ShotModel, SinglePauli, expectation, make_rng
from . import reference
from .fitting import intersection, power_law_fit

KINDS = ("mse-sweep", "scaling-sweep", "hessian", "metric", "optimize", "reconstruct")
DEFAULT_SHOTS = (100, 1_000, 10_000, 100_000, 1_000_000)


def log_grid(lo: float, hi: float, count: int) -> list[float]:
    return [float(x) for x in np.geomspace(lo, hi, count)]


DEFAULT_STEPS = tuple(log_grid(1e-3, HALF_PI, 31))


@dataclass
class OptimizerSection:
    methods: list = field(default_factory=lambda: ["GD", "Newton", "DiagNewton"])
    eta: float = 0.4
    regularizer: str = "clamp"
    eps: float = 1e-3
    shots: list = field(default_factory=lambda: [None])  # None: exact expectation values
    max_iter: int = 100
    trainable: list | None = None
    start: list | None = None
    gradient: str = "param_shift"
    gradient_step: float = HALF_PI
    exact_matrix: bool = False
    threshold: float | None = None


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    circuit: str = "reference"
    observable: str | None = None  # Pauli letters per wire, e.g. "IZIII"
    theta: list | None = None
    estimators: list | None = None
    steps: list = field(default_factory=lambda: list(DEFAULT_STEPS))
    lambdas: list = field(default_factory=lambda: [0.0, 1.0, "optimal"])
    shots: list = field(default_factory=lambda: list(DEFAULT_SHOTS))
    repetitions: int = 1000
    order: int = 1
    batches: int = 10
    fit_min_shots: int = 100
    samples: int = 100
    diagonals: list = field(default_factory=lambda: ["two-eval", "half-pi"])
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.seed is None:
            raise ValueError("a seed is required (config 'seed' or --seed)")
        self.seed = int(self.seed)
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if isinstance(self.steps, dict):
            self.steps = log_grid(float(self.steps["min"]), float(self.steps["max"]), int(self.steps["count"]))
        self.steps = [float(s) for s in self.steps]
        self.shots = [int(n) for n in self.shots]
        if isinstance(self.optimizer, dict):
            self.optimizer = OptimizerSection(**self.optimizer)
        if self.estimators is None:
            self.estimators = _default_estimators(self.kind, self.order)
        for name, grid in (("steps", self.steps), ("shots", self.shots), ("estimators", self.estimators)):
            if not grid:
                raise ValueError(f"grid {name!r} is empty")
        if any(n < 1 for n in self.shots):
            raise ValueError("shot counts must be positive")
        if self.repetitions < 2:
            raise ValueError("need at least 2 repetitions")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")

    def canonical(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _default_estimators(kind: str, order: int) -> list:
    if kind == "mse-sweep":
        return ["param_shift", "central"] + (["forward", "scaled_param_shift"] if order == 1 else [])
    if kind == "scaling-sweep":
        return ["central", "forward", "param_shift"] if order == 1 else ["central", "param_shift"]
    return ["param_shift"]


def load_config(path, kind: str, seed: int | None = None) -> ExperimentConfig:
    """Read a YAML experiment file; ``seed`` (from the CLI) overrides the file."""
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"config {path} must be a mapping")
    file_kind = data.pop("kind", kind)
    if file_kind != kind:
        raise ValueError(f"config is for {file_kind!r}, command is {kind!r}")
    data.pop("out", None)
    if seed is not None:
        data["seed"] = seed
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys {sorted(unknown)}")
    data.setdefault("seed", None)
    return ExperimentConfig(kind=kind, **data)


def stream_id(config_hash: str, *coords) -> int:
    """56-bit stream id for one cell; repetitions use consecutive ids above it."""
    text = config_hash + "|" + "|".join(str(c) for c in coords)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:7], "big")


@dataclass
class CommandResult:
    columns: tuple
    rows: list
    calibration_unmet: bool = False


@dataclass
class Problem:
    circuit: object
    observable: object
    theta: np.ndarray
    is_reference: bool

    @property
    def calibration_unmet(self) -> bool:
        return self.is_reference and not reference.calibrate().matched


def resolve_problem(cfg: ExperimentConfig) -> Problem:
    if cfg.circuit == "reference":
        circuit, obs = reference.reference_circuit(), reference.observable()
        if cfg.observable is not None:
            obs = SinglePauli(PauliString(cfg.observable))
        theta = reference.REFERENCE_ANGLES if cfg.theta is None else np.asarray(cfg.theta, dtype=float)
        return Problem(circuit, obs, np.array(theta, dtype=float), True)
    circuit = load_circuit(cfg.circuit)
    if cfg.observable is None or cfg.theta is None:
        raise ValueError("circuit files need 'observable' and 'theta' in the config")
    return Problem(circuit, SinglePauli(PauliString(cfg.observable)), np.asarray(cfg.theta, dtype=float), False)


# ---------------------------------------------------------------------------
# estimator sweeps

SWEEP_COLUMNS = (
    "record", "estimator", "order", "step", "lam", "shots", "repetitions",
    "total_mse", "total_mse_se", "total_sq_err_sd", "theory_mse", "predicted_mse",
    "variance_spread", "element_mse", "quantity", "exponent", "prefactor", "r_squared",
    "value",
) + ("seed", "stream_id", "config_hash")


def make_spec(name: str, step: float, order: int, lam=1.0) -> EstimatorSpec:
    if name == "param_shift":
        return EstimatorSpec.param_shift(step, order)
    if name == "scaled_param_shift":
        return EstimatorSpec.scaled(lam, step, order)
    if name == "central":
        return EstimatorSpec.central(step, order)
    if name == "forward":
        if order != 1:
            raise ValueError("forward difference is only available for gradients")
        return EstimatorSpec.forward(step)
    raise ValueError(f"unknown estimator {name!r}")


def _sweep_cells(cfg: ExperimentConfig, prob: Problem, tag: str):
    """Yield ``(row, report)`` for every (shots, estimator, step, lambda) cell."""
    h = cfg.hash()
    truth = exact_derivatives(prob.circuit, prob.theta, prob.observable, cfg.order)
    for n in cfg.shots:
        for name in cfg.estimators:
            lams = cfg.lambdas if name == "scaled_param_shift" else [None]
            for si, step in enumerate(cfg.steps):
                for li, lam in enumerate(lams):
                    if lam == "optimal":
                        if cfg.order != 1:
                            raise ValueError("optimal scaling is only available for gradients")
                        lam_val = optimal_lambda(prob.circuit, prob.theta, prob.observable, n, step)
                    else:
                        lam_val = 1.0 if lam is None else float(lam)
                    spec = make_spec(name, step, cfg.order, lam_val)
                    sid = stream_id(h, tag, n, name, si, li)
                    rep = empirical_report(spec, prob.circuit, prob.theta, prob.observable, n,
                                           cfg.repetitions, cfg.seed, sid, batches=cfg.batches, truth=truth)
                    row = {
                        "record": "cell", "estimator": name, "order": cfg.order, "step": step,
                        "lam": None if lam is None else lam_val, "shots": n,
                        "repetitions": cfg.repetitions, "total_mse": rep.total_mse,
                        "total_mse_se": rep.total_mse_se, "total_sq_err_sd": rep.total_sq_err_sd,
                        "theory_mse": rep.theory_total_mse, "predicted_mse": rep.predicted_mse,
                        "variance_spread": rep.variance_spread, "element_mse": rep.mse,
                        "seed": cfg.seed, "stream_id": sid, "config_hash": h,
                    }
                    yield row, rep


def cmd_mse_sweep(cfg: ExperimentConfig) -> CommandResult:
    """Bias / variance / MSE of each estimator over the step and shot grids."""
    prob = resolve_problem(cfg)
    rows = [row for row, _ in _sweep_cells(cfg, prob, "mse")]
    return CommandResult(SWEEP_COLUMNS, rows, prob.calibration_unmet)


def cmd_scaling_sweep(cfg: ExperimentConfig) -> CommandResult:
    """Empirical optimal step and MSE per shot count, power-law fits, crossover."""
    fit_shots = [n for n in cfg.shots if n >= cfg.fit_min_shots]
    if len(fit_shots) < 3 or max(fit_shots) / min(fit_shots) < 1e3:
        raise ValueError("scaling sweep needs at least 3 shot counts spanning 3 decades")
    prob = resolve_problem(cfg)
    h = cfg.hash()
    cells = list(_sweep_cells(cfg, prob, "scaling"))
    rows = [row for row, _ in cells]
    best: dict[str, list] = {}
    for name in cfg.estimators:
        for n in cfg.shots:
            group = [r for r, _ in cells if r["estimator"] == name and r["shots"] == n]
            opt = min(group, key=lambda r: r["total_mse"])
            theory_step = theory_best = None
            if cfg.order == 1 and name in ("central", "forward", "param_shift"):
                inputs = theory_inputs(prob.circuit, prob.theta, prob.observable, n)
                try:
                    theory_step = optimal_step(name, inputs)
                    theory_best = optimal_mse(name, inputs)
                except ValueError:
                    pass
            rows.append({
                "record": "optimum", "estimator": name, "order": cfg.order, "step": opt["step"],
                "shots": n, "repetitions": cfg.repetitions, "total_mse": opt["total_mse"],
                "total_mse_se": opt["total_mse_se"], "theory_mse": theory_best,
                "quantity": None if theory_step is None else "theory_step", "value": theory_step,
                "seed": cfg.seed, "stream_id": opt["stream_id"], "config_hash": h,
            })
            best.setdefault(name, []).append((n, opt["step"], opt["total_mse"]))
    fits = {}
    for name, pts in best.items():
        used = [p for p in pts if p[0] >= cfg.fit_min_shots]
        quantities = [("mse", 2)] + ([("step", 1)] if name in ("central", "forward") else [])
        for quantity, col in quantities:
            fit = power_law_fit([(p[0], p[col]) for p in used])
            fits[name, quantity] = fit
            rows.append({
                "record": "fit", "estimator": name, "order": cfg.order, "quantity": quantity,
                "exponent": fit.exponent, "prefactor": fit.prefactor, "r_squared": fit.r_squared,
                "seed": cfg.seed, "stream_id": 0, "config_hash": h,
            })
    if "central" in best and "param_shift" in best:
        rows.extend(_crossover_rows(cfg, best, fits, h))
    return CommandResult(SWEEP_COLUMNS, rows, prob.calibration_unmet)


def _crossover_rows(cfg, best, fits, h) -> list:
    """Where the finite-difference MSE curve meets the parameter-shift one."""
    x = intersection(fits["central", "mse"], fits["param_shift", "mse"])
    out = [{"record": "crossover", "estimator": "central/param_shift", "order": cfg.order,
            "quantity": "fit_intersection", "value": x,
            "seed": cfg.seed, "stream_id": 0, "config_hash": h}]
    diff = [(n, c - p) for (n, _, c), (_, _, p) in zip(best["central"], best["param_shift"])]
    lo = hi = None
    for (n0, d0), (n1, d1) in zip(diff, diff[1:]):
        if d0 * d1 < 0:
            lo, hi = n0, n1
            break
    for quantity, value in (("bracket_low", lo), ("bracket_high", hi)):
        out.append({"record": "crossover", "estimator": "central/param_shift", "order": cfg.order,
                    "quantity": quantity, "value": None if value is None else float(value),
                    "seed": cfg.seed, "stream_id": 0, "config_hash": h})
    return out


# ---------------------------------------------------------------------------
# tensors

TENSOR_COLUMNS = (
    "record", "method", "j", "k", "value", "exact", "step", "shots", "evaluations",
) + ("seed", "stream_id", "config_hash")


def cmd_hessian(cfg: ExperimentConfig) -> CommandResult:
    """Exact parameter-shift Hessian, finite-difference Hessians at each step
    and one sampled parameter-shift estimate per shot count."""
    prob = resolve_problem(cfg)
    h = cfg.hash()
    ev = ExactEvaluator(prob.circuit, prob.observable)
    exact = derivative_tensor(ev, prob.theta, 2)
    keys = list(exact.entries)
    base = {"seed": cfg.seed, "config_hash": h}
    rows = [{"record": "entry", "method": "param_shift", "j": j, "k": k, "value": exact[j, k],
             "exact": exact[j, k], "evaluations": exact.evaluations, "stream_id": 0, **base}
            for j, k in keys]
    for step in cfg.steps:
        for j, k in keys:
            value = fd_tensor(ev, prob.theta, (j, k), step, "central")
            rows.append({"record": "entry", "method": "central", "j": j, "k": k, "value": value,
                         "exact": exact[j, k], "step": step, "stream_id": 0, **base})
    m = prob.theta.shape[0]
    for n in cfg.shots:
        sid = stream_id(h, "hessian", n)
        spec = EstimatorSpec.param_shift(HALF_PI, 2)
        est = estimate(spec, prob.circuit, prob.theta, prob.observable, ShotModel(n, cfg.seed, sid))
        evals = spec.plan(m).n_points
        for j, k in keys:
            rows.append({"record": "entry", "method": "param_shift_sampled", "j": j, "k": k,
                         "value": est[j, k], "exact": exact[j, k], "step": HALF_PI, "shots": n,
                         "evaluations": evals, "stream_id": sid, **base})
    return CommandResult(TENSOR_COLUMNS, rows, prob.calibration_unmet)


def cmd_metric(cfg: ExperimentConfig) -> CommandResult:
    """Metric tensor from overlap probabilities, exact and sampled, per diagonal variant."""
    prob = resolve_problem(cfg)
    h = cfg.hash()
    base = {"seed": cfg.seed, "config_hash": h}
    reference_metric = metric_tensor(prob.circuit, prob.theta)
    rows = []
    for diag in cfg.diagonals:
        exact = metric_tensor(prob.circuit, prob.theta, diagonal=diag)
        for (j, k), v in exact.entries.items():
            rows.append({"record": "entry", "method": diag, "j": j, "k": k, "value": v,
                         "exact": reference_metric[j, k], "evaluations": exact.evaluations,
                         "stream_id": 0, **base})
        for n in cfg.shots:
            sid = stream_id(h, "metric", diag, n)
            est = metric_tensor(prob.circuit, prob.theta, ShotModel(n, cfg.seed, sid), diagonal=diag)
            for (j, k), v in est.entries.items():
                rows.append({"record": "entry", "method": f"{diag}_sampled", "j": j, "k": k,
                             "value": v, "exact": reference_metric[j, k], "shots": n,
                             "evaluations": est.evaluations, "stream_id": sid, **base})
    return CommandResult(TENSOR_COLUMNS, rows, prob.calibration_unmet)


# ---------------------------------------------------------------------------
# optimisation and reconstruction

OPTIMIZE_COLUMNS = (
    "record", "method", "shots", "iteration", "cost", "exact_cost", "evaluations", "theta",
    "gradient", "value", "trailing_sd",
) + ("seed", "stream_id", "config_hash")


def _optimizer_setup(cfg: ExperimentConfig, prob: Problem):
    sec = cfg.optimizer
    trainable = sec.trainable
    start = sec.start
    threshold = sec.threshold
    if prob.is_reference:
        trainable = [0, 1] if trainable is None else trainable
        start = list(reference.embed(reference.START)) if start is None else start
        threshold = reference.MINIMUM + 1e-2 if threshold is None else threshold
    if start is None:
        start = list(prob.theta)
    return trainable, np.asarray(start, dtype=float), threshold


def cmd_optimize(cfg: ExperimentConfig) -> CommandResult:
    """One trace per (method, shot count); a summary row closes each trace."""
    prob = resolve_problem(cfg)
    h = cfg.hash()
    sec = cfg.optimizer
    trainable, start, threshold = _optimizer_setup(cfg, prob)
    rows = []
    for method in sec.methods:
        for shots in sec.shots:
            sid = stream_id(h, "optimize", method, shots)
            oc = OptimizerConfig(
                method=method, eta=sec.eta, regularizer=sec.regularizer, eps=sec.eps,
                gradient=make_spec(sec.gradient, sec.gradient_step, 1), shots=shots,
                exact_matrix=sec.exact_matrix, seed=cfg.seed, stream=sid, max_iter=sec.max_iter,
                trainable=None if trainable is None else tuple(trainable),
            )
            trace = optimize(oc, prob.circuit, prob.observable, start)
            base = {"method": method, "shots": shots, "seed": cfg.seed, "stream_id": sid, "config_hash": h}
            for r in trace.records:
                rows.append({"record": "iteration", "iteration": r.iteration, "cost": r.cost,
                             "exact_cost": r.exact_cost, "evaluations": r.evaluations,
                             "theta": r.theta, "gradient": r.gradient, **base})
            tail = trace.costs(exact=True)[-20:]
            rows.append({"record": "summary", "iteration": trace.records[-1].iteration,
                         "evaluations": trace.records[-1].evaluations, "theta": trace.final_theta,
                         "exact_cost": trace.records[-1].exact_cost,
                         "value": None if threshold is None else trace.evaluations_to_reach(threshold),
                         "trailing_sd": float(np.std(tail)), **base})
    return CommandResult(OPTIMIZE_COLUMNS, rows, prob.calibration_unmet)


RECONSTRUCT_COLUMNS = (
    "record", "index", "theta", "surrogate", "exact", "abs_error", "evaluations",
) + ("seed", "stream_id", "config_hash")


def cmd_reconstruct(cfg: ExperimentConfig) -> CommandResult:
    """Fit the trigonometric surrogate and compare it with the simulator at random points."""
    prob = resolve_problem(cfg)
    h = cfg.hash()
    ev = ExactEvaluator(prob.circuit, prob.observable)
    surrogate = trig_reconstruct(ev)
    evals = ev.calls
    sid = stream_id(h, "reconstruct")
    rng = make_rng(cfg.seed, sid)
    pts = rng.uniform(0.0, 2 * math.pi, size=(cfg.samples, prob.circuit.n_params))
    base = {"seed": cfg.seed, "stream_id": sid, "config_hash": h}
    rows, worst = [], 0.0
    for i, p in enumerate(pts):
        s, e = surrogate(p), expectation(prob.circuit, p, prob.observable)
        worst = max(worst, abs(s - e))
        rows.append({"record": "point", "index": i, "theta": p, "surrogate": s, "exact": e,
                     "abs_error": abs(s - e), **base})
    rows.append({"record": "summary", "index": cfg.samples, "abs_error": worst, "evaluations": evals, **base})
    return CommandResult(RECONSTRUCT_COLUMNS, rows, prob.calibration_unmet)


COMMANDS = {
    "mse-sweep": cmd_mse_sweep,
    "scaling-sweep": cmd_scaling_sweep,
    "hessian": cmd_hessian,
    "metric": cmd_metric,
    "optimize": cmd_optimize,
    "reconstruct": cmd_reconstruct,
}


def run(cfg: ExperimentConfig) -> CommandResult:
    return COMMANDS[cfg.kind](cfg)


__all__ = [
    "ExperimentConfig", "OptimizerSection", "CommandResult", "load_config", "stream_id", "run",
    "cmd_mse_sweep", "cmd_scaling_sweep", "cmd_hessian", "cmd_metric", "cmd_optimize",
    "cmd_reconstruct",
]
