"""Flat `key = value` experiment specs.

Sections are dotted prefixes (`cluster.`, `step.`, `noise.`,
`objective.`); the format round-trips exactly and diffs cleanly.  A
JSON export of every resolved spec is written beside each run for
provenance.
"""

import json

from .cluster import ClusterConfig
from .errors import SpecParseError
from .objectives import (
    NoiseModel,
    easgd_counterexample_f,
    matrix_completion_problem,
    quadratic_with_condition,
    sinc2d,
)
from .rng import Rng
from .steps import StepParams

_BOOL = {"true": True, "false": False}


def _parse_scalar(raw):
    raw = raw.strip()
    if raw.lower() in _BOOL:
        return _BOOL[raw.lower()]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def parse_flat(text):
    """Parse flat key=value text into an ordered dict; `#` comments and
    blank lines are skipped."""
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise SpecParseError(f"line {lineno}: expected 'key = value', got {line!r}",
                                 line=lineno)
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if not key:
            raise SpecParseError(f"line {lineno}: empty key", line=lineno)
        if key in entries:
            raise SpecParseError(f"line {lineno}: duplicate key {key!r}",
                                 line=lineno, key=key)
        entries[key] = _parse_scalar(raw)
    return entries


def render_flat(entries):
    lines = []
    for key, value in entries.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


class ExperimentSpec:
    """A named, fully serializable experiment description."""

    def __init__(self, name, config, objective, trials=1, out_prefix="run"):
        self.name = name
        self.config = config
        self.objective = dict(objective)
        self.trials = int(trials)
        self.out_prefix = out_prefix

    @classmethod
    def from_text(cls, text):
        entries = parse_flat(text)

        def take(key, default=None, required=False):
            if key in entries:
                return entries.pop(key)
            if required:
                raise SpecParseError(f"missing required key {key!r}", key=key)
            return default

        name = take("name", "experiment")
        trials = take("trials", 1)
        out_prefix = take("out", "run")

        step = StepParams(
            eta=take("step.eta", required=True),
            lam=take("step.lambda", 0.0),
            lam_g=take("step.lambda_g", 0.0),
            beta=take("step.beta"),
        )
        noise = NoiseModel(
            sigma2=take("noise.sigma2", 0.0),
            nu=take("noise.nu", 0.0),
            sigma_f=take("noise.sigma_f", 0.0),
        )
        speeds = take("cluster.speeds")
        if isinstance(speeds, str):
            speeds = [float(s) for s in speeds.split(";")]
        try:
            config = ClusterConfig(
                n=take("cluster.n", 1),
                l=take("cluster.l", 1),
                method=take("cluster.method", required=True),
                step=step,
                tau=take("cluster.tau", 1),
                tau_g=take("cluster.tau_g"),
                noise=noise,
                selection=take("cluster.selection", "exact"),
                selection_window=take("cluster.selection_window", 1),
                leader_first_step_only=take("cluster.leader_first_step_only", False),
                eta_schedule=take("cluster.eta_schedule", "constant"),
                lambda_schedule=take("cluster.lambda_schedule", "constant"),
                speeds=speeds,
                seed=take("cluster.seed", 0),
                max_total_steps=take("cluster.max_total_steps", 1000),
            )
        except ValueError as exc:
            raise SpecParseError(str(exc)) from exc

        objective = {k.split(".", 1)[1]: v for k, v in entries.items()
                     if k.startswith("objective.")}
        leftover = [k for k in entries if not k.startswith("objective.")]
        if leftover:
            raise SpecParseError(f"unknown keys: {', '.join(sorted(leftover))}",
                                 key=leftover[0])
        if "kind" not in objective:
            raise SpecParseError("missing required key 'objective.kind'",
                                 key="objective.kind")
        return cls(name, config, objective, trials, out_prefix)

    def to_entries(self):
        c, s, nm = self.config, self.config.step, self.config.noise
        entries = {
            "name": self.name,
            "trials": self.trials,
            "out": self.out_prefix,
            "cluster.n": c.n,
            "cluster.l": c.l,
            "cluster.method": c.method,
            "cluster.tau": c.tau,
            "cluster.tau_g": c.tau_g,
            "cluster.selection": c.selection,
            "cluster.selection_window": c.selection_window,
            "cluster.leader_first_step_only": c.leader_first_step_only,
            "cluster.eta_schedule": c.eta_schedule,
            "cluster.lambda_schedule": c.lambda_schedule,
            "cluster.seed": c.seed,
            "cluster.max_total_steps": c.max_total_steps,
            "step.eta": s.eta,
            "step.lambda": s.lam,
            "step.lambda_g": s.lam_g,
            "noise.sigma2": nm.sigma2,
            "noise.nu": nm.nu,
            "noise.sigma_f": nm.sigma_f,
        }
        if s.beta is not None:
            entries["step.beta"] = s.beta
        if c.speeds is not None:
            entries["cluster.speeds"] = ";".join(str(v) for v in c.speeds)
        for key, value in sorted(self.objective.items()):
            entries[f"objective.{key}"] = value
        return entries

    def to_text(self):
        return render_flat(self.to_entries())

    def to_json(self):
        return json.dumps(self.to_entries(), indent=2, sort_keys=True) + "\n"

    def build_objective(self):
        kind = self.objective["kind"]
        seed = self.objective.get("seed", self.config.seed)
        rng = Rng(seed, (1000,))
        if kind == "quadratic":
            return quadratic_with_condition(
                self.objective.get("dim", 2),
                float(self.objective.get("kappa", 10.0)), rng)
        if kind == "matrix_completion":
            return matrix_completion_problem(
                self.objective.get("d", 20), self.objective.get("r", 2), rng)
        if kind == "sinc2d":
            return sinc2d()
        if kind == "easgd_counterexample_f":
            return easgd_counterexample_f()
        raise SpecParseError(f"unknown objective kind {kind!r}", key="objective.kind")

    def initial_points(self, obj):
        scale = float(self.objective.get("init_scale", 1.0))
        rng = Rng(self.config.seed, (2000,))
        return [scale * rng.standard_normal(obj.dim)
                for _ in range(self.config.n_workers)]
