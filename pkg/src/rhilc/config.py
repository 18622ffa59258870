"""Experiment configuration: YAML parsing, validation and defaults.

A config file describes one experiment: the controller's plant model (and
optionally the true plant it is applied to), the horizon sizes, the
scalar weights, a reference waveform, disturbance and uncertainty
settings, initial data and a master seed.  `parse_config` applies
defaults and validates every dimension before anything runs; errors name
the offending field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .lifting import StateSpaceModel
from .weights import ReferenceSignal, WeightConfig

__all__ = ["ExperimentConfig", "parse_config", "config_from_dict", "build_reference"]


@dataclass
class ExperimentConfig:
    model: StateSpaceModel
    true_model: StateSpaceModel | None
    n_s: int
    n_i: int
    n_i_sweep: list[int]
    n_iterations: int
    weights: WeightConfig
    reference: dict
    disturbance_mean: np.ndarray
    disturbance_sigma: float
    uncertainty_magnitude: float | None  # None -> scale from the true plant
    uncertainty_decay: float
    u_init: np.ndarray
    x0_init: np.ndarray
    seed: int
    output_dir: str
    raw: dict = field(default_factory=dict)

    @property
    def limit_model(self) -> StateSpaceModel:
        """Plant the loop converges against: the true plant when given."""
        return self.true_model if self.true_model is not None else self.model


def _require(mapping, key, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigError("missing required entry", field=f"{where}.{key}" if where else key)
    return mapping[key]


def _matrix(value, where):
    try:
        m = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"not a numeric matrix ({exc})", field=where)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ConfigError("must be a matrix (list of rows)", field=where)
    return m


def _vector(value, length, where, default=None):
    if value is None:
        if default is None:
            raise ConfigError("missing required entry", field=where)
        value = default
    v = np.atleast_1d(np.asarray(value, dtype=float))
    if v.size == 1 and length > 1:
        v = np.full(length, float(v[0]))
    if v.size != length:
        raise ConfigError(f"expected {length} entries, got {v.size}", field=where)
    return v


def _positive_int(value, where):
    try:
        i = int(value)
    except (TypeError, ValueError):
        raise ConfigError("must be an integer", field=where)
    if i < 1:
        raise ConfigError("must be at least 1", field=where)
    return i


def build_reference(spec: dict, n_s: int, n_x: int) -> ReferenceSignal:
    """Lifted reference from a waveform description.

    Kinds: ``constant`` (per-state value held over the iteration),
    ``sine`` (sinusoid on one state, a whole number of periods per
    iteration, zeros elsewhere) and ``samples`` (explicit n_s x n_x
    table).
    """
    kind = spec.get("kind", "constant")
    if kind == "constant":
        default = np.zeros(n_x)
        default[0] = 1.0
        value = _vector(spec.get("value"), n_x, "reference.value", default=default)
        states = np.tile(value, (n_s, 1))
    elif kind == "sine":
        amplitude = float(spec.get("amplitude", 1.0))
        periods = float(spec.get("periods", 1.0))
        phase = float(spec.get("phase", 0.0))
        state = int(spec.get("state", 1))
        if not 1 <= state <= n_x:
            raise ConfigError(f"state index must be in 1..{n_x}", field="reference.state")
        k = np.arange(1, n_s + 1)
        states = np.zeros((n_s, n_x))
        states[:, state - 1] = amplitude * np.sin(2.0 * np.pi * periods * k / n_s + phase)
    elif kind == "samples":
        samples = np.asarray(_require(spec, "samples", "reference"), dtype=float)
        if samples.shape != (n_s, n_x):
            raise ConfigError(
                f"expected shape ({n_s}, {n_x}), got {samples.shape}",
                field="reference.samples",
            )
        states = samples
    else:
        raise ConfigError(f"unknown waveform kind '{kind}'", field="reference.kind")
    return ReferenceSignal.from_states(states)


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a parsed config mapping and apply defaults."""
    if not isinstance(raw, dict) or not raw:
        raise ConfigError("configuration is empty or not a mapping", field="<root>")

    plant = _require(raw, "plant", "")
    A = _matrix(_require(plant, "a", "plant"), "plant.a")
    B = _matrix(_require(plant, "b", "plant"), "plant.b")
    try:
        model = StateSpaceModel(A, B)
    except ValueError as exc:
        raise ConfigError(str(exc), field="plant")

    true_model = None
    if ("true_a" in plant) != ("true_b" in plant):
        raise ConfigError("true_a and true_b must be given together", field="plant")
    if "true_a" in plant:
        try:
            true_model = StateSpaceModel(
                _matrix(plant["true_a"], "plant.true_a"),
                _matrix(plant["true_b"], "plant.true_b"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc), field="plant.true_a")
        if (true_model.n_x, true_model.n_u) != (model.n_x, model.n_u):
            raise ConfigError(
                "true plant dimensions must match the controller model",
                field="plant.true_a",
            )

    horizon = _require(raw, "horizon", "")
    n_s = _positive_int(_require(horizon, "n_s", "horizon"), "horizon.n_s")
    n_i = _positive_int(horizon.get("n_i", 1), "horizon.n_i")
    n_iterations = _positive_int(
        horizon.get("n_iterations", 10), "horizon.n_iterations"
    )
    sweep_raw = horizon.get("n_i_sweep", [n_i])
    if not isinstance(sweep_raw, (list, tuple)) or not sweep_raw:
        raise ConfigError("must be a nonempty list", field="horizon.n_i_sweep")
    n_i_sweep = [_positive_int(v, "horizon.n_i_sweep") for v in sweep_raw]

    n_x, n_u = model.n_x, model.n_u
    wsec = _require(raw, "weights", "")
    try:
        weights = WeightConfig(
            q_u=_vector(_require(wsec, "q_u", "weights"), n_u, "weights.q_u"),
            q_delta_u=_vector(
                _require(wsec, "q_delta_u", "weights"), n_u, "weights.q_delta_u"
            ),
            q_x=_vector(_require(wsec, "q_x", "weights"), n_x, "weights.q_x"),
            q_delta_x=_vector(
                _require(wsec, "q_delta_x", "weights"), n_x, "weights.q_delta_x"
            ),
            q_e=_vector(_require(wsec, "q_e", "weights"), n_x, "weights.q_e"),
            s_x_state=_vector(wsec.get("s_x"), n_x, "weights.s_x", default=np.zeros(n_x)),
            q_sx=None if wsec.get("q_sx") is None
            else _vector(wsec["q_sx"], n_x, "weights.q_sx"),
        )
    except ConfigError as exc:
        if exc.field and not exc.field.startswith("weights"):
            raise ConfigError(str(exc), field="weights") from exc
        raise

    reference = raw.get("reference", {"kind": "constant"})
    if not isinstance(reference, dict):
        raise ConfigError("must be a mapping", field="reference")
    build_reference(reference, n_s, n_x)  # validate early

    dist = raw.get("disturbance", {})
    disturbance_mean = _vector(
        dist.get("mean"), n_x, "disturbance.mean", default=np.zeros(n_x)
    )
    disturbance_sigma = float(dist.get("sigma", 0.0))
    if disturbance_sigma < 0:
        raise ConfigError("must be nonnegative", field="disturbance.sigma")

    unc = raw.get("uncertainty")
    if unc is None:
        magnitude, decay = 0.0, 0.8  # section absent: no plant perturbations
    else:
        magnitude = unc.get("magnitude")  # None -> auto-scaled from the limit plant
        if magnitude is not None:
            magnitude = float(magnitude)
            if magnitude < 0:
                raise ConfigError("must be nonnegative", field="uncertainty.magnitude")
        decay = float(unc.get("decay", 0.8))
        if not 0.0 <= decay < 1.0:
            raise ConfigError("must lie in [0, 1)", field="uncertainty.decay")

    init = raw.get("init", {})
    u_init = _vector(init.get("u"), n_s * n_u, "init.u", default=np.zeros(n_s * n_u))
    x0_init = _vector(init.get("x0"), n_x, "init.x0", default=np.zeros(n_x))

    seed = raw.get("seed", 0)
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ConfigError("must be an integer", field="seed")

    return ExperimentConfig(
        model=model,
        true_model=true_model,
        n_s=n_s,
        n_i=n_i,
        n_i_sweep=n_i_sweep,
        n_iterations=n_iterations,
        weights=weights,
        reference=reference,
        disturbance_mean=disturbance_mean,
        disturbance_sigma=disturbance_sigma,
        uncertainty_magnitude=magnitude,
        uncertainty_decay=decay,
        u_init=u_init,
        x0_init=x0_init,
        seed=seed,
        output_dir=str(raw.get("output_dir", "rhilc-out")),
        raw=raw,
    )


def parse_config(path) -> ExperimentConfig:
    """Load, validate and default-fill a YAML experiment config."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", field="<path>")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse YAML: {exc}", field="<file>")
    return config_from_dict(raw)
