"""Monte Carlo harness, analytic benchmark curves, config files, and CSV.

A run simulates ``replicas`` independent copies of the network and averages
the per-round population MSE across them; replicas are the i.i.d. unit
(agents within a replica are correlated), so standard errors come from
replica-level means.  Analytic curves cover the non-collaborative baseline
(sigma^2 / t per agent), the pooled ideal (sigma^2 / (n_a t)), and the
leading 1/t coefficient of the consensus estimator under the oracle rule.
"""

from __future__ import annotations

import hashlib
import math
import multiprocessing
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .engine import AlphaSchedule, Population, simulate_trajectory
from .privacy import PrivacySpec, calibrate
from .rules import RuleSpec, ThetaSchedule
from .streams import PINNED_REPLICA, substream
from .topology import ClassStructure, Graph, assign_classes_uniform, \
    build_class_structure, corollary_rhs, gen_random_regular


class ConfigError(ValueError):
    """Malformed experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    num_agents: int
    degree: int
    class_means: tuple[float, ...]
    sigma: float
    epsilon: float
    rule: RuleSpec
    alpha: AlphaSchedule
    t_max: int
    replicas: int
    master_seed: int
    regenerate_topology: bool = True

    def __post_init__(self):
        if self.num_agents < 1:
            raise ConfigError("num_agents must be >= 1")
        if self.t_max < 1 or self.replicas < 1:
            raise ConfigError("t_max and replicas must be >= 1")
        if self.sigma <= 0.0:
            raise ConfigError("sigma must be > 0")
        if not self.class_means:
            raise ConfigError("need at least one class mean")
        if not (self.epsilon > 0.0):
            raise ConfigError("epsilon must be > 0 or inf")

    @property
    def half_range(self) -> float:
        """Uniform data support half-width L = sigma * sqrt(3)."""
        return self.sigma * math.sqrt(3.0)

    def privacy(self) -> PrivacySpec:
        return calibrate(self.epsilon, self.half_range)


# --- config file format: flat "key = value" lines, # comments ------------------

_DEFAULTS = {
    "theta_cap": "2", "theta_coeff": "3", "theta_exp": str(1.0 / 7.0),
    "delta": "1", "alpha": "simple", "alpha_window": "10",
    "regenerate_topology": "true",
}


def parse_config_text(text: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        mapping[key.strip().lower()] = value.strip()
    return mapping


def _parse_bool(value: str) -> bool:
    if value.lower() in ("true", "1", "yes", "on"):
        return True
    if value.lower() in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def config_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    merged = dict(_DEFAULTS)
    merged.update(mapping)
    try:
        rule_kind = merged["rule"].lower()
        theta = ThetaSchedule(cap=float(merged["theta_cap"]),
                              coefficient=float(merged["theta_coeff"]),
                              exponent=float(merged["theta_exp"]))
        # r_assumed defaults to the config's graph degree at simulation time
        rule = RuleSpec(kind=rule_kind,
                        theta=theta if rule_kind == "bernstein" else None,
                        delta=float(merged["delta"]) if rule_kind == "optimistic" else None)
        alpha = AlphaSchedule(kind=merged["alpha"].lower(),
                              window=int(merged["alpha_window"]))
        eps_text = merged["epsilon"].lower()
        epsilon = math.inf if eps_text in ("inf", "infinity") else float(eps_text)
        return ExperimentConfig(
            num_agents=int(merged["m"]),
            degree=int(merged["r"]),
            class_means=tuple(float(tok) for tok in merged["class_means"].split(",")),
            sigma=float(merged["sigma"]),
            epsilon=epsilon,
            rule=rule,
            alpha=alpha,
            t_max=int(merged["t_max"]),
            replicas=int(merged["replicas"]),
            master_seed=int(merged["master_seed"]),
            regenerate_topology=_parse_bool(merged["regenerate_topology"]),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc.args[0]!r}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """Read a config file and apply 'key=value' overrides (overrides win)."""
    try:
        text = Path(path).read_text()
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    mapping = parse_config_text(text)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, value = item.split("=", 1)
        mapping[key.strip().lower()] = value.strip()
    return config_from_mapping(mapping)


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(repr(config).encode()).hexdigest()[:12]


# --- topology derivation --------------------------------------------------------

def topology_for_replica(config: ExperimentConfig, replica: int) -> tuple[Graph, np.ndarray]:
    graph = gen_random_regular(config.num_agents, config.degree,
                               substream(config.master_seed, replica, "graph"))
    class_of = assign_classes_uniform(config.num_agents, config.class_means,
                                      substream(config.master_seed, replica, "assignment"))
    return graph, class_of


def pinned_topology(config: ExperimentConfig) -> tuple[Graph, np.ndarray]:
    """The single topology shared by all replicas when regeneration is off."""
    return topology_for_replica(config, PINNED_REPLICA)


def structure_for(config: ExperimentConfig, graph: Graph, class_of) -> ClassStructure:
    return build_class_structure(graph, class_of, np.asarray(config.class_means))


# --- simulation -----------------------------------------------------------------

def _replica_task(args) -> np.ndarray:
    config, replica, pinned = args
    if pinned is None:
        graph, class_of = topology_for_replica(config, replica)
    else:
        graph, class_of = pinned
    mu_of = np.asarray(config.class_means, dtype=float)[class_of]
    population = Population.homogeneous_uniform(mu_of, config.sigma)
    return simulate_trajectory(
        graph, population, config.privacy(), config.rule, config.alpha,
        config.t_max,
        data_rng=substream(config.master_seed, replica, "data"),
        noise_rng=substream(config.master_seed, replica, "dp-noise"),
        fallback_r=config.degree,
    )


def worker_count(replicas: int) -> int:
    env = os.environ.get("COLME_THREADS", "").strip()
    workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(workers, replicas))


@dataclass(frozen=True)
class RunResult:
    """Average-MSE trajectory with its replica count and seed lineage."""

    config: ExperimentConfig
    t: np.ndarray
    mse_mean: np.ndarray
    mse_stderr: np.ndarray
    replicas: int
    seed: int
    config_digest: str


def run(config: ExperimentConfig, topology: tuple[Graph, np.ndarray] | None = None) -> RunResult:
    """Simulate all replicas and average their MSE trajectories.

    An explicit topology pins every replica to it; otherwise a fresh graph
    and assignment are drawn per replica unless regeneration is disabled.
    Replica results are merged in index order, so the worker count never
    changes the output.
    """
    pinned = topology
    if pinned is None and not config.regenerate_topology:
        pinned = pinned_topology(config)
    tasks = [(config, i, pinned) for i in range(config.replicas)]
    workers = worker_count(config.replicas)
    if workers == 1:
        rows = [_replica_task(task) for task in tasks]
    else:
        chunk = max(1, config.replicas // (workers * 4))
        with multiprocessing.get_context("fork").Pool(workers) as pool:
            rows = pool.map(_replica_task, tasks, chunksize=chunk)
    mat = np.vstack(rows)
    mse_mean = mat.mean(axis=0)
    if config.replicas > 1:
        mse_stderr = mat.std(axis=0, ddof=1) / math.sqrt(config.replicas)
    else:
        mse_stderr = np.zeros(config.t_max)
    return RunResult(config, np.arange(1, config.t_max + 1), mse_mean, mse_stderr,
                     config.replicas, config.master_seed, config_hash(config))


# --- analytic benchmarks ---------------------------------------------------------

def local_mse(sigma_sq_of, t: int) -> float:
    """Non-collaborative baseline (1 / (M t)) sum_a sigma_a^2."""
    if t < 1:
        raise ValueError("t must be >= 1")
    sigma_sq_of = np.asarray(sigma_sq_of, dtype=float)
    return float(np.mean(sigma_sq_of)) / t


def ideal_mse(structure: ClassStructure, sigma_sq_of, t: int) -> float:
    """Pooled lower bound (1 / (M t)) sum_a sigma_a^2 / n_a."""
    if t < 1:
        raise ValueError("t must be >= 1")
    sigma_sq_of = np.asarray(sigma_sq_of, dtype=float)
    return float(np.mean(sigma_sq_of / structure.component_size)) / t


def theorem1_constant(structure: ClassStructure, sigma_sq_of,
                      privacy: PrivacySpec) -> float:
    """Leading 1/t coefficient of the consensus MSE under the oracle rule:

        (1/M) [ sum_{n_a <= 2} sigma_a^2
                + sum_{n_a >= 3} 2 (sigma_a^2 + sigma_dp^2) / n_a ].

    The o(1/t) remainder is not modeled.
    """
    sigma_sq_of = np.asarray(sigma_sq_of, dtype=float)
    n = structure.component_size.astype(float)
    small = n <= 2
    total = float(np.sum(sigma_sq_of[small]))
    total += float(np.sum(2.0 * (sigma_sq_of[~small] + privacy.sigma_dp_sq) / n[~small]))
    return total / structure.class_of.size


def corollary_holds(structure: ClassStructure, sigma_sq_of,
                    privacy: PrivacySpec) -> bool:
    """True iff the noise variance is strictly below the collaboration bound."""
    return privacy.sigma_dp_sq < corollary_rhs(structure, sigma_sq_of)


# --- CSV emission -----------------------------------------------------------------

CSV_HEADER = "curve,rule,epsilon,r,M,t,mse_mean,mse_stderr,replicas,seed"


@dataclass(frozen=True)
class CurveSeries:
    """One CSV curve: per-t means plus the metadata columns."""

    curve: str
    rule: str
    epsilon: float
    degree: int
    num_agents: int
    seed: int
    t: np.ndarray
    mse_mean: np.ndarray
    mse_stderr: np.ndarray
    replicas: int


def sim_series(result: RunResult) -> CurveSeries:
    cfg = result.config
    return CurveSeries("sim", cfg.rule.kind, cfg.epsilon, cfg.degree,
                       cfg.num_agents, result.seed, result.t, result.mse_mean,
                       result.mse_stderr, result.replicas)


def theory_series(config: ExperimentConfig,
                  topology: tuple[Graph, np.ndarray] | None = None) -> list[CurveSeries]:
    """Analytic curves on the same topology ensemble the simulator uses.

    With per-replica regeneration the structure-dependent constants are
    averaged over the replicas' own topology draws; otherwise they are
    evaluated on the pinned topology.
    """
    sigma_sq_of = np.full(config.num_agents, config.sigma**2)
    privacy = config.privacy()
    if topology is not None:
        pairs = [topology]
    elif config.regenerate_topology:
        pairs = [topology_for_replica(config, i) for i in range(config.replicas)]
    else:
        pairs = [pinned_topology(config)]
    structures = [structure_for(config, g, c) for g, c in pairs]

    t = np.arange(1, config.t_max + 1)
    local_c = float(np.mean(sigma_sq_of))
    ideal_c = float(np.mean([ideal_mse(s, sigma_sq_of, 1) for s in structures]))
    thm1_c = float(np.mean([theorem1_constant(s, sigma_sq_of, privacy) for s in structures]))
    zeros = np.zeros(config.t_max)

    def series(name, constant):
        return CurveSeries(name, "-", config.epsilon, config.degree,
                           config.num_agents, config.master_seed, t,
                           constant / t, zeros, 0)

    return [series("theory-local", local_c), series("theory-ideal", ideal_c),
            series("theory-thm1", thm1_c)]


def _fmt_epsilon(epsilon: float) -> str:
    return "inf" if math.isinf(epsilon) else f"{epsilon:g}"


def emit_csv(series: Sequence[CurveSeries], path) -> None:
    """Write curves as CSV (one row per (curve, t)); bytes are a pure
    function of the inputs."""
    if not series:
        raise ValueError("emit_csv needs at least one curve")
    lines = [CSV_HEADER]
    for s in series:
        eps = _fmt_epsilon(s.epsilon)
        for i, t in enumerate(s.t.tolist()):
            lines.append(f"{s.curve},{s.rule},{eps},{s.degree},{s.num_agents},{t},"
                         f"{s.mse_mean[i]:.17g},{s.mse_stderr[i]:.17g},{s.replicas},{s.seed}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_csv(path) -> list[dict]:
    """Parse an emitted CSV back into row dicts (floats re-parsed exactly)."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header in {path}")
    rows = []
    for line in lines[1:]:
        curve, rule, eps, r, m, t, mean, err, reps, seed = line.split(",")
        rows.append({
            "curve": curve, "rule": rule,
            "epsilon": math.inf if eps == "inf" else float(eps),
            "r": int(r), "M": int(m), "t": int(t),
            "mse_mean": float(mean), "mse_stderr": float(err),
            "replicas": int(reps), "seed": int(seed),
        })
    return rows
