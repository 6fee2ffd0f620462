"""One synchronized round of the private collaborative estimator.

Every round each agent, in lock-step phases over consistent snapshots:

  P1  absorbs a fresh sample into its raw and privatized running means,
  P2  exchanges privatized means and re-tests every neighbor, giving the
      round's class estimate (agents removed earlier can be re-admitted),
  P3  exchanges class-estimate sizes,
  P4  blends its privatized mean with the previous round's consensus
      estimates of admitted neighbors, weighted by the mixing row,
  P5  exchanges the new consensus estimates,
  P6  publishes nothing further but picks its personal output: the raw
      running mean when every admitted member looks like a component of
      size <= 2 (consensus would only add noise there), else the consensus
      estimate.

Only privatized means, set sizes, and consensus estimates ever cross an
edge; raw samples and raw running means stay local.  An optional audit list
records the field name of every exchange so tests can verify that boundary.

State is vectorized: one array entry per agent, one bool per undirected
edge for class-estimate membership (admission rules are symmetric, so
membership is well-defined per edge).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .bernstein import DistributionSpec, privatized_beta
from .privacy import PrivacySpec, sample_noise
from .rules import RuleSpec, optimistic_radius, theta_at
from .topology import Graph


class ProtocolError(RuntimeError):
    """A required exchanged value (e.g. a member's set size) is missing."""


@dataclass(frozen=True)
class AlphaSchedule:
    """Consensus-vs-fresh-data weight at per-agent local time t.

    simple:   t / (t + 1)
    windowed: (floor(t/window) + 1) / (floor(t/window) + 2)

    The local time resets to 1 whenever the agent's class estimate changes,
    so agents effectively run individual schedules.
    """

    kind: str = "simple"
    window: int = 10

    def __post_init__(self):
        if self.kind not in ("simple", "windowed"):
            raise ValueError(f"unknown alpha schedule {self.kind!r}")
        if self.window < 1:
            raise ValueError("window must be >= 1")


def alpha_at(schedule: AlphaSchedule, t_local):
    """Evaluate the schedule; t_local may be a scalar or an int array >= 1."""
    t = np.asarray(t_local, dtype=float)
    if np.any(t < 1):
        raise ValueError("t_local must be >= 1")
    if schedule.kind == "simple":
        a = t / (t + 1.0)
    else:
        k = np.floor(t / schedule.window)
        a = (k + 1.0) / (k + 2.0)
    return float(a) if a.ndim == 0 else a


def mixing_row(agent: int, class_est: set, sizes: Mapping[int, int]) -> dict[int, float]:
    """Mixing weights of one agent over its class estimate.

    Members b != agent get 1 / (max(|C_a|, |C_b|) + 1); the self-weight
    absorbs the remainder so the row sums to 1.  Off-members are zero
    (omitted).  Sizes of all members must have been exchanged.
    """
    if agent not in class_est:
        raise ValueError("agent must belong to its own class estimate")
    size_a = len(class_est)
    row: dict[int, float] = {}
    total = 0.0
    for b in sorted(class_est):
        if b == agent:
            continue
        if b not in sizes:
            raise ProtocolError(f"no size estimate received from member {b}")
        w = 1.0 / (max(size_a, sizes[b]) + 1.0)
        row[b] = w
        total += w
    row[agent] = 1.0 - total
    return row


def assemble_mixing_matrix(member: np.ndarray) -> np.ndarray:
    """Full mixing matrix from a symmetric membership matrix (True diagonal).

    Row a holds agent a's mixing weights; under a symmetric admission rule
    the result is doubly stochastic with nonnegative entries.
    """
    member = np.asarray(member, dtype=bool)
    m = member.shape[0]
    sizes = member.sum(axis=1).astype(float)
    pair = 1.0 / (np.maximum(sizes[:, None], sizes[None, :]) + 1.0)
    w = np.where(member, pair, 0.0)
    np.fill_diagonal(w, 0.0)
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return w


@dataclass
class Population:
    """Per-agent data-law constants as parallel arrays."""

    mu: np.ndarray
    half_range: np.ndarray
    sigma_sq: np.ndarray
    beta: np.ndarray

    @classmethod
    def from_specs(cls, specs: list[DistributionSpec]) -> "Population":
        return cls(
            mu=np.array([s.mean for s in specs]),
            half_range=np.array([s.half_range for s in specs]),
            sigma_sq=np.array([s.sigma_sq for s in specs]),
            beta=np.array([s.beta for s in specs]),
        )

    @classmethod
    def homogeneous_uniform(cls, mu_of, sigma: float) -> "Population":
        """Uniform data with common sigma; means vary per agent."""
        mu_of = np.asarray(mu_of, dtype=float)
        return cls.from_specs([DistributionSpec.uniform(float(mu), sigma) for mu in mu_of])

    @property
    def num_agents(self) -> int:
        return self.mu.size

    def sample_block(self, rng: np.random.Generator, rounds: int) -> np.ndarray:
        """(rounds, M) block of data draws, one uniform per entry, laid out
        round-major so draw order is (round, agent)."""
        u = rng.random((rounds, self.num_agents))
        return self.mu + self.half_range * (2.0 * u - 1.0)


# --- per-edge admission evaluators ------------------------------------------

class OracleEdgeRule:
    static = True

    def __init__(self, graph: Graph, population: Population):
        self._same = population.mu[graph.edges_u] == population.mu[graph.edges_v]

    def decide(self, xu, xv, t):
        return self._same


class LocalEdgeRule:
    """Admit nobody: every agent keeps its own lane (non-collaborative)."""

    static = True

    def __init__(self, graph: Graph, population: Population):
        self._none = np.zeros(graph.num_edges, dtype=bool)

    def decide(self, xu, xv, t):
        return self._none


class BernsteinEdgeRule:
    static = False

    def __init__(self, graph: Graph, population: Population, privacy: PrivacySpec,
                 schedule):
        bt = privatized_beta(np.sqrt(population.sigma_sq), population.beta,
                             privacy.sigma_dp, privacy.beta_dp)
        u, v = graph.edges_u, graph.edges_v
        # z(t) = (A ln(2/theta_t) + B sqrt(2 ln(2/theta_t))) / sqrt(t) per edge
        self._a = 2.0 * (bt[u] + bt[v])
        self._b = np.sqrt(population.sigma_sq[u] + population.sigma_sq[v]
                          + 2.0 * privacy.sigma_dp_sq)
        self._schedule = schedule

    def decide(self, xu, xv, t):
        lg = math.log(2.0 / theta_at(self._schedule, t))
        z = (self._a * lg + self._b * math.sqrt(2.0 * lg)) / math.sqrt(t)
        return np.abs(xu - xv) < z


class OptimisticEdgeRule:
    static = False

    def __init__(self, graph: Graph, population: Population, privacy: PrivacySpec,
                 delta: float, r_assumed: int):
        self._u, self._v = graph.edges_u, graph.edges_v
        self._sigma_sq = population.sigma_sq
        self._privacy = privacy
        self._delta = delta
        self._r = r_assumed
        self._m = graph.num_agents

    def decide(self, xu, xv, t):
        rad = optimistic_radius(self._sigma_sq, self._privacy, t, self._delta,
                                self._r, self._m)
        return np.abs(xu - xv) - rad[self._u] - rad[self._v] <= 0.0


def make_edge_rule(spec: RuleSpec, graph: Graph, population: Population,
                   privacy: PrivacySpec, fallback_r: int | None = None):
    if spec.kind == "oracle":
        return OracleEdgeRule(graph, population)
    if spec.kind == "local":
        return LocalEdgeRule(graph, population)
    if spec.kind == "bernstein":
        return BernsteinEdgeRule(graph, population, privacy, spec.theta)
    r = spec.r_assumed if spec.r_assumed is not None else fallback_r
    if r is None:
        raise ValueError("optimistic rule needs an assumed regularity r")
    return OptimisticEdgeRule(graph, population, privacy, spec.delta, r)


# --- round state --------------------------------------------------------------

@dataclass
class WorldState:
    """All agents' state after t completed rounds."""

    t: int
    xbar: np.ndarray          # raw running means, never transmitted
    xbar_noisy: np.ndarray    # privatized running means
    mu_consensus: np.ndarray  # consensus estimates (0 at t = 0)
    mu_out: np.ndarray        # personal outputs, never transmitted
    member: np.ndarray        # per-edge class-estimate membership
    class_size: np.ndarray    # |C_a| per agent (1 at t = 0: just the agent)
    alpha_clock: np.ndarray   # per-agent local time for the alpha schedule

    def class_estimate(self, graph: Graph, a: int) -> set[int]:
        est = {a}
        on_u = self.member & (graph.edges_u == a)
        on_v = self.member & (graph.edges_v == a)
        est.update(graph.edges_v[on_u].tolist())
        est.update(graph.edges_u[on_v].tolist())
        return est


def init_state(num_agents: int, num_edges: int) -> WorldState:
    return WorldState(
        t=0,
        xbar=np.zeros(num_agents),
        xbar_noisy=np.zeros(num_agents),
        mu_consensus=np.zeros(num_agents),
        mu_out=np.zeros(num_agents),
        member=np.zeros(num_edges, dtype=bool),
        class_size=np.ones(num_agents),
        alpha_clock=np.zeros(num_agents, dtype=np.int64),
    )


def _exchange(name: str, values: np.ndarray, u: np.ndarray, v: np.ndarray, audit):
    """Gather both endpoints' copies of a published per-agent field.

    Every cross-edge read in a round goes through here; the audit list (when
    given) collects one field name per exchange phase.
    """
    if audit is not None:
        audit.append(name)
    return values[u], values[v]


@dataclass
class StaticPlan:
    """Cached admission outcome for rules that never change (oracle, local)."""

    member: np.ndarray
    class_size: np.ndarray
    um: np.ndarray
    vm: np.ndarray
    w_edge: np.ndarray
    w_self: np.ndarray
    fallback: np.ndarray


def build_static_plan(graph: Graph, rule) -> StaticPlan:
    member = rule.decide(None, None, 1)
    size, um, vm, w_edge, w_self = _memberships(graph, member)
    return StaticPlan(member, size, um, vm, w_edge, w_self,
                      _fallback_mask(graph, member, size, um, vm))


def _memberships(graph: Graph, member: np.ndarray):
    m = graph.num_agents
    u, v = graph.edges_u, graph.edges_v
    deg = (np.bincount(u[member], minlength=m)
           + np.bincount(v[member], minlength=m)).astype(float)
    size = 1.0 + deg
    um, vm = u[member], v[member]
    w_edge = 1.0 / (np.maximum(size[um], size[vm]) + 1.0)
    w_sum = (np.bincount(um, weights=w_edge, minlength=m)
             + np.bincount(vm, weights=w_edge, minlength=m))
    w_self = 1.0 - w_sum
    if np.any(w_self < -1e-12):
        raise RuntimeError("self mixing weight went negative; aborting replica")
    return size, um, vm, w_edge, w_self


def _fallback_mask(graph: Graph, member, size, um, vm):
    """Agents whose every admitted member (self included) has |C| <= 2."""
    m = graph.num_agents
    big = size > 2.0
    bad = (np.bincount(um[big[vm]], minlength=m)
           + np.bincount(vm[big[um]], minlength=m))
    return ~big & (bad == 0)


def advance_round(state: WorldState, graph: Graph, rule, alpha_schedule: AlphaSchedule,
                  x: np.ndarray, z: np.ndarray, audit=None,
                  plan: StaticPlan | None = None) -> WorldState:
    """Run phases P1..P6 once, mutating and returning the state.

    x and z are this round's fresh samples and noise draws; pass a
    StaticPlan to skip re-testing under a static rule (the size exchange is
    then elided too, so audited message counts reflect the optimization).
    """
    t = state.t + 1
    u, v = graph.edges_u, graph.edges_v
    m = graph.num_agents

    # P1: fold the fresh (and privatized) sample into the running means
    shrink = (t - 1.0) / t
    state.xbar *= shrink
    state.xbar += x / t
    state.xbar_noisy *= shrink
    state.xbar_noisy += (x + z) / t
    xn = state.xbar_noisy

    if plan is not None:
        member, size = plan.member, plan.class_size
        um, vm, w_edge, w_self = plan.um, plan.vm, plan.w_edge, plan.w_self
        fallback = plan.fallback
        changed = None  # static: sets only change at t = 1
    else:
        # P2: exchange privatized means and re-test every neighbor
        xn_u, xn_v = _exchange("xbar_noisy", xn, u, v, audit)
        member = rule.decide(xn_u, xn_v, t)
        changed = member != state.member
        # P3: exchange set sizes, derive mixing weights over admitted edges
        size, um, vm, w_edge, w_self = _memberships(graph, member)
        _exchange("class_size", size, u, v, audit)
        fallback = _fallback_mask(graph, member, size, um, vm)

    # per-agent alpha clock: reset to 1 whenever the class estimate changed
    if t == 1:
        state.alpha_clock[:] = 1
    elif plan is not None:
        state.alpha_clock += 1
    else:
        flipped = (np.bincount(u[changed], minlength=m)
                   + np.bincount(v[changed], minlength=m)) > 0
        state.alpha_clock = np.where(flipped, 1, state.alpha_clock + 1)
    alpha = alpha_at(alpha_schedule, state.alpha_clock)

    # P4/P5: consensus update from the previous round's exchanged estimates
    mu_prev = state.mu_consensus
    mu_u, mu_v = _exchange("mu_consensus", mu_prev, um, vm, audit)
    neigh = (np.bincount(um, weights=w_edge * mu_v, minlength=m)
             + np.bincount(vm, weights=w_edge * mu_u, minlength=m))
    mu_new = (1.0 - alpha) * xn + alpha * (w_self * mu_prev + neigh)

    # P6: personal output; consensus keeps evolving either way
    state.mu_out = np.where(fallback, state.xbar, mu_new)

    state.t = t
    state.member = member
    state.class_size = size
    state.mu_consensus = mu_new
    return state


def average_preservation_check(component, mu_prev, mu_new, xbar_noisy, alpha: float,
                               tol: float = 1e-10) -> bool:
    """Does one consensus step preserve the component average?

    Over a full component with a common alpha and symmetric admissions the
    mixing matrix is doubly stochastic, so

        mean(mu_new) = (1 - alpha) mean(xbar_noisy) + alpha mean(mu_prev).
    """
    idx = np.asarray(sorted(component), dtype=np.int64)
    lhs = float(np.mean(np.asarray(mu_new)[idx]))
    rhs = (1.0 - alpha) * float(np.mean(np.asarray(xbar_noisy)[idx])) \
        + alpha * float(np.mean(np.asarray(mu_prev)[idx]))
    return abs(lhs - rhs) <= tol


def simulate_trajectory(graph: Graph, population: Population, privacy: PrivacySpec,
                        rule_spec: RuleSpec, alpha_schedule: AlphaSchedule,
                        t_max: int, data_rng: np.random.Generator,
                        noise_rng: np.random.Generator,
                        fallback_r: int | None = None) -> np.ndarray:
    """One replica: t_max rounds, returning the per-round population MSE

        mse[t-1] = (1/M) sum_a (mu_out_a(t) - mu_a)^2.

    Draw order is fixed (all data round-major, then all noise round-major),
    so a replica is a pure function of its two streams.
    """
    rule = make_edge_rule(rule_spec, graph, population, privacy, fallback_r)
    x_block = population.sample_block(data_rng, t_max)
    z_block = sample_noise(privacy, noise_rng, size=(t_max, population.num_agents))
    plan = build_static_plan(graph, rule) if rule.static else None

    state = init_state(graph.num_agents, graph.num_edges)
    mse = np.empty(t_max)
    mu_true = population.mu
    inv_m = 1.0 / graph.num_agents
    for t in range(t_max):
        advance_round(state, graph, rule, alpha_schedule, x_block[t], z_block[t],
                      plan=plan)
        err = state.mu_out - mu_true
        mse[t] = inv_m * float(err @ err)
    return mse
