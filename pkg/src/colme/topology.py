"""Communication graphs and the class structure derived from them.

Agents sit on a fixed undirected simple graph.  Agents sharing a data mean
form a similarity class; the agents of one class reachable from each other
through same-class vertices form a component, whose size n_a is the
collaboration gain available to its members.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class GenerationError(RuntimeError):
    """Random graph construction exceeded its restart budget."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph as parallel edge arrays (u < v) plus
    per-vertex sorted neighbor tuples."""

    num_agents: int
    edges_u: np.ndarray
    edges_v: np.ndarray
    neighbors: tuple = field(repr=False)

    @classmethod
    def from_edges(cls, num_agents: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        canon = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < num_agents and 0 <= b < num_agents):
                raise ValueError(f"edge ({a}, {b}) out of range")
            canon.add((min(a, b), max(a, b)))
        ordered = sorted(canon)
        u = np.array([e[0] for e in ordered], dtype=np.int64)
        v = np.array([e[1] for e in ordered], dtype=np.int64)
        nbrs = [[] for _ in range(num_agents)]
        for a, b in ordered:
            nbrs[a].append(b)
            nbrs[b].append(a)
        return cls(num_agents, u, v, tuple(tuple(sorted(n)) for n in nbrs))

    @property
    def num_edges(self) -> int:
        return int(self.edges_u.size)

    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edges_u, minlength=self.num_agents)
        deg += np.bincount(self.edges_v, minlength=self.num_agents)
        return deg

    def regular_degree(self) -> int | None:
        """Common degree if the graph is regular, else None."""
        deg = self.degrees()
        return int(deg[0]) if self.num_agents and (deg == deg[0]).all() else None


def complete_graph(num_agents: int) -> Graph:
    edges = [(a, b) for a in range(num_agents) for b in range(a + 1, num_agents)]
    return Graph.from_edges(num_agents, edges)


def cycle_graph(num_agents: int) -> Graph:
    edges = [(a, (a + 1) % num_agents) for a in range(num_agents)]
    return Graph.from_edges(num_agents, edges)


def gen_random_regular(num_agents: int, degree: int, rng: np.random.Generator,
                       max_restarts: int = 10_000) -> Graph:
    """Random r-regular simple graph by stub pairing.

    Stubs are repeatedly shuffled and paired; pairs that would create a
    self-loop or duplicate edge are thrown back for the next pass.  A pass
    with no progress is a dead end and triggers a full restart (rare), up to
    ``max_restarts`` attempts.
    """
    if degree < 0 or degree >= num_agents:
        raise ValueError(f"need 0 <= degree < num_agents, got degree={degree}, M={num_agents}")
    if (num_agents * degree) % 2 != 0:
        raise ValueError(f"M * r must be even, got M={num_agents}, r={degree}")
    if degree == 0:
        return Graph.from_edges(num_agents, [])
    for _ in range(max_restarts):
        edges = _pair_stubs(num_agents, degree, rng)
        if edges is not None:
            return Graph.from_edges(num_agents, edges)
    raise GenerationError(
        f"no simple {degree}-regular graph on {num_agents} vertices after {max_restarts} restarts")


def _pair_stubs(num_agents: int, degree: int, rng: np.random.Generator):
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(num_agents), degree)
    while stubs.size:
        stubs = rng.permutation(stubs)
        leftover = []
        progressed = False
        for i in range(0, stubs.size, 2):
            a, b = int(stubs[i]), int(stubs[i + 1])
            if a > b:
                a, b = b, a
            if a == b or (a, b) in edges:
                leftover.append(a)
                leftover.append(b)
            else:
                edges.add((a, b))
                progressed = True
        if not progressed:
            return None
        stubs = np.asarray(leftover, dtype=np.int64)
    return edges


@dataclass(frozen=True)
class ClassStructure:
    """Class assignment plus the derived per-agent component data.

    mu_of[a] is agent a's true mean; component_id[a] indexes the maximal
    same-mean connected component containing a; component_size[a] = n_a.
    """

    class_of: np.ndarray
    mu_of_class: np.ndarray
    mu_of: np.ndarray
    component_id: np.ndarray
    component_size: np.ndarray

    def similarity_class(self, a: int) -> set[int]:
        """All agents whose mean equals agent a's (graph-independent)."""
        return set(np.flatnonzero(self.mu_of == self.mu_of[a]).tolist())

    def component_members(self, a: int) -> set[int]:
        return set(np.flatnonzero(self.component_id == self.component_id[a]).tolist())


def build_class_structure(graph: Graph, class_of, mu_of_class) -> ClassStructure:
    """Label same-mean components by breadth-first search from the lowest
    unvisited index (component labels are therefore ordering-canonical)."""
    class_of = np.asarray(class_of, dtype=np.int64)
    mu_of_class = np.asarray(mu_of_class, dtype=float)
    if class_of.shape != (graph.num_agents,):
        raise ValueError("class_of must have one entry per agent")
    if class_of.min(initial=0) < 0 or class_of.max(initial=0) >= mu_of_class.size:
        raise ValueError("class index out of range")
    if not np.all(np.isfinite(mu_of_class)):
        raise ValueError("class means must be finite")
    mu_of = mu_of_class[class_of]

    m = graph.num_agents
    comp_id = np.full(m, -1, dtype=np.int64)
    comp_size = np.zeros(m, dtype=np.int64)
    next_id = 0
    for start in range(m):
        if comp_id[start] >= 0:
            continue
        members = [start]
        comp_id[start] = next_id
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for b in graph.neighbors[a]:
                if comp_id[b] < 0 and mu_of[b] == mu_of[a]:
                    comp_id[b] = next_id
                    members.append(b)
                    queue.append(b)
        comp_size[members] = len(members)
        next_id += 1
    return ClassStructure(class_of, mu_of_class, mu_of, comp_id, comp_size)


def assign_classes_uniform(num_agents: int, class_means: Sequence[float],
                           rng: np.random.Generator) -> np.ndarray:
    """Independent uniform class assignment (roughly balanced sizes)."""
    if len(class_means) == 0:
        raise ValueError("need at least one class")
    return rng.integers(0, len(class_means), size=num_agents)


def corollary_rhs(structure: ClassStructure, sigma_sq_of) -> float:
    """Largest noise variance under which collaboration still beats the
    local baseline:

        sum_{n_a >= 3} sigma_a^2 (1 - 2/n_a)  /  (2 sum_{n_a >= 3} 1/n_a)

    +inf when no agent has n_a >= 3 (collaboration is vacuous there).
    """
    sigma_sq_of = np.asarray(sigma_sq_of, dtype=float)
    n = structure.component_size
    mask = n >= 3
    if not mask.any():
        return math.inf
    nm = n[mask].astype(float)
    num = float(np.sum(sigma_sq_of[mask] * (1.0 - 2.0 / nm)))
    den = 2.0 * float(np.sum(1.0 / nm))
    return num / den


def save_edge_list(graph: Graph, path, degree: int | None = None) -> None:
    """Write the text format: header "M r", then one "a b" line per edge
    with a < b, zero-based."""
    if degree is None:
        degree = graph.regular_degree()
        if degree is None:
            raise ValueError("graph is not regular; pass degree explicitly")
    lines = [f"{graph.num_agents} {degree}"]
    lines += [f"{a} {b}" for a, b in zip(graph.edges_u.tolist(), graph.edges_v.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def load_edge_list(path) -> tuple[Graph, int]:
    """Read the edge-list format; returns (graph, declared degree)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    m, r = (int(tok) for tok in lines[0].split())
    edges = []
    for ln in lines[1:]:
        a, b = (int(tok) for tok in ln.split())
        if not a < b:
            raise ValueError(f"edge lines must have a < b, got '{ln}'")
        edges.append((a, b))
    return Graph.from_edges(m, edges), r
