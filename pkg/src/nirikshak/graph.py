"""Request-relationship graph over scenario nodes and walk enumeration.

Each (method, outcome case) pair carries an existence-state precondition and
postcondition for the tracked instance. An edge a -> b exists when a's
postcondition satisfies b's precondition, so a successful assertion at a
implies b should succeed next.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .endpoints import HttpMethod as M
from .endpoints import OutcomeCase as C
from .endpoints import ScenarioNode
from .errors import ConfigError

DEFAULT_MAX_STEPS = 3


class ExistenceState(str, enum.Enum):
    EXISTS = "EXISTS"
    MISSING = "MISSING"
    ANY = "ANY"

    def __str__(self) -> str:
        return self.value


E, X, A = ExistenceState.EXISTS, ExistenceState.MISSING, ExistenceState.ANY

_TRANSITIONS = {
    (M.GET, C.POSITIVE): (E, E),
    (M.GET, C.NEGATIVE): (X, X),
    (M.PATCH, C.POSITIVE): (E, E),
    (M.PATCH, C.NEGATIVE): (X, X),
    (M.DELETE, C.POSITIVE): (E, X),
    (M.DELETE, C.NEGATIVE): (X, X),
    (M.POST, C.POSITIVE): (X, E),
    (M.POST, C.NEGATIVE): (E, E),
    (M.PUT, C.POSITIVE): (A, E),
    (M.PUT, C.NEGATIVE): (X, X),
}


def node_transition(method: M, case: C) -> tuple[ExistenceState, ExistenceState]:
    """(precondition, postcondition) on the tracked instance."""
    method, case = M(method), C(case)
    if case is C.DESTRUCTIVE:
        # malformed requests are made with an existing instance and change nothing
        return E, E
    return _TRANSITIONS[method, case]


def satisfies(state: ExistenceState, required: ExistenceState) -> bool:
    return required is A or state is required


def edge_possible(a: ScenarioNode, b: ScenarioNode) -> bool:
    if a.resource != b.resource:
        return False
    _, post = node_transition(*a.key)
    pre, _ = node_transition(*b.key)
    return satisfies(post, pre)


@dataclass(frozen=True)
class ScenarioGraph:
    resource: str | None
    nodes: tuple[ScenarioNode, ...]
    edges: dict[str, tuple[str, ...]]

    def node(self, node_id: str) -> ScenarioNode:
        return self._by_id[node_id]

    @cached_property
    def _by_id(self) -> dict[str, ScenarioNode]:
        return {n.node_id: n for n in self.nodes}

    @property
    def node_ids(self) -> list[str]:
        return sorted(n.node_id for n in self.nodes)

    def edge_list(self) -> list[tuple[str, str]]:
        return [(a, b) for a in self.node_ids for b in self.edges[a]]

    def to_json(self) -> dict:
        nodes = []
        for node_id in self.node_ids:
            n = self.node(node_id)
            pre, post = node_transition(*n.key)
            nodes.append(
                {
                    "id": node_id,
                    "method": n.method.value,
                    "outcomeCase": n.outcome_case.value,
                    "methodIndex": n.method_index,
                    "url": n.url_template,
                    "pre": pre.value,
                    "post": post.value,
                }
            )
        return {
            "resource": self.resource,
            "nodes": nodes,
            "edges": [list(e) for e in self.edge_list()],
        }


def build_graph(nodes: Iterable[ScenarioNode]) -> ScenarioGraph:
    nodes = tuple(nodes)
    resources = {n.resource for n in nodes}
    if len(resources) > 1:
        raise ValueError(f"graph spans several resources: {sorted(resources)}")
    ids = [n.node_id for n in nodes]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate scenario node identifiers")
    ordered = sorted(nodes, key=lambda n: n.node_id)
    edges = {
        a.node_id: tuple(b.node_id for b in ordered if edge_possible(a, b)) for a in ordered
    }
    return ScenarioGraph(next(iter(resources), None), nodes, edges)


def enumerate_walks(
    graph: ScenarioGraph, steps: int, max_steps: int = DEFAULT_MAX_STEPS
) -> list[list[str]]:
    """Every walk with exactly ``steps`` vertices, in lexicographic order."""
    if isinstance(steps, bool) or not isinstance(steps, int) or not 1 <= steps <= max_steps:
        raise ConfigError(f"steps must be an integer in [1, {max_steps}], got {steps!r}")
    walks: list[list[str]] = []
    # iterative DFS; neighbours are pre-sorted so output order is lexicographic
    stack: list[list[str]] = [[n] for n in reversed(graph.node_ids)]
    while stack:
        walk = stack.pop()
        if len(walk) == steps:
            walks.append(walk)
            continue
        for nxt in reversed(graph.edges[walk[-1]]):
            stack.append(walk + [nxt])
    return walks


def count_walk_vertices(walks: Sequence[Sequence[str]]) -> int:
    return sum(len(w) for w in walks)
