"""
Concept vocabulary and compiled rule graph models.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

from rulegate.errors import CycleError, UnknownConceptError
from rulegate.utils.enums import OpCode


@dataclass(frozen=True)
class ConceptVocab:
    """
    Ordered concept names with contiguous ids starting at 1.

    Attributes:
        names: Concept names; the concept with id ``i`` is ``names[i - 1]``.
    """

    names: Tuple[str, ...]
    _ids: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise ValueError("Concept names must be unique")
        if any(not name for name in names):
            raise ValueError("Concept names must be non-empty")
        object.__setattr__(self, "_ids", {name: i + 1 for i, name in enumerate(names)})

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "ConceptVocab":
        return cls(tuple(names))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self._ids

    def id_of(self, name: str) -> int:
        """Concept id (1-based) for a name."""
        try:
            return self._ids[name]
        except KeyError:
            raise UnknownConceptError(f"Unknown concept '{name}'") from None

    def name_of(self, concept_id: int) -> str:
        if not 1 <= concept_id <= len(self.names):
            raise UnknownConceptError(f"Unknown concept id {concept_id}")
        return self.names[concept_id - 1]


@dataclass(frozen=True)
class GraphNode:
    """
    Rule graph node.

    Attributes:
        mask: 1 for a leaf, 0 for an operator node.
        concept_id: Concept id for leaves, 0 for operators.
        op_code: Operator code for operators, 0 for leaves.
    """

    mask: int
    concept_id: int = 0
    op_code: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.mask == 1

    @property
    def op(self) -> OpCode:
        return OpCode(self.op_code)


@dataclass(frozen=True)
class GraphEdge:
    """
    Directed child-to-parent edge.

    Attributes:
        src: Child node id.
        dst: Parent node id.
        neg: -1 when the child's truth is negated, +1 otherwise.
        pos: Operand slot; for IMPLIES 0 is the antecedent.
    """

    src: int
    dst: int
    neg: int = 1
    pos: int = 0

    @property
    def negated(self) -> bool:
        return self.neg == -1


@dataclass(frozen=True)
class RuleGraph:
    """
    Compiled rule DAG.

    Node ids index ``nodes``. Compiled graphs list children before parents
    and every operator node has exactly two in-edges.
    """

    nodes: Tuple[GraphNode, ...]
    edges: Tuple[GraphEdge, ...]
    root: int
    _in_edges: Dict[int, Tuple[GraphEdge, ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        incoming: Dict[int, List[GraphEdge]] = {v: [] for v in range(len(self.nodes))}
        for edge in self.edges:
            if edge.src not in incoming or edge.dst not in incoming:
                raise ValueError(f"Edge {edge} references an unknown node")
            incoming[edge.dst].append(edge)
        object.__setattr__(
            self,
            "_in_edges",
            {v: tuple(sorted(es, key=lambda e: e.pos)) for v, es in incoming.items()},
        )

    def __len__(self) -> int:
        return len(self.nodes)

    def in_edges(self, node: int) -> Tuple[GraphEdge, ...]:
        """Child edges of a node ordered by operand slot."""
        return self._in_edges[node]

    def internal_nodes(self) -> List[int]:
        return [v for v, node in enumerate(self.nodes) if not node.is_leaf]

    def leaf_nodes(self) -> List[int]:
        return [v for v, node in enumerate(self.nodes) if node.is_leaf]

    def concept_ids(self) -> List[int]:
        """Distinct concept ids of the leaves, ascending."""
        return sorted({self.nodes[v].concept_id for v in self.leaf_nodes()})

    def depths(self) -> Dict[int, int]:
        """
        Longest path length from any leaf to each node.

        Raises:
            CycleError: If the graph is not acyclic.
        """
        indegree = {v: len(self._in_edges[v]) for v in range(len(self.nodes))}
        parents: Dict[int, List[int]] = {v: [] for v in range(len(self.nodes))}
        for edge in self.edges:
            parents[edge.src].append(edge.dst)

        depth = {v: 0 for v in range(len(self.nodes))}
        queue = deque(v for v, d in indegree.items() if d == 0)
        visited = 0
        while queue:
            v = queue.popleft()
            visited += 1
            for parent in parents[v]:
                depth[parent] = max(depth[parent], depth[v] + 1)
                indegree[parent] -= 1
                if indegree[parent] == 0:
                    queue.append(parent)
        if visited != len(self.nodes):
            raise CycleError("Rule graph contains a cycle")
        return depth

    def topo_levels(self) -> List[List[int]]:
        """Node ids grouped by depth, leaves first."""
        depth = self.depths()
        levels: List[List[int]] = [[] for _ in range(max(depth.values(), default=-1) + 1)]
        for v in range(len(self.nodes)):
            levels[depth[v]].append(v)
        return levels

    def max_depth(self) -> int:
        return len(self.topo_levels()) - 1

    def serialize(self) -> str:
        """
        Stable text dump of the node and edge tables.

        Equal graphs always produce identical text.
        """
        lines = [f"root {self.root}", "nodes id mask concept op"]
        lines += [
            f"{v} {n.mask} {n.concept_id} {n.op_code}" for v, n in enumerate(self.nodes)
        ]
        lines.append("edges src dst neg pos")
        lines += [f"{e.src} {e.dst} {e.neg:+d} {e.pos}" for e in self.edges]
        return "\n".join(lines) + "\n"

    def validate(self, n_concepts: int) -> None:
        """
        Check the structural invariants of a compiled graph.

        Raises:
            ValueError: On a broken invariant.
            CycleError: If the graph is cyclic.
        """
        out_degree = [0] * len(self.nodes)
        for edge in self.edges:
            out_degree[edge.src] += 1
        sinks = [v for v, d in enumerate(out_degree) if d == 0]
        if sinks != [self.root]:
            raise ValueError(f"Graph must have exactly one sink at the root, got {sinks}")
        for v, node in enumerate(self.nodes):
            n_in = len(self._in_edges[v])
            if node.is_leaf:
                if not 1 <= node.concept_id <= n_concepts or node.op_code or n_in:
                    raise ValueError(f"Malformed leaf node {v}: {node}")
            else:
                if node.op_code not in (1, 2, 3, 4) or node.concept_id or n_in != 2:
                    raise ValueError(f"Malformed operator node {v}: {node}")
                if sorted(e.pos for e in self._in_edges[v]) != [0, 1]:
                    raise ValueError(f"Operator node {v} needs operand slots 0 and 1")
        self.depths()

