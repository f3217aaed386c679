"""
Subtree gate, gate set and monolithic baseline models.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional

from rulegate.errors import MissingGateError
from rulegate.models.mlp import MlpParams
from rulegate.models.rule_graph import RuleGraph


@dataclass
class SubtreeGate:
    """
    Learned operator for one binary rule-graph node.

    The network maps ``[h_left | b_left | h_right | b_right]`` (negation bits
    b) to a hidden feature h_v of width F and a scalar truth logit.

    Attributes:
        params: MLP with sizes ``[2(F+1), F, ..., F, 1]``.
        key: Lineage cache key text of the subtree.
        op_name: Operator name of the subtree root.
    """

    params: MlpParams
    key: str = ""
    op_name: str = ""

    def __post_init__(self) -> None:
        if self.params.output_dim != 1:
            raise ValueError(f"Gate head must be scalar, got {self.params.output_dim}")
        if len(self.params.layers) < 2:
            raise ValueError("Gate needs at least one hidden layer")
        if self.params.input_dim != 2 * (self.feature_dim + 1):
            raise ValueError(
                f"Gate input width {self.params.input_dim} does not match "
                f"2(F+1) for F={self.feature_dim}"
            )

    @property
    def feature_dim(self) -> int:
        return self.params.feature_dim

    @property
    def arch(self) -> str:
        return self.params.arch


@dataclass
class GateSet:
    """
    Gates of one rule graph keyed by internal node id.

    Attributes:
        gates: Node id to gate.
        trained: Node ids whose gates were trained in this run.
        loaded: Node ids whose gates came from the cache.
    """

    gates: Dict[int, SubtreeGate] = field(default_factory=dict)
    trained: List[int] = field(default_factory=list)
    loaded: List[int] = field(default_factory=list)

    def __getitem__(self, node: int) -> SubtreeGate:
        try:
            return self.gates[node]
        except KeyError:
            raise MissingGateError(f"No gate for node {node}") from None

    def __setitem__(self, node: int, gate: SubtreeGate) -> None:
        self.gates[node] = gate

    def __contains__(self, node: object) -> bool:
        return node in self.gates

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.gates))

    def get(self, node: int) -> Optional[SubtreeGate]:
        return self.gates.get(node)

    def missing(self, graph: RuleGraph) -> List[int]:
        """Internal nodes of graph without a gate."""
        return [v for v in graph.internal_nodes() if v not in self.gates]

    def covers(self, graph: RuleGraph) -> bool:
        return not self.missing(graph)


@dataclass
class MonolithicModel:
    """
    Root-only baseline: one MLP from leaf embeddings to the rule truth.

    Inputs are ``[z_i | z_j]``; same-image rows use ``j = i``, chimera rows a
    second sample standing in for the right operand.

    Attributes:
        params: MLP with sizes ``[2F, F, ..., F, 1]``.
        with_chimeras: Whether chimera compositions were used in training.
    """

    params: MlpParams
    with_chimeras: bool = False

    @property
    def feature_dim(self) -> int:
        return self.params.input_dim // 2
