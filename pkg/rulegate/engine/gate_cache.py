"""
Lineage-aware storage of trained subtree gates.

A gate is addressed by the canonical key of its subtree: leaf keys embed the
concept id and the encoder fingerprint, internal keys embed the operator,
the (negation-prefixed) child keys, the gate architecture tag and the feature
dimension. A cached gate is reused only when the key matches exactly.

Directory layout::

    <hash>.gate     parameter blob (see ParamsWriter)
    <hash>.json     manifest: key text, created-at, arch, F, fingerprint
    index.sqlite    GateRecord rows for audits
"""

import hashlib
import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Tuple, Union

from sqlalchemy import create_engine, select
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session

from rulegate.config import (
    CACHE_HASH_CHARS,
    CACHE_INDEX_FILE,
    DEFAULT_ENCODING,
    GATE_SUFFIX,
    MANIFEST_SCHEMA_VERSION,
    MANIFEST_SUFFIX,
)
from rulegate.errors import CacheIntegrityError, MissingGateError
from rulegate.models.base import Base
from rulegate.models.gate_record import GateRecord
from rulegate.models.rule_graph import RuleGraph
from rulegate.models.subtree_gate import GateSet, SubtreeGate
from rulegate.readers.params_reader import ParamsReader
from rulegate.writers.params_writer import ParamsWriter, atomic_write_bytes

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CacheKey:
    """
    Canonical lineage key of a subtree.

    Attributes:
        text: Full key string.
        op_name: Operator name of the subtree root, or ``LEAF``.
        arch: Gate architecture tag.
        feature_dim: Encoder feature dimension F.
        fingerprint: Encoder fingerprint.
        concept_ids: Leaf concept ids in key order.
    """

    text: str
    op_name: str
    arch: str
    feature_dim: int
    fingerprint: str
    concept_ids: Tuple[int, ...] = ()

    @property
    def hash(self) -> str:
        """Truncated SHA-256 hex digest of the key text; the file stem."""
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()[:CACHE_HASH_CHARS]

    def __str__(self) -> str:
        return self.text


def subtree_key(
    graph: RuleGraph, node: int, fingerprint: str, arch: str, feature_dim: int
) -> CacheKey:
    """
    Build the lineage key of the subtree rooted at node.

    Commutative operators sort their child key strings; IMPLIES keeps operand
    order. Negated edges prefix the child key with ``!``.
    """
    text, concept_ids = _key_text(graph, node, fingerprint, arch, feature_dim)
    root = graph.nodes[node]
    return CacheKey(
        text=text,
        op_name="LEAF" if root.is_leaf else root.op.name,
        arch=arch,
        feature_dim=feature_dim,
        fingerprint=fingerprint,
        concept_ids=tuple(concept_ids),
    )


def _key_text(
    graph: RuleGraph, node: int, fingerprint: str, arch: str, feature_dim: int
) -> Tuple[str, List[int]]:
    current = graph.nodes[node]
    if current.is_leaf:
        return f"LEAF({current.concept_id}|enc={fingerprint})", [current.concept_id]

    parts = []
    for edge in graph.in_edges(node):
        text, ids = _key_text(graph, edge.src, fingerprint, arch, feature_dim)
        parts.append((("!" if edge.negated else "") + text, ids))
    if current.op.is_commutative:
        parts.sort(key=lambda part: part[0])
    children = ",".join(text for text, _ in parts)
    concept_ids = [c for _, ids in parts for c in ids]
    return f"{current.op.name}({children}|arch={arch}|F={feature_dim})", concept_ids


class GateCache:
    """
    Gate cache rooted at a directory.

    Reads are lock-free. Writes go through a temporary file and a rename and
    are serialized per cache instance; index updates share the same lock.

    Args:
        root: Cache directory, created on first store.
    """

    def __init__(self, root: Union[str, Path]) -> None:
        self.root = Path(root)
        self._lock = threading.Lock()
        self._engine: Optional[Engine] = None

    def __repr__(self) -> str:
        return f"<GateCache(root='{self.root}')>"

    def gate_path(self, key: CacheKey) -> Path:
        return self.root / f"{key.hash}{GATE_SUFFIX}"

    def manifest_path(self, key: CacheKey) -> Path:
        return self.root / f"{key.hash}{MANIFEST_SUFFIX}"

    def __contains__(self, key: object) -> bool:
        return isinstance(key, CacheKey) and self.gate_path(key).exists()

    def store(self, key: CacheKey, gate: SubtreeGate) -> Path:
        """
        Store a gate under key, replacing any previous entry.

        Returns:
            Path of the gate file.
        """
        gate_path = self.gate_path(key)
        manifest = {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "key": key.text,
            "key_hash": key.hash,
            "op_name": key.op_name,
            "arch": key.arch,
            "feature_dim": key.feature_dim,
            "fingerprint": key.fingerprint,
            "concept_ids": list(key.concept_ids),
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        with self._lock:
            atomic_write_bytes(gate_path, ParamsWriter.to_bytes(gate.params))
            atomic_write_bytes(
                self.manifest_path(key),
                json.dumps(manifest, indent=2, sort_keys=True).encode(DEFAULT_ENCODING),
            )
            self._index(key, gate_path.name)
        logger.debug(f"Stored gate {key.hash} ({key.op_name})")
        return gate_path

    def load(self, key: CacheKey) -> Optional[SubtreeGate]:
        """
        Load the gate stored under key.

        Returns:
            The gate, or None if nothing is stored under key.

        Raises:
            CacheIntegrityError: If the blob fails its checksum or the manifest
                records a different key.
        """
        gate_path = self.gate_path(key)
        manifest_path = self.manifest_path(key)
        if not gate_path.exists() or not manifest_path.exists():
            logger.debug(f"Cache miss for {key.hash}")
            return None
        try:
            manifest = json.loads(manifest_path.read_text(encoding=DEFAULT_ENCODING))
        except ValueError as e:
            logger.error(f"Unreadable manifest {manifest_path}: {e}")
            raise CacheIntegrityError(f"Unreadable manifest {manifest_path}") from e
        if manifest.get("key") != key.text:
            raise CacheIntegrityError(f"Manifest {manifest_path} records a different key")
        try:
            params = ParamsReader.from_bytes(gate_path.read_bytes())
        except CacheIntegrityError as e:
            logger.error(f"Corrupted gate file {gate_path}: {e}")
            raise
        logger.debug(f"Cache hit for {key.hash} ({key.op_name})")
        return SubtreeGate(params=params, key=key.text, op_name=key.op_name)

    def load_rule(
        self, graph: RuleGraph, fingerprint: str, arch: str, feature_dim: int
    ) -> GateSet:
        """
        Load the gates of every internal node of a rule.

        Raises:
            MissingGateError: If any gate is not cached.
        """
        gates = GateSet()
        for v in graph.internal_nodes():
            key = subtree_key(graph, v, fingerprint, arch, feature_dim)
            gate = self.load(key)
            if gate is None:
                raise MissingGateError(f"No cached gate for node {v} ({key.op_name}) in {self.root}")
            gates[v] = gate
            gates.loaded.append(v)
        return gates

    def records(
        self, fingerprint: Optional[str] = None, arch: Optional[str] = None
    ) -> List[GateRecord]:
        """
        Index rows, optionally filtered by encoder fingerprint and arch tag.
        """
        if not (self.root / CACHE_INDEX_FILE).exists():
            return []
        query = select(GateRecord).order_by(GateRecord.id)
        if fingerprint is not None:
            query = query.where(GateRecord.fingerprint == fingerprint)
        if arch is not None:
            query = query.where(GateRecord.arch == arch)
        with Session(self._get_engine(), expire_on_commit=False) as session:
            return list(session.scalars(query))

    def _get_engine(self) -> Engine:
        if self._engine is None:
            self.root.mkdir(parents=True, exist_ok=True)
            self._engine = create_engine(f"sqlite:///{self.root / CACHE_INDEX_FILE}")
            Base.metadata.create_all(self._engine)
        return self._engine

    def _index(self, key: CacheKey, file_name: str) -> None:
        with Session(self._get_engine()) as session:
            record = session.scalars(
                select(GateRecord).where(GateRecord.key_hash == key.hash)
            ).first()
            if record is None:
                record = GateRecord(key_hash=key.hash)
                session.add(record)
            record.key_text = key.text
            record.op_name = key.op_name
            record.arch = key.arch
            record.feature_dim = key.feature_dim
            record.fingerprint = key.fingerprint
            record.concept_ids = list(key.concept_ids)
            record.file_name = file_name
            record.created_at = datetime.now(timezone.utc)
            session.commit()
