"""
GateRecord model for the gate cache index.

Each trained gate stored in a cache directory gets one row in the directory's
SQLite index. The gate files remain the source of truth; the index exists for
audits such as "which gates were trained against this encoder".
"""

from typing import List, Optional

from sqlalchemy import Column, Integer, String, Text
from sqlalchemy.orm import Mapped

from rulegate.models.base import RuleGateBase
from rulegate.models.types import JsonList


class GateRecord(RuleGateBase):
    """
    Index row describing one cached subtree gate.

    Attributes:
        key_hash: Hex digest used as the gate file stem.
        key_text: Full lineage key string.
        op_name: Operator name of the subtree root (IFF, IMPLIES, AND, OR).
        arch: Gate architecture tag.
        feature_dim: Encoder feature dimension F.
        fingerprint: Encoder fingerprint embedded in the leaf keys.
        concept_ids: Concept ids of the subtree leaves, in key order.
        file_name: Gate blob file name relative to the cache directory.
    """

    __tablename__ = "GateRecord"

    key_hash: Mapped[str] = Column("KeyHash", String(64), nullable=False, unique=True)
    key_text: Mapped[str] = Column("KeyText", Text, nullable=False)
    op_name: Mapped[str] = Column("OpName", String(16), nullable=False)
    arch: Mapped[str] = Column("Arch", String(128), nullable=False)
    feature_dim: Mapped[int] = Column("FeatureDim", Integer, nullable=False)
    fingerprint: Mapped[str] = Column("Fingerprint", String(64), nullable=False)
    concept_ids: Mapped[Optional[List[int]]] = Column("ConceptIds", JsonList, nullable=True)
    file_name: Mapped[str] = Column("FileName", String(128), nullable=False)

    def __repr__(self) -> str:
        return (
            f"<GateRecord(id={self.id}, key_hash='{self.key_hash}', "
            f"op_name='{self.op_name}', arch='{self.arch}')>"
        )
