"""
Base SQLAlchemy model for rulegate index tables.

This module provides the declarative base shared by every persisted rulegate
record, including the common primary key, creation timestamp and helpers for
keyword normalization and dictionary export.
"""

from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from sqlalchemy import Column, DateTime, Integer
from sqlalchemy.orm import Mapped, declarative_base

Base = declarative_base()


class RuleGateBase(Base):
    """
    Base class for all rulegate records.

    It is defined as abstract so it won't create its own table.

    Attributes:
        id (int): Primary key for the record.
        created_at (datetime): When the record was created (UTC).
    """

    __abstract__ = True

    id: Mapped[int] = Column("ID", Integer, primary_key=True, autoincrement=True)

    created_at: Mapped[datetime] = Column(
        "CreatedAt",
        DateTime(timezone=True),
        default=lambda: datetime.now(timezone.utc),
        nullable=False,
        doc="Timestamp when the record was created",
    )

    def __init__(self, **kwargs: Any) -> None:
        """
        Initialize a record, accepting either field names or column names.

        Unknown keys are ignored so manifests written by newer versions can be
        loaded without failing.
        """
        if kwargs.get("created_at", kwargs.get("CreatedAt")) is None:
            kwargs["created_at"] = datetime.now(timezone.utc)
        kwargs.pop("CreatedAt", None)

        fields = {
            self._normalize_key(column): field
            for column, field in self._get_column_to_field_mapping().items()
        }
        fields.update({self._normalize_key(f): f for f in fields.values()})

        mapped: Dict[str, Any] = {}
        for key, value in kwargs.items():
            if value is None:
                continue
            field = fields.get(self._normalize_key(key))
            if field is not None:
                mapped[field] = value
        super().__init__(**mapped)

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}(id={self.id})>"

    def to_dict(self, exclude: Optional[List[str]] = None) -> Dict[str, Any]:
        """
        Convert the record to a dictionary keyed by field name.

        Args:
            exclude: Optional list of field names to exclude from the result.

        Returns:
            Dict containing the record's field names and values.
        """
        exclude = exclude or []
        result: Dict[str, Any] = {}
        for column, field in self._get_column_to_field_mapping().items():
            if field in exclude or column == "ID":
                continue
            value = getattr(self, field)
            if isinstance(value, datetime):
                value = value.isoformat()
            result[field] = value
        return result

    @classmethod
    def _get_column_to_field_mapping(cls) -> Dict[str, str]:
        """
        Get mapping from database column names to model field names.

        Returns:
            Dict mapping database column names to model field names.
        """
        mapping = {}
        for field_name in cls.__mapper__.attrs.keys():
            attr = getattr(cls, field_name)
            if hasattr(attr, "property") and hasattr(attr.property, "columns"):
                mapping[attr.property.columns[0].name] = field_name
        return mapping

    @staticmethod
    def _normalize_key(key: str) -> str:
        """Normalize a key by converting to lowercase and removing underscores."""
        return key.lower().replace("_", "")
