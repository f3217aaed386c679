"""
Custom SQLAlchemy column types for rulegate records.
"""

import json
from typing import Any, List, Optional

from sqlalchemy import Text
from sqlalchemy.types import TypeDecorator


class JsonList(TypeDecorator):
    """
    SQLAlchemy type for storing Python lists as JSON strings in the database.

    Example:
        class GateRecord(RuleGateBase):
            __tablename__ = "GateRecord"

            concept_ids = Column(JsonList)  # stored as a JSON string
    """

    impl = Text
    cache_ok = True

    def process_bind_param(self, value: Optional[List[Any]], dialect) -> Optional[str]:
        """
        Convert a Python list to a JSON string for database storage.

        Args:
            value: The Python list to convert, or None.
            dialect: The DBAPI in use.

        Returns:
            JSON string representation of the list, or None if value is None.
        """
        if value is None:
            return None
        return json.dumps(list(value))

    def process_result_value(self, value: Optional[str], dialect) -> Optional[List[Any]]:
        """
        Convert a JSON string from the database back to a Python list.

        Args:
            value: The JSON string from the database, or None.
            dialect: The DBAPI in use.

        Returns:
            Python list, or None if value is None, empty or not valid JSON.
        """
        if not value:
            return None
        try:
            result = json.loads(value)
        except json.JSONDecodeError:
            return None
        return result if isinstance(result, list) else None
