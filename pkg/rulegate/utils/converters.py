"""
Value coercion helpers for the rulegate package.

Dataset rows, config files and environment variables arrive as loosely typed
JSON or strings; these helpers normalize them.
"""
from typing import Any, Iterable, List, Optional, Union

import numpy as np


def convert_integer(value: Union[str, float, int, None]) -> Optional[int]:
    """
    Convert a value to an integer, handling various string representations.

    Non-integral numbers are rejected rather than truncated.

    Args:
        value: Value to convert (string, float, int, or None)

    Returns:
        Integer value or None if conversion fails or value is None/empty
    """
    if value is None:
        return None

    if isinstance(value, str):
        value = value.strip()
        if value.lower() in ("", "null", "none"):
            return None
        value = value.replace(",", "")

    try:
        number = float(value)  # "25.0" -> 25
    except (ValueError, TypeError):
        return None
    if not number.is_integer():
        return None
    return int(number)


def convert_boolean(value: Union[str, bool, int, None]) -> Optional[bool]:
    """
    Convert a value to a boolean, handling various string representations.

    Args:
        value: Value to convert (string, boolean, int, or None)

    Returns:
        Boolean value or None if value is None

    Raises:
        ValueError: If a string is not a recognised boolean spelling.
    """
    if value is None:
        return None

    if isinstance(value, str):
        value = value.strip().lower()
        if value in ("true", "1", "yes", "on"):
            return True
        if value in ("false", "0", "no", "off", ""):
            return False
        raise ValueError(f"Cannot convert '{value}' to boolean")
    return bool(value)


def convert_bits(values: Iterable[Any]) -> List[int]:
    """
    Convert a sequence of label values to 0/1 integers.

    Accepts booleans, integers, floats and their string spellings.

    Raises:
        ValueError: If any value is not 0 or 1.
    """
    bits = []
    for value in values:
        if isinstance(value, str) and value.strip().lower() in ("true", "false"):
            bit: Optional[int] = int(convert_boolean(value))
        else:
            bit = convert_integer(value)
        if bit not in (0, 1):
            raise ValueError(f"Label value must be 0 or 1, got {value!r}")
        bits.append(bit)
    return bits


def as_matrix(value: Any, dtype: Any = np.float64) -> np.ndarray:
    """Return a 2-D array view of value; a 1-D input becomes one row."""
    array = np.asarray(value, dtype=dtype)
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2:
        raise ValueError(f"Expected a 1-D or 2-D array, got shape {array.shape}")
    return array
