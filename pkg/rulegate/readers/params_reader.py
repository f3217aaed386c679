"""
Reader for binary MLP parameter blobs.
"""

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from rulegate.config import PARAMS_MAGIC, PARAMS_VERSION
from rulegate.errors import CacheIntegrityError
from rulegate.models.mlp import DenseLayer, MlpParams

logger = logging.getLogger(__name__)

_DIGEST_SIZE = 32
_PREFIX = struct.Struct("<HI")


class ParamsReader:
    """
    Reader for MlpParams blobs written by ParamsWriter.
    """

    @staticmethod
    def read(path: Union[str, Path]) -> MlpParams:
        """
        Read and verify a parameter blob.

        Raises:
            FileNotFoundError: If the file does not exist.
            CacheIntegrityError: On a bad magic, unsupported version or
                checksum mismatch.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Parameter file not found: {path}")
        try:
            return ParamsReader.from_bytes(path.read_bytes())
        except CacheIntegrityError as e:
            logger.error(f"Corrupted parameter file {path}: {e}")
            raise

    @staticmethod
    def from_bytes(data: bytes) -> MlpParams:
        params, end = ParamsReader.parse(data, 0)
        if end != len(data):
            raise CacheIntegrityError(f"{len(data) - end} trailing bytes after blob")
        return params

    @staticmethod
    def parse(data: bytes, offset: int) -> Tuple[MlpParams, int]:
        """
        Parse one blob starting at offset.

        Returns:
            (params, offset just past the blob's digest).
        """
        start = offset
        magic_end = offset + len(PARAMS_MAGIC)
        if data[offset:magic_end] != PARAMS_MAGIC:
            raise CacheIntegrityError("Not a parameter blob (bad magic)")
        if len(data) < magic_end + _PREFIX.size:
            raise CacheIntegrityError("Truncated parameter blob")
        version, header_len = _PREFIX.unpack_from(data, magic_end)
        if version != PARAMS_VERSION:
            raise CacheIntegrityError(f"Unsupported parameter blob version {version}")

        header_start = magic_end + _PREFIX.size
        try:
            header = json.loads(data[header_start : header_start + header_len])
            shapes = [tuple(int(d) for d in shape) for shape in header["shapes"]]
        except (ValueError, KeyError, TypeError) as e:
            raise CacheIntegrityError(f"Unreadable parameter header: {e}") from e

        payload_start = header_start + header_len
        n_values = sum(rows * cols + rows for rows, cols in shapes)
        payload_end = payload_start + 8 * n_values
        digest_end = payload_end + _DIGEST_SIZE
        if len(data) < digest_end:
            raise CacheIntegrityError("Truncated parameter blob")
        if hashlib.sha256(data[start:payload_end]).digest() != data[payload_end:digest_end]:
            raise CacheIntegrityError("Parameter blob checksum mismatch")

        values = np.frombuffer(data, dtype="<f8", count=n_values, offset=payload_start)
        layers = []
        cursor = 0
        for rows, cols in shapes:
            weight = values[cursor : cursor + rows * cols].reshape(rows, cols)
            cursor += rows * cols
            bias = values[cursor : cursor + rows]
            cursor += rows
            layers.append(DenseLayer(weight.astype(np.float64), bias.astype(np.float64)))
        return MlpParams(layers, header.get("arch", "")), digest_end
