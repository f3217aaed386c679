"""
Writer for binary MLP parameter blobs.

Layout::

    magic b"RGMLP" | version u16 | header length u32 | JSON header |
    float64 LE payload (per layer: weight row-major, then bias) | sha256 digest

The digest covers every byte before it.
"""

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Union

import numpy as np

from rulegate.config import PARAMS_MAGIC, PARAMS_VERSION
from rulegate.models.mlp import MlpParams


class ParamsWriter:
    """
    Writer for MlpParams blobs.
    """

    @staticmethod
    def payload(params: MlpParams) -> bytes:
        """Canonical little-endian float64 bytes of every array, in layer order."""
        return b"".join(
            np.ascontiguousarray(array, dtype="<f8").tobytes() for array in params.arrays()
        )

    @staticmethod
    def to_bytes(params: MlpParams) -> bytes:
        header = json.dumps(
            {
                "arch": params.arch,
                "shapes": [list(layer.weight.shape) for layer in params.layers],
            },
            sort_keys=True,
        ).encode("utf-8")
        body = (
            PARAMS_MAGIC
            + struct.pack("<HI", PARAMS_VERSION, len(header))
            + header
            + ParamsWriter.payload(params)
        )
        return body + hashlib.sha256(body).digest()

    @staticmethod
    def write(params: MlpParams, path: Union[str, Path]) -> None:
        """
        Atomically write a parameter blob.

        Args:
            params: Parameters to write.
            path: Destination file; replaced via rename once fully written.
        """
        atomic_write_bytes(Path(path), ParamsWriter.to_bytes(params))


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write to a temporary file in the same directory, then rename over path."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
