"""
Reader for leaf bank files.
"""

import json
import logging
import struct
from pathlib import Path
from typing import Union

from rulegate.config import BANK_MAGIC, BANK_VERSION
from rulegate.engine.leaf_training import fingerprint
from rulegate.errors import CacheIntegrityError
from rulegate.models.leaf_bank import LeafBank
from rulegate.models.rule_graph import ConceptVocab
from rulegate.readers.params_reader import ParamsReader

logger = logging.getLogger(__name__)

_PREFIX = struct.Struct("<HI")


class LeafBankReader:
    """
    Reader for LeafBank files written by LeafBankWriter.
    """

    @staticmethod
    def read(path: Union[str, Path]) -> LeafBank:
        """
        Read a leaf bank file.

        Raises:
            FileNotFoundError: If the file does not exist.
            CacheIntegrityError: If the file is corrupted or its stored
                fingerprint does not match the encoder weights.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Leaf bank file not found: {path}")
        try:
            return LeafBankReader.from_bytes(path.read_bytes())
        except CacheIntegrityError as e:
            logger.error(f"Corrupted leaf bank file {path}: {e}")
            raise

    @staticmethod
    def from_bytes(data: bytes) -> LeafBank:
        if not data.startswith(BANK_MAGIC):
            raise CacheIntegrityError("Not a leaf bank file (bad magic)")
        version, header_len = _PREFIX.unpack_from(data, len(BANK_MAGIC))
        if version != BANK_VERSION:
            raise CacheIntegrityError(f"Unsupported leaf bank version {version}")
        header_start = len(BANK_MAGIC) + _PREFIX.size
        try:
            header = json.loads(data[header_start : header_start + header_len])
        except ValueError as e:
            raise CacheIntegrityError(f"Unreadable leaf bank header: {e}") from e

        params = ParamsReader.from_bytes(data[header_start + header_len :])
        bank = LeafBank(
            params=params,
            vocab=ConceptVocab.from_names(header["vocab"]),
            temperature=float(header["temperature"]),
            degenerate=tuple(header.get("degenerate", ())),
        )
        if fingerprint(bank) != header["fingerprint"]:
            raise CacheIntegrityError("Leaf bank fingerprint does not match its encoder")
        return bank
