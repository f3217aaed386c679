"""
Reader for JSON configuration files.
"""

import logging
from pathlib import Path
from typing import Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from rulegate.config import DEFAULT_ENCODING

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


class ConfigReader:
    """
    Reader for pydantic configuration models stored as JSON.
    """

    @staticmethod
    def read(config_path: Union[str, Path], model: Type[ModelT]) -> ModelT:
        """
        Read and validate a configuration file.

        Args:
            config_path: JSON file.
            model: Configuration model class, e.g. SynthSpec or RunConfig.

        Returns:
            The validated model.

        Raises:
            FileNotFoundError: If the file does not exist.
            ValueError: If validation fails.
        """
        path = Path(config_path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        try:
            return model.model_validate_json(path.read_text(encoding=DEFAULT_ENCODING))
        except ValidationError as e:
            logger.error(f"Invalid {model.__name__} in {path}: {e}")
            raise ValueError(f"Invalid {model.__name__} in {path}: {e}") from e
