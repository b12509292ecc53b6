import logging
import os
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv

from config import ENV_FILE, ENV_LOADING_MODE

logger = logging.getLogger("qsext")


def load_env(env_file_path: Optional[Union[str, Path]] = None) -> bool:
    """Load QSEXT_* settings from a .env file with python-dotenv, if one exists."""
    path = Path(env_file_path or ENV_FILE)
    if not path.is_file():
        logger.debug("No env file at %s, using the process environment only", path)
        return False
    loading_mode = os.getenv(ENV_LOADING_MODE) or "override"
    if loading_mode == "no-override":
        logger.info("Loading env from %s, but not overriding existing environment variables", path)
        return load_dotenv(path, override=False)
    logger.info("Loading env from %s, which may override existing environment variables", path)
    return load_dotenv(path, override=True)
