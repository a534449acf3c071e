
__all__ = [
    "APP_NAME",
    "APP_VERSION",
    "APP_ORG_NAME",
    "DEFAULT_LOG_LEVEL",
    "DEFAULT_LOG_FILE",
    "LOG_ROTATION",
    "LOG_RETENTION",
    "load_app_config",
    "load_flat_config",
]

from .constants import (
    APP_NAME,
    APP_VERSION,
    APP_ORG_NAME,
    DEFAULT_LOG_LEVEL,
    DEFAULT_LOG_FILE,
    LOG_ROTATION,
    LOG_RETENTION,
)
from .settings import load_app_config, load_flat_config
