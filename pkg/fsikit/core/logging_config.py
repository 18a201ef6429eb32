"""Console logging setup for the command line."""
import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

from fsikit.core.config import settings


def configure_logging(level: Optional[str] = None) -> None:
    """Attach a rich handler to the root logger; library modules only create loggers."""
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
        force=True,
    )
