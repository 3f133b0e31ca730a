import logging

from rich.console import Console
from rich.logging import RichHandler


def get_logger(logger_name: str) -> logging.Logger:
    # https://rich.readthedocs.io/en/latest/reference/logging.html#rich.logging.RichHandler
    # Diagnostics go to stderr, data goes to stdout or files.
    rich_handler = RichHandler(
        console=Console(stderr=True),
        show_time=False,
        rich_tracebacks=False,
        show_path=True,
        tracebacks_show_locals=False,
    )
    rich_handler.setFormatter(
        logging.Formatter(
            fmt="%(message)s",
            datefmt="[%X]",
        )
    )

    _logger = logging.getLogger(logger_name)
    _logger.addHandler(rich_handler)
    _logger.setLevel(logging.INFO)
    _logger.propagate = False
    return _logger


def set_log_level(verbose: bool) -> None:
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)


logger: logging.Logger = get_logger("lotaru")
