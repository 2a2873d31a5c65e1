import time
import logging
import functools
from contextlib import contextmanager

from chiral.config.const import DEFAULT_LOG_LEVEL
from chiral.config.logging_config import log_handler, console_handler

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


@contextmanager
def timed(label):
    """
    Logs the wall-clock time spent inside the block under `label`. Quadrature-heavy evaluators
    (oracles, two-photon outputs on fine grids) are the usual targets.
    """
    logger.debug("Timing %s...", label)
    start = time.perf_counter()
    try:
        yield
    finally:
        logger.info("%s took %.6f s", label, time.perf_counter() - start)


def measure_time(func):
    """
    Decorator form of `timed`, labelled with the function's qualified name.
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with timed(func.__qualname__):
            return func(*args, **kwargs)

    return wrapper
