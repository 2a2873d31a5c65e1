import sys
import traceback
import logging

from chiral.cli import main as cli
from chiral.config.logging_config import log_handler, console_handler
from chiral.config.const import DEFAULT_LOG_LEVEL

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


def main():
    try:
        # click exits through SystemExit with the command's exit code
        cli(obj={})
    except SystemExit:
        raise
    except Exception as e:
        logger.error("An error occurred in main(): %s", e)
        raise


if __name__ == "__main__":
    try:
        main()
    except SystemExit:
        raise
    except Exception as e:
        logger.error("Script crashed: %s", e, exc_info=True)
        traceback.print_exc()
        sys.exit(1)
