import logging
import path
import sys
import traceback

# directory reach
directory = path.Path(__file__).abspath()
# setting path
sys.path.append(directory.parent.parent)

from chiral.utils.db_utils import DBUtil
from chiral.config.const import DB_HISTORY_PATH, DEFAULT_LOG_LEVEL
from chiral.config.logging_config import log_handler, console_handler

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


def clear_run_history():
    answer = input(
        f"""
Are you absolutely sure you want to delete ALL recorded runs and acceptance results in
{DB_HISTORY_PATH}?

- Data files written by the runs are not touched.
- Unless you have backups, the run history will be lost.

Type 'CLEAR' to proceed.
        """
    )

    if answer == "CLEAR":
        db = DBUtil()
        db.connect_db()
        db.create_all_tables()
        removed = db.clear_history()
        logger.info("Successfully removed %d recorded run(s).", removed)
        print(f"Removed {removed} recorded run(s).")
    else:
        logger.info("Clearing was cancelled.")
        print("Cancelled, nothing was removed.")


if __name__ == "__main__":
    try:
        clear_run_history()
    except Exception as e:
        logger.error("Script crashed: %s", e, exc_info=True)
        traceback.print_exc()
        sys.exit(1)
