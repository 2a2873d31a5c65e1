import os
import logging
from logging.handlers import RotatingFileHandler

from chiral.config.const import CONSOLE_LOG_LEVEL, DEFAULT_LOG_LEVEL, LOG_BACKUP_COUNT, LOG_FILE_SIZE, LOG_PATH

os.makedirs(os.path.dirname(LOG_PATH), exist_ok=True)

log_handler = RotatingFileHandler(LOG_PATH, mode='a', maxBytes=LOG_FILE_SIZE, backupCount=LOG_BACKUP_COUNT)
log_handler.setLevel(DEFAULT_LOG_LEVEL)

# stderr, so that data written to stdout stays clean
console_handler = logging.StreamHandler()
console_handler.setLevel(CONSOLE_LOG_LEVEL)

formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
console_handler.setFormatter(formatter)
log_handler.setFormatter(formatter)
