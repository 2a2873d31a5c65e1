import atexit
import datetime
import json
import logging
import math

from sqlalchemy.orm import sessionmaker
from sqlalchemy import create_engine

from chiral.config.schemas import Base, RunRecord, CriterionRecord
from chiral.config.logging_config import log_handler, console_handler
from chiral.config.const import (
    CRITERIA_TABLE_NAME,
    DB_HISTORY_URL,
    DEFAULT_LOG_LEVEL,
    HISTORY_LIST_LIMIT,
    RUNS_TABLE_NAME,
)

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


class DBUtil:
    """
    Run history kept in a sqlite database. The engine and session are shared by every instance,
    the CLI is single-writer.
    """

    engine = None
    session = None
    url = None

    def connect_db(self, url=DB_HISTORY_URL):
        if DBUtil.engine is not None and DBUtil.url != url:
            logger.info("Switching history database: %s -> %s", DBUtil.url, url)
            self.close_db()
        if DBUtil.engine is None:
            DBUtil.engine = create_engine(url)
            DBUtil.url = url
            # run close_db once the main thread exits
            atexit.register(self.close_db)
        if DBUtil.session is None:
            DBUtil.session = sessionmaker(bind=DBUtil.engine)()

    def close_db(self):
        if DBUtil.session is not None:
            DBUtil.session.close()
            DBUtil.session = None
        if DBUtil.engine is not None:
            DBUtil.engine.dispose()
            DBUtil.engine = None
            DBUtil.url = None

    def create_all_tables(self):
        for table_name in (RUNS_TABLE_NAME, CRITERIA_TABLE_NAME):
            if not DBUtil.engine.has_table(table_name):
                Base.metadata.create_all(DBUtil.engine)
            else:
                logger.info("Table already exist: %s", table_name)

    def record_run(self, command, parameters, seed, output_path, output_format, exit_code, elapsed_seconds):
        """
        Stores one CLI run.

        :param parameters: dict of run parameters, stored as JSON (non-JSON values as strings).
        :return: the persisted RunRecord.
        """
        record = RunRecord(
            command=str(command),
            parameters=json.dumps(parameters, sort_keys=True, default=str),
            seed=None if seed is None else str(seed),
            output_path=output_path or "",
            output_format=str(output_format),
            exit_code=int(exit_code),
            elapsed_seconds=elapsed_seconds,
            started_at=datetime.datetime.now(),
        )
        try:
            DBUtil.session.add(record)
            DBUtil.session.commit()
        except Exception as e:
            DBUtil.session.rollback()
            logger.error("Failed to record run: command=%s, error=%s", command, e, exc_info=True)
            raise
        logger.info("Recorded run: id=%d, command=%s, exit_code=%d", record.id, command, exit_code)
        return record

    def record_criteria(self, run, results):
        """Attaches acceptance results (CriterionResult objects) to a recorded run."""
        for result in results:
            run.criteria.append(
                CriterionRecord(
                    name=result.name,
                    group=result.group,
                    passed=result.passed,
                    measured=None if math.isnan(result.measured) else result.measured,
                    tolerance=result.tolerance,
                    detail=result.detail,
                )
            )
        try:
            DBUtil.session.commit()
        except Exception as e:
            DBUtil.session.rollback()
            logger.error("Failed to record criteria: run_id=%s, error=%s", run.id, e, exc_info=True)
            raise

    def recent_runs(self, limit=HISTORY_LIST_LIMIT, command=None):
        query = DBUtil.session.query(RunRecord)
        if command is not None:
            query = query.filter(RunRecord.command == str(command))
        return query.order_by(RunRecord.id.desc()).limit(limit).all()

    def clear_history(self):
        """Deletes every run and, through the cascade, every criterion. Returns the number of runs removed."""
        runs = DBUtil.session.query(RunRecord).all()
        for run in runs:
            DBUtil.session.delete(run)
        DBUtil.session.commit()
        logger.info("Cleared run history: runs=%d", len(runs))
        return len(runs)
