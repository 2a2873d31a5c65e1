from sqlalchemy.orm import declarative_base, relationship
from sqlalchemy import (
    Column,
    Integer,
    String,
    Boolean,
    DateTime,
    ForeignKey,
    Float,
    Text,
    Index,
)

from chiral.config.const import RUNS_TABLE_NAME, CRITERIA_TABLE_NAME

Base = declarative_base()


class RunRecord(Base):
    __tablename__ = RUNS_TABLE_NAME

    id = Column(Integer, primary_key=True)
    # One of the CLI commands (single, two, disorder, sweep, validate, spectrum)
    command = Column(String, nullable=False)
    # Every parameter of the run as a JSON object, in units of kappa
    parameters = Column(Text)
    # Text, seeds span the full unsigned 64-bit range
    seed = Column(String)
    # Path of the data file, empty when the data went to stdout
    output_path = Column(String)
    # csv, json or xlsx
    output_format = Column(String)
    # Process exit code reported by the CLI
    exit_code = Column(Integer)
    elapsed_seconds = Column(Float)
    started_at = Column(DateTime)

    """
    back_populates links both classes so that record.criteria and criterion.run stay in sync.
    "all" cascades every session operation to the criteria of a run,
    "delete-orphan" removes criteria that no longer belong to a run.
    """
    criteria = relationship("CriterionRecord", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<RunRecord(id={self.id}, command={self.command}, seed={self.seed}, output_path={self.output_path}, output_format={self.output_format}, exit_code={self.exit_code}, elapsed_seconds={self.elapsed_seconds}, started_at={self.started_at})>"


class CriterionRecord(Base):
    """
    One acceptance criterion evaluated during a validate run. run_id references the 'runs' table.
    """

    __tablename__ = CRITERIA_TABLE_NAME

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey(f"{RUNS_TABLE_NAME}.id"), nullable=False)
    name = Column(String, nullable=False)
    # Group used by --filter
    group = Column(String)
    passed = Column(Boolean)
    # Measured error or slope; NULL when the criterion raised
    measured = Column(Float)
    tolerance = Column(Float)
    detail = Column(Text)

    run = relationship("RunRecord", back_populates="criteria")

    __table_args__ = (Index("ix_criteria_run_id", "run_id"),)

    def __repr__(self):
        return f"<CriterionRecord(id={self.id}, run_id={self.run_id}, name={self.name}, group={self.group}, passed={self.passed}, measured={self.measured}, tolerance={self.tolerance})>"
