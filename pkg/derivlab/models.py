from datetime import datetime

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import declarative_base

Base = declarative_base()


class RunRecord(Base):
    """One CLI command execution"""
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(String, index=True)
    seed = Column(Integer)
    n = Column(Integer, nullable=True)
    samples = Column(Integer, nullable=True)
    workers = Column(Integer, default=1)
    status = Column(String, default="running")  # running, ok, invalid, gate_failed, error
    exit_code = Column(Integer, nullable=True)
    output_dir = Column(String, nullable=True)
    flags = Column(Text, nullable=True)  # JSON string of experiment flags
    started_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime, nullable=True)
    wall_time = Column(Float, nullable=True)


class GateRecord(Base):
    """Outcome of one numerical acceptance gate"""
    __tablename__ = "gates"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("runs.id"), index=True)
    name = Column(String)
    observed = Column(Float, nullable=True)
    expected = Column(Float, nullable=True)
    tolerance = Column(Float, nullable=True)
    passed = Column(Boolean, default=True)


class FailureRecord(Base):
    """Machine-readable failure of a run"""
    __tablename__ = "failures"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("runs.id"), index=True, nullable=True)
    kind = Column(String)  # usage, domain, gate, uniqueness, sampling, ...
    message = Column(Text)
    details = Column(Text, nullable=True)  # JSON string
    timestamp = Column(DateTime, default=datetime.utcnow)
