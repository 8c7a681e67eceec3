from contextlib import contextmanager
from typing import Iterator, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

from .config import settings
from .models import Base

settings.create_directories()

# Ledger engine on DATABASE_URL (a sqlite file inside OUTPUT_DIR by default)
engine = create_engine(
    settings.DATABASE_URL,
    connect_args={"check_same_thread": False}
)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


def init_database(bind: Optional[Engine] = None):
    """Create any missing ledger tables"""
    Base.metadata.create_all(bind=bind or engine)


@contextmanager
def get_db() -> Iterator[Session]:
    """Session on the configured ledger, tables ensured, closed on exit"""
    init_database()
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def make_session(url: str = "sqlite://") -> Session:
    """Session on a separate ledger (in-memory by default), tables created"""
    other = create_engine(url, connect_args={"check_same_thread": False})
    init_database(other)
    return sessionmaker(autocommit=False, autoflush=False, bind=other)()


def reset_database(bind: Optional[Engine] = None):
    """Drop and recreate every ledger table - USE WITH CAUTION"""
    target = bind or engine
    Base.metadata.drop_all(bind=target)
    Base.metadata.create_all(bind=target)
