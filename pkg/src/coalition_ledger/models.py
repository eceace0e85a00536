"""SQLAlchemy models used for storing solve results."""

import datetime
from functools import lru_cache

from sqlalchemy import JSON, Column, DateTime, Float, Integer, String, create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from coalition_ledger.utils import get_database_url

Base = declarative_base()


class RunModel(Base):
    """
    Represents one recorded solve in the database.

    Attributes:
        id: The primary key of the run.
        date_created: The date and time when the run was recorded.
        roster: The comma-joined player names, used to group comparable runs.
        players: The player names as a JSON array.
        v_grand: The distributed value v(D).
        t1: The diminishing-returns threshold, or null for a full table.
        t2: The performance-ceiling threshold, or null for a full table.
        evaluated_count: The number of coalitions evaluated.
        e_star: The least-core optimum, when the least core was solved.
        methods: The allocation methods in the report.
        report: The full report JSON.
    """

    __tablename__ = "runs"

    id = Column(Integer, primary_key=True)
    date_created = Column(DateTime, default=datetime.datetime.now)
    roster = Column(String, nullable=False, index=True)
    players = Column(JSON, nullable=False)
    v_grand = Column(Float, nullable=False)
    t1 = Column(Float, nullable=True)
    t2 = Column(Float, nullable=True)
    evaluated_count = Column(Integer, nullable=True)
    e_star = Column(Float, nullable=True)
    methods = Column(JSON, nullable=False)
    report = Column(JSON, nullable=False)


@lru_cache(maxsize=None)
def _session_factory(url: str) -> sessionmaker:
    engine = create_engine(url)
    Base.metadata.create_all(engine)
    return sessionmaker(bind=engine)


def get_session_factory(url: str | None = None) -> sessionmaker:
    """
    Return a session factory bound to the run-history database.

    Args:
        url: SQLAlchemy database URL; read from the environment when omitted.

    Returns:
        A sessionmaker whose engine has the schema created.
    """
    return _session_factory(url or get_database_url())
