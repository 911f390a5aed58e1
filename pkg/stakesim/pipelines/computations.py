import logging
from typing import Dict, List, Optional
from sqlalchemy import Column, Integer
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from abc import ABC, abstractmethod
from time import time
import dask as da
from . import SqlBase

logger = logging.getLogger(__name__)

_MODELS = {}


def comp_sql_model_creator(comp_name: str, results_attr: Dict[str, Column]):
    """Method to dynamically make SQLAlchemy models for each computation to store their results. Models
    are made once per table name and reused afterwards."""
    if comp_name in _MODELS:
        return _MODELS[comp_name]
    attr_dict = {
        "__tablename__": comp_name,
        "id": Column(Integer, primary_key=True),
        "__table_args__": {'extend_existing': True}
    }
    attr_dict.update(results_attr)
    _MODELS[comp_name] = type(comp_name, (SqlBase, ), attr_dict)
    return _MODELS[comp_name]


class Computation (ABC):

    """Abstract computation object. Result rows are kept on the object (results) after execution
    and stored in the session as rows of the computation's table."""

    tablename = "computation"
    name = "computation"
    __results_columns__ = {}

    def __init__(self):
        self.successful = False
        self.results = []
        if self.tablename:
            self.sql_model = comp_sql_model_creator(self.tablename, self.__results_columns__)

    @abstractmethod
    def execute(self, db_session) -> List[dict]:
        """Method to execute the computation.
        ARGS:
            - db_session: session of SQL database with previous computation results
        RETURNS:
            list of result rows, one dict per row with the table's columns"""
        pass

    def post_execution(self, db_session):
        """Method to run after computation is done"""
        pass

    def pre_execution(self, db_session):
        """Method to run before a computation is ran"""
        pass

    def _execute(self, db_session):
        """Internal method to execute a computation"""
        self.pre_execution(db_session)
        self.results = self.execute(db_session)
        self.post_execution(db_session)
        # updating db with new results
        if len(self.results) > 0:
            columns = set(self.__results_columns__)
            db_session.add_all([self.sql_model(**{k: v for k, v in d.items() if k in columns}) for d in self.results])
            db_session.commit()
        self.successful = True


class DaskComputation (Computation):

    """Computation made of independent dask tasks. Results come back in task order whatever the
    scheduler.
    ARGS:
        - scheduler (str): dask scheduler name (threads, processes, sync)"""

    tablename = "dask_computation"

    def __init__(self, scheduler: str = "threads"):
        self.scheduler = scheduler
        super().__init__()

    @abstractmethod
    def make_futures(self, db_session) -> list:
        """Method to make delayed objects to be executed by dask"""
        pass

    def execute(self, db_session) -> List[dict]:
        futures = self.make_futures(db_session)
        return list(da.compute(*futures, scheduler=self.scheduler))


def make_session(db_path: Optional[str] = None, db_engine=None):
    """Opens a session on a SQLite file (in-memory when no path is given) with all result tables created"""
    engine = db_engine if db_engine is not None else create_engine("sqlite:///{}".format(db_path) if db_path else "sqlite://")
    SqlBase.metadata.create_all(engine)
    return sessionmaker(bind=engine)()


def run_computations(computations: List[Computation], db_path: Optional[str]=None, db_engine=None, db_session=None, verbose: int=1):
    """Method to execute multiple computations consecutively, and save results to a database file"""
    if not db_engine and not db_path and not db_session:
        raise ValueError("Must provide a value for either db_engine or db_path or db_session")
    session = db_session if db_session is not None else make_session(db_path, db_engine)
    for comp in computations:
        if verbose > 0:
            logger.info("Running {}".format(comp.name))
        t1 = time()
        comp._execute(session)
        t2 = time()
        if verbose > 0:
            logger.info("{} done in {} seconds".format(comp.name, round(t2 - t1, 3)))
    return session
