from functools import lru_cache
from pathlib import Path

from sqlalchemy.engine import Engine
from sqlmodel import Session, SQLModel, create_engine

from fraudgraph.config.settings import settings


def database_url(output_dir: str | Path) -> str:
    """URL SQLite de la base de resultados dentro del directorio de salida."""
    return f"sqlite:///{Path(output_dir) / settings.results_db_name}"


@lru_cache(maxsize=None)
def get_engine(url: str) -> Engine:
    """
    Un engine por URL.

    El eco de SQL se enciende solo cuando el nivel de log es DEBUG.
    """
    return create_engine(url, echo=settings.log_level.upper() == "DEBUG")


def create_db_and_tables(engine: Engine) -> None:
    """
    Crea las tablas `runs` y `cell_scores` si no existen.

    Ejemplo:
        engine = get_engine(database_url("out"))
        create_db_and_tables(engine)
    """
    from fraudgraph.infrastructure.db import models  # noqa: F401  registra las tablas

    SQLModel.metadata.create_all(engine)


def get_session(engine: Engine):
    """
    Generador de sesiones; la sesion se cierra al salir.

    Ejemplo:
        for session in get_session(engine):
            repo = ResultRepoSQL(session)
    """
    with Session(engine) as session:
        yield session
