from sqlmodel import Field, SQLModel


class RunModel(SQLModel, table=True):
    """
    Tabla 'runs': una fila por corrida de la grilla.

    La configuracion completa se guarda como JSON canonico para poder
    reconstruir el ExperimentResult.
    """

    __tablename__ = "runs"

    id: int | None = Field(default=None, primary_key=True, description="run_id autoincremental")
    config_hash: str = Field(index=True, max_length=16, description="hash de PipelineConfig")
    seed: int = Field(description="semilla global de la corrida")
    folds: int = Field(ge=2)
    config_json: str = Field(description="eco de la configuracion")
    notes_json: str = Field(default="[]")


class CellScoreModel(SQLModel, table=True):
    """
    Tabla 'cell_scores': un puntaje por celda y fold.

    Una celda fallida se guarda con fold = -1, score = None y el error.
    """

    __tablename__ = "cell_scores"

    id: int | None = Field(default=None, primary_key=True)
    run_id: int = Field(foreign_key="runs.id", index=True)
    position: int = Field(ge=0, description="orden de la celda en la grilla")
    graph: str = Field(max_length=8)
    embedding: str = Field(max_length=2)
    feature: str = Field(max_length=16)
    pretrain: bool
    fold: int
    score: float | None = Field(default=None, ge=0.0, le=1.0)
    error: str | None = None
