from pydantic import BaseModel, ConfigDict, Field, computed_field


class CellResult(BaseModel):
    """
    Resultado de una celda de la grilla de evaluacion.

    Una celda es la combinacion {grafo} x {embedding} x {feature} x {PT}.
    Si la celda fallo, `error` guarda el mensaje y `fold_scores` queda vacio;
    la grilla sigue con las demas celdas.

    Ejemplo:
        celda = CellResult(graph="single", embedding="SE", feature="eigen",
                           pretrain=True, fold_scores=[0.8, 0.7])
        print(celda.mean)  # 0.75
    """

    model_config = ConfigDict(frozen=True)

    graph: str = Field(..., pattern="^(multi|single)$")
    embedding: str = Field(..., pattern="^(NE|SE)$")
    feature: str
    pretrain: bool
    fold_scores: list[float] = Field(default_factory=list)
    error: str | None = None

    @computed_field
    @property
    def mean(self) -> float | None:
        if not self.fold_scores:
            return None
        return sum(self.fold_scores) / len(self.fold_scores)

    @property
    def key(self) -> tuple[str, str, str, bool]:
        return (self.graph, self.embedding, self.feature, self.pretrain)


class ExperimentResult(BaseModel):
    """
    Grilla completa: puntajes por fold y media de cada celda, mas el eco de
    la configuracion que la produjo.

    REGLAS:
    - Todos los puntajes estan en [0, 1]
    - Las celdas se guardan en el orden de la grilla (determinista)
    """

    seed: int
    config_hash: str
    config: dict
    folds: int
    cells: list[CellResult] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    def cell(self, graph: str, embedding: str, feature: str, pretrain: bool) -> CellResult | None:
        for c in self.cells:
            if c.key == (graph, embedding, feature, pretrain):
                return c
        return None

    def best(self, graph: str) -> CellResult | None:
        scored = [c for c in self.cells if c.graph == graph and c.mean is not None]
        return max(scored, key=lambda c: c.mean, default=None)
