from dataclasses import dataclass, field

import numpy as np

from fraudgraph.domain.exceptions import GraphValidationError, NumericError


@dataclass(frozen=True)
class FeatureMatrix:
    """
    Matriz de features de nodo X^v producida por un inicializador.

    Campos:
        values: (node_count, dim) en float64, todos finitos
        method: random / degree / pagerank / eigen
        config: parametros usados, se escriben en la cabecera del archivo
    """

    values: np.ndarray
    method: str
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] < 1:
            raise GraphValidationError("la matriz de features necesita dim > 0")
        if not np.isfinite(values).all():
            raise NumericError(f"features '{self.method}' con valores no finitos")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    def check_rows(self, node_count: int) -> "FeatureMatrix":
        if self.rows != node_count:
            raise GraphValidationError(
                f"features con {self.rows} filas para un grafo de {node_count} nodos"
            )
        return self
