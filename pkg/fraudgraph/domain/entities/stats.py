from pydantic import BaseModel, Field


class GraphStats(BaseModel):
    """Resumen de un grafo, con las columnas de la tabla de estadisticas del dataset."""

    kind: str
    node_count: int = 0
    edge_count: int = 0
    type_counts: dict[str, int] = Field(default_factory=dict)
    max_degree: int = 0


class TransformStats(BaseModel):
    """
    Par (multi-entidad, una entidad) con sus razones de compresion.

    node_ratio = nodos de G_m / nodos de G_s
    edge_ratio = aristas de G_m / aristas de G_s
    Las razones son None cuando el denominador es cero.
    """

    multi: GraphStats
    single: GraphStats
    node_ratio: float | None = None
    edge_ratio: float | None = None


class TransformSummary(BaseModel):
    """
    Bitacora de una transformacion multi-entidad -> una entidad.

    Las entidades excluidas por el umbral de hub se listan aqui: nunca se
    descartan en silencio.
    """

    target_type: str
    type_order: list[str]
    target_count: int
    non_target_count: int
    multi_edges: int
    single_edges: int
    hub_threshold: int | None = None
    excluded_hubs: list[int] = Field(default_factory=list)
    pairs_by_type: dict[str, int] = Field(default_factory=dict)
