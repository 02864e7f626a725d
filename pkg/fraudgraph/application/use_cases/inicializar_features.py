import logging
from pathlib import Path

from fraudgraph.application.layout import OutputLayout
from fraudgraph.application.use_cases.transformar_grafo import load_single_graph
from fraudgraph.config.settings import PipelineConfig
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import CSRGraph
from fraudgraph.domain.ports.graph_store_port import GraphStorePort
from fraudgraph.domain.services.feature_service import init_features

logger = logging.getLogger(__name__)


def load_features(store: GraphStorePort, cfg: PipelineConfig, graph: CSRGraph) -> FeatureMatrix:
    layout = OutputLayout.from_config(cfg)
    fm = store.load_features(layout.resolve(cfg.paths.features, layout.features(cfg.features.method)))
    return fm.check_rows(graph.node_count)


class InicializarFeaturesUseCase:
    """
    Caso de Uso: features de nodo X^v para el grafo de una sola entidad.

    FLUJO:
    1. Cargar G_s
    2. Aplicar el inicializador de `features.method` (random, degree, pagerank, eigen)
    3. Guardar la matriz con su cabecera (metodo, parametros, hash)
    """

    def __init__(self, store: GraphStorePort):
        self.store = store

    def ejecutar(self, cfg: PipelineConfig, graph: CSRGraph | None = None) -> tuple[FeatureMatrix, Path]:
        """
        Args:
            cfg: configuracion del pipeline
            graph: G_s ya cargado; si falta se lee de paths.single_graph

        Returns:
            (matriz de features, camino donde se guardo)
        """
        layout = OutputLayout.from_config(cfg)
        graph = graph if graph is not None else load_single_graph(self.store, cfg)
        fm = init_features(graph, cfg.features, cfg.seed)
        out = layout.resolve(cfg.paths.features, layout.features(cfg.features.method))
        self.store.save_features(fm, out, cfg.config_hash())
        return fm, out
