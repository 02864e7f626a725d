import logging

from fraudgraph.application.layout import OutputLayout
from fraudgraph.config.settings import PipelineConfig
from fraudgraph.domain.ports.graph_store_port import GraphStorePort
from fraudgraph.domain.services.synthetic_service import SyntheticDataset, generate_synthetic

logger = logging.getLogger(__name__)


class GenerarSinteticoUseCase:
    """
    Caso de Uso: generar un grafo multi-entidad con fraude plantado.

    FLUJO:
    1. Generar grafo, etiquetas expuestas y verdad completa (SynthConfig)
    2. Escribir aristas, tipos, etiquetas y verdad por el puerto de grafos

    La semilla del generador sale de synth.seed; la semilla global no la
    cambia, asi un mismo grafo sirve para varias corridas de evaluacion.
    """

    def __init__(self, store: GraphStorePort):
        self.store = store

    def ejecutar(self, cfg: PipelineConfig) -> tuple[SyntheticDataset, list]:
        """
        Returns:
            (dataset, [(camino, tipo de artefacto), ...])
        """
        layout = OutputLayout.from_config(cfg)
        dataset = generate_synthetic(cfg.synth)
        h = cfg.config_hash()
        self.store.save_multi(dataset.graph, layout.edges, layout.types, h)
        self.store.save_labels(dataset.labeled, layout.labels, h)
        self.store.save_labels(dataset.truth, layout.truth, h)
        logger.info("grafo sintetico escrito en %s", layout.root)
        return dataset, [
            (layout.edges, "edges"),
            (layout.types, "types"),
            (layout.labels, "labels"),
            (layout.truth, "truth"),
        ]
