import json
import logging

from fraudgraph.application.layout import OutputLayout
from fraudgraph.config.settings import PipelineConfig
from fraudgraph.domain.entities.graph import MultiEntityGraph, SingleEntityGraph
from fraudgraph.domain.entities.stats import TransformStats, TransformSummary
from fraudgraph.domain.exceptions import ConfigError
from fraudgraph.domain.ports.graph_store_port import GraphStorePort
from fraudgraph.domain.services.transform_service import compare_stats, transform_to_single_entity

logger = logging.getLogger(__name__)


def load_multi_graph(store: GraphStorePort, cfg: PipelineConfig) -> MultiEntityGraph:
    """Grafo multi-entidad de `paths.graph`/`paths.types` o del directorio de salida."""
    layout = OutputLayout.from_config(cfg)
    edges = layout.resolve(cfg.paths.graph, layout.edges)
    types = layout.resolve(cfg.paths.types, layout.types)
    return store.load_multi(edges, types, cfg.transform.target_type)


class TransformarGrafoUseCase:
    """
    Caso de Uso: multi-entidad -> una sola entidad.

    FLUJO:
    1. Cargar el grafo multi-entidad
    2. Transformar con el umbral de hub configurado
    3. Guardar G_s (.npz) y el resumen (hubs excluidos, razones de compresion)

    Ejemplo:
        single, summary, stats = TransformarGrafoUseCase(FileGraphStore()).ejecutar(cfg)
        print(stats.edge_ratio)
    """

    def __init__(self, store: GraphStorePort):
        self.store = store

    def ejecutar(self, cfg: PipelineConfig, multi: MultiEntityGraph | None = None):
        layout = OutputLayout.from_config(cfg)
        multi = multi if multi is not None else load_multi_graph(self.store, cfg)
        if multi.target_type != cfg.transform.target_type:
            raise ConfigError(
                f"transform.target_type={cfg.transform.target_type!r} pero el grafo "
                f"tiene objetivo {multi.target_type!r}"
            )
        single, summary = transform_to_single_entity(
            multi, cfg.transform.hub_threshold, cfg.transform.record_counts
        )
        stats = compare_stats(multi, single)
        h = cfg.config_hash()
        out = layout.resolve(cfg.paths.single_graph, layout.single_graph)
        self.store.save_single(single, out, h)
        write_summary(layout, summary, stats, h)
        return single, summary, stats


def write_summary(layout: OutputLayout, summary: TransformSummary, stats: TransformStats, config_hash: str):
    layout.root.mkdir(parents=True, exist_ok=True)
    payload = {
        "config_hash": config_hash,
        "summary": summary.model_dump(mode="json"),
        "stats": stats.model_dump(mode="json"),
    }
    layout.transform_summary.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                                        encoding="utf-8")
    logger.info(
        "resumen: razon de nodos %s, razon de aristas %s, %d hubs excluidos",
        stats.node_ratio, stats.edge_ratio, len(summary.excluded_hubs),
    )


def load_single_graph(store: GraphStorePort, cfg: PipelineConfig) -> SingleEntityGraph:
    layout = OutputLayout.from_config(cfg)
    return store.load_single(layout.resolve(cfg.paths.single_graph, layout.single_graph))
