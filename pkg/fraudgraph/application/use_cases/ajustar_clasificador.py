import logging
from pathlib import Path

import numpy as np
import pandas as pd

from fraudgraph.config.settings import PipelineConfig
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import CSRGraph, SingleEntityGraph
from fraudgraph.domain.entities.labeled_set import LabeledSet
from fraudgraph.domain.nn.classifier import FineTuneModel, finetune_fit, load_pretrained_encoder, predict
from fraudgraph.domain.nn.layers import seeded_init
from fraudgraph.domain.ports.graph_store_port import GraphStorePort

logger = logging.getLogger(__name__)


def finetune_classifier(
    graph: CSRGraph,
    features: FeatureMatrix,
    train: LabeledSet,
    cfg: PipelineConfig,
    seed: int,
    encoder_state: dict | None = None,
    mode: str | None = None,
) -> FineTuneModel:
    """
    Construye el modelo (semilla `seed`), carga theta_q si se da y ajusta.

    Raises:
        ConfigError: conjunto de entrenamiento vacio o de una sola clase
        ShapeError: checkpoint de otras dimensiones
    """
    pt, ft = cfg.pretrain, cfg.finetune
    with seeded_init(seed):
        model = FineTuneModel.create(
            features.dim, graph.edge_dim, pt.hidden_dim, pt.output_dim, pt.num_layers,
            ft.embed_dim, ft.head_hidden, ft.readout,
        )
    if encoder_state is not None:
        load_pretrained_encoder(model, encoder_state)
    ft_cfg = ft if mode is None else ft.model_copy(update={"mode": mode})
    return finetune_fit(model, graph, features, train, ft_cfg, cfg.sampler_for(seed), seed)


def predictions_frame(graph: CSRGraph, nodes: np.ndarray, labels: np.ndarray, probs: np.ndarray) -> pd.DataFrame:
    """node_id en el espacio de ids de entrada (multi-entidad para G_s)."""
    ids = graph.origin_ids[nodes] if isinstance(graph, SingleEntityGraph) else nodes
    return pd.DataFrame({"node_id": ids, "label": labels, "p_fraud": probs[:, 1]})


class AjustarClasificadorUseCase:
    """
    Caso de Uso: ajuste fino supervisado + prediccion.

    FLUJO:
    1. Crear el modelo (codificador con aristas, proyeccion, head)
    2. Cargar el codificador pre-entrenado si hay checkpoint
    3. Entrenar con entropia cruzada sobre las etiquetas
    4. Guardar el modelo y predecir todos los nodos objetivo
    """

    def __init__(self, store: GraphStorePort):
        self.store = store

    def ejecutar(
        self,
        graph: CSRGraph,
        features: FeatureMatrix,
        labeled: LabeledSet,
        cfg: PipelineConfig,
        model_path: Path,
        encoder_checkpoint: Path | None = None,
    ) -> tuple[FineTuneModel, pd.DataFrame]:
        encoder_state = None
        if encoder_checkpoint is not None:
            encoder_state = self.store.load_checkpoint(encoder_checkpoint, "encoder")["state_dict"]
        model = finetune_classifier(graph, features, labeled, cfg, cfg.seed, encoder_state)
        self.store.save_checkpoint(
            model_path, model.state_dict(), "finetune", cfg.model_dump(mode="json"), cfg.config_hash(),
            {
                "input_dim": features.dim,
                "edge_dim": graph.edge_dim,
                "pretrained": encoder_state is not None,
                "loss_history": model.loss_history,
            },
        )
        nodes = np.arange(graph.node_count, dtype=np.int64)
        if hasattr(graph, "target_nodes"):
            nodes = graph.target_nodes
        labels, probs = predict(model, graph, features, nodes, cfg.finetune.mode, cfg.sampler_for(cfg.seed))
        logger.info("prediccion: %d nodos, %d marcados como fraude", nodes.shape[0], int(labels.sum()))
        return model, predictions_frame(graph, nodes, labels, probs)
