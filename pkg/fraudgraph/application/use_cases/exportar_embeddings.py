import logging

import numpy as np
import pandas as pd
from torch import nn

from fraudgraph.config.settings import PipelineConfig
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import CSRGraph, SingleEntityGraph
from fraudgraph.domain.entities.labeled_set import LabeledSet
from fraudgraph.domain.exceptions import ArtifactIOError, ShapeError
from fraudgraph.domain.nn.classifier import FineTuneModel, embed_nodes
from fraudgraph.domain.nn.layers import Encoder

logger = logging.getLogger(__name__)

UNKNOWN_LABEL = -1


def model_from_checkpoint(payload: dict) -> nn.Module:
    """
    Reconstruye un Encoder o un FineTuneModel desde un checkpoint.

    Las dimensiones salen de `extra` y de la configuracion guardada.
    """
    cfg = PipelineConfig.from_mapping(payload["config"])
    extra = payload.get("extra", {})
    pt, ft = cfg.pretrain, cfg.finetune
    try:
        if payload["kind"] == "encoder":
            model = Encoder(extra["input_dim"], pt.hidden_dim, pt.output_dim, pt.num_layers, None, pt.readout)
        else:
            model = FineTuneModel.create(
                extra["input_dim"], extra["edge_dim"], pt.hidden_dim, pt.output_dim,
                pt.num_layers, ft.embed_dim, ft.head_hidden, ft.readout,
            )
    except KeyError as exc:
        raise ArtifactIOError(f"checkpoint sin la dimension {exc}") from exc
    try:
        model.load_state_dict(payload["state_dict"])
    except RuntimeError as exc:
        raise ShapeError(f"pesos incompatibles con la configuracion del checkpoint: {exc}") from exc
    return model


def export_embeddings(
    model: nn.Module,
    graph: CSRGraph,
    features: FeatureMatrix,
    nodes: np.ndarray,
    mode: str,
    cfg: PipelineConfig,
    truth: LabeledSet | None = None,
) -> pd.DataFrame:
    """
    Filas node_id, label, e1..e_dim. Sin etiqueta conocida, label = -1.

    Los sub-grafos se muestrean con el paso 0 de la semilla global, asi
    re-exportar da el mismo archivo.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    emb = embed_nodes(model, graph, features, nodes, mode, cfg.sampler_for(cfg.seed))
    label_of = truth.label_of() if truth is not None else {}
    frame = pd.DataFrame({
        "node_id": graph.origin_ids[nodes] if isinstance(graph, SingleEntityGraph) else nodes,
        "label": [label_of.get(int(n), UNKNOWN_LABEL) for n in nodes],
    })
    dims = pd.DataFrame(emb, columns=[f"e{i + 1}" for i in range(emb.shape[1])])
    return pd.concat([frame, dims], axis=1)


class ExportarEmbeddingsUseCase:
    """
    Caso de Uso: exportar embeddings NE/SE para graficar fuera (t-SNE).

    `truth` debe estar en el espacio de ids de `graph`.
    """

    def ejecutar(
        self,
        model: nn.Module,
        graph: CSRGraph,
        features: FeatureMatrix,
        cfg: PipelineConfig,
        nodes: np.ndarray | None = None,
        mode: str | None = None,
        truth: LabeledSet | None = None,
    ) -> pd.DataFrame:
        if nodes is None:
            nodes = getattr(graph, "target_nodes", np.arange(graph.node_count, dtype=np.int64))
        mode = mode or cfg.finetune.mode
        frame = export_embeddings(model, graph, features, nodes, mode, cfg, truth)
        logger.info("embeddings %s exportados: %d filas x %d dims", mode, len(frame), frame.shape[1] - 2)
        return frame
