import logging
from pathlib import Path
from typing import Callable

import numpy as np

from fraudgraph.config.settings import PipelineConfig
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import CSRGraph, MultiEntityGraph
from fraudgraph.domain.nn.layers import Encoder, seeded_init
from fraudgraph.domain.nn.moco import MoCoState, pretrain_epoch
from fraudgraph.domain.ports.graph_store_port import GraphStorePort
from fraudgraph.domain.services.sampling_service import SubgraphSampler

logger = logging.getLogger(__name__)


def pretrain_anchors(graph: CSRGraph) -> np.ndarray:
    """Todos los nodos de G_s; en el grafo multi-entidad solo los objetivo."""
    if isinstance(graph, MultiEntityGraph):
        return graph.target_nodes
    return np.arange(graph.node_count, dtype=np.int64)


def encoder_extra(encoder: Encoder) -> dict:
    return {
        "input_dim": encoder.input_dim,
        "hidden_dim": encoder.hidden_dim,
        "output_dim": encoder.output_dim,
        "num_layers": len(encoder.layers),
        "readout": encoder.readout_mode,
    }


def pretrain_encoder(
    graph: CSRGraph,
    features: FeatureMatrix,
    cfg: PipelineConfig,
    seed: int,
    mode: str | None = None,
    epochs: int | None = None,
    on_epoch: Callable[[int, MoCoState], None] | None = None,
) -> tuple[Encoder, list[float]]:
    """
    Pre-entrena theta_q con InfoNCE + momento sobre las anclas del grafo.

    Con epochs=0 devuelve el codificador recien inicializado con `seed`;
    eso hace que "sin pre-entrenamiento" y "0 epocas" coincidan.
    """
    pt = cfg.pretrain
    epochs = pt.epochs if epochs is None else epochs
    mode = mode or pt.mode
    with seeded_init(seed):
        encoder = Encoder(features.dim, pt.hidden_dim, pt.output_dim, pt.num_layers, None, pt.readout)
    if epochs == 0:
        return encoder, []

    state = MoCoState.create(encoder, pt.queue_size, pt.momentum, pt.tau)
    sampler_cfg = cfg.sampler_for(seed)
    sampler = SubgraphSampler(graph, sampler_cfg, features.values)
    anchors = pretrain_anchors(graph)
    for epoch in range(epochs):
        pretrain_epoch(
            graph, features, anchors, state, sampler_cfg, pt.lr,
            batch_size=pt.batch_size, epoch=epoch, mode=mode,
            optimizer=pt.optimizer, sampler=sampler,
        )
        if on_epoch is not None:
            on_epoch(epoch, state)
    return state.encoder_q, list(state.history)


class PreentrenarEncoderUseCase:
    """
    Caso de Uso: pre-entrenamiento auto-supervisado del codificador GIN.

    FLUJO:
    1. Inicializar theta_q (semilla global) y theta_k = theta_q
    2. Por epoca: pares positivos RWR, InfoNCE, paso sobre theta_q,
       actualizacion por momento, encolar llaves
    3. Checkpoint de theta_q + eco de configuracion al final de cada epoca

    La cola de llaves no se persiste.
    """

    def __init__(self, store: GraphStorePort):
        self.store = store

    def ejecutar(
        self,
        graph: CSRGraph,
        features: FeatureMatrix,
        cfg: PipelineConfig,
        checkpoint_path: Path,
        epoch_path: Callable[[int], Path] | None = None,
    ) -> tuple[Encoder, list[float]]:
        config = cfg.model_dump(mode="json")
        h = cfg.config_hash()

        def guardar_epoca(epoch: int, state: MoCoState) -> None:
            if epoch_path is None:
                return
            self.store.save_checkpoint(
                epoch_path(epoch), state.encoder_q.state_dict(), "encoder", config, h,
                {**encoder_extra(state.encoder_q), "epoch": epoch, "loss": state.history[-1]},
            )

        encoder, history = pretrain_encoder(graph, features, cfg, cfg.seed, on_epoch=guardar_epoca)
        self.store.save_checkpoint(
            checkpoint_path, encoder.state_dict(), "encoder", config, h,
            {**encoder_extra(encoder), "epochs": len(history), "loss_history": history},
        )
        if len(history) >= 2:
            logger.info("InfoNCE: epoca 1 %.5f -> epoca %d %.5f", history[0], len(history), history[-1])
        return encoder, history
