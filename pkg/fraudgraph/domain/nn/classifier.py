import logging

import numpy as np
import torch
from torch import nn

from fraudgraph.config.settings import FinetuneConfig, SamplerConfig
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import CSRGraph
from fraudgraph.domain.entities.labeled_set import LabeledSet
from fraudgraph.domain.entities.subgraph import SubGraph
from fraudgraph.domain.exceptions import ConfigError, ShapeError
from fraudgraph.domain.nn.autograd import backward, build_optimizer, opt_step
from fraudgraph.domain.nn.batch import DTYPE, SubGraphBatch
from fraudgraph.domain.nn.layers import MLP, Encoder, readout
from fraudgraph.domain.services.sampling_service import SubgraphSampler

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-12


class FineTuneModel(nn.Module):
    """
    Codificador con aristas + proyeccion + clasificador de 2 clases.

    RESPONSABILIDAD:
    - encoder: capas GIN con features de arista (opcionalmente desde un
      checkpoint de pre-entrenamiento)
    - projection: lleva la salida del codificador (16) a la dim de ajuste fino (32)
    - head: MLP que produce 2 logits (0 = benigno, 1 = fraude)

    El orden es: embeddings de nodo -> proyeccion -> NE/SE -> head.
    """

    def __init__(self, encoder: Encoder, embed_dim: int = 32, head_hidden: int = 32):
        super().__init__()
        if not encoder.edge_aware:
            raise ShapeError("el ajuste fino necesita un codificador con features de arista")
        self.encoder = encoder
        self.projection = nn.Linear(encoder.output_dim, embed_dim, dtype=DTYPE)
        self.head = MLP(embed_dim, head_hidden, 2)
        self.loss_history: list[float] = []

    @classmethod
    def create(
        cls,
        input_dim: int,
        edge_dim: int,
        hidden_dim: int = 16,
        output_dim: int = 16,
        num_layers: int = 3,
        embed_dim: int = 32,
        head_hidden: int = 32,
        readout: str = "sum",
    ) -> "FineTuneModel":
        encoder = Encoder(input_dim, hidden_dim, output_dim, num_layers, edge_dim, readout)
        return cls(encoder, embed_dim, head_hidden)

    def embed(self, batch: SubGraphBatch, mode: str = "SE") -> torch.Tensor:
        h = self.projection(self.encoder.node_embeddings(batch))
        if mode == "NE":
            return h[batch.anchor_pos]
        return readout(h, batch.graph_index, batch.num_graphs, self.encoder.readout_mode)

    def forward(self, batch: SubGraphBatch, mode: str = "SE") -> torch.Tensor:
        """Logits (num_graphs, 2)."""
        return self.head(self.embed(batch, mode))


def load_pretrained_encoder(model: FineTuneModel, state_dict: dict) -> FineTuneModel:
    """
    Copia theta_q pre-entrenado al codificador del modelo.

    El pre-entrenamiento no usa features de arista, asi que las proyecciones
    de arista quedan con su inicializacion; cualquier otra clave faltante o
    sobrante es un error.
    """
    try:
        result = model.encoder.load_state_dict(state_dict, strict=False)
    except RuntimeError as exc:
        raise ShapeError(f"checkpoint incompatible con el codificador: {exc}") from exc
    faltantes = [k for k in result.missing_keys if ".edge_proj." not in k]
    if faltantes or result.unexpected_keys:
        raise ShapeError(
            "checkpoint incompatible con el codificador: "
            f"faltan {faltantes}, sobran {list(result.unexpected_keys)}"
        )
    logger.info("codificador inicializado desde pre-entrenamiento (%d tensores)", len(state_dict))
    return model


def classify_forward(model: FineTuneModel, sub: SubGraph, mode: str = "SE") -> torch.Tensor:
    """Probabilidades [p_benigno, p_fraude] de un sub-grafo."""
    return torch.softmax(model(SubGraphBatch.collate([sub]), mode), dim=-1)[0]


def cross_entropy(probs: torch.Tensor, labels) -> torch.Tensor:
    """
    -sum log p(label) sobre el lote; log acotado en 1e-12.

    Ejemplo:
        cross_entropy(torch.tensor([[0.1, 0.9], [0.75, 0.25]]), [1, 1])  # 1.4917
    """
    probs = probs.reshape(-1, 2)
    labels = torch.as_tensor(labels, dtype=torch.long).reshape(-1)
    picked = probs.gather(1, labels.unsqueeze(1)).squeeze(1)
    return -torch.log(picked.clamp_min(LOG_FLOOR)).sum()


def _sampler(graph: CSRGraph, features: FeatureMatrix, sampler_cfg: SamplerConfig) -> SubgraphSampler:
    features.check_rows(graph.node_count)
    return SubgraphSampler(graph, sampler_cfg, features.values)


def finetune_fit(
    model: FineTuneModel,
    graph: CSRGraph,
    features: FeatureMatrix,
    labeled: LabeledSet,
    cfg: FinetuneConfig,
    sampler_cfg: SamplerConfig,
    seed: int = 0,
) -> FineTuneModel:
    """
    Entrena codificador, proyeccion y head con entropia cruzada.

    FLUJO:
    1. Validar que el conjunto tenga ambas clases
    2. Por epoca: permutar (semilla [seed, epoca]) y recorrer en lotes
    3. Un sub-grafo por nodo: nuevo en cada epoca (resample) o fijo
    4. Perdida sumada del lote -> gradientes -> paso del optimizador

    Raises:
        ConfigError: conjunto vacio o de una sola clase
    """
    if len(labeled) == 0:
        raise ConfigError("el conjunto de entrenamiento esta vacio")
    if not labeled.has_both_classes():
        raise ConfigError("el conjunto de entrenamiento tiene una sola clase")
    labeled.validate_against(graph.node_count)

    sampler = _sampler(graph, features, sampler_cfg)
    optimizer = build_optimizer(model, cfg.optimizer, cfg.lr)
    label_of = labeled.label_of()
    model.train()
    model.loss_history = []

    for epoch in range(cfg.epochs):
        order = np.random.default_rng([seed, epoch]).permutation(labeled.nodes)
        step = epoch if cfg.resample else 0
        total = 0.0
        for start in range(0, order.shape[0], cfg.batch_size):
            chunk = order[start:start + cfg.batch_size]
            batch = SubGraphBatch.collate([sampler.single(int(u), step) for u in chunk])
            probs = torch.softmax(model(batch, cfg.mode), dim=-1)
            loss = cross_entropy(probs, [label_of[int(u)] for u in chunk])
            opt_step(model, backward(loss, model), optimizer)
            total += float(loss.item())
        model.loss_history.append(total)
        logger.info("ajuste fino epoca %d: entropia cruzada %.5f", epoch, total)
    return model


@torch.no_grad()
def predict(
    model: FineTuneModel,
    graph: CSRGraph,
    features: FeatureMatrix,
    nodes,
    mode: str,
    sampler_cfg: SamplerConfig,
    batch_size: int = 256,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Etiqueta por argmax (empates -> clase 0) y probabilidades por nodo.

    Returns:
        (labels (n,), probs (n, 2))
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    sampler = _sampler(graph, features, sampler_cfg)
    model.eval()
    probs = np.zeros((nodes.shape[0], 2), dtype=np.float64)
    for start in range(0, nodes.shape[0], batch_size):
        chunk = nodes[start:start + batch_size]
        batch = SubGraphBatch.collate([sampler.single(int(u)) for u in chunk])
        probs[start:start + chunk.shape[0]] = torch.softmax(model(batch, mode), dim=-1).numpy()
    labels = np.argmax(probs, axis=1).astype(np.int64)
    return labels, probs


@torch.no_grad()
def embed_nodes(
    model: nn.Module,
    graph: CSRGraph,
    features: FeatureMatrix,
    nodes,
    mode: str,
    sampler_cfg: SamplerConfig,
    batch_size: int = 256,
) -> np.ndarray:
    """Embeddings NE/SE de `nodes` con un Encoder o un FineTuneModel."""
    nodes = np.asarray(nodes, dtype=np.int64)
    sampler = _sampler(graph, features, sampler_cfg)
    model.eval()
    filas = []
    for start in range(0, nodes.shape[0], batch_size):
        batch = SubGraphBatch.collate([sampler.single(int(u)) for u in nodes[start:start + batch_size]])
        emb = model.embed(batch, mode) if isinstance(model, FineTuneModel) else model(batch, mode)
        filas.append(emb.numpy())
    width = model.projection.out_features if isinstance(model, FineTuneModel) else model.output_dim
    return np.concatenate(filas) if filas else np.zeros((0, width))
