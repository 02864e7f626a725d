import copy
import logging
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from fraudgraph.config.settings import SamplerConfig
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import CSRGraph
from fraudgraph.domain.exceptions import ConfigError, ShapeError
from fraudgraph.domain.nn.autograd import backward, build_optimizer, opt_step
from fraudgraph.domain.nn.batch import DTYPE, SubGraphBatch
from fraudgraph.domain.nn.layers import Encoder
from fraudgraph.domain.services.sampling_service import SubgraphSampler

logger = logging.getLogger(__name__)


class KeyQueue:
    """
    Cola FIFO de llaves con capacidad K (buffer circular).

    Ejemplo:
        cola = KeyQueue(capacity=1, dim=2)
        cola.push(a); cola.push(b)
        cola.contents()   # solo b
    """

    def __init__(self, capacity: int, dim: int):
        if capacity < 1:
            raise ConfigError("la capacidad de la cola debe ser >= 1")
        self.capacity = capacity
        self.dim = dim
        self.buffer = torch.zeros((capacity, dim), dtype=DTYPE)
        self.ptr = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def push(self, keys: torch.Tensor) -> None:
        keys = keys.detach().reshape(-1, self.dim)
        b = keys.shape[0]
        if b > self.capacity:
            raise ConfigError(f"lote de {b} llaves excede la capacidad {self.capacity}")
        idx = (self.ptr + torch.arange(b)) % self.capacity
        self.buffer[idx] = keys.to(DTYPE)
        self.ptr = (self.ptr + b) % self.capacity
        self.size = min(self.size + b, self.capacity)

    def contents(self) -> torch.Tensor:
        """Llaves de la mas vieja a la mas nueva."""
        if self.size < self.capacity:
            return self.buffer[: self.size].clone()
        idx = (self.ptr + torch.arange(self.capacity)) % self.capacity
        return self.buffer[idx].clone()


@dataclass
class MoCoState:
    """
    Estado del entrenamiento con contraste por momento.

    Campos:
        encoder_q: codificador de consultas (recibe gradientes)
        encoder_k: copia con promedio movil, sin gradientes
        queue: llaves pasadas usadas como negativos
        m: momento en [0, 1)
        tau: temperatura > 0
    """

    encoder_q: Encoder
    encoder_k: Encoder
    queue: KeyQueue
    m: float
    tau: float
    optimizer: torch.optim.Optimizer | None = None
    step: int = 0
    history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.m < 1.0:
            raise ConfigError("el momento debe estar en [0, 1)")
        if self.tau <= 0:
            raise ConfigError("la temperatura debe ser > 0")
        shapes_q = [p.shape for p in self.encoder_q.parameters()]
        shapes_k = [p.shape for p in self.encoder_k.parameters()]
        if shapes_q != shapes_k:
            raise ShapeError("theta_q y theta_k no son congruentes")
        if self.queue.dim != self.encoder_q.output_dim:
            raise ShapeError("la cola no tiene la dimension de salida del codificador")

    @classmethod
    def create(cls, encoder_q: Encoder, queue_size: int, m: float, tau: float) -> "MoCoState":
        """theta_k arranca como copia exacta de theta_q."""
        encoder_k = copy.deepcopy(encoder_q)
        for p in encoder_k.parameters():
            p.requires_grad_(False)
        return cls(encoder_q, encoder_k, KeyQueue(queue_size, encoder_q.output_dim), m, tau)


def info_nce(e_q: torch.Tensor, e_k: torch.Tensor, negatives, tau: float) -> torch.Tensor:
    """
    -log( exp(q.k / tau) / sum_i exp(q.e_i / tau) ) con el denominador sobre
    la llave positiva y los negativos. Los vectores se normalizan en L2.
    """
    if tau <= 0:
        raise ConfigError("la temperatura debe ser > 0")
    q = F.normalize(e_q.reshape(-1), dim=0)
    k = F.normalize(e_k.reshape(-1), dim=0)
    if isinstance(negatives, torch.Tensor):
        negs = negatives.reshape(-1, q.shape[0])
    elif len(negatives):
        negs = torch.stack([torch.as_tensor(n, dtype=q.dtype).reshape(-1) for n in negatives])
    else:
        negs = torch.zeros((0, q.shape[0]), dtype=q.dtype)
    negs = F.normalize(negs, dim=1)
    logits = torch.cat([(q * k).sum().reshape(1), negs @ q]) / tau
    return -torch.log_softmax(logits, dim=0)[0]


def info_nce_batch(q: torch.Tensor, k: torch.Tensor, queue: torch.Tensor, tau: float) -> torch.Tensor:
    """
    InfoNCE promedio de un lote.

    Para la consulta i la llave positiva es k_i; las llaves de las demas
    anclas del lote y las de la cola son negativos.
    """
    if tau <= 0:
        raise ConfigError("la temperatura debe ser > 0")
    q = F.normalize(q, dim=1)
    k = F.normalize(k, dim=1)
    logits = q @ k.T
    if queue.shape[0]:
        logits = torch.cat([logits, q @ queue.T], dim=1)
    target = torch.arange(q.shape[0])
    return F.cross_entropy(logits / tau, target)


@torch.no_grad()
def momentum_update(state: MoCoState) -> MoCoState:
    """theta_k <- m theta_k + (1 - m) theta_q, parametro por parametro."""
    for p_q, p_k in zip(state.encoder_q.parameters(), state.encoder_k.parameters()):
        p_k.mul_(state.m).add_(p_q, alpha=1.0 - state.m)
    return state


def queue_push(state: MoCoState, keys: torch.Tensor) -> MoCoState:
    """
    Encola las claves del paso y descarta las mas viejas si se llena.

    Args:
        state: estado de pre-entrenamiento; se modifica en el lugar
        keys: claves (B x d); se desacoplan del grafo de autograd al encolar

    Returns:
        MoCoState: el mismo estado, para encadenar con momentum_update

    Raises:
        ConfigError: si B excede la capacidad de la cola
    """
    state.queue.push(keys)
    return state


def pretrain_epoch(
    graph: CSRGraph,
    features: FeatureMatrix,
    anchors,
    state: MoCoState,
    sampler_cfg: SamplerConfig,
    lr: float,
    batch_size: int = 200,
    epoch: int = 0,
    mode: str = "SE",
    optimizer: str = "adam",
    sampler: SubgraphSampler | None = None,
) -> tuple[MoCoState, float]:
    """
    Una pasada de pre-entrenamiento contrastivo sobre `anchors`.

    FLUJO por lote:
    1. Muestrear un par positivo por ancla
    2. Consultas con theta_q; llaves con theta_k sin gradiente
    3. Minimizar InfoNCE sobre theta_q (negativos: lote + cola)
    4. Actualizar theta_k por momento y encolar las llaves

    Returns:
        (estado actualizado, perdida media de la epoca)
    """
    features.check_rows(graph.node_count)
    sampler = sampler or SubgraphSampler(graph, sampler_cfg, features.values)
    if state.optimizer is None:
        state.optimizer = build_optimizer(state.encoder_q, optimizer, lr)
    for group in state.optimizer.param_groups:
        group["lr"] = lr

    anchors = np.asarray(anchors, dtype=np.int64)
    order = np.random.default_rng([sampler_cfg.seed, epoch]).permutation(anchors)
    losses = []
    state.encoder_q.train()
    for start in range(0, order.shape[0], batch_size):
        chunk = order[start:start + batch_size]
        pairs = sampler.contrastive_batch(chunk, step=state.step)
        q_batch = SubGraphBatch.collate([p[0] for p in pairs])
        k_batch = SubGraphBatch.collate([p[1] for p in pairs])

        q = state.encoder_q(q_batch, mode)
        with torch.no_grad():
            k = F.normalize(state.encoder_k(k_batch, mode), dim=1)
        loss = info_nce_batch(q, k, state.queue.contents(), state.tau)

        grads = backward(loss, state.encoder_q)
        opt_step(state.encoder_q, grads, state.optimizer)
        momentum_update(state)
        queue_push(state, k[-state.queue.capacity:])

        losses.append(float(loss.item()))
        state.step += 1
        logger.debug("pre-entrenamiento epoca %d lote %d: %.5f", epoch, state.step, losses[-1])

    mean_loss = float(np.mean(losses)) if losses else 0.0
    state.history.append(mean_loss)
    logger.info("pre-entrenamiento epoca %d: InfoNCE media %.5f", epoch, mean_loss)
    return state, mean_loss
