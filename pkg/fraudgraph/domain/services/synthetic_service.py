import logging
from dataclasses import dataclass

import numpy as np

from fraudgraph.config.settings import SynthConfig
from fraudgraph.domain.entities.graph import MultiEntityGraph
from fraudgraph.domain.entities.labeled_set import BENIGN, FRAUD, LabeledSet
from fraudgraph.domain.exceptions import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SyntheticDataset:
    """
    Salida del generador.

    Campos:
        graph: grafo multi-entidad; los usuarios son los nodos 0..n_users-1
        labeled: subconjunto etiquetado expuesto al entrenamiento
        truth: etiqueta real de todos los usuarios
        rings: (ring_count, ring_size) ids de usuario por anillo
    """

    graph: MultiEntityGraph
    labeled: LabeledSet
    truth: LabeledSet
    rings: np.ndarray


def _sample_labeled(truth: LabeledSet, cfg: SynthConfig, rng: np.random.Generator) -> LabeledSet:
    fraud = truth.nodes[truth.labels == FRAUD]
    benign = truth.nodes[truth.labels == BENIGN]
    total = max(int(round(cfg.label_fraction * len(truth))), 1)
    ratio = cfg.labeled_fraud_ratio
    if ratio is None:
        ratio = fraud.size / max(len(truth), 1)
    n_fraud = min(int(round(total * ratio)), fraud.size)
    n_benign = min(total - n_fraud, benign.size)
    if fraud.size and n_fraud == 0:
        n_fraud = 1
    if benign.size and n_benign == 0:
        n_benign = 1
    nodes = np.concatenate([
        rng.choice(fraud, size=n_fraud, replace=False),
        rng.choice(benign, size=n_benign, replace=False),
    ])
    labels = np.concatenate([np.full(n_fraud, FRAUD), np.full(n_benign, BENIGN)])
    order = np.argsort(nodes)
    return LabeledSet(nodes[order], labels[order])


def generate_synthetic(cfg: SynthConfig) -> SyntheticDataset:
    """
    Genera un grafo multi-entidad con anillos de fraude plantados.

    FLUJO:
    1. Repartir ring_count * ring_size usuarios al azar en anillos
    2. Por cada tipo no objetivo y cada usuario:
       - miembro de anillo: con prob. share_rate_fraud toma una entidad del
         pool de su anillo (ring_pool_size entidades), si no una propia
       - benigno: con prob. share_rate_benign toma una del pool global
         (benign_pool_size entidades), si no una propia
    3. Compactar ids: solo existen las entidades que alguien usa
    4. Etiquetas reales = pertenencia a un anillo; exponer label_fraction

    Raises:
        ConfigError: si los anillos no caben en n_users
    """
    fraud_total = cfg.ring_count * cfg.ring_size
    if fraud_total > cfg.n_users:
        raise ConfigError(
            f"ring_count * ring_size = {fraud_total} excede n_users = {cfg.n_users}"
        )
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_users
    rings = rng.permutation(n)[:fraud_total].reshape(cfg.ring_count, cfg.ring_size)
    ring_of = np.full(n, -1, dtype=np.int64)
    for r, members in enumerate(rings):
        ring_of[members] = r
    is_fraud = ring_of >= 0

    ring_block = cfg.ring_count * cfg.ring_pool_size
    src, ent, ent_type = [], [], []
    next_id = 0
    for t, _name in enumerate(cfg.non_target_types, start=1):
        share = np.where(is_fraud, rng.random(n) < cfg.share_rate_fraud,
                         rng.random(n) < cfg.share_rate_benign)
        pick_ring = rng.integers(cfg.ring_pool_size, size=n)
        pick_benign = rng.integers(cfg.benign_pool_size, size=n)
        # espacio virtual: [pools de anillo | pool benigno | entidades propias]
        virtual = np.where(
            is_fraud,
            ring_of * cfg.ring_pool_size + pick_ring,
            ring_block + pick_benign,
        )
        own = ring_block + cfg.benign_pool_size + np.arange(n)
        virtual = np.where(share, virtual, own)
        used, local = np.unique(virtual, return_inverse=True)
        src.append(np.arange(n, dtype=np.int64))
        ent.append(n + next_id + local)
        ent_type.append(np.full(used.size, t, dtype=np.int64))
        next_id += used.size

    node_type = np.concatenate([np.zeros(n, dtype=np.int64)] + ent_type)
    graph = MultiEntityGraph.from_edges(
        node_type,
        [cfg.target_type, *cfg.non_target_types],
        0,
        np.concatenate(src),
        np.concatenate(ent),
    )
    truth = LabeledSet(np.arange(n), is_fraud.astype(np.int64))
    labeled = _sample_labeled(truth, cfg, rng)
    logger.info(
        "sintetico: %d usuarios (%d en anillos), %d entidades, %d aristas, %d etiquetados",
        n, fraud_total, next_id, graph.edge_count, len(labeled),
    )
    return SyntheticDataset(graph, labeled, truth, rings)
