import logging
from functools import lru_cache

import numpy as np

from fraudgraph.config.settings import SamplerConfig
from fraudgraph.domain.entities.graph import CSRGraph
from fraudgraph.domain.entities.subgraph import SubGraph
from fraudgraph.domain.exceptions import DistinctnessError, GraphValidationError

logger = logging.getLogger(__name__)

EGO_CACHE_SIZE = 4096


def ego_network(g: CSRGraph, u: int, r: int) -> np.ndarray:
    """
    Nodos a distancia <= r de u (BFS), en orden ascendente.

    Ejemplo:
        camino a-b-c-d-e, u=a, r=2  ->  [a, b, c]
    """
    if not 0 <= u < g.node_count:
        raise GraphValidationError(f"nodo {u} fuera de rango")
    seen = {int(u)}
    frontier = [int(u)]
    for _ in range(r):
        nxt = []
        for v in frontier:
            for w in g.neighbors(v):
                w = int(w)
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return np.array(sorted(seen), dtype=np.int64)


class SubgraphSampler:
    """
    Muestreador de sub-grafos por caminata aleatoria con reinicio (RWR).

    RESPONSABILIDAD:
    - Restringir la caminata a la red ego de radio r del ancla
    - Cortar al juntar max_nodes nodos distintos o al agotar el
      presupuesto de pasos sin descubrir nodos nuevos
    - Inducir adyacencia, features de nodo y de arista del sub-grafo

    El grafo es inmutable; cada muestra consume solo el generador que se le
    pasa, asi que muestras de anclas distintas se pueden pedir en paralelo.
    """

    def __init__(
        self,
        g: CSRGraph,
        cfg: SamplerConfig,
        node_features: np.ndarray | None = None,
        edge_features: np.ndarray | None = None,
    ):
        self.g = g
        self.cfg = cfg
        n = g.node_count
        self.node_features = (
            np.zeros((n, 1)) if node_features is None else np.asarray(node_features, dtype=np.float64)
        )
        if self.node_features.shape[0] != n:
            raise GraphValidationError("node_features no coincide con el grafo")
        self.edge_features = (
            g.edge_feature_matrix() if edge_features is None else np.asarray(edge_features)
        )
        self._edge_ids = g.to_csr(np.arange(1, g.indices.shape[0] + 1, dtype=np.int64))
        self._ego = lru_cache(maxsize=EGO_CACHE_SIZE)(self._ego_sin_cache)

    def _ego_sin_cache(self, u: int) -> frozenset[int]:
        return frozenset(ego_network(self.g, u, self.cfg.r).tolist())

    def walk(self, u: int, rng: np.random.Generator) -> np.ndarray:
        """Nodos distintos visitados por la caminata, ordenados."""
        cfg = self.cfg
        ego = self._ego(int(u))
        allowed: dict[int, np.ndarray] = {}

        def vecinos(v: int) -> np.ndarray:
            if v not in allowed:
                nb = self.g.neighbors(v)
                allowed[v] = np.array([w for w in nb if int(w) in ego], dtype=np.int64)
            return allowed[v]

        visited = {int(u)}
        if cfg.max_nodes == 1 or vecinos(u).size == 0:
            return np.array([u], dtype=np.int64)

        cur, stall = int(u), 0
        budget = cfg.stall_budget
        while len(visited) < cfg.max_nodes and stall < budget:
            if cur != u and rng.random() < cfg.restart_prob:
                cur = int(u)
                continue
            nb = vecinos(cur)
            cur = int(nb[rng.integers(nb.size)])
            if cur in visited:
                stall += 1
            else:
                visited.add(cur)
                stall = 0
        return np.array(sorted(visited), dtype=np.int64)

    def induce(self, u: int, members: np.ndarray) -> SubGraph:
        """
        Sub-grafo inducido por `members` (ordenados, con `u` entre ellos).

        Las features de arista se toman por id de arco, asi cada arco del
        sub-grafo conserva la fila que tenia en el grafo completo.
        """
        sub = self._edge_ids[members][:, members].tocsr()
        sub.sort_indices()
        edge_ids = sub.data.astype(np.int64) - 1
        return SubGraph(
            anchor=int(u),
            members=members,
            anchor_index=int(np.searchsorted(members, u)),
            indptr=sub.indptr.astype(np.int64),
            indices=sub.indices.astype(np.int64),
            node_features=self.node_features[members],
            edge_features=self.edge_features[edge_ids],
        )

    def sample(self, u: int, rng: np.random.Generator) -> SubGraph:
        return self.induce(u, self.walk(u, rng))

    def streams(self, u: int, step: int, count: int) -> list[np.random.Generator]:
        """Generadores independientes derivados de (seed, step, u)."""
        seq = np.random.SeedSequence([self.cfg.seed, step, int(u)])
        return [np.random.default_rng(s) for s in seq.spawn(count)]

    def positive_pair(self, u: int, step: int = 0) -> tuple[SubGraph, SubGraph]:
        q_rng, k_rng = self.streams(u, step, 2)
        return self.sample(u, q_rng), self.sample(u, k_rng)

    def contrastive_batch(self, anchors, step: int = 0) -> list[tuple[SubGraph, SubGraph]]:
        anchors = [int(a) for a in anchors]
        if len(set(anchors)) != len(anchors):
            raise DistinctnessError("el lote de anclas tiene duplicados")
        return [self.positive_pair(a, step) for a in anchors]

    def single(self, u: int, step: int = 0) -> SubGraph:
        """Un sub-grafo por nodo, usado en ajuste fino y prediccion."""
        (rng,) = self.streams(u, step, 1)
        return self.sample(u, rng)


def rwr_subgraph(
    g: CSRGraph,
    u: int,
    cfg: SamplerConfig,
    stream: np.random.Generator,
    node_features: np.ndarray | None = None,
) -> SubGraph:
    """
    Una muestra RWR alrededor de `u`.

    Args:
        g: grafo de una sola entidad o multi-entidad
        u: nodo ancla
        cfg: parametros de la caminata
        stream: generador que consume la caminata y nada mas
        node_features: filas por nodo; ceros (n x 1) si falta

    Returns:
        SubGraph: miembros ordenados, el ancla siempre incluida
    """
    return SubgraphSampler(g, cfg, node_features).sample(u, stream)


def positive_pair(
    g: CSRGraph, u: int, cfg: SamplerConfig, node_features: np.ndarray | None = None
) -> tuple[SubGraph, SubGraph]:
    """Dos muestras RWR independientes del mismo ancla (par positivo)."""
    return SubgraphSampler(g, cfg, node_features).positive_pair(u)


def contrastive_batch(
    g: CSRGraph,
    anchors,
    cfg: SamplerConfig,
    node_features: np.ndarray | None = None,
    step: int = 0,
) -> list[tuple[SubGraph, SubGraph]]:
    """
    Un par positivo por ancla; las llaves de las otras anclas (y la cola de
    llaves del pre-entrenamiento) actuan como negativos.

    Raises:
        DistinctnessError: si `anchors` repite un nodo
    """
    return SubgraphSampler(g, cfg, node_features).contrastive_batch(anchors, step)
