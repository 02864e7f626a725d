import logging

import numpy as np
import scipy.sparse as sp

from fraudgraph.domain.entities.graph import (
    CSRGraph,
    MultiEntityGraph,
    SingleEntityGraph,
    csr_from_pairs,
)
from fraudgraph.domain.entities.stats import GraphStats, TransformStats, TransformSummary

logger = logging.getLogger(__name__)


def _incidence(g: MultiEntityGraph, keep: np.ndarray) -> tuple[sp.csr_matrix, np.ndarray]:
    """
    Matriz B (objetivos x nodos) con B[s, w] = 1 si el objetivo s toca a w.

    Solo se incluyen columnas w con keep[w] verdadero.
    """
    targets = g.target_nodes
    single_id = np.full(g.node_count, -1, dtype=np.int64)
    single_id[targets] = np.arange(targets.shape[0])
    rows = np.repeat(np.arange(g.node_count), g.degrees)
    mask = (single_id[rows] >= 0) & keep[g.indices]
    b = sp.csr_matrix(
        (np.ones(int(mask.sum()), dtype=np.int64), (single_id[rows[mask]], g.indices[mask])),
        shape=(targets.shape[0], g.node_count),
    )
    return b, targets


def transform_to_single_entity(
    g: MultiEntityGraph,
    hub_threshold: int | None = None,
    record_counts: bool = False,
) -> tuple[SingleEntityGraph, TransformSummary]:
    """
    Colapsa las entidades no objetivo en features de arista.

    Dos objetivos u, v quedan unidos si comparten al menos un vecino no
    objetivo; el bit t de la arista se enciende si comparten alguno de tipo
    t (indicador binario, no conteo). Los conteos se guardan aparte solo si
    `record_counts` esta activo.

    FLUJO:
    1. Marcar como hubs las entidades no objetivo con grado > hub_threshold
    2. Por cada tipo t: C_t = B_t B_t^T (producto disperso, determinista)
    3. Unir los pares fuera de la diagonal de todos los tipos y armar la CSR

    Returns:
        (grafo de una entidad, resumen con hubs excluidos y pares por tipo)
    """
    is_target = g.node_type == g.target_type_id
    excluded = np.zeros(0, dtype=np.int64)
    keep = ~is_target
    if hub_threshold is not None:
        hubs = (~is_target) & (g.degrees > hub_threshold)
        excluded = np.flatnonzero(hubs)
        keep = keep & ~hubs
        if excluded.size:
            logger.warning(
                "umbral de hub %d: se excluyen %d entidades no objetivo (max grado %d)",
                hub_threshold, excluded.size, int(g.degrees[excluded].max()),
            )

    b, targets = _incidence(g, keep)
    n_t = targets.shape[0]
    type_ids = g.non_target_type_ids
    d = len(type_ids)

    rows, cols, dims, counts = [], [], [], []
    pairs_by_type: dict[str, int] = {}
    for t_idx, tid in enumerate(type_ids):
        col_mask = (g.node_type == tid) & keep
        b_t = b[:, np.flatnonzero(col_mask)]
        c_t = (b_t @ b_t.T).tocoo()
        off = c_t.row != c_t.col
        rows.append(c_t.row[off].astype(np.int64))
        cols.append(c_t.col[off].astype(np.int64))
        dims.append(np.full(int(off.sum()), t_idx, dtype=np.int64))
        counts.append(c_t.data[off].astype(np.int64))
        pairs_by_type[g.type_names[tid]] = int(off.sum() // 2)

    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        dim = np.concatenate(dims)
        cnt = np.concatenate(counts)
    else:
        r = c = dim = cnt = np.zeros(0, dtype=np.int64)

    keys, inverse = np.unique(r * max(n_t, 1) + c, return_inverse=True)
    features = np.zeros((keys.shape[0], d), dtype=np.uint8)
    features[inverse, dim] = 1
    shared = np.zeros((keys.shape[0], d), dtype=np.int64)
    shared[inverse, dim] = cnt

    edge_r = keys // max(n_t, 1)
    edge_c = keys % max(n_t, 1)
    indptr, indices, (features, shared) = csr_from_pairs(n_t, edge_r, edge_c, features, shared)

    single = SingleEntityGraph.build(
        indptr,
        indices,
        features,
        type_order=g.non_target_type_names,
        origin_ids=targets,
        shared_counts=shared if record_counts else None,
        target_type=g.target_type,
    )
    summary = TransformSummary(
        target_type=g.target_type,
        type_order=list(g.non_target_type_names),
        target_count=n_t,
        non_target_count=int(g.node_count - n_t),
        multi_edges=g.edge_count,
        single_edges=single.edge_count,
        hub_threshold=hub_threshold,
        excluded_hubs=[int(x) for x in excluded],
        pairs_by_type=pairs_by_type,
    )
    logger.info(
        "transformacion: %d objetivos, %d aristas multi -> %d aristas de una entidad",
        n_t, g.edge_count, single.edge_count,
    )
    return single, summary


def graph_stats(g: CSRGraph) -> GraphStats:
    """
    Nodos, aristas, conteo por tipo y grado maximo.

    Ejemplo:
        graph_stats(camino_de_3).max_degree  # 2
    """
    if isinstance(g, MultiEntityGraph):
        return GraphStats(
            kind="multi",
            node_count=g.node_count,
            edge_count=g.edge_count,
            type_counts=g.type_counts() if g.node_count else {},
            max_degree=g.max_degree,
        )
    type_counts = {}
    if isinstance(g, SingleEntityGraph) and g.node_count:
        type_counts = {g.target_type: g.node_count}
    return GraphStats(
        kind="single",
        node_count=g.node_count,
        edge_count=g.edge_count,
        type_counts=type_counts,
        max_degree=g.max_degree,
    )


def compare_stats(multi: MultiEntityGraph, single: SingleEntityGraph) -> TransformStats:
    """
    Compara el tamano de G_m contra G_s.

    Returns:
        TransformStats: estadisticas de ambos grafos y los cocientes
        nodos(G_m)/nodos(G_s) y aristas(G_m)/aristas(G_s); None si G_s
        no tiene nodos o aristas
    """
    m, s = graph_stats(multi), graph_stats(single)
    return TransformStats(
        multi=m,
        single=s,
        node_ratio=m.node_count / s.node_count if s.node_count else None,
        edge_ratio=m.edge_count / s.edge_count if s.edge_count else None,
    )
