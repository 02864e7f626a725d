import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import eigsh

from fraudgraph.config.settings import FeaturesConfig
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import CSRGraph
from fraudgraph.domain.exceptions import ConfigError, ConvergenceError, EigenResidualError

logger = logging.getLogger(__name__)

DENSE_EIGEN_LIMIT = 2000


def init_random(g: CSRGraph, dim: int, seed: int) -> FeatureMatrix:
    """Entradas i.i.d. N(0, 1); misma semilla, misma matriz."""
    if dim < 1:
        raise ConfigError("dim debe ser >= 1")
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((g.node_count, dim))
    return FeatureMatrix(values, "random", {"dim": dim, "seed": seed})


def init_degree(g: CSRGraph, cap: int | None = 128) -> FeatureMatrix:
    """
    One-hot del grado, recortado en `cap`.

    dim = min(grado maximo, cap) + 1; el nodo i lleva un 1 en
    min(grado(i), dim - 1). cap=None deja la dimension atada al grado maximo.
    """
    if cap is not None and cap < 1:
        raise ConfigError("degree_cap debe ser >= 1")
    deg = g.degrees
    top = g.max_degree if cap is None else min(g.max_degree, cap)
    values = np.zeros((g.node_count, top + 1), dtype=np.float64)
    values[np.arange(g.node_count), np.minimum(deg, top)] = 1.0
    return FeatureMatrix(values, "degree", {"cap": cap})


def init_pagerank(
    g: CSRGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> FeatureMatrix:
    """
    PageRank por iteracion de potencia sobre la caminata no dirigida.

    La masa de los nodos sin vecinos se redistribuye uniforme, y todos
    reciben el teletransporte (1 - damping) / n. Se itera hasta que el
    cambio L1 baje de `tol`.

    Raises:
        ConvergenceError: si no converge en max_iter, con el ultimo residual
    """
    if not 0.0 < damping < 1.0:
        raise ConfigError("damping debe estar en (0, 1)")
    if tol <= 0:
        raise ConfigError("tol debe ser > 0")
    n = g.node_count
    config = {"damping": damping, "tol": tol, "max_iter": max_iter}
    if n == 0:
        return FeatureMatrix(np.zeros((0, 1)), "pagerank", config)

    deg = g.degrees.astype(np.float64)
    dangling = deg == 0
    inv_deg = np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, deg))
    a = g.to_csr()
    rank = np.full(n, 1.0 / n)
    residual = np.inf
    for it in range(1, max_iter + 1):
        spread = a.T @ (rank * inv_deg)
        new = damping * spread + (damping * rank[dangling].sum() + 1.0 - damping) / n
        new /= new.sum()
        residual = float(np.abs(new - rank).sum())
        rank = new
        if residual < tol:
            logger.debug("pagerank convergio en %d iteraciones (residual %.2e)", it, residual)
            break
    else:
        raise ConvergenceError(f"pagerank no convergio en {max_iter} iteraciones", residual)
    return FeatureMatrix(rank.reshape(-1, 1), "pagerank", config)


def normalized_adjacency(g: CSRGraph) -> sp.csr_matrix:
    """D^-1/2 A D^-1/2; las filas de nodos aislados quedan en cero."""
    deg = g.degrees.astype(np.float64)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    d = sp.diags(inv_sqrt)
    return (d @ g.to_csr() @ d).tocsr()


def _component_eigenpairs(a_hat: sp.csr_matrix, nodes: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Los m pares principales del bloque de una componente conexa, en orden descendente."""
    sub = a_hat[nodes][:, nodes]
    s = nodes.size
    if s < DENSE_EIGEN_LIMIT or m >= s - 1:
        vals, vecs = np.linalg.eigh(sub.toarray())
        order = np.argsort(-vals, kind="stable")[:m]
    else:
        # v0 fijo: misma matriz, mismos pares
        v0 = np.random.default_rng(0).standard_normal(s)
        ncv = min(s, max(2 * m + 1, 40))
        vals, vecs = eigsh(sub.tocsc(), k=m, which="LA", tol=1e-12, v0=v0, ncv=ncv)
        order = np.argsort(-vals, kind="stable")
    return vals[order], vecs[:, order]


def init_eigen(g: CSRGraph, k: int = 16, tol: float = 1e-6) -> FeatureMatrix:
    """
    Entradas de los k vectores propios principales de la adyacencia normalizada.

    El nodo i recibe (v_1[i], ..., v_k[i]) con los valores propios en orden
    descendente. Si k supera el numero de nodos se rellena con ceros. Cada
    vector se orienta para que su entrada de mayor magnitud sea positiva.

    FLUJO:
    1. Separar el grafo en componentes conexas; el espectro de Â es la union
       de los espectros de cada bloque
    2. Por componente: descomposicion densa debajo de DENSE_EIGEN_LIMIT
       nodos, Lanczos reiniciado (eigsh, v0 fijo) arriba
    3. Unir y quedarse con los k mayores; los empates (p. ej. el valor 1 que
       aporta cada componente con aristas) se rompen por componente, en el
       orden de su nodo de menor id

    Cada vector retenido vive en una sola componente, asi la base de un
    valor propio repetido queda fija y el resultado no cambia entre llamadas.

    Raises:
        EigenResidualError: algun par retenido con ||Av - lv|| > tol
    """
    if k < 1:
        raise ConfigError("eigen_k debe ser >= 1")
    n = g.node_count
    config = {"k": k, "tol": tol}
    if n == 0:
        return FeatureMatrix(np.zeros((0, k)), "eigen", config)

    a_hat = normalized_adjacency(g)
    kk = min(k, n)
    n_comp, labels = connected_components(a_hat, directed=False)
    by_comp = np.argsort(labels, kind="stable")
    groups = np.split(by_comp, np.cumsum(np.bincount(labels, minlength=n_comp))[:-1])

    cand_vals, cand_comp, cand_rank, cand_vecs = [], [], [], []
    for c, nodes in enumerate(groups):
        vals, vecs = _component_eigenpairs(a_hat, nodes, min(kk, nodes.size))
        for j in range(vals.size):
            cand_vals.append(vals[j])
            cand_comp.append(c)
            cand_rank.append(j)
            cand_vecs.append((nodes, vecs[:, j]))
    cand_vals = np.array(cand_vals)
    # redondeo para que el ruido de punto flotante no desordene los empates
    pick = np.lexsort((cand_rank, cand_comp, -np.round(cand_vals, 10)))[:kk]

    vals = cand_vals[pick]
    vecs = np.zeros((n, kk), dtype=np.float64)
    for col, idx in enumerate(pick):
        nodes, v = cand_vecs[idx]
        vecs[nodes, col] = v

    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs

    residual = np.linalg.norm(a_hat @ vecs - vecs * vals, axis=0)
    if residual.size and residual.max() > tol:
        raise EigenResidualError(
            f"par propio con residual {residual.max():.2e} > {tol:.0e}"
        )

    values = np.zeros((n, k), dtype=np.float64)
    values[:, :kk] = vecs
    config["eigenvalues"] = [float(v) for v in vals]
    config["components"] = int(n_comp)
    return FeatureMatrix(values, "eigen", config)


def normalize_features(x: FeatureMatrix) -> FeatureMatrix:
    """
    z-score por columna; las columnas constantes quedan en cero.

    Ejemplo:
        columna {0, 2}  ->  {-1, +1}
    """
    values = np.array(x.values, dtype=np.float64)
    if values.shape[0] == 0:
        return FeatureMatrix(values, x.method, {**x.config, "normalized": True})
    constant = np.ptp(values, axis=0) == 0
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    std[constant] = 1.0
    values = (values - mean) / std
    values[:, constant] = 0.0
    return FeatureMatrix(values, x.method, {**x.config, "normalized": True})


def init_features(g: CSRGraph, cfg: FeaturesConfig, seed: int) -> FeatureMatrix:
    """Despacha al inicializador configurado y normaliza si asi se pidio."""
    if cfg.method == "random":
        x = init_random(g, cfg.dim, seed)
    elif cfg.method == "degree":
        x = init_degree(g, cfg.degree_cap)
    elif cfg.method == "pagerank":
        x = init_pagerank(g, cfg.damping, cfg.tol, cfg.max_iter)
    elif cfg.method == "eigen":
        x = init_eigen(g, cfg.eigen_k, cfg.eigen_tol)
    else:
        raise ConfigError(f"metodo de features desconocido: {cfg.method}")
    logger.info("features '%s': %d x %d", x.method, x.rows, x.dim)
    return normalize_features(x) if cfg.normalize else x
