import numpy as np
import pytest
import torch

from fraudgraph.config.settings import PipelineConfig, SamplerConfig
from fraudgraph.domain.entities.graph import MultiEntityGraph, SingleEntityGraph, csr_from_pairs


def _undirected(n: int, edges) -> SingleEntityGraph:
    edges = [(int(u), int(v)) for u, v in edges if u != v]
    pares = {(min(u, v), max(u, v)) for u, v in edges}
    src = np.array([u for u, v in pares] + [v for u, v in pares], dtype=np.int64)
    dst = np.array([v for u, v in pares] + [u for u, v in pares], dtype=np.int64)
    indptr, indices, (feats,) = csr_from_pairs(n, src, dst, np.ones((src.shape[0], 1), dtype=np.uint8))
    return SingleEntityGraph.build(indptr, indices, feats, ("entity",), np.arange(n))


@pytest.fixture
def build_graph():
    """Grafo no dirigido simple: build_graph(n, [(u, v), ...])."""
    return _undirected


@pytest.fixture
def path_graph():
    def _path(n: int) -> SingleEntityGraph:
        return _undirected(n, [(i, i + 1) for i in range(n - 1)])
    return _path


@pytest.fixture
def random_graph():
    def _random(n: int, p: float, seed: int) -> SingleEntityGraph:
        rng = np.random.default_rng(seed)
        upper = np.triu(rng.random((n, n)) < p, k=1)
        u, v = np.nonzero(upper)
        return _undirected(n, zip(u, v))
    return _random


@pytest.fixture
def random_multi():
    """
    Grafo multi-entidad bipartito al azar.

    Tipo 0 = usuario (objetivo); tipos 1..n_types son no objetivo.
    """
    def _random(seed: int, n_targets: int = 40, n_entities: int = 60, n_types: int = 3,
                p: float = 0.08) -> MultiEntityGraph:
        rng = np.random.default_rng(seed)
        n = n_targets + n_entities
        node_type = np.concatenate([
            np.zeros(n_targets, dtype=np.int64),
            rng.integers(1, n_types + 1, size=n_entities),
        ])
        mask = rng.random((n_targets, n_entities)) < p
        t, e = np.nonzero(mask)
        names = ["user"] + [f"tipo{i}" for i in range(1, n_types + 1)]
        return MultiEntityGraph.from_edges(node_type, names, 0, t, e + n_targets)
    return _random


@pytest.fixture
def sampler_cfg():
    return SamplerConfig(r=3, restart_prob=0.8, max_nodes=8, seed=11)


@pytest.fixture
def tiny_cfg(tmp_path):
    """Configuracion chica para correr casos de uso enteros en segundos."""
    return PipelineConfig.from_mapping({
        "seed": 3,
        "paths": {"output_dir": str(tmp_path / "out")},
        "features": {"method": "eigen", "eigen_k": 4},
        "sampler": {"max_nodes": 8},
        "pretrain": {"epochs": 1, "batch_size": 32, "lr": 1e-3, "queue_size": 64,
                     "hidden_dim": 8, "output_dim": 8, "num_layers": 2},
        "finetune": {"epochs": 2, "batch_size": 16, "lr": 1e-2, "embed_dim": 8, "head_hidden": 8},
        "eval": {"folds": 2, "graphs": ["single"], "features": ["random"],
                 "pretrain": [False, True], "modes": ["SE"]},
        "synth": {"n_users": 120, "ring_count": 4, "ring_size": 5, "benign_pool_size": 20,
                  "label_fraction": 0.3},
    })


@pytest.fixture(autouse=True)
def _torch_seed():
    torch.manual_seed(0)
