import json
import time

import numpy as np
import pytest

from fraudgraph.application.use_cases.transformar_grafo import TransformarGrafoUseCase
from fraudgraph.domain.entities.graph import MultiEntityGraph
from fraudgraph.domain.exceptions import ConfigError
from fraudgraph.domain.services.transform_service import (
    compare_stats,
    graph_stats,
    transform_to_single_entity,
)
from fraudgraph.infrastructure.io.graph_files import load_single_entity_graph, save_single_entity_graph
from fraudgraph.infrastructure.repositories.file_graph_store import FileGraphStore


def oraculo(g: MultiEntityGraph, hub_threshold=None) -> dict:
    """Comparacion por pares de objetivos: que vecinos no objetivo comparten."""
    targets = g.target_nodes.tolist()
    tipos = list(g.non_target_type_ids)
    vecinos = {}
    for t in targets:
        nb = set(int(w) for w in g.neighbors(t))
        if hub_threshold is not None:
            nb = {w for w in nb if g.degrees[w] <= hub_threshold}
        vecinos[t] = nb
    out = {}
    for i, u in enumerate(targets):
        for j in range(i + 1, len(targets)):
            v = targets[j]
            comunes = vecinos[u] & vecinos[v]
            if comunes:
                bits = tuple(int(any(g.node_type[w] == tid for w in comunes)) for tid in tipos)
                out[(i, j)] = bits
    return out


def multi(node_type, names, edges):
    src, dst = zip(*edges) if edges else ((), ())
    return MultiEntityGraph.from_edges(np.array(node_type), names, 0, np.array(src), np.array(dst))


class TestTransformacion:

    def test_ejemplo_dispositivo_y_direccion(self):
        # u1, u2, u3 = 0, 1, 2; d1 = 3; a1 = 4
        g = multi([0, 0, 0, 1, 2], ["user", "device", "address"], [(0, 3), (1, 3), (1, 4), (2, 4)])
        single, summary = transform_to_single_entity(g)
        assert single.edge_set() == {(0, 1): (1, 0), (1, 2): (0, 1)}
        assert single.type_order == ("device", "address")
        assert summary.pairs_by_type == {"device": 1, "address": 1}
        single.validate()

    def test_sin_entidades_compartidas(self):
        g = multi([0, 0, 1, 1], ["user", "device"], [(0, 2), (1, 3)])
        single, _ = transform_to_single_entity(g)
        assert single.node_count == 2
        assert single.edge_count == 0
        assert single.edge_features.shape == (0, 1)

    def test_indicador_binario_no_conteo(self):
        # dos dispositivos compartidos siguen siendo un solo bit
        g = multi([0, 0, 1, 1], ["user", "device"], [(0, 2), (1, 2), (0, 3), (1, 3)])
        single, _ = transform_to_single_entity(g, record_counts=True)
        assert single.edge_set() == {(0, 1): (1,)}
        assert single.shared_counts[:, 0].tolist() == [2, 2]

    def test_origin_ids(self):
        g = multi([1, 0, 1, 0], ["user", "device"], [(1, 0), (3, 0)])
        # el tipo objetivo es el id 0 = "user": nodos 1 y 3
        single, _ = transform_to_single_entity(g)
        assert single.origin_ids.tolist() == [1, 3]
        assert single.edge_set() == {(0, 1): (1,)}

    def test_oraculo_en_cien_grafos(self, random_multi):
        inicio = time.perf_counter()
        rng = np.random.default_rng(2024)
        for seed in range(100):
            n_t = int(rng.integers(5, 80))
            n_e = int(rng.integers(10, 200 - n_t))
            g = random_multi(seed, n_targets=n_t, n_entities=n_e,
                             n_types=int(rng.integers(3, 6)), p=float(rng.uniform(0.02, 0.15)))
            single, _ = transform_to_single_entity(g)
            assert single.edge_set() == oraculo(g), f"semilla {seed}"
            single.validate()
        assert time.perf_counter() - inicio < 10.0

    def test_umbral_de_hub(self, random_multi):
        g = random_multi(7, n_targets=60, n_entities=30, p=0.2)
        umbral = int(np.median(g.degrees[g.node_type != 0]))
        single, summary = transform_to_single_entity(g, hub_threshold=umbral)
        assert single.edge_set() == oraculo(g, umbral)
        esperados = [int(w) for w in np.flatnonzero((g.node_type != 0) & (g.degrees > umbral))]
        assert summary.excluded_hubs == esperados
        assert summary.hub_threshold == umbral

    def test_quitar_aristas_no_agrega_pares(self, random_multi):
        g = random_multi(3, n_targets=50, n_entities=70, p=0.1)
        completo = set(transform_to_single_entity(g)[0].edge_set())
        rows = np.repeat(np.arange(g.node_count), g.degrees)
        keep = (g.node_type[rows] == 0) & (np.arange(rows.size) % 3 != 0)
        reducido = MultiEntityGraph.from_edges(
            g.node_type, g.type_names, 0, rows[keep], g.indices[keep]
        )
        assert set(transform_to_single_entity(reducido)[0].edge_set()) <= completo

    def test_simetria_bajo_permutacion(self, random_multi):
        g = random_multi(9)
        rng = np.random.default_rng(0)
        perm = rng.permutation(g.node_count)
        rows = np.repeat(np.arange(g.node_count), g.degrees)
        node_type = np.empty_like(g.node_type)
        node_type[perm] = g.node_type
        permutado = MultiEntityGraph.from_edges(node_type, g.type_names, 0, perm[rows], perm[g.indices])

        a, _ = transform_to_single_entity(g)
        b, _ = transform_to_single_entity(permutado)
        pares_a = {(int(a.origin_ids[u]), int(a.origin_ids[v])): f for (u, v), f in a.edge_set().items()}
        pares_b = {}
        inv = np.argsort(perm)
        for (u, v), f in b.edge_set().items():
            x, y = int(inv[b.origin_ids[u]]), int(inv[b.origin_ids[v]])
            pares_b[(min(x, y), max(x, y))] = f
        assert pares_a == pares_b

    def test_guardar_y_cargar_npz(self, tmp_path, random_multi):
        single, _ = transform_to_single_entity(random_multi(4), record_counts=True)
        path = save_single_entity_graph(single, tmp_path / "g.npz", "hash123")
        again = load_single_entity_graph(path)
        np.testing.assert_array_equal(again.indptr, single.indptr)
        np.testing.assert_array_equal(again.edge_features, single.edge_features)
        np.testing.assert_array_equal(again.shared_counts, single.shared_counts)
        assert again.type_order == single.type_order
        assert again.target_type == "user"


class TestEstadisticas:

    def test_camino_de_tres(self, path_graph):
        s = graph_stats(path_graph(3))
        assert (s.node_count, s.edge_count, s.max_degree) == (3, 2, 2)

    def test_grafo_vacio(self, build_graph):
        s = graph_stats(build_graph(0, []))
        assert (s.node_count, s.edge_count, s.max_degree) == (0, 0, 0)
        assert s.type_counts == {}

    def test_razones(self):
        g = multi([0, 0, 0, 1, 2], ["user", "device", "address"], [(0, 3), (1, 3), (1, 4), (2, 4)])
        single, _ = transform_to_single_entity(g)
        stats = compare_stats(g, single)
        assert stats.node_ratio == pytest.approx(5 / 3)
        assert stats.edge_ratio == pytest.approx(4 / 2)
        assert stats.multi.type_counts == {"user": 3, "device": 1, "address": 1}

    def test_razon_sin_aristas(self):
        g = multi([0, 0, 1, 1], ["user", "device"], [(0, 2), (1, 3)])
        stats = compare_stats(g, transform_to_single_entity(g)[0])
        assert stats.edge_ratio is None


class TestCasoDeUso:

    def test_escribe_grafo_y_resumen(self, tiny_cfg):
        g = multi([0, 0, 0, 1, 2], ["user", "device", "address"], [(0, 3), (1, 3), (1, 4), (2, 4)])
        single, summary, stats = TransformarGrafoUseCase(FileGraphStore()).ejecutar(tiny_cfg, g)
        out = tiny_cfg.paths.output_dir
        assert (out / "single_graph.npz").exists()
        payload = json.loads((out / "transform_summary.json").read_text())
        assert payload["config_hash"] == tiny_cfg.config_hash()
        assert payload["summary"]["single_edges"] == 2

    def test_tipo_objetivo_distinto(self, tiny_cfg):
        g = MultiEntityGraph.from_edges(np.array([1, 0]), ["device", "user"], 0,
                                        np.array([0]), np.array([1]))
        with pytest.raises(ConfigError):
            TransformarGrafoUseCase(FileGraphStore()).ejecutar(tiny_cfg, g)
