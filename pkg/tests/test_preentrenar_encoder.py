import math
from collections import deque
from pathlib import Path

import numpy as np
import pytest
import torch

from fraudgraph.application.layout import OutputLayout
from fraudgraph.application.use_cases.preentrenar_encoder import (
    PreentrenarEncoderUseCase,
    pretrain_anchors,
    pretrain_encoder,
)
from fraudgraph.config.settings import PipelineConfig, SamplerConfig
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.exceptions import ConfigError, ShapeError
from fraudgraph.domain.nn.batch import DTYPE
from fraudgraph.domain.nn.layers import Encoder, seeded_init
from fraudgraph.domain.nn.moco import (
    KeyQueue,
    MoCoState,
    info_nce,
    info_nce_batch,
    momentum_update,
    pretrain_epoch,
)
from fraudgraph.domain.services.feature_service import init_features
from fraudgraph.domain.services.synthetic_service import generate_synthetic
from fraudgraph.domain.services.transform_service import transform_to_single_entity
from fraudgraph.infrastructure.repositories.file_graph_store import FileGraphStore

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def vec(*xs):
    return torch.tensor(xs, dtype=DTYPE)


def parametros(module):
    return [p.detach().clone() for p in module.parameters()]


@pytest.fixture
def datos_chicos(tiny_cfg):
    dataset = generate_synthetic(tiny_cfg.synth)
    single, _ = transform_to_single_entity(dataset.graph)
    return single, init_features(single, tiny_cfg.features, tiny_cfg.seed)


class TestInfoNCE:

    @pytest.mark.parametrize("n", [2, 4, 64])
    def test_logits_iguales_da_log_n(self, n):
        e = vec(0.6, 0.8)
        loss = info_nce(e, e, [e] * (n - 1), tau=1.0)
        assert abs(loss.item() - math.log(n)) < 1e-9

    def test_un_negativo_ortogonal(self):
        loss = info_nce(vec(1.0, 0.0), vec(1.0, 0.0), [vec(0.0, 1.0)], tau=1.0)
        assert loss.item() == pytest.approx(math.log(1 + math.exp(-1)), abs=1e-12)
        assert loss.item() == pytest.approx(0.3133, abs=1e-4)

    def test_temperatura_baja(self):
        negs = vec(0.0, 1.0).expand(63, 2)
        loss = info_nce(vec(1.0, 0.0), vec(1.0, 0.0), negs, tau=0.07)
        esperado = math.log1p(63 * math.exp(-1 / 0.07))
        assert loss.item() == pytest.approx(esperado, rel=1e-6)
        assert loss.item() == pytest.approx(3.9e-5, rel=0.02)

    def test_monotonia(self):
        rng = np.random.default_rng(0)
        revisados = 0
        while revisados < 1000:
            d = int(rng.integers(2, 9))
            q = torch.as_tensor(rng.standard_normal(d))
            negs = torch.as_tensor(rng.standard_normal((int(rng.integers(1, 10)), d)))
            k1, k2 = torch.as_tensor(rng.standard_normal((2, d)))
            c1 = torch.nn.functional.cosine_similarity(q, k1, dim=0).item()
            c2 = torch.nn.functional.cosine_similarity(q, k2, dim=0).item()
            if abs(c1 - c2) < 1e-6:
                continue
            if c1 > c2:
                k1, k2 = k2, k1
            l1, l2 = info_nce(q, k1, negs, 0.5), info_nce(q, k2, negs, 0.5)
            assert l2 < l1
            assert l2 > 0
            revisados += 1

    def test_temperatura_invalida(self):
        with pytest.raises(ConfigError):
            info_nce(vec(1.0), vec(1.0), [], tau=0.0)

    def test_lote_igual_a_uno_por_uno_sin_cola(self):
        rng = np.random.default_rng(3)
        q = torch.as_tensor(rng.standard_normal((4, 3)))
        k = torch.as_tensor(rng.standard_normal((4, 3)))
        batch = info_nce_batch(q, k, torch.zeros(0, 3, dtype=DTYPE), 0.2)
        uno = [info_nce(q[i], k[i], torch.cat([k[:i], k[i + 1:]]), 0.2) for i in range(4)]
        assert batch.item() == pytest.approx(float(torch.stack(uno).mean()), abs=1e-12)


class TestMomento:

    def _estado(self, m):
        with seeded_init(1):
            enc = Encoder(3, 4, 4, num_layers=2)
        return MoCoState.create(enc, queue_size=8, m=m, tau=0.07)

    def test_m_cero_copia(self):
        state = self._estado(0.0)
        with torch.no_grad():
            for p in state.encoder_k.parameters():
                p.normal_()
        momentum_update(state)
        for pq, pk in zip(state.encoder_q.parameters(), state.encoder_k.parameters()):
            torch.testing.assert_close(pk, pq.detach(), atol=0, rtol=0)

    def test_punto_fijo(self):
        state = self._estado(0.999)
        antes = parametros(state.encoder_k)
        momentum_update(state)
        for a, pk in zip(antes, state.encoder_k.parameters()):
            torch.testing.assert_close(pk, a, atol=1e-15, rtol=1e-15)

    def test_aritmetica(self):
        state = self._estado(0.9)
        with torch.no_grad():
            for pq, pk in zip(state.encoder_q.parameters(), state.encoder_k.parameters()):
                pq.fill_(1.0)
                pk.zero_()
        momentum_update(state)
        for pk in state.encoder_k.parameters():
            torch.testing.assert_close(pk, torch.full_like(pk, 0.1), atol=1e-15, rtol=0)

    @pytest.mark.parametrize("t", [1, 10, 100])
    def test_forma_cerrada(self, t):
        m = 0.97
        state = self._estado(m)
        with torch.no_grad():
            for p in state.encoder_k.parameters():
                p.normal_()
        k0 = parametros(state.encoder_k)
        q = parametros(state.encoder_q)
        for _ in range(t):
            momentum_update(state)
        for a, b, pk in zip(k0, q, state.encoder_k.parameters()):
            esperado = m ** t * a + (1 - m ** t) * b
            assert torch.max(torch.abs(pk - esperado)).item() < 1e-9

    def test_momento_fuera_de_rango(self):
        with pytest.raises(ConfigError):
            self._estado(1.0)

    def test_cola_de_otra_dimension(self):
        enc = Encoder(3, 4, 4)
        with pytest.raises(ShapeError):
            MoCoState(enc, Encoder(3, 4, 4), KeyQueue(8, 5), 0.9, 0.07)


class TestColaDeLlaves:

    @pytest.mark.parametrize("capacidad", [1, 8, 1024])
    def test_fifo(self, capacidad):
        rng = np.random.default_rng(capacidad)
        cola = KeyQueue(capacidad, 2)
        referencia = deque(maxlen=capacidad)
        contador = 0
        for _ in range(40):
            b = int(rng.integers(1, capacidad + 1))
            llaves = torch.arange(contador, contador + b, dtype=DTYPE).unsqueeze(1).repeat(1, 2)
            contador += b
            cola.push(llaves)
            referencia.extend(llaves[:, 0].tolist())
            assert len(cola) == len(referencia) <= capacidad
            assert cola.contents()[:, 0].tolist() == list(referencia)

    def test_vacia_mas_lote(self):
        cola = KeyQueue(16, 3)
        cola.push(torch.ones(5, 3, dtype=DTYPE))
        assert len(cola) == 5

    def test_capacidad_uno(self):
        cola = KeyQueue(1, 2)
        cola.push(vec(1.0, 1.0))
        cola.push(vec(2.0, 2.0))
        torch.testing.assert_close(cola.contents(), vec(2.0, 2.0).unsqueeze(0))

    def test_lote_mayor_que_capacidad(self):
        with pytest.raises(ConfigError):
            KeyQueue(4, 2).push(torch.zeros(5, 2, dtype=DTYPE))


class TestEpocaDePreentrenamiento:

    def test_lr_cero_deja_theta_q(self, datos_chicos):
        graph, features = datos_chicos
        with seeded_init(0):
            enc = Encoder(features.dim, 8, 8, num_layers=2)
        m = 0.9
        state = MoCoState.create(enc, queue_size=64, m=m, tau=0.07)
        with torch.no_grad():
            for p in state.encoder_k.parameters():
                p.add_(1.0)
        q0, k0 = parametros(state.encoder_q), parametros(state.encoder_k)

        anchors = np.arange(graph.node_count)
        state, loss = pretrain_epoch(graph, features, anchors, state, SamplerConfig(max_nodes=8, seed=2),
                                     lr=0.0, batch_size=32)
        t = math.ceil(graph.node_count / 32)
        assert state.step == t
        assert math.isfinite(loss)
        for a, p in zip(q0, state.encoder_q.parameters()):
            torch.testing.assert_close(p.detach(), a, atol=0, rtol=0)
        for a, b, pk in zip(k0, q0, state.encoder_k.parameters()):
            esperado = m ** t * a + (1 - m ** t) * b
            assert torch.max(torch.abs(pk - esperado)).item() < 1e-9

    def test_nodos_aislados_dan_log_n(self, build_graph):
        n = 16
        graph = build_graph(n, [])
        features = FeatureMatrix(np.ones((n, 3)), "random")
        with seeded_init(4):
            enc = Encoder(3, 8, 8, num_layers=2)
        state = MoCoState.create(enc, queue_size=64, m=0.999, tau=0.07)
        _, loss = pretrain_epoch(graph, features, np.arange(n), state, SamplerConfig(seed=0),
                                 lr=1e-3, batch_size=n)
        assert loss == pytest.approx(math.log(n), abs=1e-9)
        assert len(state.queue) == n

    def test_anclas_multi_entidad_son_objetivo(self, random_multi):
        g = random_multi(1)
        np.testing.assert_array_equal(pretrain_anchors(g), np.flatnonzero(g.node_type == 0))


class TestPreentrenarEncoder:

    def test_cero_epocas_es_inicializacion(self, datos_chicos, tiny_cfg):
        graph, features = datos_chicos
        enc, history = pretrain_encoder(graph, features, tiny_cfg, seed=8, epochs=0)
        pt = tiny_cfg.pretrain
        with seeded_init(8):
            fresco = Encoder(features.dim, pt.hidden_dim, pt.output_dim, pt.num_layers)
        assert history == []
        for a, b in zip(enc.parameters(), fresco.parameters()):
            torch.testing.assert_close(a, b, atol=0, rtol=0)

    def test_determinista(self, datos_chicos, tiny_cfg):
        graph, features = datos_chicos
        a, ha = pretrain_encoder(graph, features, tiny_cfg, seed=8)
        b, hb = pretrain_encoder(graph, features, tiny_cfg, seed=8)
        assert ha == hb
        for pa, pb in zip(a.parameters(), b.parameters()):
            torch.testing.assert_close(pa, pb, atol=0, rtol=0)

    def test_caso_de_uso_escribe_checkpoints(self, datos_chicos, tiny_cfg):
        graph, features = datos_chicos
        cfg = tiny_cfg.with_overrides(pretrain=tiny_cfg.pretrain.model_copy(update={"epochs": 2}))
        layout = OutputLayout.from_config(cfg)
        store = FileGraphStore()
        enc, history = PreentrenarEncoderUseCase(store).ejecutar(
            graph, features, cfg, layout.encoder, layout.encoder_epoch
        )
        assert len(history) == 2
        payload = store.load_checkpoint(layout.encoder, "encoder")
        assert payload["config_hash"] == cfg.config_hash()
        assert payload["extra"]["input_dim"] == features.dim
        assert payload["extra"]["loss_history"] == history
        for epoch in range(2):
            por_epoca = store.load_checkpoint(layout.encoder_epoch(epoch), "encoder")
            assert por_epoca["extra"]["epoch"] == epoch
        for k, v in enc.state_dict().items():
            torch.testing.assert_close(payload["state_dict"][k], v, atol=0, rtol=0)


@pytest.mark.slow
def test_perdida_baja_en_el_grafo_sintetico_por_defecto():
    cfg = PipelineConfig.from_toml(CONFIGS / "desk.toml")
    dataset = generate_synthetic(cfg.synth)
    single, _ = transform_to_single_entity(dataset.graph)
    features = init_features(single, cfg.features, cfg.seed)
    _, history = pretrain_encoder(single, features, cfg, cfg.seed, epochs=10)
    assert history[-1] < history[0]
