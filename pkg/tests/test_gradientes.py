"""Gradientes exactos contra diferencias centrales (h=1e-5, float64)."""
import numpy as np
import pytest
import torch
from torch import nn

from fraudgraph.domain.exceptions import NumericError
from fraudgraph.domain.nn.autograd import backward, build_optimizer, fd_check, opt_step
from fraudgraph.domain.nn.batch import DTYPE, SubGraphBatch
from fraudgraph.domain.nn.classifier import FineTuneModel, cross_entropy
from fraudgraph.domain.nn.layers import MLP, Encoder, GINLayer, readout
from fraudgraph.domain.nn.moco import info_nce
from tests.test_capas import adyacencia_al_azar, subgrafo

SEEDS = range(5)
TOL = 1e-4


def pesos_de_salida(shape, seed):
    return torch.as_tensor(np.random.default_rng(seed).standard_normal(shape) / np.prod(shape))


class TestBackward:

    def test_cuadratica(self):
        module = nn.Linear(3, 2, dtype=DTYPE)
        loss = 0.5 * sum((p ** 2).sum() for p in module.parameters())
        grads = backward(loss, module)
        for name, p in module.named_parameters():
            torch.testing.assert_close(grads[name], p.detach(), atol=0, rtol=0)

    def test_parametro_sin_uso_recibe_ceros(self):
        module = nn.ModuleDict({"a": nn.Linear(2, 1, dtype=DTYPE), "b": nn.Linear(2, 1, dtype=DTYPE)})
        loss = module["a"](torch.ones(1, 2, dtype=DTYPE)).sum()
        grads = backward(loss, module)
        assert torch.count_nonzero(grads["b.weight"]) == 0
        assert grads["b.weight"].shape == module["b"].weight.shape

    def test_gradiente_no_finito(self):
        module = nn.Linear(1, 1, bias=False, dtype=DTYPE)
        loss = (module.weight * torch.tensor(float("inf"), dtype=DTYPE)).sum()
        with pytest.raises(NumericError) as exc:
            backward(loss, module)
        assert exc.value.parameter_path == "weight"

    def test_paso_de_descenso(self):
        module = nn.Linear(1, 1, bias=False, dtype=DTYPE)
        with torch.no_grad():
            module.weight.fill_(1.0)
        opt = build_optimizer(module, "sgd", 0.1)
        opt_step(module, {"weight": torch.ones(1, 1, dtype=DTYPE)}, opt)
        assert module.weight.item() == pytest.approx(0.9, abs=1e-15)


class TestDiferenciasFinitas:

    @pytest.mark.parametrize("seed", SEEDS)
    def test_mlp(self, seed):
        torch.manual_seed(seed)
        mlp = MLP(3, 4, 2)
        x = torch.randn(5, 3, dtype=DTYPE)
        w = pesos_de_salida((5, 2), seed)
        assert fd_check(mlp, lambda: (mlp(x) * w).sum()) < TOL

    @pytest.mark.parametrize("seed", SEEDS)
    def test_gin(self, seed):
        torch.manual_seed(seed)
        layer = GINLayer(3, 4, 2)
        with torch.no_grad():
            layer.eps.fill_(0.1)
        rng = np.random.default_rng(seed)
        sub = subgrafo(adyacencia_al_azar(8, 0.4, seed), rng.standard_normal((8, 3)))
        batch = SubGraphBatch.collate([sub])
        w = pesos_de_salida((8, 2), seed)
        assert fd_check(layer, lambda: (layer(batch.x, batch.src, batch.dst) * w).sum()) < TOL

    @pytest.mark.parametrize("seed", SEEDS)
    def test_gin_con_aristas(self, seed):
        torch.manual_seed(seed)
        layer = GINLayer(3, 4, 2, edge_dim=2)
        rng = np.random.default_rng(seed)
        adj = adyacencia_al_azar(8, 0.4, seed)
        e = rng.integers(0, 2, size=(int(adj.sum()), 2)).astype(float)
        batch = SubGraphBatch.collate([subgrafo(adj, rng.standard_normal((8, 3)), e)])
        w = pesos_de_salida((8, 2), seed)

        def loss():
            return (layer(batch.x, batch.src, batch.dst, batch.edge_attr) * w).sum()
        assert fd_check(layer, loss) < TOL

    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("mode", ["sum", "mean"])
    def test_readout(self, seed, mode):
        torch.manual_seed(seed)
        lin = nn.Linear(3, 2, dtype=DTYPE)
        h = torch.randn(6, 3, dtype=DTYPE)
        gidx = torch.tensor([0, 0, 1, 1, 1, 2])
        w = pesos_de_salida((3, 2), seed)
        assert fd_check(lin, lambda: (readout(lin(h), gidx, 3, mode) * w).sum()) < TOL

    @pytest.mark.parametrize("seed", SEEDS)
    def test_info_nce(self, seed):
        torch.manual_seed(seed)
        rng = np.random.default_rng(seed)
        enc = Encoder(2, 4, 3, num_layers=2)
        sub = subgrafo(adyacencia_al_azar(6, 0.5, seed), rng.standard_normal((6, 2)))
        batch = SubGraphBatch.collate([sub])
        k = torch.as_tensor(rng.standard_normal(3))
        negs = torch.as_tensor(rng.standard_normal((5, 3)))
        assert fd_check(enc, lambda: info_nce(enc(batch, "SE")[0], k, negs, 0.5)) < TOL

    @pytest.mark.parametrize("seed", SEEDS)
    def test_entropia_cruzada(self, seed):
        torch.manual_seed(seed)
        rng = np.random.default_rng(seed)
        model = FineTuneModel.create(2, 2, hidden_dim=3, output_dim=3, num_layers=2,
                                     embed_dim=3, head_hidden=3)
        subs = []
        for n in (3, 4, 5):
            adj = adyacencia_al_azar(n, 0.6, seed + n)
            e = rng.integers(0, 2, size=(int(adj.sum()), 2)).astype(float)
            subs.append(subgrafo(adj, rng.standard_normal((n, 2)), e))
        batch = SubGraphBatch.collate(subs)
        labels = [0, 1, 1]
        assert fd_check(model, lambda: cross_entropy(torch.softmax(model(batch, "SE"), -1), labels)) < TOL
