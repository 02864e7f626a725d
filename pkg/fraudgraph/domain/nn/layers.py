from contextlib import contextmanager

import torch
import torch.nn.functional as F
from torch import nn

from fraudgraph.domain.entities.subgraph import SubGraph
from fraudgraph.domain.exceptions import ShapeError
from fraudgraph.domain.nn.batch import DTYPE, SubGraphBatch


class MLP(nn.Module):
    """
    Dos capas afines con ReLU en el medio (la salida queda lineal).

    activation="linear" quita la ReLU; se usa en pruebas de identidad.
    """

    def __init__(self, in_dim: int, hidden_dim: int, out_dim: int, activation: str = "relu"):
        super().__init__()
        self.lin1 = nn.Linear(in_dim, hidden_dim, dtype=DTYPE)
        self.lin2 = nn.Linear(hidden_dim, out_dim, dtype=DTYPE)
        self.activation = activation

    @property
    def in_dim(self) -> int:
        return self.lin1.in_features

    @property
    def out_dim(self) -> int:
        return self.lin2.out_features

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_dim:
            raise ShapeError(f"MLP espera dim {self.in_dim}, recibio {x.shape[-1]}")
        h = self.lin1(x)
        if self.activation == "relu":
            h = F.relu(h)
        return self.lin2(h)


class GINLayer(nn.Module):
    """
    Capa GIN con agregacion por suma.

    Sin features de arista:
        x_i' = MLP((1 + eps) x_i + sum_j x_j)
    Con features de arista (edge_dim dado):
        x_i'' = MLP((1 + eps) x_i + sum_j ReLU(x_j + P e_ij))
    donde P es una proyeccion afin aprendida de dim d a la dim del nodo.

    eps es un escalar aprendible que arranca en 0.
    """

    def __init__(self, in_dim: int, hidden_dim: int, out_dim: int, edge_dim: int | None = None):
        super().__init__()
        self.eps = nn.Parameter(torch.zeros((), dtype=DTYPE))
        self.mlp = MLP(in_dim, hidden_dim, out_dim)
        self.edge_proj = nn.Linear(edge_dim, in_dim, dtype=DTYPE) if edge_dim else None

    @property
    def edge_aware(self) -> bool:
        return self.edge_proj is not None

    def forward(
        self,
        x: torch.Tensor,
        src: torch.Tensor,
        dst: torch.Tensor,
        edge_attr: torch.Tensor | None = None,
    ) -> torch.Tensor:
        if x.shape[-1] != self.mlp.in_dim:
            raise ShapeError(f"GIN espera features de dim {self.mlp.in_dim}, recibio {x.shape[-1]}")
        if edge_attr is not None and self.edge_proj is not None:
            if edge_attr.shape != (src.shape[0], self.edge_proj.in_features):
                raise ShapeError("features de arista no alineadas con las aristas del sub-grafo")
            msg = F.relu(x[src] + self.edge_proj(edge_attr))
        else:
            msg = x[src]
        agg = torch.zeros_like(x).index_add(0, dst, msg)
        return self.mlp((1 + self.eps) * x + agg)


def readout(h: torch.Tensor, graph_index: torch.Tensor | None = None,
            num_graphs: int = 1, mode: str = "sum") -> torch.Tensor:
    """
    Pooling por sub-grafo: suma por defecto, media opcional.

    Con graph_index=None todas las filas son de un mismo grafo y se
    devuelve un vector.
    """
    if h.shape[0] == 0:
        raise ShapeError("readout sobre una entrada vacia")
    if graph_index is None:
        return h.sum(dim=0) if mode == "sum" else h.mean(dim=0)
    pooled = torch.zeros((num_graphs, h.shape[1]), dtype=h.dtype).index_add(0, graph_index, h)
    if mode == "mean":
        counts = torch.zeros(num_graphs, dtype=h.dtype).index_add(
            0, graph_index, torch.ones_like(graph_index, dtype=h.dtype)
        )
        pooled = pooled / counts.unsqueeze(1)
    return pooled


class Encoder(nn.Module):
    """
    Codificador GIN apilado (3 capas en la configuracion por defecto).

    RESPONSABILIDAD:
    - Encadenar las capas input -> hidden -> ... -> output con ReLU entre ellas
    - NE: devolver la fila del ancla; SE: hacer readout sobre los miembros
    - Con edge_dim usa la agregacion con aristas; sin el, solo nodos

    Ejemplo:
        enc = Encoder(input_dim=16, hidden_dim=16, output_dim=16)
        emb = enc(SubGraphBatch.collate(subs), mode="SE")   # (len(subs), 16)
    """

    def __init__(
        self,
        input_dim: int,
        hidden_dim: int,
        output_dim: int,
        num_layers: int = 3,
        edge_dim: int | None = None,
        readout: str = "sum",
    ):
        super().__init__()
        dims = [input_dim] + [hidden_dim] * (num_layers - 1) + [output_dim]
        self.layers = nn.ModuleList(
            GINLayer(dims[i], hidden_dim, dims[i + 1], edge_dim) for i in range(num_layers)
        )
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.output_dim = output_dim
        self.edge_dim = edge_dim
        self.readout_mode = readout

    @property
    def edge_aware(self) -> bool:
        return self.edge_dim is not None

    def node_embeddings(self, batch: SubGraphBatch) -> torch.Tensor:
        if batch.x.shape[1] != self.input_dim:
            raise ShapeError(
                f"el codificador espera features de dim {self.input_dim}, recibio {batch.x.shape[1]}"
            )
        edge_attr = batch.edge_attr if self.edge_aware else None
        h = batch.x
        for i, layer in enumerate(self.layers):
            h = layer(h, batch.src, batch.dst, edge_attr)
            if i < len(self.layers) - 1:
                h = F.relu(h)
        return h

    def forward(self, batch: SubGraphBatch, mode: str = "SE") -> torch.Tensor:
        h = self.node_embeddings(batch)
        if mode == "NE":
            return h[batch.anchor_pos]
        return readout(h, batch.graph_index, batch.num_graphs, self.readout_mode)


def _sub_tensors(sub: SubGraph) -> tuple[torch.Tensor, torch.Tensor]:
    src, dst = sub.edge_index()
    return torch.as_tensor(src, dtype=torch.long), torch.as_tensor(dst, dtype=torch.long)


def mlp_forward(mlp: MLP, x: torch.Tensor) -> torch.Tensor:
    """Aplica el MLP fila por fila; valida el ancho de entrada."""
    return mlp(x)


def gin_layer(layer: GINLayer, sub: SubGraph, x: torch.Tensor) -> torch.Tensor:
    """Agregacion sin aristas sobre un sub-grafo."""
    if x.shape[0] != sub.size:
        raise ShapeError(f"X tiene {x.shape[0]} filas y el sub-grafo {sub.size} miembros")
    src, dst = _sub_tensors(sub)
    return layer(x, src, dst)


def gin_edge_layer(layer: GINLayer, sub: SubGraph, x: torch.Tensor, e: torch.Tensor) -> torch.Tensor:
    """Agregacion con features de arista; `e` alineado con sub.indices."""
    if x.shape[0] != sub.size:
        raise ShapeError(f"X tiene {x.shape[0]} filas y el sub-grafo {sub.size} miembros")
    if not layer.edge_aware:
        raise ShapeError("la capa no tiene proyeccion de aristas")
    src, dst = _sub_tensors(sub)
    return layer(x, src, dst, e)


def encoder_forward(encoder: Encoder, sub: SubGraph, mode: str = "SE") -> torch.Tensor:
    """
    Embedding de un solo sub-grafo.

    Args:
        encoder: encoder GIN
        sub: sub-grafo muestreado alrededor de un ancla
        mode: "SE" lee todo el sub-grafo; "NE" solo el nodo ancla

    Returns:
        torch.Tensor: vector de dimension encoder.out_dim
    """
    return encoder(SubGraphBatch.collate([sub]), mode)[0]


@contextmanager
def seeded_init(seed: int):
    """Inicializa pesos con una semilla propia sin tocar el RNG global de torch."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield
