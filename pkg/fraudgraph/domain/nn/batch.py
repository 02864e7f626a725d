from dataclasses import dataclass

import numpy as np
import torch

from fraudgraph.domain.entities.subgraph import SubGraph
from fraudgraph.domain.exceptions import ShapeError

DTYPE = torch.float64


@dataclass
class SubGraphBatch:
    """
    Varios sub-grafos unidos en un grafo bloque-diagonal.

    Las aristas se guardan como pares dirigidos (src -> dst), ordenados por
    nodo destino y luego por origen; la suma de mensajes sigue ese orden,
    asi que el resultado es reproducible bit a bit.
    """

    x: torch.Tensor
    src: torch.Tensor
    dst: torch.Tensor
    edge_attr: torch.Tensor
    graph_index: torch.Tensor
    anchor_pos: torch.Tensor
    num_graphs: int

    @classmethod
    def collate(cls, subs: list[SubGraph]) -> "SubGraphBatch":
        if not subs:
            raise ShapeError("no se puede armar un lote vacio")
        feat_dims = {s.node_features.shape[1] for s in subs}
        edge_dims = {s.edge_features.shape[1] for s in subs}
        if len(feat_dims) != 1 or len(edge_dims) > 1:
            raise ShapeError("los sub-grafos del lote tienen dimensiones distintas")
        xs, srcs, dsts, eas, gidx, anchors = [], [], [], [], [], []
        offset = 0
        for i, s in enumerate(subs):
            src, dst = s.edge_index()
            xs.append(s.node_features)
            srcs.append(src + offset)
            dsts.append(dst + offset)
            eas.append(s.edge_features)
            gidx.append(np.full(s.size, i, dtype=np.int64))
            anchors.append(offset + s.anchor_index)
            offset += s.size

        return cls(
            x=torch.as_tensor(np.concatenate(xs), dtype=DTYPE),
            src=torch.as_tensor(np.concatenate(srcs), dtype=torch.long),
            dst=torch.as_tensor(np.concatenate(dsts), dtype=torch.long),
            edge_attr=torch.as_tensor(np.concatenate(eas), dtype=DTYPE),
            graph_index=torch.as_tensor(np.concatenate(gidx), dtype=torch.long),
            anchor_pos=torch.as_tensor(anchors, dtype=torch.long),
            num_graphs=len(subs),
        )


def sample_batch_graphs(sampler, anchors, step: int = 0) -> SubGraphBatch:
    """Un sub-grafo RWR por ancla, ya colapsados en un solo lote."""
    return SubGraphBatch.collate([sampler.single(int(a), step) for a in anchors])
