from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SubGraph:
    """
    Sub-grafo inducido por un muestreo RWR dentro de la red ego del ancla.

    Los miembros van en orden ascendente de id del grafo padre; el ancla se
    ubica con `anchor_index`. La adyacencia es local (ids 0..len(members)-1)
    y contiene exactamente las aristas del padre entre miembros.

    Campos:
        anchor: id del ancla en el grafo padre
        members: ids del padre, ordenados y unicos
        anchor_index: posicion del ancla dentro de members
        indptr, indices: CSR local
        node_features: (len(members), dim)
        edge_features: (len(indices), d), alineado con indices
    """

    anchor: int
    members: np.ndarray
    anchor_index: int
    indptr: np.ndarray
    indices: np.ndarray
    node_features: np.ndarray
    edge_features: np.ndarray

    @property
    def size(self) -> int:
        return int(self.members.shape[0])

    @property
    def edge_count(self) -> int:
        return int(self.indices.shape[0] // 2)

    def edge_index(self) -> tuple[np.ndarray, np.ndarray]:
        """(origen, destino) locales de cada entrada dirigida."""
        dst = np.repeat(np.arange(self.size), np.diff(self.indptr))
        return self.indices.astype(np.int64), dst
