from dataclasses import dataclass

import numpy as np

from fraudgraph.domain.exceptions import DistinctnessError, GraphValidationError

BENIGN = 0
FRAUD = 1


@dataclass(frozen=True)
class LabeledSet:
    """
    Nodos anotados: 0 = benigno, 1 = sospechoso.

    REGLAS:
    - Cada nodo aparece una sola vez
    - Solo se aceptan las etiquetas 0 y 1

    Ejemplo:
        etiquetas = LabeledSet.from_pairs([(3, 1), (7, 0)])
        print(len(etiquetas), etiquetas.class_counts())  # 2 {0: 1, 1: 1}
    """

    nodes: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.int64).reshape(-1)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if nodes.shape != labels.shape:
            raise GraphValidationError("nodes y labels deben tener el mismo largo")
        if labels.size and not np.isin(labels, (BENIGN, FRAUD)).all():
            raise GraphValidationError("las etiquetas solo pueden ser 0 o 1")
        if np.unique(nodes).size != nodes.size:
            raise DistinctnessError("nodo etiquetado mas de una vez")
        if nodes.size and nodes.min() < 0:
            raise GraphValidationError("id de nodo negativo")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_pairs(cls, pairs) -> "LabeledSet":
        pairs = list(pairs)
        if not pairs:
            return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
        nodes, labels = zip(*pairs)
        return cls(np.array(nodes), np.array(labels))

    def __len__(self) -> int:
        return int(self.nodes.shape[0])

    def class_counts(self) -> dict[int, int]:
        return {c: int(np.sum(self.labels == c)) for c in (BENIGN, FRAUD)}

    def has_both_classes(self) -> bool:
        counts = self.class_counts()
        return counts[BENIGN] > 0 and counts[FRAUD] > 0

    def validate_against(self, node_count: int) -> "LabeledSet":
        if self.nodes.size and self.nodes.max() >= node_count:
            raise GraphValidationError(
                f"nodo etiquetado {int(self.nodes.max())} fuera de rango (n={node_count})"
            )
        return self

    def subset(self, positions: np.ndarray) -> "LabeledSet":
        positions = np.asarray(positions, dtype=np.int64)
        return LabeledSet(self.nodes[positions], self.labels[positions])

    def remap(self, mapping: dict[int, int]) -> "LabeledSet":
        """
        Traduce los ids con `mapping`; los nodos sin traduccion se descartan.

        Se usa para pasar etiquetas del espacio multi-entidad al de un solo
        tipo de entidad (ver SingleEntityGraph.origin_ids).
        """
        keep = [i for i, n in enumerate(self.nodes) if int(n) in mapping]
        nodes = np.array([mapping[int(self.nodes[i])] for i in keep], dtype=np.int64)
        return LabeledSet(nodes, self.labels[keep])

    def label_of(self) -> dict[int, int]:
        return {int(n): int(y) for n, y in zip(self.nodes, self.labels)}
