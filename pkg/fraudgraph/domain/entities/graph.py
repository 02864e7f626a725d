from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from fraudgraph.domain.exceptions import BipartitenessError, GraphValidationError


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def csr_from_pairs(n: int, rows: np.ndarray, cols: np.ndarray, *payloads: np.ndarray):
    """
    Ordena pares (fila, columna) y arma indptr/indices de una CSR.

    Los payloads (relacion, features, conteos) se reordenan igual que los
    pares, asi quedan alineados con `indices`.

    Returns:
        (indptr, indices, [payloads reordenados])
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    counts = np.bincount(rows, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, cols, [np.asarray(p)[order] for p in payloads]


@dataclass(frozen=True)
class CSRGraph(ABC):
    """
    Base de los grafos del dominio: adyacencia no dirigida en formato CSR.

    Cada arista no dirigida (u, v) aparece dos veces, en la fila de u y en
    la de v. Los arreglos alineados con `indices` (relacion, features de
    arista) se indexan con el mismo numero de entrada.
    """

    indptr: np.ndarray
    indices: np.ndarray

    @property
    def node_count(self) -> int:
        return int(self.indptr.shape[0] - 1)

    @property
    def edge_count(self) -> int:
        """Aristas no dirigidas."""
        return int(self.indices.shape[0] // 2)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.node_count else 0

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def to_csr(self, data: np.ndarray | None = None) -> sp.csr_matrix:
        """Adyacencia como scipy CSR; por defecto con unos."""
        if data is None:
            data = np.ones(self.indices.shape[0], dtype=np.float64)
        n = self.node_count
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    def reverse_edge_index(self) -> np.ndarray:
        """perm[e] = posicion de la arista (v, u) para la entrada e = (u, v)."""
        ids = np.arange(1, self.indices.shape[0] + 1, dtype=np.int64)
        transposed = self.to_csr(ids).T.tocsr()
        transposed.sort_indices()
        if not (np.array_equal(transposed.indptr, self.indptr)
                and np.array_equal(transposed.indices, self.indices)):
            raise GraphValidationError("la adyacencia no es simetrica")
        return transposed.data.astype(np.int64) - 1

    @property
    @abstractmethod
    def edge_dim(self) -> int:
        """Ancho de la feature de arista que ve la capa GIN."""

    @abstractmethod
    def edge_feature_matrix(self) -> np.ndarray:
        """Matriz (arcos x edge_dim) alineada con `indices`."""

    def _validate_structure(self) -> None:
        n = self.node_count
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= n):
            raise GraphValidationError("indice de vecino fuera de rango")
        rows = np.repeat(np.arange(n), self.degrees)
        if np.any(rows == self.indices):
            raise GraphValidationError("el grafo tiene lazos (self-loops)")
        for u in range(n):
            nb = self.neighbors(u)
            if nb.size > 1 and np.any(np.diff(nb) <= 0):
                raise GraphValidationError(f"vecinos de {u} duplicados o desordenados")
        self.reverse_edge_index()


@dataclass(frozen=True)
class MultiEntityGraph(CSRGraph):
    """
    Grafo multi-entidad no atribuido G_m = (V_m, E_m, O_V, R_E).

    RESPONSABILIDAD:
    - Guardar el tipo de cada nodo y la relacion de cada arista
    - Garantizar las invariantes: simetria, sin lazos ni duplicados,
      bipartito entre entidades objetivo y no objetivo

    El orden de los tipos no objetivo (ids ascendentes sin el objetivo)
    define las dimensiones de las features de arista tras la transformacion.
    """

    node_type: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    type_names: tuple[str, ...] = ()
    target_type_id: int = 0
    relation: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    relation_count: int = 0

    @classmethod
    def from_edges(
        cls,
        node_type: np.ndarray,
        type_names: tuple[str, ...] | list[str],
        target_type_id: int,
        src: np.ndarray,
        dst: np.ndarray,
        relation: np.ndarray | None = None,
        relation_count: int | None = None,
    ) -> "MultiEntityGraph":
        """
        Construye y valida el grafo a partir de una lista de aristas.

        FLUJO:
        1. Rechazar lazos y aristas objetivo-objetivo / no objetivo-no objetivo
        2. Orientar cada arista como (objetivo, no objetivo) y deduplicar
           (gana la primera aparicion y su relacion)
        3. Simetrizar y ordenar en CSR

        Raises:
            GraphValidationError: ids o tipos fuera de rango, lazos
            BipartitenessError: arista entre dos nodos del mismo lado
        """
        node_type = np.asarray(node_type, dtype=np.int64)
        type_names = tuple(type_names)
        n = node_type.shape[0]
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if node_type.size and (node_type.min() < 0 or node_type.max() >= len(type_names)):
            raise GraphValidationError("tipo de nodo fuera de rango")
        if not 0 <= target_type_id < len(type_names):
            raise GraphValidationError(f"tipo objetivo {target_type_id} fuera de rango")
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise GraphValidationError("arista con id de nodo fuera de rango")
        if np.any(src == dst):
            bad = int(src[src == dst][0])
            raise GraphValidationError(f"lazo en el nodo {bad}")

        is_target = node_type == target_type_id
        same_side = is_target[src] == is_target[dst]
        if np.any(same_side):
            i = int(np.flatnonzero(same_side)[0])
            raise BipartitenessError(
                f"la arista ({src[i]}, {dst[i]}) une dos nodos del mismo lado "
                f"(tipos {type_names[node_type[src[i]]]}/{type_names[node_type[dst[i]]]})"
            )

        t = np.where(is_target[src], src, dst)
        o = np.where(is_target[src], dst, src)
        if relation is None:
            non_target = [tid for tid in range(len(type_names)) if tid != target_type_id]
            position = np.full(len(type_names), -1, dtype=np.int64)
            position[non_target] = np.arange(len(non_target))
            relation = position[node_type[o]]
        relation = np.asarray(relation, dtype=np.int64)
        if relation.size and relation.min() < 0:
            raise GraphValidationError("id de relacion negativo")

        _, first = np.unique(t * n + o, return_index=True)
        first = np.sort(first)
        t, o, relation = t[first], o[first], relation[first]

        if relation_count is None:
            relation_count = max(int(relation.max()) + 1 if relation.size else 0,
                                 len(type_names) - 1)
        elif relation.size and relation.max() >= relation_count:
            raise GraphValidationError("id de relacion fuera de rango")

        indptr, indices, (rel,) = csr_from_pairs(
            n, np.concatenate([t, o]), np.concatenate([o, t]), np.concatenate([relation, relation])
        )
        return cls(
            indptr=_readonly(indptr),
            indices=_readonly(indices),
            node_type=_readonly(node_type),
            type_names=type_names,
            target_type_id=int(target_type_id),
            relation=_readonly(rel),
            relation_count=int(relation_count),
        )

    @property
    def target_type(self) -> str:
        return self.type_names[self.target_type_id]

    @property
    def non_target_type_ids(self) -> tuple[int, ...]:
        return tuple(t for t in range(len(self.type_names)) if t != self.target_type_id)

    @property
    def non_target_type_names(self) -> tuple[str, ...]:
        return tuple(self.type_names[t] for t in self.non_target_type_ids)

    @property
    def target_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.node_type == self.target_type_id)

    def type_counts(self) -> dict[str, int]:
        counts = np.bincount(self.node_type, minlength=len(self.type_names))
        return {name: int(c) for name, c in zip(self.type_names, counts)}

    @property
    def edge_dim(self) -> int:
        return max(self.relation_count, 1)

    def edge_feature_matrix(self) -> np.ndarray:
        """One-hot del tipo de relacion, dimension |R_E|."""
        out = np.zeros((self.indices.shape[0], max(self.relation_count, 1)), dtype=np.float64)
        out[np.arange(self.indices.shape[0]), self.relation] = 1.0
        return out

    def validate(self) -> "MultiEntityGraph":
        self._validate_structure()
        if self.node_type.shape[0] != self.node_count:
            raise GraphValidationError("node_type no coincide con el numero de nodos")
        is_target = self.node_type == self.target_type_id
        rows = np.repeat(np.arange(self.node_count), self.degrees)
        if np.any(is_target[rows] == is_target[self.indices]):
            raise BipartitenessError("hay aristas entre nodos del mismo lado")
        if self.relation.size and (self.relation.min() < 0
                                   or self.relation.max() >= self.relation_count):
            raise GraphValidationError("relacion fuera de rango")
        perm = self.reverse_edge_index()
        if not np.array_equal(self.relation, self.relation[perm]):
            raise GraphValidationError("la relacion de (u,v) y (v,u) difiere")
        return self


@dataclass(frozen=True)
class SingleEntityGraph(CSRGraph):
    """
    Grafo de una sola entidad G_s con features de arista binarias.

    Campos:
        edge_features: (2|E_s|, d) en {0,1}, alineado con `indices`
        type_order: nombre del tipo no objetivo de cada dimension
        origin_ids: id en el grafo multi-entidad de cada nodo
        shared_counts: opcional, cuantas entidades de cada tipo comparte el par
    """

    edge_features: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.uint8))
    type_order: tuple[str, ...] = ()
    origin_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    shared_counts: np.ndarray | None = None
    target_type: str = "target"

    @classmethod
    def build(
        cls,
        indptr: np.ndarray,
        indices: np.ndarray,
        edge_features: np.ndarray,
        type_order: tuple[str, ...],
        origin_ids: np.ndarray,
        shared_counts: np.ndarray | None = None,
        target_type: str = "target",
    ) -> "SingleEntityGraph":
        return cls(
            indptr=_readonly(np.asarray(indptr, dtype=np.int64)),
            indices=_readonly(np.asarray(indices, dtype=np.int64)),
            edge_features=_readonly(np.asarray(edge_features, dtype=np.uint8)),
            type_order=tuple(type_order),
            origin_ids=_readonly(np.asarray(origin_ids, dtype=np.int64)),
            shared_counts=None if shared_counts is None
            else _readonly(np.asarray(shared_counts, dtype=np.int64)),
            target_type=target_type,
        )

    @property
    def feature_dim(self) -> int:
        return len(self.type_order)

    @property
    def edge_dim(self) -> int:
        return self.feature_dim

    def edge_feature_matrix(self) -> np.ndarray:
        return self.edge_features.astype(np.float64)

    def edge_set(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """{(u, v) con u < v: bits}; util para comparar contra un oraculo."""
        out = {}
        for u in range(self.node_count):
            for e in range(self.indptr[u], self.indptr[u + 1]):
                v = int(self.indices[e])
                if u < v:
                    out[(u, v)] = tuple(int(b) for b in self.edge_features[e])
        return out

    def validate(self) -> "SingleEntityGraph":
        self._validate_structure()
        if self.origin_ids.shape[0] != self.node_count:
            raise GraphValidationError("origin_ids no coincide con el numero de nodos")
        if self.edge_features.shape != (self.indices.shape[0], self.feature_dim):
            raise GraphValidationError("edge_features no esta alineado con las aristas")
        if self.edge_features.size and not np.isin(self.edge_features, (0, 1)).all():
            raise GraphValidationError("las features de arista deben ser binarias")
        if self.indices.size and np.any(self.edge_features.sum(axis=1) == 0):
            raise GraphValidationError("arista sin ningun bit encendido")
        perm = self.reverse_edge_index()
        if not np.array_equal(self.edge_features, self.edge_features[perm]):
            raise GraphValidationError("las features de (u,v) y (v,u) difieren")
        return self
