from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np

from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import MultiEntityGraph, SingleEntityGraph
from fraudgraph.domain.entities.labeled_set import LabeledSet


class GraphStorePort(ABC):
    """
    Puerto de salida para los artefactos de grafo del pipeline.

    Los casos de uso leen y escriben grafos, etiquetas y features solo a
    traves de este contrato; FileGraphStore lo implementa sobre archivos.
    Cada escritura recibe el hash de configuracion que se guarda con el
    artefacto.
    """

    @abstractmethod
    def load_multi(self, edges: Path, types: Path, target_type: str) -> MultiEntityGraph:
        """
        Carga un grafo multi-entidad desde lista de aristas + tipos.

        Raises:
            ParseError: linea mal formada
            BipartitenessError: arista entre nodos del mismo lado
        """

    @abstractmethod
    def save_multi(self, g: MultiEntityGraph, edges: Path, types: Path, config_hash: str) -> None:
        """
        Escribe la lista de aristas (`src dst relation`) y la tabla de tipos.

        Args:
            g: grafo multi-entidad validado
            edges: destino de las aristas, una por par no dirigido
            types: destino de `node_id type`
            config_hash: hash que se escribe en la cabecera de ambos archivos
        """

    @abstractmethod
    def load_single(self, path: Path) -> SingleEntityGraph:
        """
        Carga G_s desde su .npz.

        Raises:
            ArtifactIOError: archivo faltante, formato desconocido o arreglos faltantes
        """

    @abstractmethod
    def save_single(self, g: SingleEntityGraph, path: Path, config_hash: str) -> None:
        """Guarda G_s con sus origin_ids y features de arista."""

    @abstractmethod
    def load_labels(self, path: Path, origin_ids: np.ndarray | None = None) -> LabeledSet:
        """
        Lee etiquetas; con `origin_ids` las traduce al grafo de una sola entidad.
        """

    @abstractmethod
    def save_labels(self, labeled: LabeledSet, path: Path, config_hash: str) -> None:
        """Escribe `node_id label` en ids del grafo de origen."""

    @abstractmethod
    def load_features(self, path: Path) -> FeatureMatrix:
        """
        Lee una matriz de features escrita por save_features.

        Raises:
            ArtifactIOError: archivo faltante, sin cabecera o con valores invalidos
        """

    @abstractmethod
    def save_features(self, fm: FeatureMatrix, path: Path, config_hash: str) -> None:
        """Escribe una fila por nodo con el metodo en la cabecera."""

    @abstractmethod
    def save_checkpoint(self, path: Path, state_dict: dict, kind: str, config: dict,
                        config_hash: str, extra: dict | None = None) -> None:
        """Pesos de un modelo con el eco de configuracion ("encoder" o "finetune")."""

    @abstractmethod
    def load_checkpoint(self, path: Path, kind: str | None = None) -> dict:
        """
        Raises:
            ArtifactIOError: archivo faltante, ilegible o de otro tipo
        """
