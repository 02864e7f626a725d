from pathlib import Path

import numpy as np

from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import MultiEntityGraph, SingleEntityGraph
from fraudgraph.domain.entities.labeled_set import LabeledSet
from fraudgraph.domain.ports.graph_store_port import GraphStorePort
from fraudgraph.infrastructure.io import artifact_files, graph_files


class FileGraphStore(GraphStorePort):
    """
    Adaptador de GraphStorePort sobre archivos locales.

    Formatos:
    - multi-entidad: listas TSV (aristas, tipos) con cabecera comentada
    - una sola entidad: .npz con cabecera JSON
    - features: texto con cabecera JSON
    - checkpoints: torch.save con version de formato y eco de configuracion
    """

    def load_multi(self, edges: Path, types: Path, target_type: str) -> MultiEntityGraph:
        return graph_files.load_multi_entity_graph(edges, types, target_type)

    def save_multi(self, g: MultiEntityGraph, edges: Path, types: Path, config_hash: str) -> None:
        graph_files.save_multi_entity_graph(g, edges, types, {"config_hash": config_hash})

    def load_single(self, path: Path) -> SingleEntityGraph:
        return graph_files.load_single_entity_graph(path)

    def save_single(self, g: SingleEntityGraph, path: Path, config_hash: str) -> None:
        graph_files.save_single_entity_graph(g, path, config_hash)

    def load_labels(self, path: Path, origin_ids: np.ndarray | None = None) -> LabeledSet:
        return graph_files.load_labels(path, origin_ids)

    def save_labels(self, labeled: LabeledSet, path: Path, config_hash: str) -> None:
        graph_files.save_labels(labeled, path, {"config_hash": config_hash})

    def load_features(self, path: Path) -> FeatureMatrix:
        return artifact_files.load_feature_matrix(path)

    def save_features(self, fm: FeatureMatrix, path: Path, config_hash: str) -> None:
        artifact_files.save_feature_matrix(fm, path, config_hash)

    def save_checkpoint(self, path: Path, state_dict: dict, kind: str, config: dict,
                        config_hash: str, extra: dict | None = None) -> None:
        artifact_files.save_checkpoint(path, state_dict, kind, config, config_hash, extra)

    def load_checkpoint(self, path: Path, kind: str | None = None) -> dict:
        return artifact_files.load_checkpoint(path, kind)
