"""
Artefactos del pipeline que no son grafos: matrices de features,
checkpoints de torch, tablas TSV y manifiestos.

Todos llevan el hash de configuracion que los produjo.
"""
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
import torch

from fraudgraph.application.dto.manifest_dto import RunManifest
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.exceptions import ArtifactIOError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 1


def save_feature_matrix(fm: FeatureMatrix, path: str | Path, config_hash: str = "") -> Path:
    """
    Texto plano: una fila por nodo, precision completa (%.17g).

    La primera linea es un comentario JSON con metodo, dimension,
    parametros y hash de configuracion.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"method": fm.method, "dim": fm.dim, "config": fm.config, "config_hash": config_hash}
    np.savetxt(path, fm.values, fmt="%.17g", delimiter="\t",
               header=json.dumps(header, sort_keys=True), comments="# ")
    return path


def load_feature_matrix(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            first = fh.readline()
    except FileNotFoundError as exc:
        raise ArtifactIOError(f"no existe el archivo {path}") from exc
    if not first.startswith("# "):
        raise ArtifactIOError(f"{path}: falta la cabecera de la matriz de features")
    try:
        header = json.loads(first[2:])
        values = np.loadtxt(path, delimiter="\t", comments="#", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise ArtifactIOError(f"{path}: matriz de features invalida ({exc})") from exc
    if values.size == 0:
        values = values.reshape(0, int(header["dim"]))
    return FeatureMatrix(values, header["method"], header.get("config", {}))


def save_checkpoint(
    path: str | Path,
    state_dict: dict,
    kind: str,
    config: dict,
    config_hash: str,
    extra: dict | None = None,
) -> Path:
    """
    Guarda pesos con torch.save.

    Contenido: format_version, kind ("encoder" o "finetune"), state_dict,
    config (eco JSON), config_hash y `extra` (dims, epoca, historia de perdida).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": CHECKPOINT_FORMAT,
        "kind": kind,
        "state_dict": {k: v.detach().clone() for k, v in state_dict.items()},
        "config": config,
        "config_hash": config_hash,
        "extra": extra or {},
    }
    torch.save(payload, path)
    logger.debug("checkpoint %s escrito en %s", kind, path)
    return path


def load_checkpoint(path: str | Path, kind: str | None = None) -> dict:
    path = Path(path)
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except FileNotFoundError as exc:
        raise ArtifactIOError(f"no existe el checkpoint {path}") from exc
    except (RuntimeError, EOFError, ValueError) as exc:
        raise ArtifactIOError(f"{path}: checkpoint ilegible ({exc})") from exc
    if payload.get("format_version") != CHECKPOINT_FORMAT:
        raise ArtifactIOError(f"{path}: version de checkpoint no soportada")
    if kind is not None and payload.get("kind") != kind:
        raise ArtifactIOError(f"{path}: se esperaba un checkpoint '{kind}', es '{payload.get('kind')}'")
    return payload


def write_table(df: pd.DataFrame, path: str | Path, header: dict | None = None) -> Path:
    """TSV con una linea de comentario JSON opcional al principio."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if header:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        df.to_csv(fh, sep="\t", index=False, float_format="%.10g", lineterminator="\n")
    return path


def read_table(path: str | Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, sep="\t", comment="#")
    except FileNotFoundError as exc:
        raise ArtifactIOError(f"no existe el archivo {path}") from exc


def write_manifest(manifest: RunManifest, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest.model_dump(mode="json"), sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> RunManifest:
    path = Path(path)
    try:
        return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ArtifactIOError(f"no existe el manifiesto {path}") from exc
