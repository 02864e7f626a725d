"""
Lectura y escritura de grafos y etiquetas.

Formatos de texto (separados por TAB; lineas vacias o que empiezan con '#'
se ignoran):
    aristas:  src_id<TAB>dst_id[<TAB>relation_id]
    tipos:    node_id<TAB>type_name
    etiquetas: node_id<TAB>{0|1}

El grafo de una sola entidad se guarda en un .npz (ver save_single_entity_graph).
"""
import json
import logging
from pathlib import Path

import numpy as np

from fraudgraph.domain.entities.graph import MultiEntityGraph, SingleEntityGraph
from fraudgraph.domain.entities.labeled_set import LabeledSet
from fraudgraph.domain.exceptions import ArtifactIOError, GraphValidationError, ParseError

logger = logging.getLogger(__name__)

SINGLE_GRAPH_FORMAT = "fraudgraph-single/1"


def _rows(path: Path, min_cols: int, max_cols: int):
    """(numero de linea, campos) de cada linea con datos."""
    try:
        fh = path.open("r", encoding="utf-8")
    except FileNotFoundError as exc:
        raise ArtifactIOError(f"no existe el archivo {path}") from exc
    with fh:
        for line_number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if not min_cols <= len(fields) <= max_cols:
                raise ParseError(path, line_number,
                                 f"se esperaban {min_cols}-{max_cols} columnas, hay {len(fields)}")
            yield line_number, fields


def _int(path: Path, line_number: int, value: str, what: str) -> int:
    try:
        out = int(value)
    except ValueError:
        raise ParseError(path, line_number, f"{what} no es un entero: {value!r}") from None
    if out < 0:
        raise ParseError(path, line_number, f"{what} negativo: {out}")
    return out


def _write_lines(path: Path, header: dict | None, lines) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        if header:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        for line in lines:
            fh.write(line + "\n")
    return path


def load_node_types(path: str | Path) -> tuple[np.ndarray, tuple[str, ...]]:
    """
    Lee el archivo de tipos.

    Los ids de tipo se asignan por orden de primera aparicion; ese orden
    fija las dimensiones de las features de arista.
    """
    path = Path(path)
    seen: dict[int, int] = {}
    names: list[str] = []
    for line_number, (node, name) in _rows(path, 2, 2):
        node_id = _int(path, line_number, node, "node_id")
        if node_id in seen:
            raise ParseError(path, line_number, f"nodo {node_id} con tipo repetido")
        if name not in names:
            names.append(name)
        seen[node_id] = names.index(name)
    n = len(seen)
    if n and max(seen) != n - 1:
        raise GraphValidationError(f"{path}: los ids de nodo no son densos en [0, {n})")
    node_type = np.zeros(n, dtype=np.int64)
    for node_id, type_id in seen.items():
        node_type[node_id] = type_id
    return node_type, tuple(names)


def load_multi_entity_graph(
    edge_list_path: str | Path,
    node_type_path: str | Path,
    target_type: str = "user",
) -> MultiEntityGraph:
    """
    Carga y valida un grafo multi-entidad.

    Raises:
        ParseError: linea mal formada (con numero de linea)
        BipartitenessError: arista entre dos nodos del mismo lado
        ConfigError / GraphValidationError: tipo objetivo inexistente, ids fuera de rango
    """
    node_type, type_names = load_node_types(node_type_path)
    if target_type not in type_names:
        raise GraphValidationError(f"el tipo objetivo {target_type!r} no aparece en {node_type_path}")

    path = Path(edge_list_path)
    src, dst, rel = [], [], []
    for line_number, fields in _rows(path, 2, 3):
        src.append(_int(path, line_number, fields[0], "src_id"))
        dst.append(_int(path, line_number, fields[1], "dst_id"))
        rel.append(_int(path, line_number, fields[2], "relation_id") if len(fields) == 3 else -1)

    relation = np.asarray(rel, dtype=np.int64)
    if relation.size and np.any(relation < 0):
        if np.any(relation >= 0):
            raise GraphValidationError(f"{path}: relation_id presente solo en algunas lineas")
        relation = None
    graph = MultiEntityGraph.from_edges(
        node_type, type_names, type_names.index(target_type),
        np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64), relation,
    )
    logger.info(
        "grafo multi-entidad cargado: %d nodos, %d aristas, tipos %s",
        graph.node_count, graph.edge_count, ",".join(type_names),
    )
    return graph


def save_multi_entity_graph(
    g: MultiEntityGraph,
    edge_list_path: str | Path,
    node_type_path: str | Path,
    header: dict | None = None,
) -> tuple[Path, Path]:
    """Escribe cada arista una vez como (objetivo, no objetivo, relacion)."""
    is_target = g.node_type == g.target_type_id
    # un nodo de cada tipo al frente, en orden de id de tipo, para que la
    # relectura asigne los mismos ids de tipo
    _, firsts = np.unique(g.node_type, return_index=True)
    order = np.concatenate([firsts, np.setdiff1d(np.arange(g.node_count), firsts)])
    type_lines = (f"{int(u)}\t{g.type_names[g.node_type[u]]}" for u in order)
    rows = np.repeat(np.arange(g.node_count), g.degrees)
    keep = is_target[rows]
    edge_lines = (
        f"{int(u)}\t{int(v)}\t{int(r)}"
        for u, v, r in zip(rows[keep], g.indices[keep], g.relation[keep])
    )
    types_path = _write_lines(Path(node_type_path), header, type_lines)
    edges_path = _write_lines(Path(edge_list_path), header, edge_lines)
    return edges_path, types_path


def load_labels(path: str | Path, origin_ids: np.ndarray | None = None) -> LabeledSet:
    """
    Lee etiquetas en el espacio de ids multi-entidad.

    Con `origin_ids` (de un SingleEntityGraph) traduce a ids del grafo de
    una sola entidad; las etiquetas de nodos que no son objetivo se descartan.
    """
    path = Path(path)
    pairs = []
    for line_number, (node, label) in _rows(path, 2, 2):
        node_id = _int(path, line_number, node, "node_id")
        value = _int(path, line_number, label, "label")
        if value not in (0, 1):
            raise ParseError(path, line_number, f"etiqueta {value} (solo 0 o 1)")
        pairs.append((node_id, value))
    labeled = LabeledSet.from_pairs(pairs)
    if origin_ids is not None:
        mapping = {int(o): i for i, o in enumerate(origin_ids)}
        remapped = labeled.remap(mapping)
        if len(remapped) < len(labeled):
            logger.warning("%d etiquetas de nodos no objetivo descartadas", len(labeled) - len(remapped))
        labeled = remapped
    return labeled


def save_labels(labeled: LabeledSet, path: str | Path, header: dict | None = None) -> Path:
    """Escribe `node_id label` por fila, en el orden del LabeledSet."""
    lines = (f"{int(n)}\t{int(y)}" for n, y in zip(labeled.nodes, labeled.labels))
    return _write_lines(Path(path), header, lines)


def save_single_entity_graph(g: SingleEntityGraph, path: str | Path, config_hash: str = "") -> Path:
    """
    Guarda G_s en un .npz sin objetos pickle.

    Arreglos: indptr, indices, edge_features (uint8, alineado con indices),
    origin_ids, opcionalmente shared_counts, y `header`: JSON con formato,
    tipo objetivo, orden de tipos y hash de configuracion.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": SINGLE_GRAPH_FORMAT,
        "target_type": g.target_type,
        "type_order": list(g.type_order),
        "config_hash": config_hash,
    }
    arrays = {
        "indptr": g.indptr,
        "indices": g.indices,
        "edge_features": g.edge_features,
        "origin_ids": g.origin_ids,
        "header": np.array(json.dumps(header, sort_keys=True)),
    }
    if g.shared_counts is not None:
        arrays["shared_counts"] = g.shared_counts
    with path.open("wb") as fh:
        np.savez_compressed(fh, **arrays)
    return path


def load_single_entity_graph(path: str | Path) -> SingleEntityGraph:
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            if header.get("format") != SINGLE_GRAPH_FORMAT:
                raise ArtifactIOError(f"{path}: formato desconocido {header.get('format')!r}")
            graph = SingleEntityGraph.build(
                data["indptr"],
                data["indices"],
                data["edge_features"],
                tuple(header["type_order"]),
                data["origin_ids"],
                data["shared_counts"] if "shared_counts" in data.files else None,
                header.get("target_type", "target"),
            )
    except FileNotFoundError as exc:
        raise ArtifactIOError(f"no existe el archivo {path}") from exc
    except (KeyError, ValueError) as exc:
        raise ArtifactIOError(f"{path}: archivo de grafo invalido ({exc})") from exc
    return graph.validate()
