import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np
import pandas as pd
import torch

from fraudgraph.application.use_cases.ajustar_clasificador import finetune_classifier
from fraudgraph.application.use_cases.preentrenar_encoder import pretrain_encoder
from fraudgraph.config.settings import PipelineConfig
from fraudgraph.domain.entities.experiment import CellResult, ExperimentResult
from fraudgraph.domain.entities.feature_matrix import FeatureMatrix
from fraudgraph.domain.entities.graph import CSRGraph, MultiEntityGraph
from fraudgraph.domain.entities.labeled_set import LabeledSet
from fraudgraph.domain.exceptions import FraudGraphError
from fraudgraph.domain.nn.classifier import predict
from fraudgraph.domain.ports.result_repo_port import ResultRepoPort
from fraudgraph.domain.services.evaluation_service import kfold_split, micro_f1
from fraudgraph.domain.services.feature_service import init_features
from fraudgraph.domain.services.transform_service import transform_to_single_entity

logger = logging.getLogger(__name__)

GRAPH_ORDER = ("multi", "single")
FEATURE_LABELS = {"random": "Random", "degree": "Degree", "pagerank": "PageRank", "eigen": "Eigen"}
MULTI_GRAPH_NOTE = (
    "multi-entity cells: node features initialized on the full heterogeneous graph, "
    "edge features are one-hot relation types, anchors are target nodes only"
)


def cell_seed(seed: int, graph: str, embedding: str, feature: str) -> int:
    """
    Semilla de una celda. No depende del flag de pre-entrenamiento, asi
    PT apagado y PT con 0 epocas producen el mismo puntaje.
    """
    seq = np.random.SeedSequence([
        seed,
        GRAPH_ORDER.index(graph),
        ("NE", "SE").index(embedding),
        list(FEATURE_LABELS).index(feature),
    ])
    return int(seq.generate_state(1)[0])


@dataclass(frozen=True)
class CellTask:
    """Todo lo que necesita una celda; se puede enviar a otro proceso."""

    graph_kind: str
    embedding: str
    feature: str
    pretrain: bool
    graph: CSRGraph
    features: FeatureMatrix | None
    folds: tuple[tuple[LabeledSet, LabeledSet], ...]
    cfg: PipelineConfig
    threads: int = 1
    feature_error: str | None = None


def evaluate_cell(task: CellTask) -> CellResult:
    """
    Una celda de la grilla.

    FLUJO:
    1. Pre-entrenar (0 epocas si PT esta apagado)
    2. Por fold: ajustar sobre train, predecir test, micro-F1

    Los errores del dominio se registran en la celda y no cortan la grilla.
    """
    torch.set_num_threads(task.threads)
    seed = cell_seed(task.cfg.seed, task.graph_kind, task.embedding, task.feature)
    base = dict(graph=task.graph_kind, embedding=task.embedding,
                feature=task.feature, pretrain=task.pretrain)
    if task.feature_error is not None:
        return CellResult(**base, error=task.feature_error)
    try:
        epochs = task.cfg.pretrain.epochs if task.pretrain else 0
        encoder, _ = pretrain_encoder(task.graph, task.features, task.cfg, seed,
                                      mode=task.embedding, epochs=epochs)
        encoder_state = encoder.state_dict()
        scores = []
        for fold, (train, test) in enumerate(task.folds):
            fold_seed = int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])
            model = finetune_classifier(task.graph, task.features, train, task.cfg, fold_seed,
                                        encoder_state, mode=task.embedding)
            pred, _ = predict(model, task.graph, task.features, test.nodes, task.embedding,
                              task.cfg.sampler_for(fold_seed))
            scores.append(micro_f1(pred, test.labels))
    except FraudGraphError as exc:
        logger.warning("celda %s fallo: %s", base, exc)
        return CellResult(**base, error=f"{type(exc).__name__}: {exc}")
    cell = CellResult(**base, fold_scores=scores)
    logger.info("celda %s/%s/%s/PT=%s: micro-F1 %.4f", task.graph_kind, task.embedding,
                task.feature, task.pretrain, cell.mean)
    return cell


def run_grid(
    multi: MultiEntityGraph,
    labels: LabeledSet,
    cfg: PipelineConfig,
    threads: int = 1,
) -> ExperimentResult:
    """
    Evalua la grilla {grafo} x {embedding} x {feature} x {PT} con k folds.

    `labels` esta en el espacio de ids del grafo multi-entidad; los mismos
    folds se usan en todas las celdas (se traducen a ids de G_s).
    """
    ev = cfg.eval
    labels.validate_against(multi.node_count)
    folds_multi = kfold_split(labels, ev.folds, cfg.seed)

    graphs: dict[str, tuple[CSRGraph, tuple]] = {}
    if "multi" in ev.graphs:
        graphs["multi"] = (multi, tuple(folds_multi))
    if "single" in ev.graphs:
        single, _ = transform_to_single_entity(multi, cfg.transform.hub_threshold)
        mapping = {int(o): i for i, o in enumerate(single.origin_ids)}
        graphs["single"] = (
            single,
            tuple((tr.remap(mapping), te.remap(mapping)) for tr, te in folds_multi),
        )

    tasks = []
    for graph_kind in (g for g in GRAPH_ORDER if g in graphs):
        graph, folds = graphs[graph_kind]
        for feature in ev.features:
            fcfg = cfg.features.model_copy(update={"method": feature})
            features, error = None, None
            try:
                features = init_features(graph, fcfg, cfg.seed)
            except FraudGraphError as exc:
                error = f"{type(exc).__name__}: {exc}"
                logger.warning("features %s sobre %s fallaron: %s", feature, graph_kind, exc)
            for embedding, pt in product(ev.modes, ev.pretrain):
                tasks.append(CellTask(graph_kind, embedding, feature, pt, graph, features,
                                      folds, cfg, threads, error))

    logger.info("grilla: %d celdas, %d folds, %d procesos", len(tasks), ev.folds, ev.workers)
    if ev.workers > 1:
        with ProcessPoolExecutor(max_workers=ev.workers) as pool:
            cells = list(pool.map(evaluate_cell, tasks))
    else:
        cells = [evaluate_cell(t) for t in tasks]

    notes = [MULTI_GRAPH_NOTE] if "multi" in graphs else []
    return ExperimentResult(
        seed=cfg.seed,
        config_hash=cfg.config_hash(),
        config=cfg.model_dump(mode="json"),
        folds=ev.folds,
        cells=cells,
        notes=notes,
    )


def result_frame(result: ExperimentResult) -> pd.DataFrame:
    """Una fila por celda: claves, media y puntaje de cada fold."""
    rows = []
    for c in result.cells:
        row = {
            "graph": c.graph,
            "embedding": c.embedding,
            "feature": c.feature,
            "pretrain": int(c.pretrain),
            "mean": c.mean,
        }
        for fold in range(result.folds):
            row[f"fold_{fold}"] = c.fold_scores[fold] if fold < len(c.fold_scores) else None
        row["error"] = c.error or ""
        rows.append(row)
    return pd.DataFrame(rows)


def render_table(result: ExperimentResult) -> str:
    """
    Tabla de texto alineada: filas feature(+PT), columnas grafo x embedding.

    Ejemplo de salida:
        Method         multi NE  multi SE  single NE  single SE
        Random           0.6120    0.6400     0.7010     0.7300
        Random+PT        ...
    """
    graphs = [g for g in GRAPH_ORDER if any(c.graph == g for c in result.cells)]
    modes = [m for m in ("NE", "SE") if any(c.embedding == m for c in result.cells)]
    columns = [(g, m) for g in graphs for m in modes]
    features = [f for f in FEATURE_LABELS if any(c.feature == f for c in result.cells)]
    pts = [p for p in (False, True) if any(c.pretrain == p for c in result.cells)]

    header = ["Method"] + [f"{g} {m}" for g, m in columns]
    body = []
    for feature, pt in product(features, pts):
        name = FEATURE_LABELS[feature] + ("+PT" if pt else "")
        row = [name]
        for g, m in columns:
            c = result.cell(g, m, feature, pt)
            row.append("-" if c is None else "error" if c.mean is None else f"{c.mean:.4f}")
        body.append(row)

    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = []
    for r in [header] + body:
        cells = [r[0].ljust(widths[0])] + [v.rjust(w) for v, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    lines.append(f"# micro-F1, {result.folds}-fold, seed={result.seed}, config={result.config_hash}")
    return "\n".join(lines) + "\n"


class EvaluarGrillaUseCase:
    """
    Caso de Uso: evaluacion de la grilla completa.

    FLUJO:
    1. Particionar las etiquetas en k folds estratificados
    2. Evaluar cada celda (en paralelo si eval.workers > 1)
    3. Persistir el resultado por ResultRepoPort, si hay repositorio
    """

    def __init__(self, repo: ResultRepoPort | None = None):
        self.repo = repo

    def ejecutar(self, multi: MultiEntityGraph, labels: LabeledSet, cfg: PipelineConfig,
                 threads: int = 1) -> ExperimentResult:
        """
        Corre la grilla y guarda el resultado.

        Args:
            multi: grafo multi-entidad; G_s se deriva de el
            labels: etiquetas en ids de G_m
            cfg: configuracion; `eval` define la grilla
            threads: hilos de torch por proceso

        Returns:
            ExperimentResult: celdas en el orden de la grilla; una celda
            que fallo lleva `error` y no corta las demas
        """
        result = run_grid(multi, labels, cfg, threads)
        if self.repo is not None:
            run_id = self.repo.guardar_resultado(result)
            logger.info("resultado guardado como run %d", run_id)
        return result
