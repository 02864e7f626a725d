"""
Punto de entrada de la linea de comandos.

    python -m fraudgraph.main synth     --config configs/desk.toml --out out/
    python -m fraudgraph.main transform --config configs/desk.toml --out out/
    python -m fraudgraph.main featurize | pretrain | finetune | eval | export ...

Codigos de salida: 0 ok, 2 configuracion, 3 archivos, 4 numerico, 5 validacion.
"""
import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pydantic
import scipy
import sklearn
import sqlmodel
import torch

from fraudgraph import __version__
from fraudgraph.application.dto.manifest_dto import ArtifactRecord, RunManifest
from fraudgraph.application.layout import OutputLayout
from fraudgraph.application.use_cases.ajustar_clasificador import AjustarClasificadorUseCase
from fraudgraph.application.use_cases.evaluar_grilla import (
    EvaluarGrillaUseCase,
    render_table,
    result_frame,
)
from fraudgraph.application.use_cases.exportar_embeddings import (
    ExportarEmbeddingsUseCase,
    model_from_checkpoint,
)
from fraudgraph.application.use_cases.generar_sintetico import GenerarSinteticoUseCase
from fraudgraph.application.use_cases.inicializar_features import (
    InicializarFeaturesUseCase,
    load_features,
)
from fraudgraph.application.use_cases.preentrenar_encoder import PreentrenarEncoderUseCase
from fraudgraph.application.use_cases.transformar_grafo import (
    TransformarGrafoUseCase,
    load_multi_graph,
    load_single_graph,
)
from fraudgraph.config.settings import PipelineConfig, settings
from fraudgraph.domain.exceptions import FraudGraphError
from fraudgraph.infrastructure.db.database import create_db_and_tables, database_url, get_engine, get_session
from fraudgraph.infrastructure.io.artifact_files import write_manifest, write_table
from fraudgraph.infrastructure.repositories.file_graph_store import FileGraphStore
from fraudgraph.infrastructure.repositories.result_repo_sql import ResultRepoSQL

logger = logging.getLogger("fraudgraph")

EXIT_CODES = {"config": 2, "io": 3, "numeric": 4, "validation": 5}


def library_versions() -> dict[str, str]:
    return {
        "fraudgraph": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "torch": torch.__version__,
        "scikit-learn": sklearn.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
        "sqlmodel": sqlmodel.__version__,
    }


def cmd_synth(cfg: PipelineConfig, store: FileGraphStore) -> list:
    _, artifacts = GenerarSinteticoUseCase(store).ejecutar(cfg)
    return artifacts


def cmd_transform(cfg: PipelineConfig, store: FileGraphStore) -> list:
    layout = OutputLayout.from_config(cfg)
    TransformarGrafoUseCase(store).ejecutar(cfg)
    return [
        (layout.resolve(cfg.paths.single_graph, layout.single_graph), "single_graph"),
        (layout.transform_summary, "transform_summary"),
    ]


def cmd_featurize(cfg: PipelineConfig, store: FileGraphStore) -> list:
    _, out = InicializarFeaturesUseCase(store).ejecutar(cfg)
    return [(out, "features")]


def cmd_pretrain(cfg: PipelineConfig, store: FileGraphStore) -> list:
    layout = OutputLayout.from_config(cfg)
    graph = load_single_graph(store, cfg)
    features = load_features(store, cfg, graph)
    checkpoint = layout.resolve(cfg.paths.checkpoint, layout.encoder)
    _, history = PreentrenarEncoderUseCase(store).ejecutar(
        graph, features, cfg, checkpoint, layout.encoder_epoch
    )
    loss = pd.DataFrame({"epoch": np.arange(1, len(history) + 1), "info_nce": history})
    write_table(loss, layout.pretrain_loss, {"config_hash": cfg.config_hash()})
    artifacts = [(checkpoint, "encoder"), (layout.pretrain_loss, "pretrain_loss")]
    artifacts += [(layout.encoder_epoch(e), "encoder_epoch") for e in range(len(history))]
    return artifacts


def cmd_finetune(cfg: PipelineConfig, store: FileGraphStore) -> list:
    layout = OutputLayout.from_config(cfg)
    graph = load_single_graph(store, cfg)
    features = load_features(store, cfg, graph)
    labeled = store.load_labels(layout.resolve(cfg.paths.labels, layout.labels), graph.origin_ids)
    encoder = cfg.paths.checkpoint
    if encoder is None and layout.encoder.exists():
        encoder = layout.encoder
    _, predictions = AjustarClasificadorUseCase(store).ejecutar(
        graph, features, labeled, cfg, layout.model, encoder
    )
    write_table(predictions, layout.predictions, {"config_hash": cfg.config_hash()})
    return [(layout.model, "model"), (layout.predictions, "predictions")]


def cmd_eval(cfg: PipelineConfig, store: FileGraphStore, threads: int = 1) -> list:
    layout = OutputLayout.from_config(cfg)
    multi = load_multi_graph(store, cfg)
    labels = store.load_labels(layout.resolve(cfg.paths.labels, layout.labels))

    layout.root.mkdir(parents=True, exist_ok=True)
    engine = get_engine(database_url(layout.root))
    create_db_and_tables(engine)
    for session in get_session(engine):
        result = EvaluarGrillaUseCase(ResultRepoSQL(session)).ejecutar(multi, labels, cfg, threads)

    header = {"config_hash": result.config_hash, "seed": result.seed, "notes": result.notes}
    write_table(result_frame(result), layout.results, header)
    table = render_table(result)
    layout.results_table.write_text(table, encoding="utf-8")
    print(table, end="")
    return [(layout.results, "results"), (layout.results_table, "results_table")]


def cmd_export(cfg: PipelineConfig, store: FileGraphStore) -> list:
    layout = OutputLayout.from_config(cfg)
    checkpoint = cfg.paths.checkpoint
    if checkpoint is None:
        checkpoint = layout.model if layout.model.exists() else layout.encoder
    model = model_from_checkpoint(store.load_checkpoint(checkpoint))
    graph = load_single_graph(store, cfg)
    features = load_features(store, cfg, graph)
    truth_path = layout.resolve(cfg.paths.truth, layout.truth)
    truth = store.load_labels(truth_path, graph.origin_ids) if truth_path.exists() else None
    frame = ExportarEmbeddingsUseCase().ejecutar(model, graph, features, cfg, truth=truth)
    write_table(frame, layout.embeddings, {"config_hash": cfg.config_hash(), "checkpoint": str(checkpoint)})
    return [(layout.embeddings, "embeddings")]


COMMANDS = {
    "synth": cmd_synth,
    "transform": cmd_transform,
    "featurize": cmd_featurize,
    "pretrain": cmd_pretrain,
    "finetune": cmd_finetune,
    "eval": cmd_eval,
    "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="archivo TOML de configuracion")
    common.add_argument("--seed", type=int, help="reemplaza la semilla global")
    common.add_argument("--out", type=Path, help="directorio de salida (paths.output_dir)")
    common.add_argument("--threads", type=int, help="hilos de torch (por defecto FRAUDGRAPH_THREADS)")

    parser = argparse.ArgumentParser(prog="fraudgraph", description="Deteccion de fraude en grafos no atribuidos")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(args: argparse.Namespace) -> PipelineConfig:
    """TOML (o valores por defecto) con --seed y --out encima."""
    cfg = PipelineConfig.from_toml(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    if args.out is not None:
        cfg = cfg.with_overrides(paths=cfg.paths.model_copy(update={"output_dir": args.out}))
    return cfg


def run(args: argparse.Namespace) -> Path:
    """Ejecuta el subcomando y devuelve el camino de su manifiesto."""
    cfg = load_config(args)
    threads = args.threads or settings.threads
    torch.set_num_threads(threads)
    torch.use_deterministic_algorithms(True)

    store = FileGraphStore()
    logger.info("%s: config %s, seed %d", args.command, cfg.config_hash(), cfg.seed)
    if args.command == "eval":
        artifacts = cmd_eval(cfg, store, threads)
    else:
        artifacts = COMMANDS[args.command](cfg, store)

    layout = OutputLayout.from_config(cfg)
    manifest = RunManifest(
        command=args.command,
        config_hash=cfg.config_hash(),
        seed=cfg.seed,
        config=cfg.model_dump(mode="json"),
        versions=library_versions(),
        artifacts=[ArtifactRecord(path=str(p), kind=k) for p, k in artifacts],
    )
    return write_manifest(manifest, layout.manifest(args.command))


def main(argv: list[str] | None = None) -> int:
    """
    Punto de entrada de la linea de comandos.

    Returns:
        int: 0 si todo salio bien; 2 configuracion, 3 archivos,
        4 numerico, 5 validacion
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=settings.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        manifest = run(args)
    except FraudGraphError as exc:
        print(f"error [{exc.categoria}]: {exc}", file=sys.stderr)
        return EXIT_CODES[exc.categoria]
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]
    logger.info("manifiesto escrito en %s", manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
