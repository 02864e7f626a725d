import json
from itertools import groupby

from sqlmodel import Session, select

from fraudgraph.domain.entities.experiment import CellResult, ExperimentResult
from fraudgraph.domain.ports.result_repo_port import ResultRepoPort
from fraudgraph.infrastructure.db.models import CellScoreModel, RunModel


class ResultRepoSQL(ResultRepoPort):
    """
    Adaptador SQLModel de ResultRepoPort.

    FLUJO:
    1. guardar_resultado: ExperimentResult -> una fila en `runs` + filas en `cell_scores`
    2. buscar_por_config_hash / listar_celdas: filas -> entidades del dominio
    """

    def __init__(self, session: Session):
        self.session = session

    def _to_models(self, run_id: int, resultado: ExperimentResult) -> list[CellScoreModel]:
        rows = []
        for position, celda in enumerate(resultado.cells):
            base = dict(
                run_id=run_id, position=position, graph=celda.graph, embedding=celda.embedding,
                feature=celda.feature, pretrain=celda.pretrain,
            )
            if celda.error is not None or not celda.fold_scores:
                rows.append(CellScoreModel(**base, fold=-1, score=None, error=celda.error))
                continue
            for fold, score in enumerate(celda.fold_scores):
                rows.append(CellScoreModel(**base, fold=fold, score=score))
        return rows

    def _to_cells(self, models: list[CellScoreModel]) -> list[CellResult]:
        cells = []
        for _, grupo in groupby(models, key=lambda m: m.position):
            grupo = list(grupo)
            first = grupo[0]
            cells.append(CellResult(
                graph=first.graph,
                embedding=first.embedding,
                feature=first.feature,
                pretrain=first.pretrain,
                fold_scores=[m.score for m in grupo if m.fold >= 0],
                error=first.error,
            ))
        return cells

    def guardar_resultado(self, resultado: ExperimentResult) -> int:
        run = RunModel(
            config_hash=resultado.config_hash,
            seed=resultado.seed,
            folds=resultado.folds,
            config_json=json.dumps(resultado.config, sort_keys=True),
            notes_json=json.dumps(resultado.notes),
        )
        self.session.add(run)
        self.session.commit()
        self.session.refresh(run)

        self.session.add_all(self._to_models(run.id, resultado))
        self.session.commit()
        return run.id

    def buscar_por_config_hash(self, config_hash: str) -> ExperimentResult | None:
        statement = (
            select(RunModel)
            .where(RunModel.config_hash == config_hash)
            .order_by(RunModel.id.desc())
        )
        run = self.session.exec(statement).first()
        if run is None:
            return None
        return ExperimentResult(
            seed=run.seed,
            config_hash=run.config_hash,
            config=json.loads(run.config_json),
            folds=run.folds,
            cells=self.listar_celdas(run.id),
            notes=json.loads(run.notes_json),
        )

    def listar_celdas(self, run_id: int) -> list[CellResult]:
        statement = (
            select(CellScoreModel)
            .where(CellScoreModel.run_id == run_id)
            .order_by(CellScoreModel.position, CellScoreModel.fold)
        )
        return self._to_cells(list(self.session.exec(statement).all()))
