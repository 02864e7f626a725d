from pathlib import Path

import numpy as np
import pytest

from fraudgraph.application.use_cases import evaluar_grilla
from fraudgraph.application.use_cases.evaluar_grilla import (
    MULTI_GRAPH_NOTE,
    EvaluarGrillaUseCase,
    cell_seed,
    render_table,
    result_frame,
    run_grid,
)
from fraudgraph.config.settings import PipelineConfig
from fraudgraph.domain.entities.experiment import CellResult, ExperimentResult
from fraudgraph.domain.entities.labeled_set import LabeledSet
from fraudgraph.domain.exceptions import ConfigError, GraphValidationError, NumericError
from fraudgraph.domain.services.evaluation_service import kfold_split, micro_f1
from fraudgraph.domain.services.synthetic_service import generate_synthetic
from fraudgraph.infrastructure.db.database import create_db_and_tables, database_url, get_engine, get_session
from fraudgraph.infrastructure.repositories.result_repo_sql import ResultRepoSQL

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def con_eval(cfg: PipelineConfig, **cambios) -> PipelineConfig:
    return cfg.with_overrides(eval=cfg.eval.model_copy(update=cambios))


@pytest.fixture
def dataset(tiny_cfg):
    return generate_synthetic(tiny_cfg.synth)


class TestFolds:

    def test_diez_items_cinco_folds(self):
        labeled = LabeledSet(np.arange(10), np.array([0, 1] * 5))
        folds = kfold_split(labeled, 5, seed=0)
        assert len(folds) == 5
        vistos = []
        for train, test in folds:
            assert len(test) == 2
            assert len(train) == 8
            assert not set(train.nodes.tolist()) & set(test.nodes.tolist())
            vistos.extend(test.nodes.tolist())
        assert sorted(vistos) == list(range(10))

    def test_estratificado(self):
        rng = np.random.default_rng(0)
        labels = (rng.random(200) < 0.2).astype(int)
        labeled = LabeledSet(np.arange(200) * 3, labels)
        total = labels.mean()
        for _, test in kfold_split(labeled, 5, seed=4):
            assert abs(test.labels.mean() - total) <= 2 / len(test)

    def test_estable_con_la_semilla(self):
        labeled = LabeledSet(np.arange(40), np.array([0, 1] * 20))
        a = kfold_split(labeled, 4, seed=9)
        b = kfold_split(labeled, 4, seed=9)
        for (_, ta), (_, tb) in zip(a, b):
            np.testing.assert_array_equal(ta.nodes, tb.nodes)

    def test_clase_con_pocos_miembros(self):
        labeled = LabeledSet(np.arange(10), np.array([1, 1] + [0] * 8))
        with pytest.raises(ConfigError):
            kfold_split(labeled, 5, seed=0)

    def test_k_invalido(self):
        with pytest.raises(ConfigError):
            kfold_split(LabeledSet(np.arange(4), np.array([0, 1, 0, 1])), 1, seed=0)


class TestMicroF1:

    def test_todo_correcto(self):
        assert micro_f1([0, 1, 1, 0], [0, 1, 1, 0]) == 1.0

    def test_mitad(self):
        assert micro_f1([1, 0, 1, 0], [1, 1, 0, 0]) == 0.5

    def test_igual_a_exactitud(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            pred, truth = rng.integers(0, 2, n), rng.integers(0, 2, n)
            assert micro_f1(pred, truth) == pytest.approx(float(np.mean(pred == truth)), abs=1e-12)

    def test_entrada_vacia(self):
        with pytest.raises(GraphValidationError):
            micro_f1([], [])

    def test_largos_distintos(self):
        with pytest.raises(GraphValidationError):
            micro_f1([0, 1], [0])


class TestGrilla:

    def test_celdas_en_orden(self, dataset, tiny_cfg):
        cfg = con_eval(tiny_cfg, graphs=["multi", "single"], modes=["NE", "SE"])
        result = run_grid(dataset.graph, dataset.labeled, cfg)
        assert len(result.cells) == 8
        assert [c.graph for c in result.cells[:4]] == ["multi"] * 4
        assert result.notes == [MULTI_GRAPH_NOTE]
        for c in result.cells:
            assert c.error is None, c.error
            assert len(c.fold_scores) == 2
            assert all(0.0 <= s <= 1.0 for s in c.fold_scores)

    def test_sin_preentrenar_igual_a_cero_epocas(self, dataset, tiny_cfg):
        apagado = run_grid(dataset.graph, dataset.labeled, con_eval(tiny_cfg, pretrain=[False]))
        cero = tiny_cfg.with_overrides(pretrain=tiny_cfg.pretrain.model_copy(update={"epochs": 0}))
        encendido = run_grid(dataset.graph, dataset.labeled, con_eval(cero, pretrain=[True]))
        assert apagado.cells[0].fold_scores == encendido.cells[0].fold_scores

    def test_determinista(self, dataset, tiny_cfg):
        a = run_grid(dataset.graph, dataset.labeled, tiny_cfg)
        b = run_grid(dataset.graph, dataset.labeled, tiny_cfg)
        assert a == b

    def test_semilla_de_celda_ignora_pt(self):
        assert cell_seed(0, "single", "SE", "eigen") != cell_seed(0, "single", "NE", "eigen")
        assert cell_seed(0, "single", "SE", "eigen") != cell_seed(1, "single", "SE", "eigen")

    def test_features_que_fallan_no_cortan_la_grilla(self, dataset, tiny_cfg):
        corto = tiny_cfg.with_overrides(features=tiny_cfg.features.model_copy(update={"max_iter": 1}))
        cfg = con_eval(corto, features=["random", "pagerank"])
        result = run_grid(dataset.graph, dataset.labeled, cfg)
        assert [(c.feature, c.pretrain) for c in result.cells] == [
            ("random", False), ("random", True), ("pagerank", False), ("pagerank", True)]
        for c in result.cells[:2]:
            assert c.error is None, c.error
            assert len(c.fold_scores) == 2
        for c in result.cells[2:]:
            assert c.error.startswith("ConvergenceError")
            assert c.fold_scores == []
        assert render_table(result).splitlines()[3].split() == ["PageRank", "error"]

    def test_celda_que_falla_queda_marcada(self, dataset, tiny_cfg, monkeypatch):
        original = evaluar_grilla.pretrain_encoder

        def pretrain_que_falla(*args, epochs=None, **kwargs):
            if epochs:
                raise NumericError("gradiente no finito", parameter_path="layers.0.eps")
            return original(*args, epochs=epochs, **kwargs)

        monkeypatch.setattr(evaluar_grilla, "pretrain_encoder", pretrain_que_falla)
        result = run_grid(dataset.graph, dataset.labeled, tiny_cfg)
        sin_pt, con_pt = result.cells
        assert sin_pt.error is None and len(sin_pt.fold_scores) == 2
        assert con_pt.error.startswith("NumericError")
        assert con_pt.mean is None

    def test_etiquetas_fuera_de_rango(self, dataset, tiny_cfg):
        malas = LabeledSet.from_pairs([(10_000, 1), (10_001, 0)])
        with pytest.raises(GraphValidationError):
            run_grid(dataset.graph, malas, tiny_cfg)


def resultado_de_juguete() -> ExperimentResult:
    return ExperimentResult(
        seed=7,
        config_hash="abcd",
        config={"seed": 7},
        folds=2,
        cells=[
            CellResult(graph="single", embedding="SE", feature="random", pretrain=False, fold_scores=[0.5, 0.7]),
            CellResult(graph="single", embedding="SE", feature="random", pretrain=True, fold_scores=[0.8, 0.9]),
            CellResult(graph="single", embedding="SE", feature="eigen", pretrain=False, error="NumericError: x"),
        ],
    )


class TestTabla:

    def test_render(self):
        tabla = render_table(resultado_de_juguete())
        lineas = tabla.splitlines()
        assert lineas[0].split() == ["Method", "single", "SE"]
        assert lineas[1].split() == ["Random", "0.6000"]
        assert lineas[2].split() == ["Random+PT", "0.8500"]
        assert lineas[3].split() == ["Eigen", "error"]
        assert lineas[4].split() == ["Eigen+PT", "-"]
        assert lineas[-1] == "# micro-F1, 2-fold, seed=7, config=abcd"

    def test_frame(self):
        frame = result_frame(resultado_de_juguete())
        assert list(frame.columns) == ["graph", "embedding", "feature", "pretrain", "mean",
                                       "fold_0", "fold_1", "error"]
        assert frame["mean"].iloc[0] == pytest.approx(0.6)
        assert frame["error"].iloc[2] == "NumericError: x"

    def test_mejor_celda(self):
        assert resultado_de_juguete().best("single").pretrain is True
        assert resultado_de_juguete().best("multi") is None


class TestRepositorioSQL:

    def test_guardar_y_recuperar(self, tmp_path):
        engine = get_engine(database_url(tmp_path))
        create_db_and_tables(engine)
        original = resultado_de_juguete()
        for session in get_session(engine):
            repo = ResultRepoSQL(session)
            run_id = repo.guardar_resultado(original)
            assert repo.listar_celdas(run_id) == original.cells
            assert repo.buscar_por_config_hash("abcd") == original
            assert repo.buscar_por_config_hash("nada") is None

    def test_caso_de_uso_persiste(self, tmp_path, dataset, tiny_cfg):
        engine = get_engine(database_url(tmp_path))
        create_db_and_tables(engine)
        for session in get_session(engine):
            repo = ResultRepoSQL(session)
            result = EvaluarGrillaUseCase(repo).ejecutar(dataset.graph, dataset.labeled, tiny_cfg)
            assert repo.buscar_por_config_hash(tiny_cfg.config_hash()) == result


@pytest.mark.slow
def test_direccion_de_la_grilla_en_el_sintetico_por_defecto():
    base = PipelineConfig.from_toml(CONFIGS / "desk.toml")
    medias: dict[tuple, list[float]] = {}
    for seed in range(3):
        sembrada = base.with_overrides(seed=seed, synth=base.synth.model_copy(update={"seed": seed}))
        cfg = con_eval(sembrada, graphs=["multi", "single"],
                       features=["random", "eigen"], modes=["SE"], pretrain=[False, True])
        data = generate_synthetic(cfg.synth)
        result = run_grid(data.graph, data.labeled, cfg)
        for c in result.cells:
            assert c.error is None, c.error
            medias.setdefault(c.key, []).append(c.mean)
    m = {k: float(np.mean(v)) for k, v in medias.items()}
    assert m[("single", "SE", "eigen", True)] - m[("single", "SE", "random", False)] >= 0.10
    assert m[("single", "SE", "eigen", True)] >= m[("single", "SE", "eigen", False)]
    mejor_single = max(v for k, v in m.items() if k[0] == "single")
    mejor_multi = max(v for k, v in m.items() if k[0] == "multi")
    assert mejor_single >= mejor_multi
