import logging

import numpy as np
from sklearn.metrics import accuracy_score, f1_score
from sklearn.model_selection import StratifiedKFold

from fraudgraph.domain.entities.labeled_set import LabeledSet
from fraudgraph.domain.exceptions import ConfigError, GraphValidationError, NumericError

logger = logging.getLogger(__name__)


def kfold_split(labeled: LabeledSet, k: int, seed: int) -> list[tuple[LabeledSet, LabeledSet]]:
    """
    Particion estratificada en k pares (entrenamiento, prueba).

    Cada nodo etiquetado cae en exactamente un conjunto de prueba.

    Raises:
        ConfigError: k < 2 o alguna clase con menos de k miembros
    """
    if k < 2:
        raise ConfigError("k debe ser >= 2")
    for clase, count in labeled.class_counts().items():
        if count < k:
            raise ConfigError(f"la clase {clase} tiene {count} nodos, se necesitan al menos {k}")
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    folds = []
    for train_pos, test_pos in splitter.split(labeled.nodes.reshape(-1, 1), labeled.labels):
        folds.append((labeled.subset(np.sort(train_pos)), labeled.subset(np.sort(test_pos))))
    return folds


def micro_f1(pred, truth) -> float:
    """
    F1 micro-promediado sobre ambas clases.

    En clasificacion binaria de una etiqueta coincide con la exactitud; se
    verifica en cada llamada.

    Ejemplo:
        micro_f1([1, 0, 1, 0], [1, 1, 0, 0])  # 0.5
    """
    pred = np.asarray(pred, dtype=np.int64).reshape(-1)
    truth = np.asarray(truth, dtype=np.int64).reshape(-1)
    if pred.size == 0:
        raise GraphValidationError("micro_f1 sobre una entrada vacia")
    if pred.shape != truth.shape:
        raise GraphValidationError("predicciones y etiquetas de distinto largo")
    score = float(f1_score(truth, pred, average="micro", labels=[0, 1]))
    accuracy = float(accuracy_score(truth, pred))
    if abs(score - accuracy) > 1e-12:
        raise NumericError(f"micro-F1 {score} distinto de la exactitud {accuracy}")
    return score
