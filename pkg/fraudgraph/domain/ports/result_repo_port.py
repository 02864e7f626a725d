from abc import ABC, abstractmethod

from fraudgraph.domain.entities.experiment import CellResult, ExperimentResult


class ResultRepoPort(ABC):
    """
    Puerto de salida para persistir resultados de la grilla de evaluacion.

    El caso de uso de evaluacion solo conoce este contrato; el adaptador
    SQL (ResultRepoSQL) lo implementa sobre SQLite.
    """

    @abstractmethod
    def guardar_resultado(self, resultado: ExperimentResult) -> int:
        """
        Guarda una corrida completa y sus celdas.

        Args:
            resultado: ExperimentResult ya ensamblado

        Returns:
            run_id asignado por el repositorio

        Ejemplo:
            run_id = repo.guardar_resultado(resultado)
        """

    @abstractmethod
    def buscar_por_config_hash(self, config_hash: str) -> ExperimentResult | None:
        """
        Devuelve la corrida mas reciente con ese hash de configuracion.

        Args:
            config_hash: hash de PipelineConfig (16 caracteres hex)

        Returns:
            ExperimentResult reconstruido o None si no existe
        """

    @abstractmethod
    def listar_celdas(self, run_id: int) -> list[CellResult]:
        """Celdas de una corrida, en el orden en que se guardaron."""
