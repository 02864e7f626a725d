from dataclasses import dataclass
from pathlib import Path

from fraudgraph.config.settings import PipelineConfig


@dataclass(frozen=True)
class OutputLayout:
    """
    Nombres de los artefactos dentro del directorio de salida.

    Los caminos explicitos de `paths` en la configuracion tienen prioridad
    sobre estos nombres por defecto.
    """

    root: Path

    @classmethod
    def from_config(cls, cfg: PipelineConfig) -> "OutputLayout":
        return cls(Path(cfg.paths.output_dir))

    @property
    def edges(self) -> Path:
        return self.root / "graph.edges.tsv"

    @property
    def types(self) -> Path:
        return self.root / "graph.types.tsv"

    @property
    def labels(self) -> Path:
        return self.root / "labels.tsv"

    @property
    def truth(self) -> Path:
        return self.root / "truth.tsv"

    @property
    def single_graph(self) -> Path:
        return self.root / "single_graph.npz"

    @property
    def transform_summary(self) -> Path:
        return self.root / "transform_summary.json"

    def features(self, method: str) -> Path:
        return self.root / f"features.{method}.tsv"

    @property
    def encoder(self) -> Path:
        return self.root / "encoder.pt"

    def encoder_epoch(self, epoch: int) -> Path:
        return self.root / "checkpoints" / f"encoder_epoch{epoch:03d}.pt"

    @property
    def pretrain_loss(self) -> Path:
        return self.root / "pretrain_loss.tsv"

    @property
    def model(self) -> Path:
        return self.root / "model.pt"

    @property
    def predictions(self) -> Path:
        return self.root / "predictions.tsv"

    @property
    def results(self) -> Path:
        return self.root / "results.tsv"

    @property
    def results_table(self) -> Path:
        return self.root / "results_table.txt"

    @property
    def embeddings(self) -> Path:
        return self.root / "embeddings.tsv"

    def manifest(self, command: str) -> Path:
        return self.root / f"manifest.{command}.json"

    def resolve(self, configured: Path | None, default: Path) -> Path:
        return Path(configured) if configured is not None else default
