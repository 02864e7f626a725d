import hashlib
import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from fraudgraph.domain.exceptions import ArtifactIOError, ConfigError


class Settings(BaseSettings):
    """
    Configuracion del entorno de ejecucion.

    RESPONSABILIDAD:
    - Centralizar lo que depende de la maquina, no del experimento
    - Leer variables de entorno (prefijo FRAUDGRAPH_) y el archivo .env
    - Proporcionar valores por defecto

    Los hiperparametros del pipeline NO viven aqui: van en PipelineConfig,
    que se carga desde un archivo TOML y se guarda junto a cada artefacto.
    """

    model_config = SettingsConfigDict(
        env_prefix="FRAUDGRAPH_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    app_name: str = "fraudgraph"
    app_version: str = "0.3.0"
    log_level: str = "INFO"
    threads: int = Field(default=1, ge=1)
    results_db_name: str = "results.db"


settings = Settings()


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PathsConfig(_Section):
    graph: Path | None = None
    types: Path | None = None
    labels: Path | None = None
    truth: Path | None = None
    single_graph: Path | None = None
    features: Path | None = None
    checkpoint: Path | None = None
    output_dir: Path = Path("out")


class TransformConfig(_Section):
    """
    target_type: nombre del tipo de entidad a clasificar
    hub_threshold: grado maximo de una entidad no objetivo; None = sin limite
    record_counts: guarda tambien cuantas entidades comparte cada par
    """

    target_type: str = "user"
    hub_threshold: int | None = Field(default=None, ge=2)
    record_counts: bool = False


FeatureMethod = Literal["random", "degree", "pagerank", "eigen"]


class FeaturesConfig(_Section):
    method: FeatureMethod = "eigen"
    dim: int = Field(default=16, ge=1)
    degree_cap: int | None = Field(default=128, ge=1)
    damping: float = Field(default=0.85, gt=0.0, lt=1.0)
    tol: float = Field(default=1e-10, gt=0.0)
    max_iter: int = Field(default=200, ge=1)
    eigen_k: int = Field(default=16, ge=1)
    eigen_tol: float = Field(default=1e-6, gt=0.0)
    normalize: bool = True


class SamplerConfig(_Section):
    """
    Parametros del muestreo por caminata aleatoria con reinicio.

    r: radio de la red ego
    restart_prob: probabilidad de volver al ancla en cada paso
    max_nodes: tope de nodos distintos por sub-grafo
    stall_factor: pasos sin descubrir nodos (multiplo de max_nodes) antes de cortar
    """

    r: int = Field(default=3, ge=1)
    restart_prob: float = Field(default=0.8, gt=0.0, lt=1.0)
    max_nodes: int = Field(default=64, ge=1)
    stall_factor: int = Field(default=10, ge=1)
    seed: int = 0

    @property
    def stall_budget(self) -> int:
        return self.stall_factor * self.max_nodes


OptimizerName = Literal["adam", "sgd"]
EmbeddingMode = Literal["NE", "SE"]


class PretrainConfig(_Section):
    epochs: int = Field(default=10, ge=0)
    batch_size: int = Field(default=200, ge=1)
    hidden_dim: int = Field(default=16, ge=1)
    output_dim: int = Field(default=16, ge=1)
    num_layers: int = Field(default=3, ge=1)
    lr: float = Field(default=1e-6, ge=0.0)
    optimizer: OptimizerName = "adam"
    tau: float = Field(default=0.07, gt=0.0)
    momentum: float = Field(default=0.999, ge=0.0, lt=1.0)
    queue_size: int = Field(default=1024, ge=1)
    mode: EmbeddingMode = "SE"
    readout: Literal["sum", "mean"] = "sum"


class FinetuneConfig(_Section):
    epochs: int = Field(default=10, ge=0)
    batch_size: int = Field(default=100, ge=1)
    embed_dim: int = Field(default=32, ge=1)
    head_hidden: int = Field(default=32, ge=1)
    lr: float = Field(default=1e-5, ge=0.0)
    optimizer: OptimizerName = "adam"
    mode: EmbeddingMode = "SE"
    resample: bool = True
    readout: Literal["sum", "mean"] = "sum"


class EvalConfig(_Section):
    folds: int = Field(default=5, ge=2)
    graphs: list[Literal["multi", "single"]] = ["multi", "single"]
    features: list[FeatureMethod] = ["random", "degree", "pagerank", "eigen"]
    pretrain: list[bool] = [False, True]
    modes: list[EmbeddingMode] = ["NE", "SE"]
    workers: int = Field(default=1, ge=1)


class SynthConfig(_Section):
    """
    Forma del grafo sintetico con fraude plantado.

    Los anillos de fraude comparten un pool pequeno de entidades por tipo
    (share_rate_fraud); los usuarios benignos toman una entidad de un pool
    global grande con probabilidad share_rate_benign y si no una propia.

    labeled_fraud_ratio fija la proporcion de fraude entre los etiquetados;
    None (por defecto) etiqueta cada clase en proporcion a su tamano real.
    """

    n_users: int = Field(default=10_000, ge=1)
    target_type: str = "user"
    non_target_types: list[str] = ["device", "ip", "address", "phone", "email"]
    ring_count: int = Field(default=100, ge=0)
    ring_size: int = Field(default=10, ge=1)
    ring_pool_size: int = Field(default=2, ge=1)
    share_rate_fraud: float = Field(default=0.6, ge=0.0, le=1.0)
    share_rate_benign: float = Field(default=0.05, ge=0.0, le=1.0)
    benign_pool_size: int = Field(default=500, ge=1)
    label_fraction: float = Field(default=0.10, gt=0.0, le=1.0)
    labeled_fraud_ratio: float | None = Field(default=None, gt=0.0, lt=1.0)
    seed: int = 0

    @model_validator(mode="after")
    def _tasas_ordenadas(self) -> "SynthConfig":
        if self.share_rate_fraud <= self.share_rate_benign:
            raise ValueError("share_rate_fraud debe ser mayor que share_rate_benign")
        if not self.non_target_types:
            raise ValueError("se necesita al menos un tipo no objetivo")
        if self.target_type in self.non_target_types:
            raise ValueError("target_type no puede ser tambien un tipo no objetivo")
        return self


class PipelineConfig(_Section):
    """
    Configuracion completa de una corrida.

    RESPONSABILIDAD:
    - Una seccion por modulo; las claves desconocidas se rechazan
    - Semilla global de la que se derivan todas las demas
    - Hash estable que se escribe en cada artefacto

    Ejemplo:
        cfg = PipelineConfig.from_toml("configs/desk.toml")
        print(cfg.pretrain.tau, cfg.config_hash())
    """

    seed: int = 0
    paths: PathsConfig = PathsConfig()
    transform: TransformConfig = TransformConfig()
    features: FeaturesConfig = FeaturesConfig()
    sampler: SamplerConfig = SamplerConfig()
    pretrain: PretrainConfig = PretrainConfig()
    finetune: FinetuneConfig = FinetuneConfig()
    eval: EvalConfig = EvalConfig()
    synth: SynthConfig = SynthConfig()

    @classmethod
    def from_mapping(cls, data: dict) -> "PipelineConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            problemas = []
            for err in exc.errors():
                clave = ".".join(str(p) for p in err["loc"])
                problemas.append(f"{clave}: {err['msg']}")
            raise ConfigError("configuracion invalida: " + "; ".join(problemas)) from exc

    @classmethod
    def from_toml(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ArtifactIOError(f"no existe el archivo de configuracion {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: TOML invalido: {exc}") from exc
        return cls.from_mapping(data)

    def with_overrides(self, **cambios) -> "PipelineConfig":
        """Copia validada con campos de primer nivel o secciones reemplazadas."""
        data = self.model_dump(mode="json")
        for clave, valor in cambios.items():
            if isinstance(valor, BaseModel):
                valor = valor.model_dump(mode="json")
            data[clave] = valor
        return PipelineConfig.from_mapping(data)

    def sampler_for(self, seed: int) -> SamplerConfig:
        return self.sampler.model_copy(update={"seed": seed})

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:16]
