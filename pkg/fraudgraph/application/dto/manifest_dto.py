from pydantic import BaseModel, Field


class ArtifactRecord(BaseModel):
    path: str
    kind: str


class RunManifest(BaseModel):
    """
    Manifiesto de una corrida de la CLI.

    Con `config` y `seed` se puede repetir la corrida; `versions` registra
    las librerias numericas usadas. No lleva marcas de tiempo para que dos
    corridas iguales produzcan el mismo archivo.
    """

    command: str
    config_hash: str
    seed: int
    config: dict
    versions: dict[str, str]
    artifacts: list[ArtifactRecord] = Field(default_factory=list)
