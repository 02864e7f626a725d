class FraudGraphError(Exception):
    """
    Raiz de los errores del dominio.

    Cada subclase declara una `categoria` que la CLI traduce a un codigo
    de salida (config / io / numeric / validation).
    """

    categoria = "validation"


class ConfigError(FraudGraphError, ValueError):
    """Configuracion invalida: clave desconocida, valor fuera de rango o combinacion imposible."""

    categoria = "config"


class ArtifactIOError(FraudGraphError, OSError):
    """No se pudo leer o escribir un artefacto (archivo faltante, formato desconocido)."""

    categoria = "io"


class ParseError(ArtifactIOError):
    """
    Linea mal formada en un archivo de texto.

    Args:
        path: Archivo que se estaba leyendo
        line_number: Numero de linea (empieza en 1)
        detalle: Que se esperaba encontrar
    """

    def __init__(self, path: str, line_number: int, detalle: str):
        self.path = str(path)
        self.line_number = line_number
        super().__init__(f"{self.path}:{line_number}: {detalle}")


class GraphValidationError(FraudGraphError, ValueError):
    """Un grafo o conjunto etiquetado viola sus invariantes."""

    categoria = "validation"


class BipartitenessError(GraphValidationError):
    """Arista entre dos entidades objetivo o entre dos entidades no objetivo."""


class DistinctnessError(GraphValidationError):
    """Se esperaban identificadores distintos y llego un duplicado."""


class NumericError(FraudGraphError, ArithmeticError):
    """
    Fallo numerico (gradiente no finito, solver sin convergencia).

    Args:
        mensaje: Descripcion del fallo
        parameter_path: Nombre del parametro afectado, si aplica
    """

    categoria = "numeric"

    def __init__(self, mensaje: str, parameter_path: str | None = None):
        self.parameter_path = parameter_path
        if parameter_path:
            mensaje = f"{mensaje} (parametro: {parameter_path})"
        super().__init__(mensaje)


class ConvergenceError(NumericError):
    """La iteracion de potencia no bajo de la tolerancia; `residual` guarda el ultimo cambio L1."""

    def __init__(self, mensaje: str, residual: float):
        self.residual = residual
        super().__init__(f"{mensaje} (residual={residual:.3e})")


class EigenResidualError(NumericError):
    """Un par propio devuelto por el solver no cumple ||Av - lv|| <= tol."""


class ShapeError(FraudGraphError, ValueError):
    """Dimensiones incompatibles entre parametros, features y sub-grafos."""

    categoria = "validation"
