"""Hiérarchie d'exceptions du noyau numérique."""


class IdentificationError(Exception):
    """Erreur de base de la boîte à outils"""


class DimensionMismatchError(IdentificationError, ValueError):
    pass


class NonFiniteError(IdentificationError, ValueError):
    pass


class NotPSDError(IdentificationError, ValueError):
    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class UnstableMatrixError(IdentificationError, ValueError):
    def __init__(self, spectral_radius: float):
        super().__init__(f"Matrice instable : rayon spectral {spectral_radius:.6g} ≥ 1")
        self.spectral_radius = spectral_radius


class ConvergenceError(IdentificationError, RuntimeError):
    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} (itérations={iterations}, résidu={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class HypothesisViolationError(IdentificationError, ValueError):
    def __init__(self, message: str, admissible_radius: float):
        super().__init__(f"{message} (rayon admissible {admissible_radius:.6g})")
        self.admissible_radius = admissible_radius


class InvalidPolicyError(IdentificationError, ValueError):
    pass


class EmptyWindowError(IdentificationError, ValueError):
    pass


class ConfigError(IdentificationError, ValueError):
    """Fichier de configuration illisible ou constructeur de matrice inconnu"""


# Erreurs imputables aux entrées utilisateur (code de sortie 2, HTTP 422)
INPUT_ERRORS = (
    DimensionMismatchError,
    NonFiniteError,
    NotPSDError,
    UnstableMatrixError,
    HypothesisViolationError,
    InvalidPolicyError,
    EmptyWindowError,
    ConfigError,
)
