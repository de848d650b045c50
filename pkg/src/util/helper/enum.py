from enum import Enum

# ──────────────────────────────────────────────────────────────────────────────
# Enums de simulation
# ──────────────────────────────────────────────────────────────────────────────

class NoiseFamilyEnum(str, Enum):
    GAUSSIAN = "gaussian"        # N(0, 1) par composante
    RADEMACHER = "rademacher"    # ±1 équiprobables
    UNIFORM = "uniform"          # U(-√3, √3), variance unitaire


class PolicyKindEnum(str, Enum):
    ZERO = "zero"
    ISOTROPIC = "isotropic"
    COVARIANCE = "covariance"


# ──────────────────────────────────────────────────────────────────────────────
# Enums d'expérience
# ──────────────────────────────────────────────────────────────────────────────

class MethodEnum(str, Enum):
    ALGORITHM1 = "algorithm1"    # apprentissage actif en deux phases
    ISOTROPIC = "isotropic"      # u_t ~ (ū/n_u) I sur tout l'horizon
    ORACLE = "oracle"            # u_t ~ U*(A), A connu


class BaselineKindEnum(str, Enum):
    ISOTROPIC = "isotropic"
    ORACLE = "oracle"


# ──────────────────────────────────────────────────────────────────────────────
# Enums des bornes de complexité
# ──────────────────────────────────────────────────────────────────────────────

class BoundKindEnum(str, Enum):
    LOWER_EQ5 = "lower_eq5"
    LOWER_THM1 = "lower_thm1"
    LOWER_COR1 = "lower_cor1"
    LOWER_COR2 = "lower_cor2"
    UPPER_THM2 = "upper_thm2"
    LSE_CONDITION_PROP4 = "lse_condition_prop4"
    EPS_T0 = "eps_t0"
