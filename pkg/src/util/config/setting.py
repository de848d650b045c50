from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator
from pathlib import Path
from dotenv import load_dotenv
import logging

# --- Configuration de base ---
BASE_DIR = Path(__file__).resolve().parent.parent.parent.parent
ENV_FILE = BASE_DIR / ".env"
load_dotenv(ENV_FILE)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"

logger = logging.getLogger("config")


class Settings(BaseSettings):
    # --- Journalisation ---
    LOG_LEVEL: str = "INFO"

    # --- Conception de l'excitation ---
    DEFAULT_STABILITY_MARGIN: float = 0.05
    DESIGN_MAX_ITER: int = 50_000

    # --- Expériences Monte-Carlo ---
    DEFAULT_TRIALS: int = 100
    FULL_TRIALS: int = 300
    MAX_WORKERS: int = 1
    OUTPUT_DIR: str = "out"

    # --- API HTTP ---
    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000
    DESIGN_CACHE_SIZE: int = 128

    # --- Config Pydantic ---
    model_config = SettingsConfigDict(
        env_file=ENV_FILE,
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # --- Validations ---
    @field_validator("LOG_LEVEL", mode="before")
    def check_log_level(cls, v):
        v = str(v).upper()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"LOG_LEVEL inconnu : {v}")
        return v

    @field_validator("DEFAULT_STABILITY_MARGIN")
    def check_margin(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("DEFAULT_STABILITY_MARGIN doit être dans (0, 1).")
        return v

    @field_validator("DESIGN_MAX_ITER", "DEFAULT_TRIALS", "FULL_TRIALS", "MAX_WORKERS", "DESIGN_CACHE_SIZE")
    def check_positive(cls, v):
        if v < 1:
            raise ValueError("Les compteurs doivent être strictement positifs.")
        return v

    def log_config(self):
        logger.info("✅ Configuration chargée avec succès.")
        for key, value in self.model_dump().items():
            logger.info(f"{key}: {value}")


def configure_logging(level: str | None = None) -> None:
    """Configure la journalisation racine au format commun du projet"""
    logging.basicConfig(level=level or settings.LOG_LEVEL, format=LOG_FORMAT)


# --- Initialisation ---
settings = Settings()

if __name__ == "__main__":
    configure_logging()
    settings.log_config()
