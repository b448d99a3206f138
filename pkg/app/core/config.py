import os
import logging
from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Configure logger for this module
logger = logging.getLogger(__name__)

# Load environment variables from .env file at the project root
load_dotenv()

class Settings(BaseSettings):
    # API Settings
    API_V1_STR: str = os.getenv("API_V1_STR", "/api")
    PROJECT_NAME: str = os.getenv("PROJECT_NAME", "opoly")

    # Common values: "development", "staging", "production"
    ENVIRONMENT: str = os.getenv("ENVIRONMENT", "development").lower()
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()

    # Precision
    # Upper bound for adaptive_retry doublings and for default contexts.
    OPOLY_MAX_BITS: int = int(os.getenv("OPOLY_MAX_BITS", "8192"))
    OPOLY_DEFAULT_DIGITS: int = int(os.getenv("OPOLY_DEFAULT_DIGITS", "30"))
    OPOLY_RETRY_DOUBLINGS: int = int(os.getenv("OPOLY_RETRY_DOUBLINGS", "4"))

    # Degree caps for recurrence builds
    OPOLY_N_MAX_DEFAULT: int = int(os.getenv("OPOLY_N_MAX_DEFAULT", "16"))
    OPOLY_N_MAX_HARD: int = int(os.getenv("OPOLY_N_MAX_HARD", "24"))

    # Double-exponential quadrature
    OPOLY_QUAD_STEP: float = float(os.getenv("OPOLY_QUAD_STEP", "0.5"))
    OPOLY_QUAD_HALVINGS: int = int(os.getenv("OPOLY_QUAD_HALVINGS", "10"))

    # In-process memo for rho values (entries)
    OPOLY_RHO_CACHE_SIZE: int = int(os.getenv("OPOLY_RHO_CACHE_SIZE", "20000"))

    # Log-t grid for the integral identities
    # Decimal strings, read with mp.mpf under the caller's working precision
    OPOLY_TGRID_YMIN_RATIO: str = os.getenv("OPOLY_TGRID_YMIN_RATIO", "1e-6")
    OPOLY_TGRID_PANELS: int = int(os.getenv("OPOLY_TGRID_PANELS", "4"))
    OPOLY_TGRID_ORDER: int = int(os.getenv("OPOLY_TGRID_ORDER", "16"))
    OPOLY_TGRID_MAX_PANELS: int = int(os.getenv("OPOLY_TGRID_MAX_PANELS", "32"))
    OPOLY_TGRID_MAX_GAP: str = os.getenv("OPOLY_TGRID_MAX_GAP", "1e-6")

    # Sampling
    OPOLY_DEFAULT_SEED: int = int(os.getenv("OPOLY_DEFAULT_SEED", "42"))
    OPOLY_X_SAMPLES: int = int(os.getenv("OPOLY_X_SAMPLES", "3"))

    # Small-t stand-ins for the Laguerre limit, as decimal strings
    OPOLY_LIMIT_T: str = os.getenv("OPOLY_LIMIT_T", "1e-24")
    OPOLY_LIMIT_DERIVATIVE_T: str = os.getenv("OPOLY_LIMIT_DERIVATIVE_T", "1e-12")

    # Pydantic settings configuration (for Pydantic V2 and pydantic-settings)
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding='utf-8',
        case_sensitive=True,
        extra='ignore'
    )

settings = Settings()

# --- Runtime sanity checks ---
if settings.OPOLY_MAX_BITS < 256:
    logger.warning(
        "OPOLY_MAX_BITS=%s is very low; Hankel work beyond a few degrees will raise PrecisionExhausted.",
        settings.OPOLY_MAX_BITS
    )

if settings.OPOLY_N_MAX_HARD > 24:
    logger.warning(
        "OPOLY_N_MAX_HARD=%s exceeds 24; moment Hankel matrices that large need several thousand bits.",
        settings.OPOLY_N_MAX_HARD
    )

logger.info(f"Application '{settings.PROJECT_NAME}' running in '{settings.ENVIRONMENT}' mode.")
logger.info(f"Adaptive precision capped at {settings.OPOLY_MAX_BITS} bits.")
