# File: app/main.py

import logging

import uvicorn
from fastapi import FastAPI

from app.api import endpoints as opoly_endpoints
from app.core.config import settings as app_settings

logging.basicConfig(level=app_settings.LOG_LEVEL)
logger = logging.getLogger(__name__)

app = FastAPI(
    title=app_settings.PROJECT_NAME,
    description="High-precision orthonormal polynomials for the weight x^nu exp(-x - t/x): "
                "recurrence coefficients, Gauss rules and identity verification.",
    version=opoly_endpoints.VERSION,
)


@app.on_event("startup")
async def startup_event():
    logger.info(f"Starting up {app_settings.PROJECT_NAME} API v{app.version}...")
    logger.info(f"Adaptive precision capped at {app_settings.OPOLY_MAX_BITS} bits.")


@app.on_event("shutdown")
async def shutdown_event():
    logger.info(f"{app_settings.PROJECT_NAME} API shutting down.")


# Routes live under API_V1_STR, e.g. /api/opoly/coeffs
app.include_router(opoly_endpoints.router, prefix=app_settings.API_V1_STR)


@app.get("/", tags=["General"], summary="API Root")
async def root():
    return {
        "message": f"Welcome to {app_settings.PROJECT_NAME} API",
        "status": "operational",
        "version": app.version,
        "documentation_url": "/docs",
    }


if __name__ == "__main__":
    log_config = uvicorn.config.LOGGING_CONFIG
    log_config["formatters"]["default"]["fmt"] = "%(asctime)s - %(levelname)s - %(message)s"
    logger.info(f"Starting Uvicorn server directly for {app_settings.PROJECT_NAME}...")
    uvicorn.run("app.main:app", host="0.0.0.0", port=8000, reload=False, log_config=log_config)
