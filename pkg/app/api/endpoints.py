# File: app/api/endpoints.py

import logging
from typing import Any, Callable, Dict, TypeVar

from fastapi import APIRouter, HTTPException, Query, status
from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import DomainError, OpolyError
from app.schemas.output import CoeffsDocument, ExpandDocument, QuadDocument, ReportDocument, ValueDocument
from app.schemas.run_config import RunConfig, Subcommand
from app.services import pipeline

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/opoly", tags=["Orthogonal Polynomials"])

VERSION = "1.0.0"

T = TypeVar("T")


def _guarded(label: str, compute: Callable[[], T]) -> T:
    """Map domain failures to 422 and numerical failures to 503."""
    try:
        return compute()
    except (DomainError, ValidationError) as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except (OpolyError, ArithmeticError) as e:
        logger.error(f"Numerical failure in {label}: {e}", exc_info=True)
        raise HTTPException(status_code=status.HTTP_503_SERVICE_UNAVAILABLE, detail=f"{label} failed: {e}")


def _config(subcommand: Subcommand, **fields: Any) -> RunConfig:
    return _guarded("request", lambda: RunConfig(subcommand=subcommand, **fields))


@router.get("/health", summary="Health Check", response_model=Dict[str, Any])
async def health_check() -> Dict[str, Any]:
    return {
        "status": "ok",
        "version": VERSION,
        "environment": settings.ENVIRONMENT,
        "max_bits": settings.OPOLY_MAX_BITS,
    }


@router.get("/rho", summary="Moment rho_nu(t)", response_model=ValueDocument)
def get_rho(
    nu: str = Query(..., example="0.5"),
    t: str = Query(..., example="1"),
    digits: int = Query(settings.OPOLY_DEFAULT_DIGITS),
) -> ValueDocument:
    config = _config(Subcommand.RHO, nu=nu, t=t, digits=digits)
    return _guarded("rho", lambda: pipeline.rho_document(config.nu, config.t, config.digits))


@router.get("/coeffs", summary="Recurrence coefficients", response_model=CoeffsDocument)
def get_coeffs(
    nu: str = Query(..., example="-0.5"),
    t: str = Query(..., example="1"),
    n_max: int = Query(6, ge=0),
    digits: int = Query(settings.OPOLY_DEFAULT_DIGITS),
) -> CoeffsDocument:
    config = _config(Subcommand.COEFFS, nu=nu, t=t, n_max=n_max, digits=digits)
    return _guarded("coeffs", lambda: pipeline.coeffs_document(config.nu, config.t, config.n_max, config.digits))


@router.get("/quad", summary="Gauss rule", response_model=QuadDocument)
def get_quad(
    nu: str = Query(..., example="-0.5"),
    t: str = Query(..., example="1"),
    m: int = Query(..., gt=0),
    digits: int = Query(settings.OPOLY_DEFAULT_DIGITS),
) -> QuadDocument:
    config = _config(Subcommand.QUAD, nu=nu, t=t, m=m, digits=digits)
    return _guarded("quad", lambda: pipeline.quad_document(config.nu, config.t, config.m, config.digits))


@router.post("/verify", summary="Identity residual report", response_model=ReportDocument, response_model_by_alias=True)
def post_verify(config: RunConfig) -> ReportDocument:
    if config.subcommand is not Subcommand.VERIFY:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail="subcommand must be 'verify'")
    document, _ = _guarded(
        "verify",
        lambda: pipeline.verify_document(config.nu, config.t, config.n_max, config.suite, config.digits, config.seed),
    )
    logger.info(f"verify over HTTP: all_passed={document.all_passed}")
    return document


@router.get("/expand", summary="Laguerre expansion coefficients", response_model=ExpandDocument)
def get_expand(
    nu: str = Query(..., example="0.5"),
    t: str = Query(..., example="1"),
    n: int = Query(..., ge=0),
    k_max: int = Query(pipeline.EXPAND_EXTRA_TERMS, ge=0),
    digits: int = Query(settings.OPOLY_DEFAULT_DIGITS),
) -> ExpandDocument:
    config = _config(Subcommand.EXPAND, nu=nu, t=t, n=n, k_max=k_max, digits=digits)
    return _guarded("expand", lambda: pipeline.expand_document(config.nu, config.t, config.n, config.k_max, config.digits))
