# File: app/services/pipeline.py

"""
Pipelines behind the command line and the HTTP router.

Each `*_document` function turns parsed inputs into a pydantic output document
whose reals are decimal strings; `render` serializes one RunConfig to text.
"""

import logging
from typing import Any, Dict, List, Tuple

import pandas as pd
from mpmath import mp

from app.core.config import settings
from app.core.errors import EXIT_IDENTITY_FAILURE, EXIT_NUMERICAL, EXIT_OK, DomainError
from app.schemas.common import format_real
from app.schemas.output import (
    CoeffRowOut,
    CoeffsDocument,
    ExpandDocument,
    ExpandRowOut,
    LimitDocument,
    LimitRowOut,
    QuadDocument,
    ReportDocument,
    ReportRowOut,
    ValueDocument,
)
from app.schemas.precision import PrecisionContext
from app.schemas.report import ResidualReport
from app.schemas.run_config import OutputFormat, RunConfig, Subcommand
from app.services.expansion import expansion_coeffs
from app.services.identities import run_suite
from app.services.laguerre import limit_comparison
from app.services.numerics import default_context
from app.services.quadrature import gauss_rule
from app.services.recurrence import build, determinant_eval, evaluate
from app.services.rho import rho

logger = logging.getLogger(__name__)

# Residuals and tolerances are reported to this many significant digits.
RESIDUAL_DIGITS = 6
# Default number of expansion terms beyond the degree.
EXPAND_EXTRA_TERMS = 20

REPORT_COLUMNS = ["identity_id", "n", "nu", "t", "residual", "tolerance", "method", "pass"]


def context_for(digits: int, n_max: int = 0) -> PrecisionContext:
    return default_context(digits, n_max)


def rho_document(nu: str, t: str, digits: int) -> ValueDocument:
    ctx = context_for(digits)
    with mp.workprec(ctx.bits):
        value = rho(mp.mpf(nu), mp.mpf(t), ctx)
        return ValueDocument(value=format_real(value, digits))


def coeffs_document(nu: str, t: str, n_max: int, digits: int) -> CoeffsDocument:
    ctx = context_for(digits, n_max)
    with mp.workprec(ctx.bits):
        table = build(mp.mpf(nu), mp.mpf(t), n_max, ctx)
        rows = [
            CoeffRowOut(
                n=row.n,
                a_n=format_real(row.a_n, digits),
                b_n=format_real(row.b_n, digits),
                A_n=format_real(row.A_n, digits),
                B_n=format_real(row.B_n, digits),
                coeffs=[format_real(c, digits) for c in row.coeffs],
            )
            for row in table.rows
        ]
        return CoeffsDocument(nu=nu, t=t, n_max=n_max, precision_bits=table.bits, rows=rows)


def quad_document(nu: str, t: str, m: int, digits: int) -> QuadDocument:
    ctx = context_for(digits, m)
    with mp.workprec(ctx.bits):
        table = build(mp.mpf(nu), mp.mpf(t), m - 1, ctx)
        rule = gauss_rule(table, m, ctx)
        return QuadDocument(
            nu=nu, t=t, m=m,
            nodes=[format_real(x, digits) for x in rule.nodes],
            weights=[format_real(w, digits) for w in rule.weights],
        )


def report_document(nu: str, t: str, n_max: int, report: ResidualReport) -> ReportDocument:
    rows = [
        ReportRowOut(
            identity_id=entry.identity_id,
            n=entry.n,
            nu=nu,
            t=t,
            residual=format_real(entry.residual, RESIDUAL_DIGITS),
            tolerance=format_real(entry.tolerance, RESIDUAL_DIGITS),
            method=entry.method.value,
            passed=entry.passed,
        )
        for entry in report.entries
    ]
    return ReportDocument(
        nu=nu, t=t, n_max=n_max,
        all_passed=report.all_passed and not report.errors,
        rows=rows, errors=list(report.errors),
    )


def verify_document(nu: str, t: str, n_max: int, suite: List[str], digits: int, seed: int) -> Tuple[ReportDocument, ResidualReport]:
    ctx = context_for(digits, n_max + 2)
    report = run_suite(nu, t, n_max, suite, ctx, seed=seed)
    failures = report.failures()
    logger.info(f"verify nu={nu} t={t} n_max={n_max}: {len(report.entries)} rows, {len(failures)} failing")
    return report_document(nu, t, n_max, report), report


def expand_document(nu: str, t: str, n: int, k_max: int, digits: int) -> ExpandDocument:
    ctx = context_for(digits, n)
    with mp.workprec(ctx.bits):
        table = build(mp.mpf(nu), mp.mpf(t), n, ctx)
        coeffs = expansion_coeffs(table, n, k_max, ctx)
        rows = []
        for k, d in enumerate(coeffs.d):
            bound = mp.factorial(k) * coeffs.h_bound / mp.gamma(k + coeffs.nu + 1)
            rows.append(ExpandRowOut(k=k, d=format_real(d, digits), bound=format_real(bound, digits)))
        return ExpandDocument(nu=nu, t=t, n=n, k_max=k_max, h_bound=format_real(coeffs.h_bound, digits), rows=rows)


def limit_document(nu: str, n_max: int, digits: int) -> LimitDocument:
    ctx = context_for(digits, n_max)
    with mp.workprec(ctx.bits):
        rows = [
            LimitRowOut(
                n=row["n"],
                quantity=row["quantity"],
                limit=format_real(row["limit"], digits),
                computed=format_real(row["computed"], digits),
                difference=format_real(row["difference"], RESIDUAL_DIGITS),
            )
            for row in limit_comparison(mp.mpf(nu), n_max, ctx)
        ]
        return LimitDocument(nu=nu, t=format_real(settings.OPOLY_LIMIT_T, RESIDUAL_DIGITS), rows=rows)


def eval_document(nu: str, t: str, n: int, x: str, digits: int, oracle: bool = False) -> ValueDocument:
    ctx = context_for(digits, n)
    with mp.workprec(ctx.bits):
        table = build(mp.mpf(nu), mp.mpf(t), n, ctx)
        value = evaluate(table, n, mp.mpf(x))
        document = ValueDocument(value=format_real(value, digits))
        if oracle:
            reference, _ = determinant_eval(nu, t, n, x, ctx)
            document.oracle = format_real(reference, digits)
            document.difference = format_real(abs(value - reference), RESIDUAL_DIGITS)
        return document


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _csv(records: List[Dict[str, Any]], columns: List[str]) -> str:
    return pd.DataFrame(records, columns=columns).to_csv(index=False, lineterminator="\n")


def _report_csv(document: ReportDocument) -> str:
    records = [row.model_dump(by_alias=True) for row in document.rows]
    for record in records:
        record["pass"] = "true" if record["pass"] else "false"
    return _csv(records, REPORT_COLUMNS)


def _coeffs_csv(document: CoeffsDocument) -> str:
    records = [{**row.model_dump(exclude={"coeffs"}), "coeffs": " ".join(row.coeffs)} for row in document.rows]
    return _csv(records, ["n", "a_n", "b_n", "A_n", "B_n", "coeffs"])


def _quad_csv(document: QuadDocument) -> str:
    records = [{"i": i, "node": x, "weight": w} for i, (x, w) in enumerate(zip(document.nodes, document.weights))]
    return _csv(records, ["i", "node", "weight"])


def _value_text(document: ValueDocument) -> str:
    if document.oracle is None:
        return document.value + "\n"
    return f"{document.value}\n{document.oracle}\n{document.difference}\n"


def _required_x(config: RunConfig) -> str:
    if config.x is None:
        raise DomainError("eval needs x")
    return config.x


def render(config: RunConfig) -> Tuple[str, int]:
    """Run one configuration; returns the output text and the exit status."""
    as_json = config.format is OutputFormat.JSON
    status = EXIT_OK
    command = config.subcommand

    if command is Subcommand.RHO:
        document = rho_document(config.nu, config.t, config.digits)
        text = document.model_dump_json(indent=2) + "\n" if as_json else _value_text(document)
    elif command is Subcommand.EVAL:
        document = eval_document(config.nu, config.t, config.n, _required_x(config), config.digits, config.oracle)
        text = document.model_dump_json(indent=2, exclude_none=True) + "\n" if as_json else _value_text(document)
    elif command is Subcommand.COEFFS:
        document = coeffs_document(config.nu, config.t, config.n_max, config.digits)
        text = document.model_dump_json(indent=2) + "\n" if as_json else _coeffs_csv(document)
    elif command is Subcommand.QUAD:
        document = quad_document(config.nu, config.t, config.m, config.digits)
        text = document.model_dump_json(indent=2) + "\n" if as_json else _quad_csv(document)
    elif command is Subcommand.EXPAND:
        k_max = config.k_max if config.k_max is not None else config.n + EXPAND_EXTRA_TERMS
        document = expand_document(config.nu, config.t, config.n, k_max, config.digits)
        if as_json:
            text = document.model_dump_json(indent=2) + "\n"
        else:
            text = _csv([row.model_dump() for row in document.rows], ["k", "d", "bound"])
    elif command is Subcommand.LIMIT:
        document = limit_document(config.nu, config.n_max, config.digits)
        if as_json:
            text = document.model_dump_json(indent=2) + "\n"
        else:
            text = _csv([row.model_dump() for row in document.rows], ["n", "quantity", "limit", "computed", "difference"])
    else:
        document, report = verify_document(config.nu, config.t, config.n_max, config.suite, config.digits, config.seed)
        text = document.model_dump_json(indent=2, by_alias=True) + "\n" if as_json else _report_csv(document)
        if report.errors:
            status = EXIT_NUMERICAL
        elif not report.all_passed:
            status = EXIT_IDENTITY_FAILURE
    return text, status
