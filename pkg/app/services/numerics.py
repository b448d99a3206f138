# File: app/services/numerics.py

import logging
import math
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple

from mpmath import mp, mpf

from app.core.config import settings
from app.core.errors import DomainError, NonConvergence, PrecisionExhausted
from app.schemas.precision import GUARD_DIGITS, LOG10_2, IntegralResult, PrecisionContext
from app.schemas.report import Method

logger = logging.getLogger(__name__)

# Largest |u| the truncation scan may reach before giving up.
U_LIMIT = 1000

Integrand = Callable[[mpf], Sequence[mpf]]


def default_context(target_digits: Optional[int] = None, n_max: int = 0) -> PrecisionContext:
    """
    Context for `target_digits` correct digits at polynomial degree up to n_max.

    bits = max(128, ceil(3.33 D) + 12 n_max, enough for D plus guard digits).
    """
    digits = target_digits or settings.OPOLY_DEFAULT_DIGITS
    if digits <= 0:
        raise DomainError(f"target_digits must be positive, got {digits}")
    bits = max(
        128,
        math.ceil(3.33 * digits) + 12 * max(n_max, 0),
        math.ceil((digits + GUARD_DIGITS) / LOG10_2) + 1,
    )
    if bits > settings.OPOLY_MAX_BITS:
        raise PrecisionExhausted(
            f"{digits} digits at degree {n_max} need {bits} bits, above OPOLY_MAX_BITS={settings.OPOLY_MAX_BITS}"
        )
    with mp.workprec(bits):
        fd_step = mp.mpf(10) ** (-mp.mpf(digits) / 3)
    return PrecisionContext(
        bits=bits,
        target_digits=digits,
        quad_step=settings.OPOLY_QUAD_STEP,
        quad_halvings_max=settings.OPOLY_QUAD_HALVINGS,
        fd_step_scale=fd_step,
    )


# ---------------------------------------------------------------------------
# Double-exponential quadrature
# ---------------------------------------------------------------------------

def _is_finite(value: mpf) -> bool:
    return not (mp.isnan(value) or mp.isinf(value))


def _scan(g: Callable[[int], List[mpf]], direction: int, center: List[mpf], trunc: mpf, step: mpf) -> int:
    """Walk k = direction, 2*direction, ... until every component has decayed and stopped growing."""
    peaks = [abs(v) for v in center]
    previous = list(peaks)
    quiet = 0
    k = 0
    while True:
        k += direction
        if abs(k) * step > U_LIMIT:
            raise NonConvergence(f"integrand does not decay within |u| <= {U_LIMIT}")
        values = g(k)
        done = True
        for c, v in enumerate(values):
            magnitude = abs(v)
            if magnitude > peaks[c]:
                peaks[c] = magnitude
            if magnitude > trunc * peaks[c] or magnitude > previous[c]:
                done = False
            previous[c] = magnitude
        quiet = quiet + 1 if done else 0
        if quiet >= 2 and abs(k) * step >= 2:
            return k


def _refine(
    node: Callable[[mpf], List[mpf]],
    ctx: PrecisionContext,
    label: str,
) -> List[IntegralResult]:
    """
    Trapezoidal sums of node(u) on a truncated u-line, halving the step until two
    levels agree to 10^-D relative to max(|S|, h sum |g|) in every component.
    """
    eps = mp.mpf(10) ** (-ctx.target_digits)
    trunc = eps * mp.mpf(10) ** (-GUARD_DIGITS)
    h = mp.mpf(ctx.quad_step)
    evaluations = 0
    cache = {}

    def at(k: int) -> List[mpf]:
        nonlocal evaluations
        if k not in cache:
            cache[k] = node(k * h)
            evaluations += 1
        return cache[k]

    center = at(0)
    count = len(center)
    upper = _scan(at, 1, center, trunc, h)
    lower = _scan(at, -1, center, trunc, h)

    samples = [at(k) for k in range(lower, upper + 1)]
    sums = [h * mp.fsum(s[c] for s in samples) for c in range(count)]
    l1 = [h * mp.fsum(abs(s[c]) for s in samples) for c in range(count)]
    logger.debug(f"{label}: window u in [{lower * h}, {upper * h}], {len(samples)} nodes")

    for level in range(1, ctx.quad_halvings_max + 1):
        step = h / 2 ** level
        half = 2 ** (level - 1)
        fresh = [node((2 * j + 1) * step) for j in range(lower * half, upper * half)]
        evaluations += len(fresh)
        new_sums = [sums[c] / 2 + step * mp.fsum(s[c] for s in fresh) for c in range(count)]
        l1 = [l1[c] / 2 + step * mp.fsum(abs(s[c]) for s in fresh) for c in range(count)]
        errors = [abs(new_sums[c] - sums[c]) for c in range(count)]
        sums = new_sums
        converged = all(errors[c] <= eps * max(abs(sums[c]), l1[c]) for c in range(count))
        logger.debug(f"{label}: level {level}, max error {max(errors) if errors else 0}")
        if converged:
            return [
                IntegralResult(value=sums[c], error_estimate=errors[c], evaluations=evaluations)
                for c in range(count)
            ]
    raise NonConvergence(
        f"{label}: no agreement to {ctx.target_digits} digits after {ctx.quad_halvings_max} halvings"
    )


def _checked(values: Iterable[Any], x: mpf, weight: mpf) -> List[mpf]:
    out = []
    for v in values:
        v = mp.mpf(v)
        if not _is_finite(v):
            raise DomainError(f"integrand is not finite at x = {mp.nstr(x, 10)}")
        out.append(v * weight)
    return out


def integrate_halfline_batch(f: Integrand, ctx: PrecisionContext, *, finite_at_zero: bool = False) -> List[IntegralResult]:
    """
    Integrate every component of f over (0, inf) on shared nodes.

    The default map x = e^u suits integrands carrying e^{-x-t/x}; with
    finite_at_zero the map x = exp(u - e^{-u}) also decays double
    exponentially at the left end.
    """
    with mp.workprec(ctx.bits):
        if finite_at_zero:
            def node(u: mpf) -> List[mpf]:
                e = mp.exp(-u)
                x = mp.exp(u - e)
                return _checked(f(x), x, x * (1 + e))
        else:
            def node(u: mpf) -> List[mpf]:
                x = mp.exp(u)
                return _checked(f(x), x, x)
        return _refine(node, ctx, "halfline")


def integrate_halfline(f: Callable[[mpf], mpf], ctx: PrecisionContext, *, finite_at_zero: bool = False) -> IntegralResult:
    return integrate_halfline_batch(lambda x: (f(x),), ctx, finite_at_zero=finite_at_zero)[0]


def integrate_interval(f: Callable[[mpf], mpf], a: Any, b: Any, ctx: PrecisionContext) -> IntegralResult:
    """tanh-sinh quadrature on [a, b]; endpoint distances are formed without cancellation."""
    with mp.workprec(ctx.bits):
        a, b = mp.mpf(a), mp.mpf(b)
        if not b > a:
            raise DomainError(f"empty interval [{a}, {b}]")
        c = (b - a) / 2
        half_pi = mp.pi / 2

        def node(u: mpf) -> List[mpf]:
            z = half_pi * mp.sinh(u)
            if u <= 0:
                x = a + 2 * c / (1 + mp.exp(-2 * z))
            else:
                x = b - 2 * c / (1 + mp.exp(2 * z))
            weight = c * half_pi * mp.cosh(u) * mp.sech(z) ** 2
            return _checked((f(x),), x, weight)

        return _refine(node, ctx, "interval")[0]


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

def stencil(t0: mpf, order: int, ctx: PrecisionContext, *, step: Optional[mpf] = None) -> List[mpf]:
    """Points at which `difference` needs values, in increasing order."""
    with mp.workprec(ctx.bits):
        t0 = mp.mpf(t0)
        if not t0 > 0:
            raise DomainError(f"central differences need t0 > 0, got {t0}")
        if order == 1:
            h = t0 * (step if step is not None else ctx.fd_step_scale)
            points = [t0 - h, t0 + h]
        elif order == 2:
            h = t0 * (step if step is not None else ctx.fd_step_scale_second)
            points = [t0 - 2 * h, t0, t0 + 2 * h]
        else:
            raise DomainError(f"difference order must be 1 or 2, got {order}")
        if not points[0] > 0:
            raise DomainError(f"stencil point {points[0]} is not positive")
        return points


def difference(values: Sequence[mpf], t0: mpf, order: int, ctx: PrecisionContext, *, step: Optional[mpf] = None) -> mpf:
    """Combine stencil values (ordered as `stencil` returns them) into a derivative estimate."""
    with mp.workprec(ctx.bits):
        for v in values:
            if not _is_finite(mp.mpf(v)):
                raise DomainError("non-finite value on the difference stencil")
        t0 = mp.mpf(t0)
        if order == 1:
            h = t0 * (step if step is not None else ctx.fd_step_scale)
            return (values[1] - values[0]) / (2 * h)
        h = t0 * (step if step is not None else ctx.fd_step_scale_second)
        return (values[2] - 2 * values[1] + values[0]) / (4 * h * h)


def central_difference(
    f: Callable[[mpf], mpf],
    t0: Any,
    order: int,
    ctx: PrecisionContext,
    *,
    step: Optional[mpf] = None,
) -> mpf:
    """O(h^2) central difference of f at t0; order 2 uses the +-2h stencil."""
    with mp.workprec(ctx.bits):
        points = stencil(t0, order, ctx, step=step)
        return difference([mp.mpf(f(p)) for p in points], t0, order, ctx, step=step)


# ---------------------------------------------------------------------------
# Adaptive precision
# ---------------------------------------------------------------------------

def _flatten(value: Any) -> List[mpf]:
    if isinstance(value, (list, tuple)):
        out: List[mpf] = []
        for item in value:
            out.extend(_flatten(item))
        return out
    return [mp.mpf(value)]


def _agree(first: Any, second: Any, digits: int) -> bool:
    a, b = _flatten(first), _flatten(second)
    if len(a) != len(b):
        return False
    eps = mp.mpf(10) ** (-digits)
    scale = max([abs(v) for v in a + b] or [mp.zero])
    for x, y in zip(a, b):
        if not (_is_finite(x) and _is_finite(y)):
            return False
        if abs(x - y) > eps * max(abs(x), abs(y)) + eps * eps * scale:
            return False
    return True


def adaptive_retry(computation: Callable[[PrecisionContext], Any], ctx: PrecisionContext) -> Tuple[Any, int]:
    """
    Run `computation` at ctx.bits and 2*ctx.bits, doubling further until two
    consecutive levels agree to ctx.target_digits. Returns (value, bits of the accepted level).
    """
    bits = ctx.bits
    previous = computation(ctx)
    for _ in range(settings.OPOLY_RETRY_DOUBLINGS):
        bits *= 2
        if bits > settings.OPOLY_MAX_BITS:
            break
        current = computation(ctx.with_bits(bits))
        with mp.workprec(bits):
            if _agree(previous, current, ctx.target_digits):
                return current, bits
        logger.warning(f"result unstable at {bits // 2} bits, escalating to {bits * 2}")
        previous = current
    raise PrecisionExhausted(
        f"no agreement to {ctx.target_digits} digits up to {min(bits, settings.OPOLY_MAX_BITS)} bits"
    )


# ---------------------------------------------------------------------------
# Tolerances
# ---------------------------------------------------------------------------

def tolerance_for(
    method: Method,
    ctx: PrecisionContext,
    scale: Any = 1,
    *,
    order: int = 1,
    gap: Any = 0,
    tail: Any = 0,
) -> mpf:
    """
    Method-specific tolerance: 10^{-D/2} C for algebraic and quadrature rows,
    10 (delta^2 + 10^{-D}/delta^order) C for differences, and
    10 gap + tail + 10^{-D/2} C for t-grid integrals. C = max(1, |scale|).
    """
    with mp.workprec(ctx.bits):
        c = max(mp.one, abs(mp.mpf(scale)))
        half = mp.mpf(10) ** (-mp.mpf(ctx.target_digits) / 2)
        if method in (Method.ALGEBRAIC, Method.QUADRATURE):
            return half * c
        if method is Method.FINITE_DIFFERENCE:
            delta = ctx.fd_step_scale if order == 1 else ctx.fd_step_scale_second
            rounding = mp.mpf(10) ** (-ctx.target_digits) / delta ** order
            return 10 * (delta ** 2 + rounding) * c
        return 10 * abs(mp.mpf(gap)) + abs(mp.mpf(tail)) + half * c
