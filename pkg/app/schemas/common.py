# File: app/schemas/common.py

import re
from typing import Annotated, Any

from mpmath import mp, mpf
from pydantic import BeforeValidator


def to_mpf(value: Any) -> mpf:
    """
    Coerce ints, floats, decimal strings and mpf values to mpf.
    Strings are parsed at the precision active in the caller, so parse them
    inside the working-precision block that will use them.
    """
    if isinstance(value, mpf):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not reals")
    if isinstance(value, (int, float, str)):
        try:
            return mp.mpf(value)
        except (ValueError, TypeError) as exc:
            raise ValueError(f"cannot parse {value!r} as a real") from exc
    raise ValueError(f"cannot interpret {type(value).__name__} as a real")


# Arbitrary-precision real field. Models using it need arbitrary_types_allowed.
Real = Annotated[mpf, BeforeValidator(to_mpf)]

NUMERIC_MODEL_CONFIG = {"arbitrary_types_allowed": True}

_TRAILING_ZERO = re.compile(r"\.0(?=e|$)")


def format_real(value: Any, digits: int) -> str:
    """Decimal string with `digits` significant digits; '-1.0' is written '-1'."""
    return _TRAILING_ZERO.sub("", mp.nstr(to_mpf(value), digits))
