"""Value rules for built-in and extended scalars.

``coerce_input`` accepts client values (literals or variables);
``serialize`` turns backend JSON into response JSON.  Neither ever narrows:
a value that does not fit the declared scalar is an error, not a rounding.
"""

from __future__ import annotations

import datetime as _dt
import re
from decimal import Decimal, InvalidOperation
from typing import Any

MAX_SAFE_INTEGER = 2**53 - 1

INTEGER_RANGES = {
    "Int": (-(2**31), 2**31 - 1),
    "Long": (-(2**63), 2**63 - 1),
    "Short": (-(2**15), 2**15 - 1),
    "Byte": (-(2**7), 2**7 - 1),
    "BigInteger": (None, None),
}

_INT_TEXT = re.compile(r"^-?[0-9]+$")


class ScalarError(ValueError):
    pass


def _integer(scalar: str, v: Any, allow_text: bool) -> int:
    if isinstance(v, bool):
        raise ScalarError(f"{scalar} cannot represent boolean {v!r}")
    if isinstance(v, str) and allow_text and _INT_TEXT.match(v):
        v = int(v)
    if not isinstance(v, int):
        raise ScalarError(f"{scalar} cannot represent {v!r}")
    lo, hi = INTEGER_RANGES[scalar]
    if lo is not None and not lo <= v <= hi:
        raise ScalarError(f"{v} is out of range for {scalar}")
    return v


def _float(scalar: str, v: Any, allow_text: bool) -> float:
    if isinstance(v, bool):
        raise ScalarError(f"{scalar} cannot represent boolean {v!r}")
    if isinstance(v, str) and allow_text:
        try:
            return float(v)
        except ValueError:
            raise ScalarError(f"{scalar} cannot represent {v!r}") from None
    if isinstance(v, int):
        f = float(v)
        if int(f) != v:
            raise ScalarError(f"{v} cannot be represented exactly as {scalar}")
        return f
    if isinstance(v, float):
        return v
    raise ScalarError(f"{scalar} cannot represent {v!r}")


def _decimal(v: Any) -> Any:
    if isinstance(v, bool):
        raise ScalarError(f"BigDecimal cannot represent boolean {v!r}")
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, str):
        try:
            Decimal(v)
        except InvalidOperation:
            raise ScalarError(f"BigDecimal cannot represent {v!r}") from None
        return v
    raise ScalarError(f"BigDecimal cannot represent {v!r}")


def _temporal(scalar: str, v: Any) -> str:
    if not isinstance(v, str):
        raise ScalarError(f"{scalar} expects a string, got {v!r}")
    text = v[:-1] + "+00:00" if v.endswith("Z") else v
    parser = {"DateTime": _dt.datetime, "Date": _dt.date, "Time": _dt.time}[scalar]
    try:
        parser.fromisoformat(text)
    except ValueError:
        raise ScalarError(f"{v!r} is not a valid {scalar}") from None
    return v


def coerce_input(scalar: str, v: Any) -> Any:
    """Validate a client-supplied value for ``scalar``; returns the REST value."""
    if scalar in ("Int",):
        return _integer(scalar, v, allow_text=False)
    if scalar in ("Long", "Short", "Byte", "BigInteger"):
        return _integer(scalar, v, allow_text=True)
    if scalar in ("Float", "Double"):
        return _float(scalar, v, allow_text=False)
    if scalar == "BigDecimal":
        return _decimal(v)
    if scalar == "String":
        if not isinstance(v, str):
            raise ScalarError(f"String cannot represent {v!r}")
        return v
    if scalar == "ID":
        if isinstance(v, bool) or not isinstance(v, (str, int)):
            raise ScalarError(f"ID cannot represent {v!r}")
        return str(v)
    if scalar == "Boolean":
        if not isinstance(v, bool):
            raise ScalarError(f"Boolean cannot represent {v!r}")
        return v
    if scalar in ("DateTime", "Date", "Time"):
        return _temporal(scalar, v)
    if scalar == "Char":
        if not isinstance(v, str) or len(v) != 1:
            raise ScalarError(f"Char expects a one-character string, got {v!r}")
        return v
    return v  # custom scalars are opaque


def serialize(scalar: str, v: Any, *, from_key: bool = False) -> Any:
    """Backend value -> response JSON value for ``scalar``.

    ``from_key`` marks values that were JSON object keys and therefore
    arrive as strings whatever their real type.
    """
    if scalar == "Int":
        return _integer(scalar, v, allow_text=from_key)
    if scalar in ("Long", "Short", "Byte", "BigInteger"):
        n = _integer(scalar, v, allow_text=True)
        return n if abs(n) <= MAX_SAFE_INTEGER else str(n)
    if scalar in ("Float", "Double"):
        return _float(scalar, v, allow_text=from_key or scalar == "Double")
    if scalar == "BigDecimal":
        return _decimal(v)
    if scalar == "Boolean":
        if from_key and v in ("true", "false"):
            return v == "true"
        if not isinstance(v, bool):
            raise ScalarError(f"Boolean cannot represent {v!r}")
        return v
    if scalar in ("String", "ID"):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (str, int, float)):
            return str(v) if not isinstance(v, str) else v
        raise ScalarError(f"{scalar} cannot represent {v!r}")
    if scalar in ("DateTime", "Date", "Time"):
        return _temporal(scalar, v)
    if scalar == "Char":
        if not isinstance(v, str) or len(v) != 1:
            raise ScalarError(f"Char expects a one-character string, got {v!r}")
        return v
    return v
