"""Runtime caps and switches, overridable through environment variables."""
from __future__ import annotations

import os


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def use_numba() -> bool:
    """True unless SUPTAIL_DISABLE_NUMBA is set to a truthy value."""
    flag = os.environ.get("SUPTAIL_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


def subset_class_cap() -> int:
    return _env_int("SUPTAIL_SUBSET_CLASS_CAP", 200_000)


def dp_state_cap() -> int:
    return _env_int("SUPTAIL_DP_STATE_CAP", 10_000_000)


def min_cover_row_cap() -> int:
    return _env_int("SUPTAIL_MIN_COVER_ROW_CAP", 12)


def shatter_ground_cap() -> int:
    return _env_int("SUPTAIL_SHATTER_GROUND_CAP", 18)


def bp_class_cap() -> int:
    return _env_int("SUPTAIL_BP_CLASS_CAP", 20)


def sign_enum_cap() -> int:
    return _env_int("SUPTAIL_SIGN_ENUM_CAP", 20)


def halves_points_cap() -> int:
    return _env_int("SUPTAIL_HALVES_POINTS_CAP", 26)
