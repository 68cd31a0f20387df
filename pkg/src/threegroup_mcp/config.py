from __future__ import annotations

import logging
import os

from pydantic import BaseModel, ConfigDict, Field

from .errors import ErrorCode, MultcompError

logger = logging.getLogger(__name__)

ENV_PREFIX = "THREEGROUP_MCP_"


class Settings(BaseModel):
    """Defaults for the command line; flags override them."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.05, ge=0.0, le=1.0)
    reps: int = Field(default=100_000, ge=1)
    seed: int = Field(default=20240601, ge=0, lt=2**64)
    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=2000, ge=1)


def settings_from_env() -> Settings:
    defaults = Settings()
    alpha = _float_from_env(ENV_PREFIX + "ALPHA", default=defaults.alpha)
    reps = _int_from_env(ENV_PREFIX + "REPS", default=defaults.reps)
    seed = _int_from_env(ENV_PREFIX + "SEED", default=defaults.seed)
    workers = _int_from_env(ENV_PREFIX + "WORKERS", default=defaults.workers)
    chunk_size = _int_from_env(ENV_PREFIX + "CHUNK_SIZE", default=defaults.chunk_size)
    try:
        settings = Settings(alpha=alpha, reps=reps, seed=seed, workers=workers, chunk_size=chunk_size)
    except ValueError as exc:
        raise MultcompError(
            code=ErrorCode.usage_error,
            message=f"invalid {ENV_PREFIX}* setting: {exc}",
        ) from exc
    logger.debug("Settings loaded (settings=%s)", settings.model_dump())
    return settings


def _raw_from_env(name: str) -> str:
    return (os.environ.get(name) or "").strip()


def _int_from_env(name: str, *, default: int) -> int:
    value = _raw_from_env(name)
    if not value:
        return default
    try:
        return int(value)
    except ValueError as exc:
        raise MultcompError(
            code=ErrorCode.usage_error,
            message=f"{name} must be an integer, got {value!r}",
            details={"variable": name},
        ) from exc


def _float_from_env(name: str, *, default: float) -> float:
    value = _raw_from_env(name)
    if not value:
        return default
    try:
        return float(value)
    except ValueError as exc:
        raise MultcompError(
            code=ErrorCode.usage_error,
            message=f"{name} must be a number, got {value!r}",
            details={"variable": name},
        ) from exc
