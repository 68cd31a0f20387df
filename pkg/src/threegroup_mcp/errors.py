from __future__ import annotations

from enum import IntEnum, StrEnum
from typing import Any


class ExitCode(IntEnum):
    ok = 0
    parse_error = 2
    degenerate_data = 3
    usage_error = 64
    software_error = 70


class ErrorCode(StrEnum):
    invalid_argument = "invalid_argument"
    insufficient_data = "insufficient_data"
    degenerate_data = "degenerate_data"
    numeric_failure = "numeric_failure"
    parse_error = "parse_error"
    usage_error = "usage_error"


_DEFAULT_EXIT_CODES: dict[ErrorCode, ExitCode] = {
    ErrorCode.invalid_argument: ExitCode.usage_error,
    ErrorCode.usage_error: ExitCode.usage_error,
    ErrorCode.insufficient_data: ExitCode.degenerate_data,
    ErrorCode.degenerate_data: ExitCode.degenerate_data,
    ErrorCode.parse_error: ExitCode.parse_error,
    ErrorCode.numeric_failure: ExitCode.software_error,
}


class MultcompError(Exception):
    """Error raised by every layer of the package; carries the CLI exit status."""

    def __init__(
        self,
        *,
        code: ErrorCode,
        message: str,
        exit_code: ExitCode | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.code = code
        self.message = message
        self.exit_code = exit_code if exit_code is not None else _DEFAULT_EXIT_CODES[code]
        self.details = details

    def __str__(self) -> str:
        return self.message


def invalid_argument(message: str, **details: Any) -> MultcompError:
    return MultcompError(code=ErrorCode.invalid_argument, message=message, details=details or None)


def numeric_failure(message: str, **details: Any) -> MultcompError:
    return MultcompError(code=ErrorCode.numeric_failure, message=message, details=details or None)
