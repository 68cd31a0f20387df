from __future__ import annotations

from datetime import datetime, timezone

DISPLAY_FLOOR = 0.001


def now() -> datetime:
    return datetime.now(timezone.utc)


def format_p(value: float) -> str:
    """Render a p-value the way published tables do: three decimals, "<0.001" below that."""
    if value < DISPLAY_FLOOR:
        return "<0.001"
    return f"{value:.3f}"
