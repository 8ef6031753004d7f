"""
Timestamps for log lines and run manifests.

Nothing that ends up in a CSV or JSON result body depends on the clock.
"""

from datetime import datetime, timezone
from typing import Optional

UTC = timezone.utc


def utc_now_iso_z(moment: Optional[datetime] = None) -> str:
    """ISO-8601 UTC with microseconds and a trailing Z, e.g. 2025-08-10T12:34:56.123456Z.

    ``moment`` defaults to now; naive datetimes are taken to be UTC.
    """
    if moment is None:
        moment = datetime.now(UTC)
    elif moment.tzinfo is None:
        moment = moment.replace(tzinfo=UTC)
    return moment.astimezone(UTC).isoformat(timespec="microseconds").replace("+00:00", "Z")
