"""Local weighted linear regression smoothing of logged signals.

Each output sample is the value at the window centre of a degree-1 polynomial
fitted by weighted least squares, with tricube weights on the distance to the
centre. Windows are truncated at both ends of the series.
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Iterable, Sequence

import numpy as np
import numpy.typing as npt

from riskgraph.ingest.exceptions import SmoothingParameterError
from riskgraph.ingest.log_models import CONTINUOUS_CHANNELS, DriverLogRecord

logger = logging.getLogger(__name__)

DEFAULT_SPAN = 25

_BOUNDED_CHANNELS = frozenset({"brake", "throttle"})


def tricube_weights(half_width: int) -> npt.NDArray[np.float64]:
    """Tricube weights for offsets ``-half_width..half_width``.

    Offsets are normalised by ``half_width + 1`` so the outermost samples keep a
    positive weight and a truncated window always has two usable points.
    """
    offsets = np.arange(-half_width, half_width + 1, dtype=np.float64)
    u = np.abs(offsets) / (half_width + 1)
    weights: npt.NDArray[np.float64] = (1.0 - u**3) ** 3
    return weights


def smooth_series(
    values: Sequence[float] | npt.ArrayLike, span: int
) -> npt.NDArray[np.float64]:
    """Smooth a series with a tricube-weighted local linear fit.

    Args:
        values: Samples to smooth
        span: Odd window size, at least 3 and at most the series length

    Returns:
        Array of the same length holding the fitted centre values

    Raises:
        SmoothingParameterError: If the span is even or out of range

    Example:
        >>> smooth_series([0.0, 1.0, 2.0, 3.0, 4.0], span=5)
        array([0., 1., 2., 3., 4.])
    """
    y = np.asarray(values, dtype=np.float64)
    n = y.shape[0]
    if span % 2 == 0 or span < 3 or span > n:
        raise SmoothingParameterError(
            f"Invalid smoothing span {span} for a series of length {n}.\n"
            f"Suggestions:\n"
            f"  - Use an odd span between 3 and {n}\n"
            f"  - The default span of {DEFAULT_SPAN} covers one second at 25 Hz"
        )

    half = (span - 1) // 2
    w = tricube_weights(half)
    k = np.arange(-half, half + 1, dtype=np.float64)

    # Zero padding truncates every window at the series ends.
    y_pad = np.pad(y, half)
    mask = np.pad(np.ones(n), half)

    s0 = np.correlate(mask, w, mode="valid")
    s1 = np.correlate(mask, w * k, mode="valid")
    s2 = np.correlate(mask, w * k * k, mode="valid")
    t0 = np.correlate(y_pad, w, mode="valid")
    t1 = np.correlate(y_pad, w * k, mode="valid")

    # Intercept of the weighted fit y ~ a + b*k evaluated at k = 0.
    fitted: npt.NDArray[np.float64] = (s2 * t0 - s1 * t1) / (s0 * s2 - s1 * s1)
    return fitted


def smooth_records(
    records: Sequence[DriverLogRecord],
    span: int = DEFAULT_SPAN,
    channels: Iterable[str] | None = None,
) -> list[DriverLogRecord]:
    """Smooth selected continuous channels of a log.

    Args:
        records: Log records in time order
        span: Smoothing window in samples
        channels: Channel names to smooth; all continuous channels by default

    Returns:
        New records with smoothed channels; brake and throttle stay in [0, 1]

    Raises:
        SmoothingParameterError: If the span is invalid or a channel is unknown
    """
    selected = tuple(CONTINUOUS_CHANNELS if channels is None else channels)
    unknown = [c for c in selected if c not in CONTINUOUS_CHANNELS]
    if unknown:
        raise SmoothingParameterError(
            f"Unknown channels: {', '.join(unknown)}\n"
            f"Suggestion: choose from {', '.join(CONTINUOUS_CHANNELS)}"
        )
    if not records:
        return []

    smoothed: dict[str, npt.NDArray[np.float64]] = {}
    for channel in selected:
        series = smooth_series([r.channel(channel) for r in records], span)
        if channel in _BOUNDED_CHANNELS:
            series = np.clip(series, 0.0, 1.0)
        smoothed[channel] = series

    logger.debug("Smoothed %s over %d records", ", ".join(selected), len(records))
    return [
        dataclasses.replace(
            record, **{c: float(values[i]) for c, values in smoothed.items()}
        )
        for i, record in enumerate(records)
    ]
