"""Distance kernels and rolling window statistics.

Two subsequence distances are provided. Continuous sensor channels are
compared with the z-normalized Euclidean distance, which can be written
in terms of the Pearson correlation of the two windows:

    d(x, y) = sqrt(2 * m * (1 - corr(x, y)))

Discrete actuator channels (pump states, valve positions) are compared
with the Hamming distance: the number of coordinates at which the two
windows hold different symbols. Normalizing raw actuator states would
divide by a standard deviation of zero whenever a window is constant,
which is the common case for actuators; counting symbol mismatches
sidesteps that entirely.

Constant windows under the z-normalized distance follow a fixed policy
instead of raising: two constant windows are at distance 0, a constant
window against a non-constant one is at distance sqrt(m) (the norm of
the non-constant window's z-normalized form, treating the constant
window as the zero vector).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateWindowError,
    InvalidDataError,
    InvalidWindowError,
)

CONTINUOUS = "continuous"
DISCRETE = "discrete"

_KINDS = (CONTINUOUS, DISCRETE)


@dataclass
class Channel:
    """One named column of a process log.

    Values are held as float64 regardless of kind; a discrete channel is
    additionally required to hold exact integers (actuator states form a
    small symbolic alphabet). Instances are treated as immutable once
    constructed.
    """

    name: str
    values: np.ndarray
    kind: str = CONTINUOUS

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise InvalidDataError(f"channel {self.name!r}: values must be 1-d")
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise InvalidDataError(
                f"channel {self.name!r}: non-finite value at index {bad}"
            )
        if self.kind not in _KINDS:
            raise InvalidDataError(f"channel {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == DISCRETE and self.values.size:
            if not np.array_equal(self.values, np.rint(self.values)):
                bad = int(np.flatnonzero(self.values != np.rint(self.values))[0])
                raise InvalidDataError(
                    f"channel {self.name!r}: discrete channel has non-integer "
                    f"value {self.values[bad]!r} at index {bad}"
                )

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass
class RollingStats:
    """Per-window mean and population standard deviation."""

    window: int
    means: np.ndarray = field(repr=False)
    stds: np.ndarray = field(repr=False)


def _check_window(n: int, m: int, least: int = 1) -> None:
    if m < least:
        raise InvalidWindowError(f"window {m} is below the minimum {least}")
    if m > n:
        raise InvalidWindowError(f"window {m} exceeds series length {n}")


def _moving_mean_std(values: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative-sum rolling mean/std over all n - m + 1 windows.

    The series is centered on its global mean before accumulating so the
    squared cumulative sums do not cancel catastrophically; the variance
    is clamped at zero.
    """
    if m == 1:
        # windows of one element: exact answer, skip the accumulators
        return values.copy(), np.zeros_like(values)
    center = values.mean()
    xc = values - center
    csum = np.empty(values.size + 1)
    csum[0] = 0.0
    np.cumsum(xc, out=csum[1:])
    csq = np.empty(values.size + 1)
    csq[0] = 0.0
    np.cumsum(xc * xc, out=csq[1:])
    wsum = csum[m:] - csum[:-m]
    wsq = csq[m:] - csq[:-m]
    means = wsum / m
    var = np.maximum(wsq / m - means * means, 0.0)
    return means + center, np.sqrt(var)


def rolling_stats(channel: Channel, m: int) -> RollingStats:
    """Mean and population std of every length-m window of the channel."""
    n = len(channel)
    if n == 0:
        raise InvalidDataError(f"channel {channel.name!r} is empty")
    _check_window(n, m)
    means, stds = _moving_mean_std(channel.values, m)
    return RollingStats(window=m, means=means, stds=stds)


def _as_window(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidDataError(f"{name}: expected a non-empty 1-d window")
    if not np.all(np.isfinite(arr)):
        raise InvalidDataError(f"{name}: window contains non-finite values")
    return arr


def pearson_corr(x, y) -> float:
    """Pearson correlation of two equal-length windows.

    Equals (sum(xy) - m*mu_x*mu_y) / (m*sigma_x*sigma_y) with population
    sigmas, evaluated from centered residuals so large offsets do not
    cancel, and clamped into [-1, 1] to absorb rounding. Constant windows
    have no defined correlation and are refused; callers that must handle
    them apply the constant-window policy first.
    """
    xa = _as_window(x, "x")
    ya = _as_window(y, "y")
    if xa.size != ya.size:
        raise InvalidDataError(f"window lengths differ: {xa.size} != {ya.size}")
    m = xa.size
    if m < 2:
        raise InvalidWindowError("correlation needs a window of at least 2")
    rx = xa - xa.mean()
    ry = ya - ya.mean()
    sx = np.sqrt(np.mean(rx * rx))
    sy = np.sqrt(np.mean(ry * ry))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateWindowError("constant window has no defined correlation")
    corr = float(np.dot(rx, ry)) / (m * sx * sy)
    return float(min(1.0, max(-1.0, corr)))


def corr_to_distance(corr: float, m: int) -> float:
    """Map a correlation to the z-normalized Euclidean distance sqrt(2m(1-corr))."""
    if not -1.0 <= corr <= 1.0:
        raise ValueError(f"correlation {corr} outside [-1, 1]")
    if m < 1:
        raise InvalidWindowError(f"window {m} is below the minimum 1")
    return float(np.sqrt(2.0 * m * (1.0 - corr)))


def znorm_distance(x, y) -> float:
    """Euclidean distance between the z-normalized forms of two windows.

    This is the direct route: normalize each window to zero mean and unit
    population std, then take the ordinary Euclidean norm of the
    difference. Constant windows follow the fixed policy (0 if both are
    constant, sqrt(m) if exactly one is).
    """
    xa = _as_window(x, "x")
    ya = _as_window(y, "y")
    if xa.size != ya.size:
        raise InvalidDataError(f"window lengths differ: {xa.size} != {ya.size}")
    m = xa.size
    if m < 2:
        raise InvalidWindowError("z-normalized distance needs a window of at least 2")
    sx = float(xa.std())
    sy = float(ya.std())
    if sx == 0.0 and sy == 0.0:
        return 0.0
    if sx == 0.0 or sy == 0.0:
        return float(np.sqrt(m))
    zx = (xa - xa.mean()) / sx
    zy = (ya - ya.mean()) / sy
    return float(np.linalg.norm(zx - zy))


def hamming_distance(x, y) -> int:
    """Number of positions at which two windows hold different symbols."""
    xa = np.asarray(x)
    ya = np.asarray(y)
    if xa.ndim != 1 or ya.ndim != 1 or xa.size == 0:
        raise InvalidDataError("expected non-empty 1-d windows")
    if xa.size != ya.size:
        raise InvalidDataError(f"window lengths differ: {xa.size} != {ya.size}")
    return int(np.count_nonzero(xa != ya))
