"""Hill estimation of the tail exponent from upper order statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from statistics import NormalDist

import numpy as np

TAIL_MODES = ("upper", "abs")


class TailEstimationError(ValueError):
    """Base class for Hill estimation failures. ``k`` is set when known."""

    def __init__(self, message: str, k: int | None = None):
        super().__init__(message)
        self.k = k


class NotEnoughPositive(TailEstimationError):
    pass


class DegenerateTail(TailEstimationError):
    pass


class EmptyResult(TailEstimationError):
    pass


class Sample:
    """Immutable 1-d series of finite observations.

    ``dropped`` counts observations removed by an upstream filter such as
    :func:`tail_transform`.
    """

    __slots__ = ("_values", "dropped", "__dict__")

    def __init__(self, values, dropped: int = 0):
        arr = np.array(values, dtype=float).reshape(-1)
        if arr.size < 1:
            raise ValueError("a sample needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample values must be finite")
        arr.setflags(write=False)
        self._values = arr
        self.dropped = int(dropped)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @cached_property
    def order_statistics(self) -> np.ndarray:
        out = np.sort(self._values)
        out.setflags(write=False)
        return out

    def __len__(self) -> int:
        return self._values.size

    def __repr__(self) -> str:
        return f"Sample(n={len(self)}, dropped={self.dropped})"


def as_sample(s) -> Sample:
    return s if isinstance(s, Sample) else Sample(s)


def _frac_bound(x: float) -> float:
    # keeps e.g. 0.07 * 100 = 7.000000000000001 from rounding up to 8
    return round(x, 9)


@dataclass(frozen=True)
class KGrid:
    n: int
    k_values: tuple[int, ...]

    def __post_init__(self):
        ks = tuple(int(k) for k in self.k_values)
        if not ks:
            raise ValueError(f"empty k-grid for n={self.n}")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("k_values must be strictly increasing")
        if ks[0] < 1 or ks[-1] >= self.n:
            raise ValueError(f"every k must satisfy 1 <= k < n={self.n}")
        object.__setattr__(self, "k_values", ks)

    @classmethod
    def from_fractions(cls, n: int, lo: float = 0.01, hi: float = 0.20) -> "KGrid":
        """All integers k with ceil(lo*n) <= k <= floor(hi*n), clipped to [1, n-1]."""
        k_lo = max(1, math.ceil(_frac_bound(lo * n)))
        k_hi = min(n - 1, math.floor(_frac_bound(hi * n)))
        return cls(n, tuple(range(k_lo, k_hi + 1)))

    @property
    def ks(self) -> np.ndarray:
        return np.asarray(self.k_values, dtype=np.int64)

    @property
    def fractions(self) -> np.ndarray:
        return self.ks / self.n

    def __len__(self) -> int:
        return len(self.k_values)


@dataclass(frozen=True, eq=False)
class HillCurve:
    kgrid: KGrid
    estimates: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    level: float = 0.95


def tail_transform(s, mode: str = "upper") -> Sample:
    """Map a two-sided series onto the positive half-line used by the estimator.

    ``abs`` takes absolute values, ``upper`` keeps the positive values. Zeros
    are dropped in both modes and counted in ``Sample.dropped``.
    """
    s = as_sample(s)
    v = s.values
    if mode == "abs":
        v = np.abs(v)
    elif mode != "upper":
        raise ValueError(f"unknown tail mode {mode!r}; expected one of {TAIL_MODES}")
    kept = v[v > 0]
    if kept.size == 0:
        raise EmptyResult(f"no positive values left after tail_transform(mode={mode!r})")
    return Sample(kept, dropped=s.dropped + v.size - kept.size)


def top_order_logs(x: np.ndarray, m: int, mode: str | None = None) -> np.ndarray:
    """Logs of the ``m`` largest values along the last axis, in descending order.

    Non-positive entries become NaN. ``mode`` applies the tail transform
    inline (``abs`` or ``upper``); ``None`` takes ``x`` as given.
    """
    x = np.asarray(x, dtype=float)
    if mode == "abs":
        x = np.abs(x)
    elif mode not in (None, "upper"):
        raise ValueError(f"unknown tail mode {mode!r}")
    size = x.shape[-1]
    m = min(m, size)
    if m < size:
        top = -np.partition(-x, m - 1, axis=-1)[..., :m]
    else:
        top = x
    top = -np.sort(-top, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(top > 0, np.log(np.where(top > 0, top, 1.0)), np.nan)


def hill_from_logs(logs: np.ndarray, ks) -> np.ndarray:
    """Hill estimates for each k from descending log order statistics.

    Returns NaN where fewer than k+1 positive values exist and inf where the
    k+1 largest values are all equal.
    """
    ks = np.asarray(ks, dtype=np.int64)
    csum = np.cumsum(logs, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        spacing = csum[..., ks - 1] - ks * logs[..., ks]
        # exact tie test: the k+1 largest are equal iff the first equals the (k+1)-th
        tied = logs[..., :1] == logs[..., ks]
        spacing = np.where(tied | (spacing < 0), 0.0, spacing)
        return ks / spacing


def raise_if_invalid(value: float, k: int, available: int) -> None:
    if np.isnan(value):
        raise NotEnoughPositive(
            f"k={k} needs {k + 1} positive values, only {available} available", k=k)
    if not np.isfinite(value):
        raise DegenerateTail(f"the {k + 1} largest values are all equal at k={k}", k=k)


def hill_estimate(s, k: int) -> float:
    """Hill estimate from the k largest positive values.

    alpha_hat = k / sum_{i<=k} [log X_(i) - log X_(k+1)] with X_(1) the largest.
    """
    s = as_sample(s)
    k = int(k)
    if not (1 <= k < len(s)):
        raise ValueError(f"k must satisfy 1 <= k < n={len(s)}, got {k}")
    pos = s.order_statistics[s.order_statistics > 0]
    if pos.size < k + 1:
        raise NotEnoughPositive(
            f"k={k} needs {k + 1} positive values, only {pos.size} available", k=k)
    logs = top_order_logs(pos, k + 1)
    value = float(hill_from_logs(logs, [k])[0])
    raise_if_invalid(value, k, pos.size)
    return value


def hill_curve(s, g: KGrid, level: float = 0.95) -> HillCurve:
    """Hill estimates over a k-grid with asymptotic normal bands alpha_hat * (1 +- z/sqrt(k))."""
    if not (0.0 < level < 1.0):
        raise ValueError(f"level must lie in (0, 1), got {level}")
    s = as_sample(s)
    ks = g.ks
    pos = s.values[s.values > 0]
    logs = top_order_logs(pos, int(ks[-1]) + 1)
    if logs.size < ks[-1] + 1:
        logs = np.concatenate([logs, np.full(int(ks[-1]) + 1 - logs.size, np.nan)])
    est = hill_from_logs(logs, ks)
    bad = ~np.isfinite(est)
    if bad.any():
        i = int(np.argmax(bad))
        raise_if_invalid(float(est[i]), int(ks[i]), pos.size)
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    half = z * est / np.sqrt(ks)
    return HillCurve(g, est, est - half, est + half, level)
