"""Alpha-stable laws in Nolan's S0 parametrization: characteristic function,
tail constants, mean, and a seeded Chambers-Mallows-Stuck sampler."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mctail.hill import Sample

# below this distance from 1 the alpha == 1 branch is used
ALPHA_ONE_TOL = 1e-8

SQRT2_2 = math.sqrt(2.0) / 2.0


@dataclass(frozen=True)
class StableParams:
    alpha: float
    beta: float = 0.0
    gamma: float = SQRT2_2
    delta: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not (-1.0 <= self.beta <= 1.0):
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")
        if not math.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta}")

    @property
    def near_one(self) -> bool:
        return abs(self.alpha - 1.0) < ALPHA_ONE_TOL


@dataclass(frozen=True)
class RngStream:
    """Identifies one independent random stream.

    The generator state is derived by hashing ``(master_seed, *stream_id)``
    through numpy's ``SeedSequence``, so a stream is reproducible regardless
    of which process or thread draws from it.
    """

    master_seed: int
    stream_id: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if not (0 <= int(self.master_seed) < 2**64):
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        sid = tuple(int(i) for i in self.stream_id)
        if len(sid) != 2 or min(sid) < 0:
            raise ValueError(f"stream_id must be a pair of non-negative integers, got {self.stream_id}")
        object.__setattr__(self, "stream_id", sid)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed), spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(seq))


def characteristic_function(p: StableParams, u):
    """phi(u) = E exp(iuX) for X ~ S(alpha, beta, gamma, delta) in the S0 form.

    Accepts a scalar or an array of ``u`` and returns the same shape.
    """
    u_arr = np.asarray(u, dtype=float)
    a, b, g, d = p.alpha, p.beta, p.gamma, p.delta
    r = g * np.abs(u_arr)
    su = np.sign(u_arr)
    # exponents expanded so that tiny |u| neither overflows nor multiplies 0 * inf
    if p.near_one:
        with np.errstate(divide="ignore", invalid="ignore"):
            rlogr = np.where(r > 0, r * np.log(np.where(r > 0, r, 1.0)), 0.0)
        expo = -r - 1j * b * (2.0 / math.pi) * su * rlogr + 1j * d * u_arr
    else:
        ra = r ** a
        expo = -ra - 1j * b * math.tan(math.pi * a / 2.0) * su * (r - ra) + 1j * d * u_arr
    out = np.exp(expo)
    return complex(out) if out.ndim == 0 else out


def tail_constant(p: StableParams, side: str = "upper") -> float:
    """Limit of x**alpha * P(X > x) (upper) or x**alpha * P(X < -x) (lower)."""
    if p.alpha >= 2.0:
        raise ValueError("alpha = 2 has no power-law tail")
    if abs(p.beta) >= 1.0:
        raise ValueError("|beta| = 1 gives a one-sided law; tail constant undefined here")
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    c_alpha = math.sin(math.pi * p.alpha / 2.0) * math.gamma(p.alpha) / math.pi
    skew = 1.0 + p.beta if side == "upper" else 1.0 - p.beta
    return c_alpha * skew * p.gamma ** p.alpha


def stable_mean(p: StableParams) -> float | None:
    """Mean of the law; ``None`` when alpha <= 1 (the first moment does not exist)."""
    if p.alpha <= 1.0:
        return None
    return p.delta - p.beta * p.gamma * math.tan(math.pi * p.alpha / 2.0)


def _standard_cms(alpha: float, beta: float, v: np.ndarray, w: np.ndarray, near_one: bool) -> np.ndarray:
    # standard S1(alpha, beta, 1, 0) variates from V ~ U(-pi/2, pi/2), W ~ Exp(1)
    half_pi = math.pi / 2.0
    if near_one:
        bv = half_pi + beta * v
        return (2.0 / math.pi) * (bv * np.tan(v) - beta * np.log(half_pi * w * np.cos(v) / bv))
    if beta == 0.0:
        return (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
                * (np.cos(v - alpha * v) / w) ** ((1.0 - alpha) / alpha))
    t = beta * math.tan(math.pi * alpha / 2.0)
    b = math.atan(t) / alpha
    s = (1.0 + t * t) ** (1.0 / (2.0 * alpha))
    return (s * np.sin(alpha * (v + b)) / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - alpha * (v + b)) / w) ** ((1.0 - alpha) / alpha))


def draw(p: StableParams, n: int, stream: RngStream | np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. S0 draws as a float array. Uniforms are drawn before exponentials."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = stream.generator() if isinstance(stream, RngStream) else stream
    v = rng.uniform(-math.pi / 2.0, math.pi / 2.0, n)
    w = rng.standard_exponential(n)
    z = _standard_cms(p.alpha, p.beta, v, w, p.near_one)
    if p.near_one:
        # the S1 -> S0 location shifts cancel at alpha = 1
        return p.gamma * z + p.delta
    return p.gamma * z + (p.delta - p.beta * p.gamma * math.tan(math.pi * p.alpha / 2.0))


def sample(p: StableParams, n: int, stream: RngStream) -> Sample:
    return Sample(draw(p, n, stream))
