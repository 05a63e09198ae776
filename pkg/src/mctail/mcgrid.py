"""Pre-simulated expected Hill curves E[alpha_hat(alpha0, k)] and their cache file."""
from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from mctail.hill import TAIL_MODES, KGrid, hill_from_logs, top_order_logs
from mctail.stable import SQRT2_2, RngStream, StableParams, draw

FORMAT_VERSION = 1
MAGIC = "# mctail grid"
DEFAULT_ALPHA0 = tuple(round(1.0 + i / 100.0, 2) for i in range(1, 101))
# flag cells where more than this share of replications failed
EXCLUSION_FLAG_SHARE = 0.01
# draws held in memory per simulation chunk
CHUNK_DRAWS = 4_000_000


class GridError(ValueError):
    pass


class GridDegenerate(GridError):
    pass


class FormatVersionMismatch(GridError):
    pass


class ChecksumMismatch(GridError):
    pass


class SpecIncompatible(GridError):
    pass


@dataclass(frozen=True)
class GridSpec:
    n: int = 1000
    alpha0_values: tuple[float, ...] = DEFAULT_ALPHA0
    replications: int = 1000
    k_fractions: tuple[float, float] = (0.01, 0.20)
    beta: float = 0.0
    gamma: float = SQRT2_2
    delta: float = 0.0
    tail_mode: str = "upper"
    master_seed: int = 2010
    # one set of replication streams shared by every alpha0 row
    common_random_numbers: bool = True

    def __post_init__(self):
        a0 = tuple(float(a) for a in self.alpha0_values)
        object.__setattr__(self, "alpha0_values", a0)
        object.__setattr__(self, "k_fractions", tuple(float(f) for f in self.k_fractions))
        if not a0:
            raise ValueError("alpha0_values is empty")
        if any(b <= a for a, b in zip(a0, a0[1:])):
            raise ValueError("alpha0_values must be strictly ascending")
        if a0[0] <= 1.0 or a0[-1] > 2.0:
            raise ValueError("every alpha0 must lie in (1, 2]")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        lo, hi = self.k_fractions
        if not (0.0 < lo <= hi < 1.0):
            raise ValueError(f"bad k_fractions {self.k_fractions}")
        if self.tail_mode not in TAIL_MODES:
            raise ValueError(f"tail_mode must be one of {TAIL_MODES}")
        if not (0 <= self.master_seed < 2**64):
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        StableParams(a0[0], self.beta, self.gamma, self.delta)

    @property
    def kgrid(self) -> KGrid:
        return KGrid.from_fractions(self.n, *self.k_fractions)

    def params(self, alpha0: float) -> StableParams:
        return StableParams(alpha0, self.beta, self.gamma, self.delta)


@dataclass(frozen=True, eq=False)
class GridSurface:
    spec: GridSpec
    kgrid: KGrid
    mean_curve: np.ndarray
    std_curve: np.ndarray
    excluded: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = (len(self.spec.alpha0_values), len(self.kgrid))
        for name in ("mean_curve", "std_curve", "excluded"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise SpecIncompatible(f"{name} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)

    @property
    def alpha0(self) -> np.ndarray:
        return np.asarray(self.spec.alpha0_values)

    @property
    def flagged(self) -> np.ndarray:
        """Cells whose exclusion share exceeds EXCLUSION_FLAG_SHARE."""
        return self.excluded > EXCLUSION_FLAG_SHARE * self.spec.replications

    def row(self, alpha0: float) -> np.ndarray:
        idx = np.flatnonzero(np.isclose(self.alpha0, alpha0, rtol=0, atol=1e-9))
        if idx.size == 0:
            raise KeyError(f"alpha0={alpha0} is not on the grid")
        return self.mean_curve[idx[0]]

    def __eq__(self, other):
        if not isinstance(other, GridSurface):
            return NotImplemented
        return (self.spec == other.spec and self.kgrid == other.kgrid
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("mean_curve", "std_curve", "excluded")))


@dataclass
class CurveMoments:
    """Running per-k count/mean/M2 over replications plus min/max."""

    count: np.ndarray
    mean: np.ndarray
    m2: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def empty(cls, size: int) -> "CurveMoments":
        z = np.zeros(size)
        return cls(np.zeros(size, dtype=np.int64), z.copy(), z.copy(),
                   np.full(size, np.inf), np.full(size, -np.inf))

    def update(self, block: np.ndarray) -> None:
        ok = np.isfinite(block)
        nb = ok.sum(axis=0)
        vals = np.where(ok, block, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            mb = np.where(nb > 0, vals.sum(axis=0) / np.maximum(nb, 1), 0.0)
            m2b = np.where(ok, (block - mb) ** 2, 0.0).sum(axis=0)
        tot = self.count + nb
        delta = mb - self.mean
        safe = np.maximum(tot, 1)
        self.mean = np.where(tot > 0, self.mean + delta * nb / safe, 0.0)
        self.m2 = self.m2 + m2b + delta ** 2 * self.count * nb / safe
        self.count = tot
        self.lo = np.minimum(self.lo, np.where(ok, block, np.inf).min(axis=0))
        self.hi = np.maximum(self.hi, np.where(ok, block, -np.inf).max(axis=0))

    @property
    def std(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.count > 1, np.sqrt(self.m2 / np.maximum(self.count - 1, 1)), 0.0)


def simulate_hill_curves(params: StableParams, n: int, ks, replications: int, master_seed: int,
                         cell: int, tail_mode: str = "upper",
                         keep: bool = False) -> tuple[CurveMoments, np.ndarray | None]:
    """Hill curves of ``replications`` samples of length ``n``.

    Replication r draws from stream ``(cell, r)``. Chunking depends only on
    ``n``, so the result does not depend on the caller's parallelism. With
    ``keep`` the full replications x k matrix is returned as well.
    """
    ks = np.asarray(ks, dtype=np.int64)
    m = int(ks[-1]) + 1
    chunk = max(1, min(replications, CHUNK_DRAWS // n))
    mom = CurveMoments.empty(ks.size)
    kept = []
    for start in range(0, replications, chunk):
        stop = min(replications, start + chunk)
        x = np.stack([draw(params, n, RngStream(master_seed, (cell, r))) for r in range(start, stop)])
        block = hill_from_logs(top_order_logs(x, m, tail_mode), ks)
        mom.update(block)
        if keep:
            kept.append(block)
    return mom, (np.concatenate(kept) if keep else None)


def _simulate_row(args) -> CurveMoments:
    spec, i = args
    cell = 0 if spec.common_random_numbers else i
    mom, _ = simulate_hill_curves(spec.params(spec.alpha0_values[i]), spec.n, spec.kgrid.ks,
                                  spec.replications, spec.master_seed, cell, spec.tail_mode)
    return mom


def simulate_grid(spec: GridSpec, progress: Callable[[int, int], None] | None = None,
                  workers: int = 1) -> GridSurface:
    """Average Hill curves over replications for every alpha0 in ``spec``.

    ``progress(done, total)`` is called after each alpha0 row. Rows are
    distributed over ``workers`` processes; the output does not depend on it.
    """
    kgrid = spec.kgrid
    if kgrid.k_values[-1] + 1 > spec.n:
        raise ValueError("k-grid exceeds sample length")
    rows = len(spec.alpha0_values)
    jobs = [(spec, i) for i in range(rows)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = []
            for mom in pool.map(_simulate_row, jobs):
                results.append(mom)
                if progress:
                    progress(len(results), rows)
    else:
        results = []
        for job in jobs:
            results.append(_simulate_row(job))
            if progress:
                progress(len(results), rows)
    count = np.stack([r.count for r in results])
    if (count == 0).any():
        i, j = np.argwhere(count == 0)[0]
        raise GridDegenerate(f"every replication failed at alpha0={spec.alpha0_values[i]}, "
                             f"k={kgrid.k_values[j]}")
    return GridSurface(spec, kgrid,
                       mean_curve=np.stack([r.mean for r in results]),
                       std_curve=np.stack([r.std for r in results]),
                       excluded=spec.replications - count)


# -- cache file --------------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % x


def _spec_lines(spec: GridSpec) -> list[str]:
    out = []
    for f in fields(GridSpec):
        v = getattr(spec, f.name)
        if isinstance(v, tuple):
            v = ",".join(_fmt(x) for x in v)
        elif isinstance(v, float):
            v = _fmt(v)
        elif isinstance(v, bool):
            v = str(v).lower()
        out.append(f"{f.name}={v}")
    return out


def _parse_spec(kv: dict[str, str]) -> GridSpec:
    try:
        return GridSpec(
            n=int(kv["n"]),
            alpha0_values=tuple(float(x) for x in kv["alpha0_values"].split(",")),
            replications=int(kv["replications"]),
            k_fractions=tuple(float(x) for x in kv["k_fractions"].split(",")),
            beta=float(kv["beta"]), gamma=float(kv["gamma"]), delta=float(kv["delta"]),
            tail_mode=kv["tail_mode"],
            master_seed=int(kv["master_seed"]),
            common_random_numbers=kv["common_random_numbers"] == "true",
        )
    except (KeyError, ValueError) as exc:
        raise SpecIncompatible(f"grid header is incomplete or invalid: {exc}") from exc


def grid_to_text(g: GridSurface) -> str:
    lines = [MAGIC, f"format_version={FORMAT_VERSION}", *_spec_lines(g.spec),
             f"k_values={','.join(str(k) for k in g.kgrid.k_values)}",
             f"rows={g.mean_curve.shape[0]}", f"cols={g.mean_curve.shape[1]}"]
    for name, arr, fmt in (("mean_curve", g.mean_curve, _fmt), ("std_curve", g.std_curve, _fmt),
                           ("excluded", g.excluded, str)):
        lines.append(f"[{name}]")
        lines.extend(" ".join(fmt(x) for x in row) for row in arr.tolist())
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    return body + f"checksum=sha256:{digest}\n"


def save_grid(g: GridSurface, path) -> Path:
    path = Path(path)
    path.write_text(grid_to_text(g), encoding="utf-8", newline="\n")
    return path


def grid_from_text(text: str) -> GridSurface:
    lines = text.split("\n")
    if not lines or lines[0] != MAGIC:
        raise FormatVersionMismatch("not a grid file (missing header line)")
    version = next((ln.split("=", 1)[1] for ln in lines[1:3] if ln.startswith("format_version=")), None)
    if version != str(FORMAT_VERSION):
        raise FormatVersionMismatch(f"grid format version {version!r}, expected {FORMAT_VERSION}")

    body, sep, tail = text.rpartition("checksum=sha256:")
    if not sep or not body.endswith("\n"):
        raise ChecksumMismatch("checksum line missing (truncated file?)")
    if hashlib.sha256(body.encode()).hexdigest() != tail.strip():
        raise ChecksumMismatch("grid file checksum does not match its contents")

    kv: dict[str, str] = {}
    sections: dict[str, list[str]] = {}
    current = None
    for ln in body.split("\n")[1:]:
        if not ln:
            continue
        if ln.startswith("[") and ln.endswith("]"):
            current = ln[1:-1]
            sections[current] = []
        elif current is None:
            key, _, value = ln.partition("=")
            kv[key] = value
        else:
            sections[current].append(ln)

    spec = _parse_spec(kv)
    try:
        kgrid = KGrid(spec.n, tuple(int(k) for k in kv["k_values"].split(",")))
        shape = (int(kv["rows"]), int(kv["cols"]))
        mats = {}
        for name, dtype in (("mean_curve", float), ("std_curve", float), ("excluded", np.int64)):
            rows = sections[name]
            mats[name] = np.array([[dtype(x) for x in r.split(" ")] for r in rows], dtype=dtype)
            if mats[name].shape != shape:
                raise SpecIncompatible(f"{name} is {mats[name].shape}, header says {shape}")
    except (KeyError, ValueError) as exc:
        raise SpecIncompatible(f"grid body does not match its header: {exc}") from exc
    if kgrid != spec.kgrid:
        raise SpecIncompatible("stored k-grid does not match the spec's k fractions")
    return GridSurface(spec, kgrid, **mats)


def load_grid(path) -> GridSurface:
    return grid_from_text(Path(path).read_text(encoding="utf-8"))


def grid_digest(g: GridSurface) -> str:
    return hashlib.sha256(grid_to_text(g).encode()).hexdigest()


__all__ = [
    "GridSpec", "GridSurface", "simulate_grid", "simulate_hill_curves", "save_grid", "load_grid",
    "GridError", "GridDegenerate", "FormatVersionMismatch", "ChecksumMismatch", "SpecIncompatible",
    "CurveMoments", "grid_to_text", "grid_from_text", "grid_digest", "DEFAULT_ALPHA0",
]