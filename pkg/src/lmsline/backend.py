"""Execution backends for the dual-intersection candidate search.

The search space is the upper triangle of point pairs, enumerated row-major
(``(0,1), (0,2), ..., (1,2), ...``) and identified by a single pair rank in
``[0, n*(n-1)/2)``.  Both backends walk that rank space in fixed-size chunks,
evaluate each chunk with the same vectorized kernel, and reduce candidates by
the exact lexicographic key ``(height, i, j)``.  Because per-pair arithmetic
never depends on chunk or partition boundaries, the sequential and parallel
backends produce bit-identical results for any worker count.

Pairs of points sharing an x-coordinate have parallel duals and are dropped
inside the kernel; their lines still participate in every cut.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .geometry import DualIntersection, DualLine, InvalidInputError, pair_intersection

WORKERS_ENV_VAR = "LMSLINE_WORKERS"

_CHUNK_ELEMENTS = 4_000_000
"""Target float64 element count of one kernel evaluation (chunk_pairs * n).

Keeps streaming-mode memory flat (~32 MB per in-flight chunk) regardless of
problem size.
"""


@dataclass(frozen=True)
class CandidateRecord:
    """Best bracelet found over some set of pairs.

    ``height`` is the dual window length (primal slab height); ``(i, j)`` is
    the anchor pair; ``u`` the anchor abscissa; ``[v_low, v_high]`` the window.
    """

    height: float
    i: int
    j: int
    u: float
    v_low: float
    v_high: float

    @property
    def sort_key(self) -> tuple[float, int, int]:
        return (self.height, self.i, self.j)


@dataclass(frozen=True)
class BatchPlan:
    """Shape of one candidate-search run.

    ``pair_count`` counts only pairs with distinct x (the pairs that produce
    an intersection); ``partition_size`` is the contiguous span of pair ranks
    handed to each worker.
    """

    n: int
    pair_count: int
    partition_size: int
    worker_count: int

    @classmethod
    def create(cls, a: np.ndarray, worker_count: int) -> "BatchPlan":
        n = int(a.size)
        if n < 2:
            raise InvalidInputError(f"a batch needs at least 2 lines, got {n}")
        if worker_count < 1:
            raise InvalidInputError(f"worker count must be positive, got {worker_count}")
        total = n * (n - 1) // 2
        _, counts = np.unique(np.asarray(a, dtype=float), return_counts=True)
        dup = int((counts * (counts - 1) // 2).sum())
        size = max(1, math.ceil(total / worker_count))
        return cls(n=n, pair_count=total - dup, partition_size=size, worker_count=worker_count)

    def partitions(self) -> list[tuple[int, int]]:
        """Contiguous half-open rank ranges, one per busy worker."""
        total = self.n * (self.n - 1) // 2
        out = []
        pos = 0
        while pos < total:
            out.append((pos, min(pos + self.partition_size, total)))
            pos += self.partition_size
        return out


def resolve_workers(workers: int | None) -> int:
    """Worker count: explicit argument, else ``LMSLINE_WORKERS``, else CPU count."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV_VAR)
        if env is not None:
            try:
                workers = int(env)
            except ValueError as exc:
                raise InvalidInputError(f"{WORKERS_ENV_VAR} must be an integer, got {env!r}") from exc
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise InvalidInputError(f"worker count must be positive, got {workers}")
    return workers


def _row_offsets(n: int) -> np.ndarray:
    # offsets[i] = rank of pair (i, i+1); row i holds n-1-i pairs
    counts = np.arange(n - 1, 0, -1, dtype=np.int64)
    offs = np.zeros(n - 1, dtype=np.int64)
    np.cumsum(counts[:-1], out=offs[1:])
    return offs


def _decode_pair_ranks(offsets: np.ndarray, ranks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    i = np.searchsorted(offsets, ranks, side="right") - 1
    j = ranks - offsets[i] + i + 1
    return i, j


def _evaluate_pairs(
    a: np.ndarray,
    b: np.ndarray,
    i_idx: np.ndarray,
    j_idx: np.ndarray,
    u: np.ndarray,
    q: int,
) -> CandidateRecord | None:
    """Best anchored window over the given intersections.

    For each pair the cut values at ``u`` are formed with both anchor copies
    snapped to the exact intersection ordinate, then the shorter of the
    downward/upward q-windows is taken (upward on a tie).  Returns the
    chunk-best by ``(height, i, j)``, or ``None`` when no window fits.
    """
    m = i_idx.size
    if m == 0:
        return None
    n = a.size
    v0 = a[i_idx] * u - b[i_idx]
    vals = u[:, None] * a[None, :] - b[None, :]
    rows = np.arange(m)
    vals[rows, i_idx] = v0
    vals[rows, j_idx] = v0
    k_lo = np.count_nonzero(vals < v0[:, None], axis=1)
    k_hi = np.count_nonzero(vals <= v0[:, None], axis=1) - 1
    vals.sort(axis=1)
    down = k_hi - (q - 1)
    up = k_lo + (q - 1)
    ok_down = down >= 0
    ok_up = up <= n - 1
    v_down = np.take_along_axis(vals, np.maximum(down, 0)[:, None], axis=1)[:, 0]
    v_up = np.take_along_axis(vals, np.minimum(up, n - 1)[:, None], axis=1)[:, 0]
    h_down = np.where(ok_down, v0 - v_down, np.inf)
    h_up = np.where(ok_up, v_up - v0, np.inf)
    use_up = h_up <= h_down
    h = np.where(use_up, h_up, h_down)
    finite = np.isfinite(h)
    if not finite.any():
        return None
    h_min = np.min(h[finite])
    tie = np.flatnonzero(h == h_min)
    win = tie[np.argmin(i_idx[tie] * np.int64(n) + j_idx[tie])]
    if use_up[win]:
        v_low, v_high = float(v0[win]), float(v_up[win])
    else:
        v_low, v_high = float(v_down[win]), float(v0[win])
    return CandidateRecord(
        height=float(h[win]),
        i=int(i_idx[win]),
        j=int(j_idx[win]),
        u=float(u[win]),
        v_low=v_low,
        v_high=v_high,
    )


def _merge(best: CandidateRecord | None, cand: CandidateRecord | None) -> CandidateRecord | None:
    if cand is None:
        return best
    if best is None or cand.sort_key < best.sort_key:
        return cand
    return best


def _scan_rank_range(a: np.ndarray, b: np.ndarray, q: int, start: int, stop: int) -> CandidateRecord | None:
    """Stream pair ranks ``[start, stop)`` through the kernel."""
    n = a.size
    offsets = _row_offsets(n)
    chunk = max(1, _CHUNK_ELEMENTS // n)
    best: CandidateRecord | None = None
    pos = start
    while pos < stop:
        ranks = np.arange(pos, min(pos + chunk, stop), dtype=np.int64)
        i_idx, j_idx = _decode_pair_ranks(offsets, ranks)
        da = a[i_idx] - a[j_idx]
        keep = da != 0.0
        if keep.any():
            i_k, j_k = i_idx[keep], j_idx[keep]
            u = (b[i_k] - b[j_k]) / (a[i_k] - a[j_k])
            best = _merge(best, _evaluate_pairs(a, b, i_k, j_k, u, q))
        pos += chunk
    return best


def _materialized_inputs(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All valid intersections at once: O(n^2) memory, kept for benchmarking
    against the streaming mode."""
    n = a.size
    i_all, j_all = np.triu_indices(n, k=1)
    keep = a[i_all] != a[j_all]
    i_all, j_all = i_all[keep].astype(np.int64), j_all[keep].astype(np.int64)
    u = (b[i_all] - b[j_all]) / (a[i_all] - a[j_all])
    return i_all, j_all, u


def _scan_materialized(
    a: np.ndarray, b: np.ndarray, q: int, i_all: np.ndarray, j_all: np.ndarray, u_all: np.ndarray,
    start: int, stop: int,
) -> CandidateRecord | None:
    n = a.size
    chunk = max(1, _CHUNK_ELEMENTS // n)
    best: CandidateRecord | None = None
    for lo in range(start, stop, chunk):
        hi = min(lo + chunk, stop)
        best = _merge(best, _evaluate_pairs(a, b, i_all[lo:hi], j_all[lo:hi], u_all[lo:hi], q))
    return best


class SequentialBackend:
    """Single-threaded candidate search."""

    name = "seq"

    def minimum_bracelet(
        self, a: np.ndarray, b: np.ndarray, q: int, *, materialize: bool = False
    ) -> CandidateRecord | None:
        n = a.size
        total = n * (n - 1) // 2
        if materialize:
            i_all, j_all, u_all = _materialized_inputs(a, b)
            return _scan_materialized(a, b, q, i_all, j_all, u_all, 0, i_all.size)
        return _scan_rank_range(a, b, q, 0, total)


class ParallelBackend:
    """Thread-pool candidate search.

    numpy releases the GIL inside the sort and elementwise kernels that
    dominate the work, so threads scale on multicore hosts while sharing the
    input arrays.  Partition reduction uses the same exact key as the
    sequential scan, so results match it bit for bit.
    """

    name = "par"

    def __init__(self, workers: int | None = None):
        self.workers = resolve_workers(workers)

    def minimum_bracelet(
        self, a: np.ndarray, b: np.ndarray, q: int, *, materialize: bool = False
    ) -> CandidateRecord | None:
        plan = BatchPlan.create(a, self.workers)
        parts = plan.partitions()
        if materialize:
            i_all, j_all, u_all = _materialized_inputs(a, b)
            # Partition the filtered intersection list the same contiguous way.
            m = i_all.size
            size = max(1, math.ceil(m / plan.worker_count))
            spans = [(s, min(s + size, m)) for s in range(0, m, size)]
            if len(spans) <= 1:
                return _scan_materialized(a, b, q, i_all, j_all, u_all, 0, m)
            with ThreadPoolExecutor(max_workers=len(spans)) as pool:
                results = list(
                    pool.map(lambda sp: _scan_materialized(a, b, q, i_all, j_all, u_all, *sp), spans)
                )
        else:
            if len(parts) <= 1:
                return _scan_rank_range(a, b, q, *parts[0]) if parts else None
            with ThreadPoolExecutor(max_workers=len(parts)) as pool:
                results = list(pool.map(lambda sp: _scan_rank_range(a, b, q, *sp), parts))
        best: CandidateRecord | None = None
        for rec in results:
            best = _merge(best, rec)
        return best


_BACKENDS = {"seq": SequentialBackend, "par": ParallelBackend}


def get_backend(name: str, workers: int | None = None) -> SequentialBackend | ParallelBackend:
    """Look up an execution backend by name (``seq`` or ``par``)."""
    try:
        cls = _BACKENDS[name]
    except KeyError:
        raise InvalidInputError(f"unknown backend {name!r}; expected one of {sorted(_BACKENDS)}") from None
    if cls is ParallelBackend:
        return ParallelBackend(workers)
    return SequentialBackend()


def run_phase1(lines: Sequence[DualLine]) -> Iterator[DualIntersection]:
    """Enumerate all pairwise dual intersections in row-major pair order.

    Expects ``lines[k].source_index == k``.  Parallel duals are skipped, so
    the stream length equals :attr:`BatchPlan.pair_count`.
    """
    n = len(lines)
    for i in range(n - 1):
        li = lines[i]
        for j in range(i + 1, n):
            ip = pair_intersection(li, lines[j])
            if ip is not None:
                yield ip


def run_phase2(
    intersections: Iterable[DualIntersection],
    lines: Sequence[DualLine],
    q: int,
    worker_count: int = 1,
) -> CandidateRecord:
    """Evaluate anchored windows at the given intersections and return the
    global minimum under ``(height, i, j)``.

    The intersection list is split into ``worker_count`` contiguous slices;
    the reduction is associative over the exact key, so the result does not
    depend on ``worker_count``.
    """
    ips = list(intersections)
    if not ips:
        raise InvalidInputError("phase 2 needs at least one intersection")
    if not 2 <= q <= len(lines):
        raise InvalidInputError(f"coverage must satisfy 2 <= q <= {len(lines)}, got {q}")
    if worker_count < 1:
        raise InvalidInputError(f"worker count must be positive, got {worker_count}")
    a = np.array([ln.a for ln in lines], dtype=float)
    b = np.array([ln.b for ln in lines], dtype=float)
    i_all = np.array([ip.i for ip in ips], dtype=np.int64)
    j_all = np.array([ip.j for ip in ips], dtype=np.int64)
    u_all = np.array([ip.u for ip in ips], dtype=float)
    m = len(ips)
    size = max(1, math.ceil(m / worker_count))
    best: CandidateRecord | None = None
    for lo in range(0, m, size):
        hi = min(lo + size, m)
        best = _merge(best, _scan_materialized(a, b, q, i_all, j_all, u_all, lo, hi))
    if best is None:
        raise InvalidInputError(f"no window of coverage {q} fits {len(lines)} lines")
    return best
