"""Monte-Carlo BER/FER estimation over BPSK-AWGN with normalized min-sum decoding.

The all-zero codeword is transmitted.  Noise for frame ``f`` at sweep index
``s`` comes from a Philox stream keyed by the master seed with counter
``(0, 0, s, f)``, so results do not depend on how frames are split across
workers.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.stats import binomtest

from .cycle_engine import default_workers
from .qc_core import BlockMatrix, ValidationError, expand

CSV_COLUMNS = ["snr_db", "frames", "bit_errors", "frame_errors", "ber", "fer",
               "ci_low", "ci_high"]


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float
    rate: float = 1.0

    @property
    def noise_variance(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.snr_db / 10.0))


@dataclass(frozen=True)
class DecoderConfig:
    max_iterations: int = 50
    normalization: float = 0.75
    early_stop: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not 0 < self.normalization <= 1:
            raise ValidationError("normalization must lie in (0, 1]")


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    frames_run: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    seed: int

    def fer_interval(self, confidence: float = 0.95) -> tuple[float, float]:
        """Wilson interval on the frame error rate."""
        if self.frames_run == 0:
            return 0.0, 1.0
        ci = binomtest(self.frame_errors, self.frames_run).proportion_ci(
            confidence_level=confidence, method="wilson")
        return float(ci.low), float(ci.high)


class _Tanner:
    """Edge lists of a binary parity-check matrix, ordered by check node."""

    def __init__(self, H):
        H = sp.csr_matrix(H)
        H.eliminate_zeros()
        if H.nnz and not np.all(H.data == 1):
            raise ValidationError("parity-check matrix must be binary")
        H.sort_indices()
        self.m, self.n = H.shape
        self.chk_ptr = H.indptr.astype(np.int64)
        self.edge_var = H.indices.astype(np.int64)
        order = np.argsort(self.edge_var, kind="stable")
        self.var_edges = order.astype(np.int64)
        self.var_ptr = np.concatenate(([0], np.cumsum(np.bincount(self.edge_var, minlength=self.n))))

    def decode(self, llr, cfg: DecoderConfig):
        return _nms_decode(llr, self.chk_ptr, self.edge_var, self.var_ptr, self.var_edges,
                           cfg.max_iterations, cfg.normalization, cfg.early_stop)


@njit(cache=True, nogil=True)
def _syndrome_zero(bits, chk_ptr, edge_var):
    for c in range(chk_ptr.size - 1):
        parity = 0
        for e in range(chk_ptr[c], chk_ptr[c + 1]):
            parity ^= bits[edge_var[e]]
        if parity:
            return False
    return True


@njit(cache=True, nogil=True)
def _nms_decode(llr, chk_ptr, edge_var, var_ptr, var_edges, max_iter, alpha, early_stop):
    """Flooding normalized min-sum.  Returns (hard decisions, converged flag)."""
    n = llr.size
    n_edges = edge_var.size
    v2c = np.empty(n_edges)
    c2v = np.zeros(n_edges)
    for e in range(n_edges):
        v2c[e] = llr[edge_var[e]]
    bits = np.zeros(n, dtype=np.uint8)
    for v in range(n):
        bits[v] = 1 if llr[v] < 0 else 0
    if early_stop and _syndrome_zero(bits, chk_ptr, edge_var):
        return bits, True
    converged = False
    for _ in range(max_iter):
        for c in range(chk_ptr.size - 1):
            lo, hi = chk_ptr[c], chk_ptr[c + 1]
            sign = 1.0
            min1 = np.inf
            min2 = np.inf
            arg1 = -1
            for e in range(lo, hi):
                x = v2c[e]
                if x < 0:
                    sign = -sign
                a = abs(x)
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg1 = e
                elif a < min2:
                    min2 = a
            for e in range(lo, hi):
                mag = min2 if e == arg1 else min1
                s = sign if v2c[e] >= 0 else -sign
                c2v[e] = alpha * s * mag
        for v in range(n):
            total = llr[v]
            for t in range(var_ptr[v], var_ptr[v + 1]):
                total += c2v[var_edges[t]]
            for t in range(var_ptr[v], var_ptr[v + 1]):
                e = var_edges[t]
                v2c[e] = total - c2v[e]
            bits[v] = 1 if total < 0 else 0
        if early_stop and _syndrome_zero(bits, chk_ptr, edge_var):
            converged = True
            break
    if not early_stop:
        converged = _syndrome_zero(bits, chk_ptr, edge_var)
    return bits, converged


def syndrome_check(word, code) -> bool:
    """True iff ``H x = 0`` over GF(2)."""
    H = expand(code) if isinstance(code, BlockMatrix) else sp.csr_matrix(code)
    word = np.asarray(word, dtype=np.int64)
    if word.size != H.shape[1]:
        raise ValidationError(f"word has {word.size} bits, code has {H.shape[1]}")
    return not np.any((H @ word) % 2)


def _frame_noise(seed: int, snr_index: int, frame: int, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, snr_index, frame]))
    return rng.standard_normal(n)


def _run_frame(tanner, n, sigma, seed, snr_index, frame, cfg):
    y = 1.0 + sigma * _frame_noise(seed, snr_index, frame, n)
    if tanner is None:
        return int(np.count_nonzero(y < 0))
    llr = 2.0 * y / sigma ** 2
    bits, _ = tanner.decode(llr, cfg)
    return int(bits.sum())


def simulate(code, snrs, decoder: DecoderConfig | None = None, max_frames: int = 1000,
             min_frame_errors: int = 50, seed: int = 0, rate: float | None = None,
             workers: int | None = 1, uncoded_length: int = 1000, batch: int = 64) -> list[BerPoint]:
    """Estimate BER/FER at each Eb/N0 (dB) in ``snrs``.

    ``code`` is a BlockMatrix, a binary sparse/dense matrix, or None for
    uncoded BPSK on frames of ``uncoded_length`` bits.  ``rate`` scales the
    noise and defaults to the design rate ``1 - m/n`` (1 when uncoded).
    Each point stops at the frame where ``min_frame_errors`` is reached or
    after ``max_frames`` frames.
    """
    snrs = [float(s) for s in snrs]
    if not snrs:
        raise ValidationError("empty SNR sweep")
    decoder = decoder or DecoderConfig()
    if code is None:
        tanner, n = None, int(uncoded_length)
        rate = 1.0 if rate is None else rate
    else:
        H = expand(code) if isinstance(code, BlockMatrix) else code
        tanner = _Tanner(H)
        n = tanner.n
        if rate is None:
            rate = 1.0 - tanner.m / tanner.n
    if workers is None:
        workers = default_workers()
    points = []
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for s_idx, snr in enumerate(snrs):
            sigma = np.sqrt(ChannelConfig(snr, rate).noise_variance)
            frames = bit_err = frame_err = 0
            while frames < max_frames and frame_err < min_frame_errors:
                ids = range(frames, min(frames + batch, max_frames))
                job = lambda f: _run_frame(tanner, n, sigma, seed, s_idx, f, decoder)
                errs = list(pool.map(job, ids)) if pool else [job(f) for f in ids]
                for e in errs:
                    frames += 1
                    bit_err += e
                    frame_err += e > 0
                    if frame_err >= min_frame_errors:
                        break
            points.append(BerPoint(snr, frames, bit_err, frame_err,
                                   bit_err / (frames * n) if frames else 0.0,
                                   frame_err / frames if frames else 0.0, seed))
    finally:
        if pool:
            pool.shutdown()
    return points


def parse_sweep(text: str) -> list[float]:
    """``A:STEP:B`` (inclusive) or a comma-separated list of SNRs."""
    if ":" in text:
        a, step, b = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValidationError("sweep step must be positive")
        count = int(np.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 10) for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def write_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for p in points:
            lo, hi = p.fer_interval()
            w.writerow([p.snr_db, p.frames_run, p.bit_errors, p.frame_errors,
                        repr(p.ber), repr(p.fer), repr(lo), repr(hi)])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def point_dict(p: BerPoint) -> dict:
    return asdict(p)
