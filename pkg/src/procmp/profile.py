"""Matrix profile construction for one channel (self-join).

A matrix profile holds, for every window position of a series, the
minimal distance from that window to any other window of the same
series, together with the index of the window attaining it. Positions
closer than an exclusion radius to the query are skipped so a window
never matches its own overlap; the default radius is ceil(m/2).

Three routes are implemented:

* ``mp_brute``: the reference. Materializes every pairwise window
  distance (in row blocks) straight from the definitions. Quadratic
  work, used by tests and by ``--verify``.
* ``mp_znorm_fast``: walks the pair matrix diagonal by diagonal keeping
  a running sliding dot product, then converts correlation to distance
  with d = sqrt(2m(1-corr)) from precomputed rolling means/stds.
* ``mp_hamming_fast``: the same diagonal walk for discrete channels,
  where along a diagonal the mismatch count updates incrementally as one
  sample enters the window and one leaves.

Nearest-neighbor ties are broken toward the lowest admissible index in
every route, which also makes multi-threaded runs reproducible: work is
split by diagonals and partial results merge under lexicographic
(distance, index) order, so the outcome does not depend on the number
of worker partitions.

Hamming distances are stored normalized by the window length, so both
metrics read as "how different is the best match" with 0 meaning an
exact repeat.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distances import (
    CONTINUOUS,
    DISCRETE,
    Channel,
    _moving_mean_std,
    znorm_distance,
)
from .errors import (
    InsufficientLengthError,
    InvalidDataError,
    InvalidWindowError,
    MetricMismatchError,
    ParseError,
    VerificationError,
)
from .ioutil import atomic_write_text, format_kv, parse_kv

ZNORM = "znorm"
HAMMING = "hamming"
METRICS = (ZNORM, HAMMING)


@dataclass
class MatrixProfile:
    """Distances and nearest-neighbor indices for every window position."""

    window: int
    metric: str
    distances: np.ndarray = field(repr=False)
    nn_index: np.ndarray = field(repr=False)
    exclusion: int = 0

    def __post_init__(self) -> None:
        self.distances = np.asarray(self.distances, dtype=np.float64)
        self.nn_index = np.asarray(self.nn_index, dtype=np.int64)
        if self.distances.shape != self.nn_index.shape:
            raise InvalidDataError("distances and nn_index lengths differ")

    def __len__(self) -> int:
        return int(self.distances.size)


def default_exclusion(m: int) -> int:
    """Default exclusion radius: ceil(m/2)."""
    return -(-m // 2)


def select_metric(channel: Channel, alphabet_cap: int = 5) -> str:
    """Pick hamming for exact-integer series over a small alphabet, else znorm."""
    v = channel.values
    if v.size and np.array_equal(v, np.rint(v)) and np.unique(v).size <= alphabet_cap:
        return HAMMING
    return ZNORM


def _validate(channel: Channel, m: int, metric: str, exclusion) -> tuple[int, int]:
    if metric not in METRICS:
        raise InvalidDataError(f"unknown metric {metric!r}")
    n = len(channel)
    if n == 0:
        raise InvalidDataError(f"channel {channel.name!r} is empty")
    least = 1 if metric == HAMMING else 2
    if m < least:
        raise InvalidWindowError(f"window {m} is below the minimum {least} for {metric}")
    if m > n:
        raise InvalidWindowError(f"window {m} exceeds series length {n}")
    if metric == HAMMING and channel.kind != DISCRETE:
        raise MetricMismatchError(
            f"hamming requires a discrete channel, {channel.name!r} is {channel.kind}"
        )
    e = default_exclusion(m) if exclusion is None else int(exclusion)
    if e < 0:
        raise InvalidWindowError(f"exclusion {e} is negative")
    p = n - m + 1
    if p < 2 * e + 2:
        raise InsufficientLengthError(
            f"{p} windows cannot give every position a neighbor outside "
            f"exclusion radius {e}; need at least {2 * e + 2}"
        )
    return p, e


def _constant_window_mask(x: np.ndarray, m: int) -> np.ndarray:
    """Exact per-window constancy: no value change inside the window.

    Integer counting keeps this immune to the rounding that makes
    variance estimates of constant windows come out slightly positive.
    """
    if m == 1:
        return np.ones(x.size, dtype=bool)
    chg = (x[1:] != x[:-1]).astype(np.int64)
    cs = np.concatenate(([0], np.cumsum(chg)))
    return (cs[m - 1:] - cs[: x.size - m + 1]) == 0


def _merge_best(best, bestj, cand, candj) -> None:
    """Fold candidate minima in under lexicographic (distance, index) order."""
    take = (cand < best) | ((cand == best) & (candj < bestj))
    best[take] = cand[take]
    bestj[take] = candj[take]


def _run_chunks(worker, e: int, p: int, threads: int, init):
    """Split diagonals e+1..p-1 round-robin over workers and merge in order."""
    diags = np.arange(e + 1, p)
    threads = max(1, int(threads))
    if threads == 1 or diags.size < 2 * threads:
        return worker(diags)
    parts = [diags[k::threads] for k in range(threads)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(worker, parts))
    best, bestj = init()
    for d, j in results:
        _merge_best(best, bestj, d, j)
    return best, bestj


def mp_znorm_fast(channel: Channel, m: int, exclusion=None, threads: int = 1) -> MatrixProfile:
    """Matrix profile under the z-normalized Euclidean distance.

    Per diagonal l, the sliding dot product q(i) = sum_k x[i+k]*x[i+l+k]
    follows from a cumulative sum of the lagged elementwise products (the
    vector form of the one-in/one-out update), and

        corr = (q - m*mu_i*mu_j) / (m*sigma_i*sigma_j)
        d    = sqrt(2m * (1 - corr))

    with the correlation clamped into [-1, 1]. The series is globally
    centered first, which leaves every z-normalized distance unchanged
    but keeps the accumulated products well conditioned. Constant
    windows are detected exactly and follow the fixed policy: pairs of
    constant windows are at distance 0, mixed pairs at sqrt(m). All
    outputs are finite for any finite input.
    """
    p, e = _validate(channel, m, ZNORM, exclusion)
    x = channel.values
    n = x.size
    xc = x - x.mean()
    mu, sig = _moving_mean_std(xc, m)
    const = _constant_window_mask(x, m)
    sqm = float(np.sqrt(m))

    def worker(diags: np.ndarray):
        best = np.full(p, np.inf)
        bestj = np.full(p, p, dtype=np.int64)
        for ell in diags:
            ell = int(ell)
            ln = p - ell
            c = xc[:n - ell] * xc[ell:]
            cs = np.cumsum(c)
            q = cs[m - 1:].copy()
            q[1:] -= cs[: ln - 1]
            num = q - m * mu[:ln] * mu[ell:]
            den = m * sig[:ln] * sig[ell:]
            ok = den > 0.0
            corr = np.clip(num / np.where(ok, den, 1.0), -1.0, 1.0)
            d = np.where(ok, np.sqrt(2.0 * m * (1.0 - corr)), sqm)
            ci = const[:ln]
            cj = const[ell:]
            d = np.where(ci | cj, np.where(ci & cj, 0.0, sqm), d)
            idx = np.arange(ln)
            _merge_best(best[:ln], bestj[:ln], d, idx + ell)
            _merge_best(best[ell:], bestj[ell:], d, idx)
        return best, bestj

    best, bestj = _run_chunks(
        worker, e, p, threads,
        init=lambda: (np.full(p, np.inf), np.full(p, p, dtype=np.int64)),
    )
    if bestj.max() >= p:
        raise InsufficientLengthError("a window position ended up with no neighbor")
    return MatrixProfile(window=m, metric=ZNORM, distances=best, nn_index=bestj, exclusion=e)


def mp_hamming_fast(channel: Channel, m: int, exclusion=None, threads: int = 1) -> MatrixProfile:
    """Matrix profile under the Hamming distance, for discrete channels.

    Mismatch counts along each diagonal follow the incremental update
    d(i+1, j+1) = d(i, j) - [x_i != x_j] + [x_{i+m} != x_{j+m}], realized
    as a cumulative sum of the lagged inequality indicator. All counts
    are exact integers; distances are stored as count / m.
    """
    p, e = _validate(channel, m, HAMMING, exclusion)
    xv = np.rint(channel.values).astype(np.int64)
    n = xv.size
    sentinel = m + 1  # above any real count

    def worker(diags: np.ndarray):
        best = np.full(p, sentinel, dtype=np.int64)
        bestj = np.full(p, p, dtype=np.int64)
        for ell in diags:
            ell = int(ell)
            ln = p - ell
            neq = (xv[: n - ell] != xv[ell:]).astype(np.int64)
            cs = np.cumsum(neq)
            q = cs[m - 1:].copy()
            q[1:] -= cs[: ln - 1]
            idx = np.arange(ln)
            _merge_best(best[:ln], bestj[:ln], q, idx + ell)
            _merge_best(best[ell:], bestj[ell:], q, idx)
        return best, bestj

    best, bestj = _run_chunks(
        worker, e, p, threads,
        init=lambda: (np.full(p, sentinel, dtype=np.int64), np.full(p, p, dtype=np.int64)),
    )
    if bestj.max() >= p:
        raise InsufficientLengthError("a window position ended up with no neighbor")
    return MatrixProfile(
        window=m, metric=HAMMING, distances=best / m, nn_index=bestj, exclusion=e
    )


# ------------------------------------------------------------ brute force

_BLOCK = 2048


def _band_mask_rows(dist_block: np.ndarray, row0: int, e: int, big) -> None:
    p = dist_block.shape[1]
    for r in range(dist_block.shape[0]):
        i = row0 + r
        dist_block[r, max(0, i - e): min(p, i + e + 1)] = big


def mp_brute(channel: Channel, m: int, metric: str, exclusion=None) -> MatrixProfile:
    """Reference profile: every admissible pair, straight from the definitions.

    For znorm, windows are explicitly z-normalized (constant windows
    become zero vectors, which encodes the constant-window policy) and
    pairwise Euclidean distances come from the Gram matrix. For hamming,
    mismatch counts come from per-symbol indicator products. Quadratic
    time and O(p * block) memory; intended for tests, small inputs, and
    --verify runs.
    """
    p, e = _validate(channel, m, metric, exclusion)
    if metric == ZNORM:
        w = np.lib.stride_tricks.sliding_window_view(channel.values, m)
        mu = w.mean(axis=1, keepdims=True)
        sd = w.std(axis=1, keepdims=True)
        constant = (w.max(axis=1) == w.min(axis=1))[:, None]
        z = np.where(constant, 0.0, (w - mu) / np.where(sd > 0.0, sd, 1.0))
        norms = np.einsum("ij,ij->i", z, z)
        best = np.full(p, np.inf)
        bestj = np.zeros(p, dtype=np.int64)
        for row0 in range(0, p, _BLOCK):
            blk = slice(row0, min(row0 + _BLOCK, p))
            d2 = norms[blk, None] + norms[None, :] - 2.0 * (z[blk] @ z.T)
            np.maximum(d2, 0.0, out=d2)
            dist = np.sqrt(d2)
            _band_mask_rows(dist, row0, e, np.inf)
            bestj[blk] = np.argmin(dist, axis=1)
            best[blk] = dist[np.arange(dist.shape[0]), bestj[blk]]
        return MatrixProfile(window=m, metric=ZNORM, distances=best, nn_index=bestj, exclusion=e)

    xv = np.rint(channel.values).astype(np.int64)
    # one float32 indicator window matrix per symbol; dot products count
    # agreeing positions exactly (integer sums below 2**24)
    mats = [
        np.ascontiguousarray(
            np.lib.stride_tricks.sliding_window_view(
                (xv == s).astype(np.float32), m
            )
        )
        for s in np.unique(xv)
    ]
    best = np.full(p, m + 1, dtype=np.int64)
    bestj = np.zeros(p, dtype=np.int64)
    for row0 in range(0, p, _BLOCK):
        blk = slice(row0, min(row0 + _BLOCK, p))
        agree = mats[0][blk] @ mats[0].T
        for a in mats[1:]:
            agree += a[blk] @ a.T
        counts = m - np.rint(agree).astype(np.int64)
        _band_mask_rows(counts, row0, e, m + 1)
        bestj[blk] = np.argmin(counts, axis=1)
        best[blk] = counts[np.arange(counts.shape[0]), bestj[blk]]
    return MatrixProfile(
        window=m, metric=HAMMING, distances=best / m, nn_index=bestj, exclusion=e
    )


# ------------------------------------------------------------- dispatcher

def compute_profile(
    channel: Channel,
    m: int,
    metric: str = "auto",
    exclusion=None,
    threads: int = 1,
    verify: bool = False,
) -> MatrixProfile:
    """Compute a profile with the appropriate fast route.

    metric="auto" picks hamming for discrete channels whose values form a
    small integer alphabet (see select_metric) and znorm otherwise. An
    explicit metric is honored as long as it is compatible with the
    channel kind. verify=True recomputes via mp_brute and raises
    VerificationError if the fast route disagrees beyond tolerance.
    """
    if metric == "auto":
        metric = select_metric(channel)
        if metric == HAMMING and channel.kind != DISCRETE:
            metric = ZNORM
    if metric == HAMMING:
        prof = mp_hamming_fast(channel, m, exclusion=exclusion, threads=threads)
    elif metric == ZNORM:
        prof = mp_znorm_fast(channel, m, exclusion=exclusion, threads=threads)
    else:
        raise InvalidDataError(f"unknown metric {metric!r}")
    if verify:
        verify_profile(channel, prof)
    return prof


def verify_profile(channel: Channel, prof: MatrixProfile) -> None:
    """Check a fast-path profile against mp_brute.

    Hamming must match exactly (counts are integers). Znorm distances
    must agree within 1e-6 (relative above 1); nearest-neighbor indices
    must either match or point at windows whose true distance ties the
    reference minimum within the same tolerance.
    """
    ref = mp_brute(channel, prof.window, prof.metric, exclusion=prof.exclusion)
    if prof.metric == HAMMING:
        if not np.array_equal(ref.distances, prof.distances):
            raise VerificationError("hamming distances differ from reference")
        if not np.array_equal(ref.nn_index, prof.nn_index):
            raise VerificationError("hamming neighbor indices differ from reference")
        return
    tol = 1e-6 * np.maximum(1.0, ref.distances)
    bad = np.abs(prof.distances - ref.distances) > tol
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise VerificationError(
            f"znorm distance at position {i}: fast {prof.distances[i]!r} "
            f"vs reference {ref.distances[i]!r}"
        )
    x = channel.values
    m = prof.window
    for i in np.flatnonzero(prof.nn_index != ref.nn_index):
        j = int(prof.nn_index[i])
        realized = znorm_distance(x[i:i + m], x[j:j + m])
        if abs(realized - ref.distances[i]) > tol[i]:
            raise VerificationError(
                f"neighbor of position {int(i)} differs from reference "
                f"beyond tolerance: {j} vs {int(ref.nn_index[i])}"
            )


# ------------------------------------------------------------ persistence

def _meta_path(csv_path) -> str:
    s = str(csv_path)
    return s[:-4] + ".meta" if s.endswith(".csv") else s + ".meta"


def save_profile(prof: MatrixProfile, csv_path, channel_name: str, series_length: int) -> None:
    """Write position,distance,nn_index rows plus a key=value sidecar."""
    lines = ["position,distance,nn_index"]
    for i in range(len(prof)):
        lines.append(f"{i},{prof.distances[i]:.9g},{prof.nn_index[i]}")
    atomic_write_text(csv_path, "\n".join(lines) + "\n")
    meta = {
        "channel": channel_name,
        "length": series_length,
        "window": prof.window,
        "metric": prof.metric,
        "exclusion": prof.exclusion,
    }
    atomic_write_text(_meta_path(csv_path), format_kv(meta))


def load_profile(csv_path) -> tuple[MatrixProfile, dict]:
    """Read a profile CSV and its sidecar; returns (profile, metadata)."""
    with open(csv_path) as fh:
        header = fh.readline().strip()
        if header != "position,distance,nn_index":
            raise ParseError(f"{csv_path}:1: unexpected header {header!r}")
        dist, nn = [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(f"{csv_path}:{lineno}: expected 3 fields, got {line!r}")
            try:
                dist.append(float(parts[1]))
                nn.append(int(parts[2]))
            except ValueError as exc:
                raise ParseError(f"{csv_path}:{lineno}: {exc}") from None
    with open(_meta_path(csv_path)) as fh:
        meta = parse_kv(fh.read(), where=_meta_path(csv_path))
    prof = MatrixProfile(
        window=int(meta["window"]),
        metric=meta["metric"],
        distances=np.asarray(dist),
        nn_index=np.asarray(nn, dtype=np.int64),
        exclusion=int(meta.get("exclusion", 0)),
    )
    return prof, meta
