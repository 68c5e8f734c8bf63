"""Single-symbol alignment strategies: evaluation and optimization.

A single-symbol strategy gives user j a transmit direction a_j, user k a
receive projection direction g_k, and a power P_j in [0, 1]. The effective
power coupling from transmitter j into receiver k's projection is

    beta_kj = cos^2(a_j + theta_kj - theta_jj - g_k)

and user k's rate is ln(1 + P_k beta_kk / (sum_{j != k} P_j beta_kj + 1/2)).
Maximizing the sum rate over strategies upper-bounds what any per-symbol
alignment scheme can achieve; the optimizers here search that landscape.

Power control reduces to subset selection: the linearized objective (sum of
per-user SINRs) is convex in each power coordinate, so its maximum over the
power box sits at a 0/1 vertex, and each per-user SINR is at most 2, which
bounds the sum rate within a factor 2 of the linearized value.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, normalize, wrap_angle
from .seeding import derive_seed, make_generator

GRID_K_LIMIT = 3
ASCENT_K_LIMIT = 64
EXHAUSTIVE_K_LIMIT = 20

_INTERFERENCE_FLOOR = 0.5  # projected-channel noise variance


@dataclass(frozen=True)
class SSAPoint:
    """One strategy: powers in [0,1], transmit and receive directions."""

    powers: np.ndarray
    tx_dir: np.ndarray
    rx_dir: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.powers, float)
        if not (p.shape == self.tx_dir.shape == self.rx_dir.shape) or p.ndim != 1:
            raise ValueError("powers, tx_dir, rx_dir must share one shape")
        if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
            raise ValueError("powers must lie in [0, 1]")
        if not (np.all(np.isfinite(self.tx_dir)) and np.all(np.isfinite(self.rx_dir))):
            raise ValueError("directions must be finite")
        for arr in (p, self.tx_dir, self.rx_dir):
            arr.setflags(write=False)

    @property
    def k(self) -> int:
        return self.powers.size


@dataclass(frozen=True)
class CouplingMatrix:
    """Effective power couplings beta_kj in [0, 1]; row = receiver."""

    k: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.k, self.k):
            raise ValueError("coupling matrix must be k x k")
        if np.any(self.values < 0) or np.any(self.values > 1 + 1e-12):
            raise ValueError("couplings must lie in [0, 1]")
        self.values.setflags(write=False)


@dataclass(frozen=True)
class SubsetSolution:
    """An optimized strategy with 0/1 powers supported on `subset`."""

    subset: tuple
    point: SSAPoint
    value: float
    restart_index: int = None
    iterations: int = None

    def __post_init__(self):
        on = tuple(int(i) for i in np.flatnonzero(self.point.powers == 1.0))
        if on != tuple(self.subset):
            raise ValueError("powers must be the 0/1 indicator of subset")


def _beta_values(theta_n: np.ndarray, tx_dir: np.ndarray, rx_dir: np.ndarray) -> np.ndarray:
    c = np.cos(tx_dir[None, :] + theta_n - rx_dir[:, None])
    return c * c


def coupling_matrix(ch: ChannelRealization, point: SSAPoint) -> CouplingMatrix:
    """beta_kj for the given strategy; normalizes the channel if needed."""
    if point.k != ch.k:
        raise ValueError("strategy and channel disagree on user count")
    theta_n = normalize(ch).theta
    return CouplingMatrix(k=ch.k, values=_beta_values(theta_n, point.tx_dir, point.rx_dir))


def _as_values(beta) -> np.ndarray:
    return beta.values if isinstance(beta, CouplingMatrix) else np.asarray(beta, float)


def _per_user_rates(B: np.ndarray, p: np.ndarray) -> np.ndarray:
    diag = B.diagonal()
    denom = B @ p - diag * p + _INTERFERENCE_FLOOR
    return np.log1p(p * diag / denom)


def ssa_per_user_rates(beta, powers) -> np.ndarray:
    """Per-user rates ln(1 + P_k beta_kk / (interference + 1/2))."""
    B = _as_values(beta)
    p = np.asarray(powers, float)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("powers must lie in [0, 1]")
    return _per_user_rates(B, p)


def ssa_sum_rate(beta, powers) -> float:
    """Sum of the per-user strategy rates, in nats."""
    return float(ssa_per_user_rates(beta, powers).sum())


def linearized_sum_rate(beta, powers) -> float:
    """Sum of per-user SINRs (the rate sum with ln(1+x) replaced by x).

    Convex in each power coordinate; sandwiched between the sum rate and
    twice the sum rate because every per-user SINR is at most 2.
    """
    B = _as_values(beta)
    p = np.asarray(powers, float)
    diag = B.diagonal()
    denom = B @ p - diag * p + _INTERFERENCE_FLOOR
    return float((p * diag / denom).sum())


def extreme_point_reduce(beta, start, until_fixed: bool = False) -> np.ndarray:
    """Push powers to a 0/1 vector without decreasing the linearized sum.

    One sweep k = 0..K-1 replaces P_k by the endpoint of [0, 1] that gives
    the larger linearized sum with the other coordinates held fixed (ties
    pick 1). Coordinate convexity makes each replacement non-decreasing.
    With until_fixed=True the sweep repeats until no coordinate changes.
    """
    B = _as_values(beta)
    p = np.asarray(start, dtype=float).copy()
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("start powers must lie in [0, 1]")
    k = p.size
    diag = B.diagonal().copy()
    denom = B @ p - diag * p + _INTERFERENCE_FLOOR
    for _ in range(10_000):
        changed = False
        for i in range(k):
            col = B[:, i].copy()
            col[i] = 0.0  # own power is absent from own denominator
            num = p * diag
            d0 = denom + col * (0.0 - p[i])
            n0 = num.copy()
            n0[i] = 0.0
            d1 = denom + col * (1.0 - p[i])
            n1 = num.copy()
            n1[i] = diag[i]
            phi0 = float((n0 / d0).sum())
            phi1 = float((n1 / d1).sum())
            new = 1.0 if phi1 >= phi0 else 0.0
            if new != p[i]:
                denom += col * (new - p[i])
                p[i] = new
                changed = True
        if not until_fixed or not changed:
            break
    return p


def _batch_sum_rates(B: np.ndarray, p_batch: np.ndarray) -> np.ndarray:
    """Sum rates for a batch of power vectors (rows of p_batch)."""
    diag = B.diagonal()
    inter = p_batch @ B.T - p_batch * diag[None, :]
    rates = np.log1p(p_batch * diag[None, :] / (inter + _INTERFERENCE_FLOOR))
    return rates.sum(axis=1)


def _mask_to_subset(mask: int) -> tuple:
    return tuple(i for i in range(mask.bit_length()) if (mask >> i) & 1)


def _best_binary(B: np.ndarray):
    """Exhaustive max of the sum rate over 0/1 power vectors.

    Ties resolve to the lexicographically smallest subset (as a sorted index
    tuple). Returns (value, subset).
    """
    k = B.shape[0]
    best_val = -1.0
    best_masks = []
    batch = 1 << min(k, 14)
    for lo in range(0, 1 << k, batch):
        masks = np.arange(lo, min(lo + batch, 1 << k), dtype=np.uint64)
        bits = (masks[:, None] >> np.arange(k, dtype=np.uint64)[None, :]) & np.uint64(1)
        vals = _batch_sum_rates(B, bits.astype(float))
        m = float(vals.max())
        if m > best_val:
            best_val = m
            best_masks = [int(v) for v in masks[vals == m]]
        elif m == best_val:
            best_masks.extend(int(v) for v in masks[vals == m])
    subset = min((_mask_to_subset(m) for m in best_masks))
    return best_val, subset


def best_subset_exhaustive(ch: ChannelRealization, tx_dir, rx_dir) -> SubsetSolution:
    """Exact max over all 2^K on/off power vectors at fixed directions."""
    if ch.k > EXHAUSTIVE_K_LIMIT:
        raise ValueError(f"exhaustive subset search caps at K = {EXHAUSTIVE_K_LIMIT}")
    tx_dir = np.asarray(tx_dir, float)
    rx_dir = np.asarray(rx_dir, float)
    theta_n = normalize(ch).theta
    B = _beta_values(theta_n, tx_dir, rx_dir)
    value, subset = _best_binary(B)
    powers = np.zeros(ch.k)
    powers[list(subset)] = 1.0
    return SubsetSolution(subset=subset,
                          point=SSAPoint(powers=powers, tx_dir=tx_dir, rx_dir=rx_dir),
                          value=value)


def direction_grid(s: int) -> np.ndarray:
    """Direction grid {n / s^2 : n integer, |n| < pi s^2 + 1/2} for an
    active-set size s; covers [-pi, pi) with per-coordinate radius 1/(2 s^2)."""
    if s < 1:
        raise ValueError("active-set size must be >= 1")
    nmax = math.floor(math.pi * s * s + 0.5)
    return np.arange(-nmax, nmax + 1, dtype=float) / (s * s)


def sum_rate_gradient(ch: ChannelRealization, point: SSAPoint, subset):
    """Closed-form partials of the sum rate over the active subset.

    Returns (d_tx, d_rx) of length K with zeros for users outside `subset`
    (their directions do not influence the objective when their power is 0).
    """
    S = sorted(int(i) for i in subset)
    if len(S) == 0:
        raise ValueError("subset must be non-empty")
    if len(set(S)) != len(S) or S[0] < 0 or S[-1] >= ch.k:
        raise ValueError("subset must be distinct user indices")
    theta_n = normalize(ch).theta
    idx = np.asarray(S, dtype=np.int64)
    th = theta_n[np.ix_(idx, idx)]
    tx = point.tx_dir[idx]
    rx = point.rx_dir[idx]
    phases = tx[None, :] + th - rx[:, None]
    c = np.cos(phases)
    B = c * c
    N = B.diagonal()
    D = B.sum(axis=1) - N + _INTERFERENCE_FLOOR
    sin2 = np.sin(2.0 * phases)
    inv_nd = 1.0 / (N + D)
    w = inv_nd - 1.0 / D  # effect of extra interference on a user's rate
    M = -sin2 * w[:, None]
    d_tx_S = M.sum(axis=0) - M.diagonal() + (-sin2.diagonal()) * inv_nd
    row_sum = sin2.sum(axis=1) - sin2.diagonal()
    d_rx_S = sin2.diagonal() * inv_nd + row_sum * w
    d_tx = np.zeros(ch.k)
    d_rx = np.zeros(ch.k)
    d_tx[idx] = d_tx_S
    d_rx[idx] = d_rx_S
    return d_tx, d_rx


class _ActiveState:
    """Cached per-subset quantities for fast single-coordinate updates."""

    def __init__(self, theta_n, tx, rx, active):
        self.idx = np.flatnonzero(active)
        self.th = theta_n[np.ix_(self.idx, self.idx)]
        self.tx = tx[self.idx].copy()
        self.rx = rx[self.idx].copy()
        self.refresh()

    def refresh(self):
        self.B = _beta_values(self.th, self.tx, self.rx)
        self.N = self.B.diagonal().copy()
        self.D = self.B.sum(axis=1) - self.N + _INTERFERENCE_FLOOR
        self.value = float(np.log1p(self.N / self.D).sum())

    # -- transmit-direction coordinate -----------------------------------
    def tx_candidates(self, m, xs):
        base = self.th[:, m] - self.rx
        cols = np.cos(base[:, None] + xs[None, :])
        cols *= cols
        d = self.D[:, None] + (cols - self.B[:, m][:, None])
        d[m, :] = self.D[m]
        n = np.repeat(self.N[:, None], xs.size, axis=1)
        n[m, :] = cols[m, :]
        return np.log1p(n / d).sum(axis=0)

    def eval_tx(self, m, x):
        return float(self.tx_candidates(m, np.array([x]))[0])

    def set_tx(self, m, x):
        self.tx[m] = x
        col = np.cos(self.th[:, m] - self.rx + x)
        col *= col
        delta = col - self.B[:, m]
        self.B[:, m] = col
        self.D += delta
        self.D[m] -= delta[m]  # own coupling is not interference
        self.N[m] = col[m]
        self.value = float(np.log1p(self.N / self.D).sum())

    # -- receive-direction coordinate -------------------------------------
    def rx_candidates(self, m, ys):
        base = self.tx + self.th[m, :]
        rows = np.cos(base[:, None] - ys[None, :])
        rows *= rows
        n = rows[m, :]
        d = rows.sum(axis=0) - n + _INTERFERENCE_FLOOR
        rest = self.value - math.log1p(self.N[m] / self.D[m])
        return rest + np.log1p(n / d)

    def eval_rx(self, m, y):
        return float(self.rx_candidates(m, np.array([y]))[0])

    def set_rx(self, m, y):
        self.rx[m] = y
        row = np.cos(self.tx + self.th[m, :] - y)
        row *= row
        self.B[m, :] = row
        self.N[m] = row[m]
        self.D[m] = row.sum() - row[m] + _INTERFERENCE_FLOOR
        self.value = float(np.log1p(self.N / self.D).sum())


def _golden_max(f, lo, hi, tol=1e-9):
    """Golden-section maximization on [lo, hi]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = 1.0 - invphi
    a, b = lo, hi
    h = b - a
    c = a + invphi2 * h
    d = a + invphi * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + invphi2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + invphi * h
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


_SCAN_OFFSETS = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 9)[:-1]  # period pi


def _line_search(state, which, m, tol=1e-9):
    """Scan one period of the coordinate section, then golden-refine around
    the best sample; apply the move only if it strictly improves."""
    x0 = state.tx[m] if which == "tx" else state.rx[m]
    xs = x0 + _SCAN_OFFSETS
    vals = state.tx_candidates(m, xs) if which == "tx" else state.rx_candidates(m, xs)
    j = int(np.argmax(vals))
    span = _SCAN_OFFSETS[1] - _SCAN_OFFSETS[0]
    f = (lambda x: state.eval_tx(m, x)) if which == "tx" else (lambda x: state.eval_rx(m, x))
    x_star, f_star = _golden_max(f, xs[j] - span, xs[j] + span, tol)
    if vals[j] > f_star:
        x_star, f_star = xs[j], float(vals[j])
    if f_star > state.value + 1e-12:  # ignore pure rounding "gains"
        if which == "tx":
            state.set_tx(m, x_star)
        else:
            state.set_rx(m, x_star)


def _ascend(theta_n, tx, rx, active, tol=1e-9, max_cycles=1000, reduce_powers=True):
    """Cyclic coordinate ascent over directions, interleaved with the
    extreme-point power reduction; monotone non-decreasing objective.

    Returns (tx, rx, active, value, cycles). tx/rx are full-length; entries
    outside the active set keep their input values.
    """
    tx = tx.copy()
    rx = rx.copy()
    active = active.copy()
    state = _ActiveState(theta_n, tx, rx, active) if active.any() else None
    cycles = 0
    while cycles < max_cycles:
        cycles += 1
        start_val = state.value if state is not None else 0.0
        if state is not None:
            for m in range(state.idx.size):
                _line_search(state, "tx", m, tol)
                _line_search(state, "rx", m, tol)
            tx[state.idx] = state.tx
            rx[state.idx] = state.rx
        if reduce_powers:
            B_full = _beta_values(theta_n, tx, rx)
            p_now = active.astype(float)
            p_cand = extreme_point_reduce(B_full, p_now)
            if not np.array_equal(p_cand, p_now):
                cand_val = float(_per_user_rates(B_full, p_cand).sum())
                cur_val = state.value if state is not None else 0.0
                if cand_val > cur_val:
                    active = p_cand == 1.0
                    state = _ActiveState(theta_n, tx, rx, active) if active.any() else None
        end_val = state.value if state is not None else 0.0
        if end_val - start_val < tol:
            break
    return tx, rx, active, (state.value if state is not None else 0.0), cycles


def _canonical_solution(theta_n, tx, rx, active, restart_index=None, iterations=None):
    """Wrap directions, zero them off-support, and recompute the value at the
    exact returned point."""
    powers = active.astype(float)
    tx_out = np.where(active, wrap_angle(tx), 0.0)
    rx_out = np.where(active, wrap_angle(rx), 0.0)
    B = _beta_values(theta_n, tx_out, rx_out)
    value = float(_per_user_rates(B, powers).sum())
    point = SSAPoint(powers=powers, tx_dir=tx_out, rx_dir=rx_out)
    subset = tuple(int(i) for i in np.flatnonzero(active))
    return SubsetSolution(subset=subset, point=point, value=value,
                          restart_index=restart_index, iterations=iterations)


def _grid_search_subset(theta_n, subset, chunk=4096):
    """Exact max over the direction grid for a fixed active subset.

    The sum rate separates across receive directions once the transmit
    combination is fixed, so the search is (grid size)^s transmit
    combinations, each with an independent per-receiver grid maximization.
    Grid points are visited near-zero first so exact ties prefer small
    directions.
    """
    idx = np.asarray(subset, dtype=np.int64)
    s = idx.size
    th = theta_n[np.ix_(idx, idx)]
    grid = direction_grid(s)
    order = np.lexsort((grid < 0, np.abs(grid)))
    g = grid[order]  # 0, +step, -step, ...
    n_g = g.size
    combo_counts = n_g ** s
    best_val = -np.inf
    best_combo = None  # (tx tuple, rx tuple)
    powers_of = n_g ** np.arange(s - 1, -1, -1, dtype=np.int64)
    for lo in range(0, combo_counts, chunk):
        hi = min(lo + chunk, combo_counts)
        ids = np.arange(lo, hi, dtype=np.int64)
        digits = (ids[:, None] // powers_of[None, :]) % n_g
        A = g[digits]  # (m, s) transmit combinations
        total = np.zeros(hi - lo)
        arg_rx = np.empty((hi - lo, s), dtype=np.int64)
        for r in range(s):
            phases = A[:, None, :] + th[r][None, None, :] - g[None, :, None]
            Bv = np.cos(phases)
            Bv *= Bv
            N = Bv[:, :, r]
            D = Bv.sum(axis=2) - N + _INTERFERENCE_FLOOR
            R = np.log1p(N / D)
            arg = R.argmax(axis=1)
            arg_rx[:, r] = arg
            total += R[np.arange(hi - lo), arg]
        j = int(total.argmax())
        if total[j] > best_val:
            best_val = float(total[j])
            best_combo = (A[j].copy(), g[arg_rx[j]].copy())
    return best_combo[0], best_combo[1], best_val


def optimize_ssa(ch: ChannelRealization, mode: str = "ascent",
                 restarts: int = 32, seed: int = 0) -> SubsetSolution:
    """Maximize the single-symbol sum rate over subsets and directions.

    grid mode (K <= 3): for every non-empty subset, exhaustive search over
    the direction grid followed by a deterministic local ascent polish of the
    winning grid point. The result is at least the exact grid maximum and
    within the perturbation modulus (4 nats) of the continuous optimum.

    ascent mode (K <= 64): best of `restarts` runs of cyclic per-coordinate
    golden-section ascent interleaved with the extreme-point power reduction.
    Restart 0 starts from all-on powers with zero directions; the rest start
    from seeded uniform directions. Ties prefer the lexicographically
    smallest subset, then the lowest restart index.
    """
    k = ch.k
    theta_n = normalize(ch).theta
    if mode == "grid":
        if k > GRID_K_LIMIT:
            raise ValueError(f"grid mode caps at K = {GRID_K_LIMIT}")
        candidates = []
        for size in range(1, k + 1):
            for subset in itertools.combinations(range(k), size):
                tx_s, rx_s, _ = _grid_search_subset(theta_n, subset)
                tx = np.zeros(k)
                rx = np.zeros(k)
                idx = np.asarray(subset, dtype=np.int64)
                tx[idx] = tx_s
                rx[idx] = rx_s
                active = np.zeros(k, dtype=bool)
                active[idx] = True
                tx, rx, active2, val, _ = _ascend(theta_n, tx, rx, active,
                                                  reduce_powers=False)
                sol = _canonical_solution(theta_n, tx, rx, active2)
                candidates.append(sol)
        best = max(c.value for c in candidates)
        return min((c for c in candidates if c.value == best),
                   key=lambda c: c.subset)
    if mode == "ascent":
        if k > ASCENT_K_LIMIT:
            raise ValueError(f"ascent mode caps at K = {ASCENT_K_LIMIT}")
        if restarts < 1:
            raise ValueError("restarts must be >= 1")
        finals = []
        for r in range(restarts):
            if r == 0:
                tx = np.zeros(k)
                rx = np.zeros(k)
            else:
                gen = make_generator(derive_seed(seed, r))
                tx = gen.uniform(-math.pi, math.pi, k)
                rx = gen.uniform(-math.pi, math.pi, k)
            active = np.ones(k, dtype=bool)
            tx, rx, active, _, cycles = _ascend(theta_n, tx, rx, active)
            finals.append(_canonical_solution(theta_n, tx, rx, active,
                                              restart_index=r, iterations=cycles))
        best = max(f.value for f in finals)
        return min((f for f in finals if f.value == best),
                   key=lambda f: (f.subset, f.restart_index))
    raise ValueError("mode must be 'grid' or 'ascent'")
