"""Interference graph, greedy coloring, round-robin schedule, and the
scheduled scheme's achieved rates.

Two users are in conflict when either residual cross gain exceeds
t = c / sqrt(ln K) in magnitude. Color classes of a first-fit greedy coloring
are independent sets; scheduling one class per slot round-robin keeps every
user's in-slot interference power below t^2 * (slot size - 1) while giving
each user a 1/L time share.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import EffectiveGains, RateReport, bpsk_rate
from .seeding import make_generator

METRICS = ("sinr", "bpsk")

# Largest K for which the dense (full phase matrix in memory) path is used
# by the experiment driver; beyond it the streamed builders below apply.
DENSE_K_LIMIT = 8192


def alignment_threshold(k: int, threshold_constant: float) -> float:
    """Gain cutoff t = c / sqrt(ln K); +inf for K <= 2 (no edges form).

    The construction is meaningful for large K; at K <= 2 the graph is
    defined to be empty.
    """
    if threshold_constant <= 0 or not math.isfinite(threshold_constant):
        raise ValueError("threshold_constant must be positive and finite")
    if k <= 2:
        return math.inf
    return threshold_constant / math.sqrt(math.log(k))


@dataclass(frozen=True)
class InterferenceGraph:
    k: int
    adjacency: np.ndarray
    threshold: float
    threshold_constant: float

    def __post_init__(self):
        adj = self.adjacency
        if adj.shape != (self.k, self.k) or adj.dtype != np.bool_:
            raise ValueError("adjacency must be a k x k boolean matrix")
        if np.any(adj.diagonal()):
            raise ValueError("adjacency has self-loops")
        # symmetry, checked in row blocks to bound transient memory
        step = 1024
        for a in range(0, self.k, step):
            b = min(a + step, self.k)
            if not np.array_equal(adj[a:b, :], adj[:, a:b].T):
                raise ValueError("adjacency must be symmetric")
        adj.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self.adjacency)) // 2

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)


@dataclass(frozen=True)
class Coloring:
    colors: np.ndarray
    num_colors: int
    order: np.ndarray

    def __post_init__(self):
        colors = self.colors
        if colors.ndim != 1 or colors.size < 1:
            raise ValueError("colors must be a non-empty vector")
        if colors.min() < 0 or colors.max() + 1 != self.num_colors:
            raise ValueError("color indices must fill [0, num_colors)")
        if np.any(np.bincount(colors, minlength=self.num_colors) == 0):
            raise ValueError("every color must be used")
        colors.setflags(write=False)
        self.order.setflags(write=False)


@dataclass(frozen=True)
class Schedule:
    k: int
    slots: tuple
    period: int = field(default=0)

    def __post_init__(self):
        if len(self.slots) < 1:
            raise ValueError("schedule needs at least one slot")
        if self.period == 0:
            object.__setattr__(self, "period", len(self.slots))
        if self.period != len(self.slots):
            raise ValueError("period must equal the number of slots")
        seen = np.concatenate([np.asarray(s, dtype=np.int64) for s in self.slots])
        if seen.size != self.k or not np.array_equal(np.sort(seen), np.arange(self.k)):
            raise ValueError("slots must partition the user set")


def build_graph(gains: EffectiveGains, threshold_constant: float = math.pi) -> InterferenceGraph:
    """Thresholded conflict graph: edge(k,j) iff max(|g_kj|, |g_jk|) > t."""
    k = gains.k
    t = alignment_threshold(k, threshold_constant)
    if math.isinf(t):
        adj = np.zeros((k, k), dtype=bool)
    else:
        over = np.abs(gains.values) > t
        adj = over | over.T
        np.fill_diagonal(adj, False)
    return InterferenceGraph(k=k, adjacency=adj, threshold=t,
                             threshold_constant=threshold_constant)


def build_graph_streamed(k: int, seed: int, threshold_constant: float = math.pi,
                         block_rows: int = 512) -> InterferenceGraph:
    """Same graph as build_graph(effective_gains(sample_channel(k, seed)), c)
    without ever materializing the full phase matrix.

    Pass 1 walks the Philox stream in row blocks to collect the diagonal
    (direct-link) phases; pass 2 regenerates the same stream and thresholds
    |cos(theta_kj - theta_jj)| block by block. Peak memory is the boolean
    adjacency plus one row block of floats.
    """
    t = alignment_threshold(k, threshold_constant)
    adj = np.zeros((k, k), dtype=bool)
    if not math.isinf(t):
        diag = np.empty(k)
        gen = make_generator(seed)
        for a in range(0, k, block_rows):
            b = min(a + block_rows, k)
            block = gen.uniform(-math.pi, math.pi, size=(b - a, k))
            diag[a:b] = block[np.arange(b - a), np.arange(a, b)]
        gen = make_generator(seed)
        for a in range(0, k, block_rows):
            b = min(a + block_rows, k)
            block = gen.uniform(-math.pi, math.pi, size=(b - a, k))
            np.subtract(block, diag[None, :], out=block)
            np.cos(block, out=block)
            np.abs(block, out=block)
            adj[a:b, :] = block > t
        # symmetrize in blocks (copy avoids aliasing the transposed view)
        for a in range(0, k, block_rows):
            b = min(a + block_rows, k)
            adj[a:b, :] |= adj[:, a:b].T.copy()
        np.fill_diagonal(adj, False)
    return InterferenceGraph(k=k, adjacency=adj, threshold=t,
                             threshold_constant=threshold_constant)


def random_graph(k: int, p: float, seed: int) -> InterferenceGraph:
    """Erdos-Renyi G(k, p) as an InterferenceGraph (threshold fields NaN).

    Used by bound verifiers and property tests that need a graph with a
    prescribed edge probability rather than one induced by a channel draw.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    gen = make_generator(seed)
    upper = np.triu(gen.random((k, k)) < p, 1)
    adj = upper | upper.T
    return InterferenceGraph(k=k, adjacency=adj, threshold=math.nan,
                             threshold_constant=math.nan)


def greedy_color(graph: InterferenceGraph, order=None) -> Coloring:
    """First-fit coloring: each node, in order, takes the smallest color not
    used by an already-colored neighbor."""
    k = graph.k
    if order is None:
        order = np.arange(k, dtype=np.int64)
    else:
        order = np.asarray(order, dtype=np.int64)
        if not np.array_equal(np.sort(order), np.arange(k)):
            raise ValueError("order must be a permutation of all nodes")
    colors = np.full(k, -1, dtype=np.int64)
    used = np.zeros(k + 1, dtype=bool)
    highest = 0
    for v in order:
        nbr_colors = colors[graph.adjacency[v]]
        nbr_colors = nbr_colors[nbr_colors >= 0]
        used[nbr_colors] = True
        c = int(np.argmin(used[: highest + 2]))
        used[nbr_colors] = False
        colors[v] = c
        if c == highest + 1:
            highest = c
    return Coloring(colors=colors, num_colors=int(colors.max()) + 1, order=order)


def make_schedule(coloring: Coloring) -> Schedule:
    """One slot per color class, ordered by color index; users sorted."""
    k = coloring.colors.size
    by_color = np.argsort(coloring.colors, kind="stable")
    counts = np.bincount(coloring.colors, minlength=coloring.num_colors)
    slots = []
    pos = 0
    for c in range(coloring.num_colors):
        slots.append(tuple(int(u) for u in by_color[pos: pos + counts[c]]))
        pos += counts[c]
    return Schedule(k=k, slots=tuple(slots))


def _slot_rates(gain_block: np.ndarray, metric: str) -> np.ndarray:
    """Rates of the users in one slot from their slot-local gain submatrix."""
    sq = gain_block * gain_block
    inter = sq.sum(axis=1) - sq.diagonal()
    inter = np.maximum(inter, 0.0)
    if metric == "sinr":
        return np.log1p(1.0 / (inter + 0.5))
    return np.array([bpsk_rate(1.0, iv + 0.5) for iv in inter])


def phase_alignment_rates(gains: EffectiveGains, schedule: Schedule,
                          metric: str = "sinr") -> RateReport:
    """Achieved rates of the scheduled scheme.

    User k in slot s sees interference power I_k = sum_{j in s, j != k}
    g_kj^2 during its slot and is silent otherwise, so its rate is the
    single-slot rate divided by the period L.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    if schedule.k != gains.k:
        raise ValueError("schedule and gains disagree on user count")
    per_user = np.zeros(gains.k)
    period = schedule.period
    for slot in schedule.slots:
        idx = np.asarray(slot, dtype=np.int64)
        block = gains.values[np.ix_(idx, idx)]
        per_user[idx] = _slot_rates(block, metric) / period
    return RateReport.from_per_user("phase_align", per_user)


def slot_gain_blocks(k: int, seed: int, schedule: Schedule,
                     block_rows: int = 512) -> list:
    """Slot-local gain submatrices for a streamed channel.

    Regenerates the row-major Philox stream of sample_channel(k, seed) and
    keeps, for each user, only the gains toward its own slot members. Used to
    evaluate phase_alignment_rates at K too large for a dense phase matrix.
    """
    diag = np.empty(k)
    gen = make_generator(seed)
    for a in range(0, k, block_rows):
        b = min(a + block_rows, k)
        block = gen.uniform(-math.pi, math.pi, size=(b - a, k))
        diag[a:b] = block[np.arange(b - a), np.arange(a, b)]
    slot_of = np.empty(k, dtype=np.int64)
    pos_in_slot = np.empty(k, dtype=np.int64)
    members = []
    for s, slot in enumerate(schedule.slots):
        idx = np.asarray(slot, dtype=np.int64)
        slot_of[idx] = s
        pos_in_slot[idx] = np.arange(idx.size)
        members.append(idx)
    blocks = [np.empty((m.size, m.size)) for m in members]
    gen = make_generator(seed)
    for a in range(0, k, block_rows):
        b = min(a + block_rows, k)
        raw = gen.uniform(-math.pi, math.pi, size=(b - a, k))
        for v in range(a, b):
            m = members[slot_of[v]]
            blocks[slot_of[v]][pos_in_slot[v], :] = np.cos(raw[v - a, m] - diag[m])
    return blocks


def phase_alignment_rates_streamed(k: int, seed: int, schedule: Schedule,
                                   metric: str = "sinr",
                                   block_rows: int = 512) -> RateReport:
    """Streamed-channel equivalent of phase_alignment_rates."""
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    if schedule.k != k:
        raise ValueError("schedule and k disagree on user count")
    per_user = np.zeros(k)
    blocks = slot_gain_blocks(k, seed, schedule, block_rows=block_rows)
    for slot, block in zip(schedule.slots, blocks):
        idx = np.asarray(slot, dtype=np.int64)
        per_user[idx] = _slot_rates(block, metric) / schedule.period
    return RateReport.from_per_user("phase_align", per_user)


def _mis_exact(neighbor_masks, n: int) -> int:
    """Branch and bound over bitmask vertex sets."""
    best = 0

    def rec(candidates: int, size: int):
        nonlocal best
        if size + candidates.bit_count() <= best:
            return
        if candidates == 0:
            if size > best:
                best = size
            return
        # any vertex isolated within the candidate set is always taken
        q = candidates
        branch_v, branch_deg = -1, -1
        while q:
            v_bit = q & -q
            v = v_bit.bit_length() - 1
            q &= q - 1
            inside = neighbor_masks[v] & candidates
            if inside == 0:
                rec(candidates & ~v_bit, size + 1)
                return
            d = inside.bit_count()
            if d > branch_deg:
                branch_deg, branch_v = d, v
        v_bit = 1 << branch_v
        rec(candidates & ~(neighbor_masks[branch_v] | v_bit), size + 1)
        rec(candidates & ~v_bit, size)

    rec((1 << n) - 1, 0)
    return best


def _mis_greedy_by_degree(graph: InterferenceGraph) -> int:
    """Static min-degree-first greedy independent set (lower bound)."""
    order = np.argsort(graph.degrees(), kind="stable")
    blocked = np.zeros(graph.k, dtype=bool)
    size = 0
    for v in order:
        if not blocked[v]:
            size += 1
            blocked |= graph.adjacency[v]
            blocked[v] = True
    return size


def max_independent_set_size(graph: InterferenceGraph, exact_limit: int = 64,
                             coloring: Coloring = None):
    """alpha(G) exactly for K <= exact_limit, else a lower bound.

    The lower bound is the better of min-degree-first greedy and the largest
    color class of the (supplied or freshly computed) greedy coloring.

    Returns (size, exact_flag).
    """
    k = graph.k
    if k <= exact_limit:
        masks = []
        for v in range(k):
            row = graph.adjacency[v]
            masks.append(int.from_bytes(
                np.packbits(row, bitorder="little").tobytes(), "little"))
        return _mis_exact(masks, k), True
    if coloring is None:
        coloring = greedy_color(graph)
    largest_class = int(np.bincount(coloring.colors).max())
    return max(_mis_greedy_by_degree(graph), largest_class), False
