"""
Optimal Subset Selection

Exhaustive search over every K-subset of the swarm for the subset whose
MRT beam maximizes SINR.

Combinations are scored in fixed-size chunks, optionally on a thread
pool. Chunk boundaries never depend on the worker count and the final
reduction keeps the earliest (lexicographically smallest) combination on
ties, so the result is identical for any number of threads.
"""

import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .beampattern import ISOTROPIC, ElementPattern
from .channel import ChannelRealization, FadingParams, sample_channel
from .errors import DimensionError
from .geometry import UavState, Vec3, positions_array, rotation_matrices, rotations_array
from .interference import InterferenceField, weighted_source_powers

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 65536


@dataclass(frozen=True)
class Combination:
    """Strictly increasing one-based UAV indices."""
    indices: Tuple[int, ...]

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if not indices:
            raise DimensionError("combination is empty")
        if indices[0] < 1 or any(b <= a for a, b in zip(indices, indices[1:])):
            raise DimensionError(f"combination indices must be strictly increasing and >= 1: {indices}")
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return len(self.indices)

    def zero_based(self) -> List[int]:
        return [i - 1 for i in self.indices]


@dataclass(frozen=True)
class SelectionResult:
    best: Optional[Combination]
    best_sinr_db: float
    evaluated_count: int
    skipped_count: int = 0
    wall_time_s: float = 0.0


def enumerate_combinations(n: int, k: int) -> Iterator[Combination]:
    """All C(n, k) combinations of 1..n in lexicographic order."""
    if k < 1 or k > n:
        raise DimensionError(f"need 1 <= k <= n, got n={n}, k={k}")
    for indices in itertools.combinations(range(1, n + 1), k):
        yield Combination(indices)


def _combination_chunks(n: int, k: int, chunk_size: int) -> Iterator[np.ndarray]:
    """Zero-based combinations as (m, k) integer arrays, lexicographic across chunks."""
    source = itertools.combinations(range(n), k)
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(source, chunk_size)), dtype=np.int64
        )
        if flat.size == 0:
            return
        yield flat.reshape(-1, k)


class SubsetScorer:
    """
    Vectorized SINR of MRT-weighted subsets for one channel realization.

    Each subset is treated as its own array: receiver and source directions
    are measured from the subset's centroid, the same reference subset_sinr
    uses, and the pattern is the sum of its members' conjugate-channel-weighted
    terms. Rows are scored in fixed blocks and every reduction runs column by
    column, so a row's value never depends on which chunk it arrived in.
    """

    block_size = 4096

    def __init__(
        self,
        uavs: Sequence[UavState],
        channel: ChannelRealization,
        receiver: Vec3,
        field: InterferenceField,
        params: FadingParams,
        tx_power: float = 1.0,
        element: ElementPattern = ISOTROPIC,
    ):
        if len(channel) != len(uavs):
            raise DimensionError(f"channel has {len(channel)} gains for {len(uavs)} UAVs")
        self.size = len(uavs)
        self.tx_power = tx_power
        self.noise_power = field.noise_power
        self.gains = channel.gains
        self.power_gains = np.abs(self.gains) ** 2
        self.wavenumber = 2.0 * math.pi / params.wavelength
        self.element = element

        self.positions = positions_array(uavs)
        powers = np.array([s.power for s in uavs], dtype=float)
        offsets = np.array([s.phase for s in uavs], dtype=float)
        self.coefficients = np.conj(self.gains) * powers * np.exp(1j * offsets)
        self.boresights = (
            None if element.is_isotropic
            else rotation_matrices(rotations_array(uavs)) @ element.boresight_body.to_array()
        )
        self.source_powers = weighted_source_powers(field, receiver, params)
        # row 0 is the receiver
        self.targets = (
            np.vstack([receiver.to_array(), field.positions()]) if field.sources else None
        )

    def score(self, combos: np.ndarray) -> np.ndarray:
        """SINR in dB per row of zero-based combinations; NaN marks degenerate subsets."""
        combos = np.asarray(combos, dtype=np.int64).reshape(len(combos), -1)
        norm2 = np.zeros(len(combos))
        for column in combos.T:
            norm2 = norm2 + self.power_gains[column]
        signal = self.tx_power * norm2

        interference = np.zeros(len(combos))
        valid = norm2 > 0
        if self.targets is not None:
            for start in range(0, len(combos), self.block_size):
                block = slice(start, start + self.block_size)
                interference[block], anchored = self._interference(combos[block])
                valid[block] &= anchored

        with np.errstate(divide="ignore", invalid="ignore"):
            sinr = 10.0 * np.log10(signal / (interference + self.noise_power))
        return np.where(valid, sinr, np.nan)

    def _interference(self, combos: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Pattern-weighted interference per row and whether the receiver gain is non-zero."""
        members = self.positions[combos]  # (m, k, 3)
        reference = members.mean(axis=1)
        directions = self.targets[None, :, :] - reference[:, None, :]  # (m, 1 + J, 3)
        lengths = np.linalg.norm(directions, axis=-1, keepdims=True)
        directions = directions / np.where(lengths > 0, lengths, 1.0)

        pattern = np.zeros(directions.shape[:2], dtype=complex)
        for slot, column in enumerate(combos.T):
            position = members[:, slot, :]
            phase = self.wavenumber * _rowwise_dot(directions, position)
            term = self.coefficients[column][:, None] * np.exp(1j * phase)
            if self.boresights is not None:
                cosines = _rowwise_dot(directions, self.boresights[column])
                term = term * np.maximum(cosines, 0.0) ** self.element.exponent_q
            pattern = pattern + term

        power = np.abs(pattern) ** 2
        anchor = power[:, 0]
        anchored = (anchor > 0) & np.all(lengths[..., 0] > 0, axis=1)
        safe_anchor = np.where(anchor > 0, anchor, 1.0)
        interference = np.zeros(len(combos))
        for j, source_power in enumerate(self.source_powers):
            interference = interference + source_power * (power[:, j + 1] / safe_anchor)
        return interference, anchored


def _rowwise_dot(directions: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """(m, j, 3) . (m, 3) -> (m, j), summed x + y + z elementwise so every row rounds the same."""
    return (
        directions[..., 0] * vectors[:, None, 0]
        + directions[..., 1] * vectors[:, None, 1]
        + directions[..., 2] * vectors[:, None, 2]
    )


def _best_in_chunk(scorer: SubsetScorer, combos: np.ndarray) -> Tuple[float, Optional[np.ndarray], int]:
    values = scorer.score(combos)
    skipped = int(np.count_nonzero(np.isnan(values)))
    if skipped == len(values):
        return -math.inf, None, skipped
    index = int(np.nanargmax(values))
    return float(values[index]), combos[index], skipped


def brute_force_select(
    uavs: Sequence[UavState],
    channel: ChannelRealization,
    receiver: Vec3,
    field: InterferenceField,
    params: FadingParams,
    k: int,
    tx_power: float = 1.0,
    element: ElementPattern = ISOTROPIC,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> SelectionResult:
    """Score every K-subset and keep the first strict maximum."""
    n = len(uavs)
    if k < 1 or k > n:
        raise DimensionError(f"need 1 <= k <= N, got N={n}, k={k}")
    started = time.perf_counter()
    scorer = SubsetScorer(uavs, channel, receiver, field, params, tx_power, element)

    best_value, best_combo = -math.inf, None
    evaluated = skipped = 0

    def reduce(outcome, size):
        nonlocal best_value, best_combo, evaluated, skipped
        value, combo, chunk_skipped = outcome
        evaluated += size
        skipped += chunk_skipped
        if combo is not None and value > best_value:
            best_value, best_combo = value, combo

    chunks = _combination_chunks(n, k, chunk_size)
    if threads <= 1:
        for combos in chunks:
            reduce(_best_in_chunk(scorer, combos), len(combos))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pending = []
            for combos in chunks:
                pending.append((pool.submit(_best_in_chunk, scorer, combos), len(combos)))
            for future, size in pending:
                reduce(future.result(), size)

    elapsed = time.perf_counter() - started
    best = None if best_combo is None else Combination(tuple(int(i) + 1 for i in best_combo))
    logger.info(
        f"Evaluated {evaluated} combinations of {k} out of {n} UAVs "
        f"({skipped} degenerate) in {elapsed:.3f}s, best {best.indices if best else None} "
        f"at {best_value:.3f} dB"
    )
    return SelectionResult(best, best_value, evaluated, skipped, elapsed)


def select_over_time(
    uavs: Sequence[UavState],
    receiver: Vec3,
    field: InterferenceField,
    params: FadingParams,
    k: int,
    num_instants: int,
    rng: np.random.Generator,
    tx_power: float = 1.0,
    element: ElementPattern = ISOTROPIC,
    threads: int = 1,
) -> List[Tuple[int, SelectionResult]]:
    """Repeat the search on fresh channel draws, one per time instant."""
    timeline = []
    for t in range(num_instants):
        channel = sample_channel(uavs, receiver, params, rng, timestamp=t)
        result = brute_force_select(
            uavs, channel, receiver, field, params, k, tx_power, element, threads
        )
        timeline.append((t, result))
    return timeline
