"""Block-fading channel traces: generation, CSV load and save."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import EpochChannelState, NetworkConfig, validate_config

CSV_HEADER = ("epoch", "node", "gain_raw")
CSV_HEADER_UP = CSV_HEADER + ("gain_raw_up",)

# Philox emits 4 words per counter step; each epoch owns ceil(K/4) steps.
_WORDS_PER_STEP = 4


class TraceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ChannelTrace:
    """Raw power gains for M epochs and K nodes.

    ``raw_gains`` holds the uplink gains x'_ji, shape (M, K). When the
    downlink differs, ``raw_gains_down`` holds it with the same shape.
    """

    raw_gains: np.ndarray
    noise_power: float
    provenance: str = "generated"
    raw_gains_down: np.ndarray | None = None

    def __post_init__(self):
        g = np.asarray(self.raw_gains, dtype=float)
        if g.ndim != 2:
            raise TraceError("raw_gains must be a 2-D (epochs x nodes) array")
        object.__setattr__(self, "raw_gains", g)
        _check_positive(g)
        if self.raw_gains_down is not None:
            d = np.asarray(self.raw_gains_down, dtype=float)
            if d.shape != g.shape:
                raise TraceError("downlink gains must match uplink shape")
            _check_positive(d)
            object.__setattr__(self, "raw_gains_down", d)

    def __len__(self) -> int:
        return self.raw_gains.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.raw_gains.shape[1]

    @property
    def reciprocal(self) -> bool:
        return self.raw_gains_down is None

    @property
    def normalized_gains(self) -> np.ndarray:
        return self.raw_gains / self.noise_power

    @property
    def normalized_gains_down(self) -> np.ndarray:
        if self.raw_gains_down is None:
            return self.normalized_gains
        return self.raw_gains_down / self.noise_power

    @property
    def aux_coeffs(self) -> np.ndarray:
        """a_ji = N0 x_ji y_ji (= N0 x_ji^2 for reciprocal channels)."""
        return self.noise_power * self.normalized_gains * self.normalized_gains_down

    @property
    def aux_sum(self) -> np.ndarray:
        return self.aux_coeffs.sum(axis=1)

    def epoch(self, i: int) -> EpochChannelState:
        down = None if self.raw_gains_down is None else self.raw_gains_down[i]
        return EpochChannelState(self.raw_gains[i], self.noise_power, down)

    def equals(self, other: "ChannelTrace") -> bool:
        if self.noise_power != other.noise_power or self.raw_gains.shape != other.raw_gains.shape:
            return False
        if (self.raw_gains_down is None) != (other.raw_gains_down is None):
            return False
        same = np.array_equal(self.raw_gains, other.raw_gains)
        if self.raw_gains_down is not None:
            same = same and np.array_equal(self.raw_gains_down, other.raw_gains_down)
        return bool(same)


def _check_positive(g: np.ndarray):
    bad = np.argwhere(~(g > 0))
    if bad.size:
        i, j = bad[0]
        raise TraceError(f"non-positive gain at ({i},{j})")


def _generate_block(seed: int, start: int, stop: int, means: np.ndarray) -> np.ndarray:
    k = means.shape[0]
    steps = -(-k // _WORDS_PER_STEP)
    words = steps * _WORDS_PER_STEP
    bitgen = np.random.Philox(key=seed, counter=[start * steps, 0, 0, 0])
    raw = bitgen.random_raw((stop - start) * words).reshape(stop - start, words)[:, :k]
    # 53-bit uniforms on the open interval (0, 1), then inverse-CDF exponential
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return -np.log(u) * means


def generate_trace(cfg: NetworkConfig, workers: int = 1, num_epochs: int | None = None) -> ChannelTrace:
    """Draw i.i.d. Rayleigh block-fading power gains.

    Each epoch reads its own Philox counter block derived from (seed, epoch),
    so the result does not depend on how epochs are split across ``workers``.
    """
    validate_config(cfg)
    m = cfg.num_epochs if num_epochs is None else int(num_epochs)
    means = cfg.mean_raw_gain
    workers = max(1, min(int(workers), m))
    edges = np.linspace(0, m, workers + 1).astype(int)
    spans = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    if len(spans) == 1:
        blocks = [_generate_block(cfg.rng_seed, 0, m, means)]
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            blocks = list(pool.map(lambda s: _generate_block(cfg.rng_seed, s[0], s[1], means), spans))
    gains = np.concatenate(blocks, axis=0)
    return ChannelTrace(gains, cfg.noise_power, provenance=f"generated(seed={cfg.rng_seed})")


def save_trace(trace: ChannelTrace, path: str | Path) -> None:
    if not str(path):
        raise OSError("empty output path")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER if trace.reciprocal else CSV_HEADER_UP)
        for i in range(len(trace)):
            for j in range(trace.num_nodes):
                # the file column is the downlink/harvest gain; uplink rides along when it differs
                if trace.reciprocal:
                    w.writerow((i, j, repr(float(trace.raw_gains[i, j]))))
                else:
                    w.writerow((i, j, repr(float(trace.raw_gains_down[i, j])), repr(float(trace.raw_gains[i, j]))))


def load_trace(path: str | Path, cfg: NetworkConfig) -> ChannelTrace:
    """Read a trace CSV; normalization uses ``cfg.noise_power``."""
    validate_config(cfg)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise TraceError("row 1: empty file")
    header = tuple(c.strip() for c in rows[0])
    if header not in (CSV_HEADER, CSV_HEADER_UP):
        raise TraceError(f"row 1: bad header {rows[0]!r}, expected {','.join(CSV_HEADER)}")
    has_up = header == CSV_HEADER_UP
    entries = {}
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise TraceError(f"row {r}: expected {len(header)} columns, got {len(row)}")
        try:
            i, j = int(row[0]), int(row[1])
        except ValueError:
            raise TraceError(f"row {r}, column 1-2: bad epoch/node index") from None
        vals = []
        for c in range(2, len(header)):
            try:
                vals.append(float(row[c]))
            except ValueError:
                raise TraceError(f"row {r}, column {c + 1}: cannot parse {row[c]!r}") from None
        if not all(v > 0 for v in vals):
            raise TraceError(f"non-positive gain at ({i},{j})")
        if (i, j) in entries:
            raise TraceError(f"row {r}: duplicate entry ({i},{j})")
        entries[(i, j)] = vals

    m, k = cfg.num_epochs, cfg.num_nodes
    epochs = {i for i, _ in entries}
    if len(epochs) != m or (epochs and (min(epochs) != 0 or max(epochs) != m - 1)):
        raise TraceError(f"length mismatch: file has {len(epochs)} epochs, config expects {m}")
    if len(entries) != m * k:
        raise TraceError(f"node count mismatch: expected {k} nodes per epoch")
    down = np.empty((m, k))
    up = np.empty((m, k)) if has_up else None
    for (i, j), vals in entries.items():
        if not 0 <= j < k:
            raise TraceError(f"node index {j} out of range at epoch {i}")
        down[i, j] = vals[0]
        if has_up:
            up[i, j] = vals[1]
    if has_up:
        return ChannelTrace(up, cfg.noise_power, f"loaded({path})", raw_gains_down=down)
    return ChannelTrace(down, cfg.noise_power, f"loaded({path})")
