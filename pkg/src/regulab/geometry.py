"""Periodic geometry: torus windows, point configurations, cell grids.

The simulation window is the torus [0, L)^d with the minimum-image metric.
Because every scenario enforces L >= 2 * r_cut for the kernel cutoffs it
uses, the minimum image is unique at all ranges the dynamics ever queries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, ScenarioError

__all__ = [
    "TorusWindow",
    "Configuration",
    "CellGrid",
    "periodic_distance",
    "pairwise_distances",
    "sample_poisson",
]


@dataclass(frozen=True)
class TorusWindow:
    """Axis-aligned periodic box [0, side)^dimension."""

    dimension: int
    side: float

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ScenarioError(f"window dimension must be a positive integer, got {self.dimension!r}")
        if not math.isfinite(self.side) or self.side <= 0:
            raise ScenarioError(f"window side must be positive and finite, got {self.side!r}")

    @property
    def volume(self) -> float:
        return self.side**self.dimension

    def wrap(self, x) -> np.ndarray:
        """Map a point of R^d back into [0, side)^d."""
        return np.mod(np.asarray(x, dtype=float), self.side)


def periodic_distance(window: TorusWindow, x, y) -> float:
    """Minimum-image distance between two points of the torus."""
    dx = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    dx = np.minimum(dx, window.side - dx)
    return float(np.sqrt(np.sum(dx * dx)))


def pairwise_distances(window: TorusWindow, positions: np.ndarray) -> np.ndarray:
    """All unordered pair distances in a stack of points, shape (n*(n-1)/2,).

    Vectorized minimum-image computation; fine for the configuration sizes
    this package simulates (hundreds of points).
    """
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    n = pos.shape[0]
    if n < 2:
        return np.empty(0, dtype=float)
    iu, ju = np.triu_indices(n, k=1)
    delta = np.abs(pos[iu] - pos[ju])
    delta = np.minimum(delta, window.side - delta)
    return np.sqrt(np.sum(delta * delta, axis=1))


@dataclass(frozen=True)
class Configuration:
    """A finite point configuration: coordinates plus stable integer ids.

    ``positions`` has shape (n, d); ``ids`` has shape (n,).  Ids are unique
    and identify points across snapshots of one trajectory.
    """

    positions: np.ndarray
    ids: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        ids = np.asarray(self.ids, dtype=np.int64).ravel()
        if pos.size == 0:
            pos = pos.reshape(0, pos.shape[1] if pos.ndim == 2 and pos.shape[1] else 1)
        if pos.shape[0] != ids.shape[0]:
            raise ContractViolationError(
                f"positions ({pos.shape[0]}) and ids ({ids.shape[0]}) disagree on point count"
            )
        if len(np.unique(ids)) != len(ids):
            raise ContractViolationError("configuration ids must be unique")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "ids", ids)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    @classmethod
    def empty(cls, dimension: int) -> "Configuration":
        return cls(np.empty((0, dimension)), np.empty(0, dtype=np.int64))


def sample_poisson(window: TorusWindow, intensity: float, seed) -> Configuration:
    """Draw a homogeneous Poisson configuration on the window.

    The count is Poisson(intensity * volume) and coordinates are uniform.
    ``seed`` may be an integer, a SeedSequence, or a Generator; a given seed
    always yields the same configuration.
    """
    if intensity < 0 or not math.isfinite(intensity):
        raise ScenarioError(f"Poisson intensity must be nonnegative and finite, got {intensity}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = int(rng.poisson(intensity * window.volume))
    positions = rng.random((n, window.dimension)) * window.side
    return Configuration(positions, np.arange(n, dtype=np.int64))


class CellGrid:
    """Uniform cell lists over a torus window for fixed-radius neighbour search.

    The grid owns the positions of the points registered in it: ``insert``
    takes (id, position) and queries return ids.  Cells have side
    L / floor(L / r_cut) >= r_cut, so a radius-r query with r <= cell side
    only ever needs the 3^d block of cells around the query point.
    """

    def __init__(self, window: TorusWindow, r_cut: float):
        if not math.isfinite(r_cut) or r_cut <= 0:
            raise ContractViolationError(f"cell grid cutoff must be positive, got {r_cut}")
        if r_cut > window.side:
            raise ContractViolationError(
                f"cell grid cutoff {r_cut} exceeds window side {window.side}"
            )
        self.window = window
        self.r_cut = float(r_cut)
        self.cells_per_dim = max(1, int(window.side / r_cut))
        self.cell_side = window.side / self.cells_per_dim
        self._cells: dict[int, list[int]] = {}
        self._points: dict[int, tuple] = {}
        d = window.dimension
        m = self.cells_per_dim
        # Offsets of the 3^d adjacent-cell block, deduplicated for tiny grids
        # where wrapping makes neighbours coincide.
        if m >= 3:
            self._offsets = list(itertools.product((-1, 0, 1), repeat=d))
        else:
            seen = set()
            offsets = []
            for off in itertools.product((-1, 0, 1), repeat=d):
                key = tuple(o % m for o in off)
                if key not in seen:
                    seen.add(key)
                    offsets.append(off)
            self._offsets = offsets

    def __len__(self) -> int:
        return len(self._points)

    def __contains__(self, pid: int) -> bool:
        return pid in self._points

    def ids(self):
        return self._points.keys()

    def position(self, pid: int) -> tuple:
        try:
            return self._points[pid]
        except KeyError:
            raise ContractViolationError(f"point id {pid} is not in the grid") from None

    def _cell_coords(self, pos) -> tuple:
        side = self.cell_side
        m = self.cells_per_dim
        return tuple(min(int(c / side), m - 1) for c in pos)

    def _flat(self, coords) -> int:
        idx = 0
        for c in coords:
            idx = idx * self.cells_per_dim + c
        return idx

    def insert(self, pid: int, position) -> None:
        """Register a point; the position must already lie in [0, L)^d."""
        if pid in self._points:
            raise ContractViolationError(f"point id {pid} is already in the grid")
        pos = tuple(float(c) for c in np.atleast_1d(np.asarray(position, dtype=float)))
        if len(pos) != self.window.dimension:
            raise ContractViolationError(
                f"position has {len(pos)} coordinates, window has {self.window.dimension}"
            )
        if any(c < 0 or c >= self.window.side for c in pos):
            raise ContractViolationError(f"position {pos} lies outside [0, {self.window.side})")
        self._points[pid] = pos
        self._cells.setdefault(self._flat(self._cell_coords(pos)), []).append(pid)

    def _insert_unchecked(self, pid: int, pos: tuple) -> None:
        # Hot-path insert for the simulator: pos must already be a tuple of
        # floats in [0, L)^d and pid must be fresh.
        self._points[pid] = pos
        self._cells.setdefault(self._flat(self._cell_coords(pos)), []).append(pid)

    def remove(self, pid: int) -> tuple:
        """Unregister a point and return its position."""
        pos = self.position(pid)
        key = self._flat(self._cell_coords(pos))
        bucket = self._cells[key]
        bucket.remove(pid)
        if not bucket:
            del self._cells[key]
        del self._points[pid]
        return pos

    def neighbors_with_distances(self, x, r: float, exclude: int | None = None):
        """(id, distance) pairs for registered points within distance r of x.

        r must not exceed the cell side; ``exclude`` drops one id from the
        result (pass the query point's own id when x is a registered point).
        """
        if r > self.cell_side:
            raise ContractViolationError(
                f"query radius {r} exceeds cell side {self.cell_side}; rebuild the grid"
            )
        pos = tuple(float(c) for c in np.atleast_1d(np.asarray(x, dtype=float)))
        base = self._cell_coords(pos)
        m = self.cells_per_dim
        L = self.window.side
        cells = self._cells
        points = self._points
        out = []
        for off in self._offsets:
            coords = tuple((b + o) % m for b, o in zip(base, off))
            bucket = cells.get(self._flat(coords))
            if not bucket:
                continue
            for pid in bucket:
                if pid == exclude:
                    continue
                q = points[pid]
                s = 0.0
                for a, b in zip(pos, q):
                    dx = a - b
                    if dx < 0.0:
                        dx = -dx
                    if dx > L - dx:
                        dx = L - dx
                    s += dx * dx
                dist = math.sqrt(s)
                if dist <= r:
                    out.append((pid, dist))
        return out

    def neighbors_within(self, x, r: float, exclude: int | None = None) -> list[int]:
        """Ids of registered points within distance r of x (see above)."""
        return [pid for pid, _ in self.neighbors_with_distances(x, r, exclude)]

    def audit(self) -> None:
        """Check that every point sits in exactly the cell containing it."""
        seen = 0
        for key, bucket in self._cells.items():
            for pid in bucket:
                pos = self._points.get(pid)
                if pos is None:
                    raise ContractViolationError(f"grid cell holds unknown id {pid}")
                if self._flat(self._cell_coords(pos)) != key:
                    raise ContractViolationError(f"point {pid} registered in the wrong cell")
                seen += 1
        if seen != len(self._points):
            raise ContractViolationError(
                f"grid holds {len(self._points)} points but cells list {seen}"
            )

    @classmethod
    def from_configuration(cls, cfg: Configuration, window: TorusWindow, r_cut: float) -> "CellGrid":
        grid = cls(window, r_cut)
        for pid, pos in zip(cfg.ids, cfg.positions):
            grid.insert(int(pid), pos)
        return grid

    def to_configuration(self) -> Configuration:
        """Snapshot of the grid contents, sorted by id."""
        if not self._points:
            return Configuration.empty(self.window.dimension)
        ids = sorted(self._points)
        positions = np.array([self._points[i] for i in ids], dtype=float)
        return Configuration(positions, np.array(ids, dtype=np.int64))
