"""Radial interaction kernels.

All kernels are radial functions on R^d: evaluating at an offset vector x
only looks at |x|.  Four families are supported:

* top-hat: constant height inside a radius, zero outside
* gaussian: height times exp(-r^2 / (2 l^2))
* exponential-decay: height times exp(-rate * r)
* tabulated: linear interpolation through a radial grid, zero past the grid

Each family reports its total mass over R^d, the mass inside a centred ball
(and hence the mass left in the tail), and an effective range beyond which
the kernel is negligible.  Parametric families use closed forms built from
gamma functions; the tabulated family integrates its piecewise-linear
profile segment by segment.  A kernel with non-positive or non-finite mass is
rejected at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc

from .errors import InvalidKernelError

__all__ = [
    "Kernel",
    "TopHatKernel",
    "GaussianKernel",
    "ExponentialKernel",
    "TabulatedKernel",
    "kernel_from_params",
    "kernel_from_dict",
    "ball_volume",
    "sphere_area",
]

# Profile values at or below this are treated as zero by default when locating
# the effective range used for neighbour searches.
DEFAULT_RANGE_TOLERANCE = 1e-12


def ball_volume(dimension: int, radius: float) -> float:
    """Volume of the d-dimensional ball of the given radius.

    Computed as surface(unit sphere) / d * r^d, which keeps the low
    dimensions exact (2r, pi r^2, 4/3 pi r^3) instead of picking up
    rounding noise from the gamma function.
    """
    d = dimension
    return sphere_area(d, 1.0) / d * radius**d


def sphere_area(dimension: int, radius: float) -> float:
    """Surface measure of the sphere of the given radius in d dimensions.

    For d=1 this is the counting measure of the two endpoints, i.e. 2.
    """
    d = dimension
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0) * radius ** (d - 1)


@dataclass(frozen=True)
class Kernel:
    """Base class for radial kernels.  Subclasses fill in the radial profile
    and the closed-form masses."""

    dimension: int

    def _validate_base(self) -> None:
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise InvalidKernelError(f"dimension must be a positive integer, got {self.dimension!r}")

    def _validate_mass(self) -> None:
        mass = self.total_mass()
        if not math.isfinite(mass) or mass <= 0.0:
            raise InvalidKernelError(f"kernel total mass must be positive and finite, got {mass!r}")

    # Radial profile. Scalar path is used in simulation inner loops, the array
    # path in estimators.

    def profile(self, r: float) -> float:
        raise NotImplementedError

    def profile_array(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, x) -> float:
        """Kernel value at an offset vector x (a scalar is accepted for d=1)."""
        r = offset_norm(x, self.dimension)
        return self.profile(r)

    # Masses.

    def total_mass(self) -> float:
        """Integral of the kernel over all of R^d."""
        raise NotImplementedError

    def mass_within(self, h: float) -> float:
        """Integral of the kernel over the centred ball of radius h >= 0."""
        raise NotImplementedError

    def tail_mass(self, h: float) -> float:
        """Twice the kernel mass outside the centred ball of radius h.

        Nonincreasing in h; equals twice the total mass at h=0.
        """
        if h < 0:
            raise InvalidKernelError(f"tail cutoff must be nonnegative, got {h}")
        return 2.0 * (self.total_mass() - self.mass_within(h))

    def effective_range(self, epsilon: float = DEFAULT_RANGE_TOLERANCE) -> float:
        """Smallest radius beyond which the profile stays at or below epsilon."""
        raise NotImplementedError

    # Serialization, used by scenario files and digests.

    def _params(self) -> dict:
        raise NotImplementedError

    def as_dict(self) -> dict:
        return {"family": self.family_name, "dimension": self.dimension, **self._params()}


def offset_norm(x, dimension: int) -> float:
    """Euclidean norm of an offset, accepting a bare scalar when d=1."""
    if np.isscalar(x):
        if dimension != 1:
            raise InvalidKernelError(f"scalar offset given for a {dimension}-dimensional kernel")
        return abs(float(x))
    arr = np.asarray(x, dtype=float)
    if arr.shape != (dimension,):
        raise InvalidKernelError(f"offset shape {arr.shape} does not match dimension {dimension}")
    return float(np.sqrt(np.sum(arr * arr)))


@dataclass(frozen=True)
class TopHatKernel(Kernel):
    """Constant height inside a closed ball of the given radius."""

    radius: float = 1.0
    height: float = 1.0

    family_name = "top_hat"

    def _params(self) -> dict:
        return {"radius": self.radius, "height": self.height}

    def __post_init__(self):
        self._validate_base()
        if self.radius <= 0 or not math.isfinite(self.radius):
            raise InvalidKernelError(f"top-hat radius must be positive, got {self.radius}")
        if self.height <= 0 or not math.isfinite(self.height):
            raise InvalidKernelError(f"top-hat height must be positive, got {self.height}")
        self._validate_mass()

    def profile(self, r: float) -> float:
        return self.height if r <= self.radius else 0.0

    def profile_array(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.radius, self.height, 0.0)

    def total_mass(self) -> float:
        return self.height * ball_volume(self.dimension, self.radius)

    def mass_within(self, h: float) -> float:
        return self.height * ball_volume(self.dimension, min(h, self.radius))

    def effective_range(self, epsilon: float = DEFAULT_RANGE_TOLERANCE) -> float:
        # The support boundary is exact for this family.
        return self.radius if self.height > epsilon else 0.0


@dataclass(frozen=True)
class GaussianKernel(Kernel):
    """height * exp(-r^2 / (2 length_scale^2))."""

    height: float = 1.0
    length_scale: float = 1.0

    family_name = "gaussian"

    def _params(self) -> dict:
        return {"height": self.height, "length_scale": self.length_scale}

    def __post_init__(self):
        self._validate_base()
        if self.height <= 0 or not math.isfinite(self.height):
            raise InvalidKernelError(f"gaussian height must be positive, got {self.height}")
        if self.length_scale <= 0 or not math.isfinite(self.length_scale):
            raise InvalidKernelError(f"gaussian length scale must be positive, got {self.length_scale}")
        self._validate_mass()

    def profile(self, r: float) -> float:
        z = r / self.length_scale
        return self.height * math.exp(-0.5 * z * z)

    def profile_array(self, r: np.ndarray) -> np.ndarray:
        z = np.asarray(r, dtype=float) / self.length_scale
        return self.height * np.exp(-0.5 * z * z)

    def total_mass(self) -> float:
        d = self.dimension
        return self.height * (2.0 * math.pi) ** (d / 2.0) * self.length_scale**d

    def mass_within(self, h: float) -> float:
        if h <= 0:
            return 0.0
        d = self.dimension
        # Radial integral reduces to a regularized lower incomplete gamma.
        z = 0.5 * (h / self.length_scale) ** 2
        return self.total_mass() * float(gammainc(d / 2.0, z))

    def effective_range(self, epsilon: float = DEFAULT_RANGE_TOLERANCE) -> float:
        if epsilon >= self.height:
            return 0.0
        return self.length_scale * math.sqrt(2.0 * math.log(self.height / epsilon))


@dataclass(frozen=True)
class ExponentialKernel(Kernel):
    """height * exp(-rate * r)."""

    height: float = 1.0
    rate: float = 1.0

    family_name = "exponential"

    def _params(self) -> dict:
        return {"height": self.height, "rate": self.rate}

    def __post_init__(self):
        self._validate_base()
        if self.height <= 0 or not math.isfinite(self.height):
            raise InvalidKernelError(f"exponential height must be positive, got {self.height}")
        if self.rate <= 0 or not math.isfinite(self.rate):
            raise InvalidKernelError(f"exponential rate must be positive, got {self.rate}")
        self._validate_mass()

    def profile(self, r: float) -> float:
        return self.height * math.exp(-self.rate * r)

    def profile_array(self, r: np.ndarray) -> np.ndarray:
        return self.height * np.exp(-self.rate * np.asarray(r, dtype=float))

    def total_mass(self) -> float:
        d = self.dimension
        return self.height * sphere_area(d, 1.0) * math.gamma(d) / self.rate**d

    def mass_within(self, h: float) -> float:
        if h <= 0:
            return 0.0
        return self.total_mass() * float(gammainc(self.dimension, self.rate * h))

    def effective_range(self, epsilon: float = DEFAULT_RANGE_TOLERANCE) -> float:
        if epsilon >= self.height:
            return 0.0
        return math.log(self.height / epsilon) / self.rate


@dataclass(frozen=True)
class TabulatedKernel(Kernel):
    """Piecewise-linear radial profile through (radius, value) samples.

    Values are held constant below the first grid radius and are zero past
    the last one.  Masses are exact: each linear segment times the
    sphere-area factor is a polynomial with a closed-form integral.
    """

    radii: tuple = field(default=())
    values: tuple = field(default=())

    family_name = "tabulated"

    def _params(self) -> dict:
        return {"radii": list(self.radii), "values": list(self.values)}

    def __post_init__(self):
        self._validate_base()
        radii = tuple(float(r) for r in np.asarray(self.radii, dtype=float).ravel())
        values = tuple(float(v) for v in np.asarray(self.values, dtype=float).ravel())
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)
        if len(radii) < 2 or len(radii) != len(values):
            raise InvalidKernelError("tabulated kernel needs matching radius/value grids of length >= 2")
        diffs = np.diff(radii)
        if radii[0] < 0 or np.any(diffs <= 0):
            raise InvalidKernelError("tabulated radii must be nonnegative and strictly increasing")
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise InvalidKernelError("tabulated values must be finite and nonnegative")
        self._validate_mass()

    def profile(self, r: float) -> float:
        return float(np.interp(r, self.radii, self.values, right=0.0))

    def profile_array(self, r: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(r, dtype=float), self.radii, self.values, right=0.0)

    def _segment_mass(self, lo: float, hi: float, v_lo: float, v_hi: float) -> float:
        # Exact integral of S_d r^(d-1) (a + b r) over [lo, hi] for the linear
        # piece through (lo, v_lo), (hi, v_hi).
        if hi <= lo:
            return 0.0
        d = self.dimension
        b = (v_hi - v_lo) / (hi - lo)
        a = v_lo - b * lo
        surf = sphere_area(d, 1.0)
        term_a = a * (hi**d - lo**d) / d
        term_b = b * (hi ** (d + 1) - lo ** (d + 1)) / (d + 1)
        return surf * (term_a + term_b)

    def _mass_up_to(self, upper: float) -> float:
        if upper <= 0:
            return 0.0
        total = self._segment_mass(0.0, min(upper, self.radii[0]), self.values[0], self.values[0])
        for r0, r1, v0, v1 in zip(self.radii, self.radii[1:], self.values, self.values[1:]):
            if upper <= r0:
                break
            hi = min(upper, r1)
            v_hi = v0 + (v1 - v0) * (hi - r0) / (r1 - r0)
            total += self._segment_mass(r0, hi, v0, v_hi)
        return total

    def total_mass(self) -> float:
        return self._mass_up_to(self.radii[-1])

    def mass_within(self, h: float) -> float:
        return self._mass_up_to(min(h, self.radii[-1]))

    def effective_range(self, epsilon: float = DEFAULT_RANGE_TOLERANCE) -> float:
        # Smallest grid radius past which every sample sits at or below
        # epsilon; linear interpolation cannot exceed its endpoints.
        last_above = -1
        for i, v in enumerate(self.values):
            if v > epsilon:
                last_above = i
        if last_above < 0:
            return 0.0
        return self.radii[last_above]


_FAMILIES = {
    "top_hat": TopHatKernel,
    "gaussian": GaussianKernel,
    "exponential": ExponentialKernel,
    "tabulated": TabulatedKernel,
}


def kernel_from_params(family: str, dimension: int, **params) -> Kernel:
    """Construct a kernel from a family name and keyword parameters.

    Family names accept hyphens or underscores; ``exponential_decay`` is an
    alias for ``exponential``.
    """
    key = family.strip().lower().replace("-", "_")
    if key == "exponential_decay":
        key = "exponential"
    if key not in _FAMILIES:
        raise InvalidKernelError(
            f"unknown kernel family {family!r}; expected one of {sorted(_FAMILIES)}"
        )
    try:
        return _FAMILIES[key](dimension=dimension, **params)
    except TypeError as exc:
        raise InvalidKernelError(f"bad parameters for kernel family {family!r}: {exc}") from exc


def kernel_from_dict(data: dict) -> Kernel:
    """Inverse of ``Kernel.as_dict``."""
    payload = dict(data)
    try:
        family = payload.pop("family")
        dimension = payload.pop("dimension")
    except KeyError as exc:
        raise InvalidKernelError(f"kernel dict is missing the {exc.args[0]!r} entry") from exc
    if str(family).strip().lower().replace("-", "_") == "tabulated":
        payload = {"radii": tuple(payload["radii"]), "values": tuple(payload["values"])}
    return kernel_from_params(family, dimension, **payload)
