"""Ambiguity volumes, coherent processing gains, worst/best-case
sidelobe-free ("clear region") area bounds, and empirical clear areas.

The bound formulas operate on raw (unnormalized) AF levels and volumes;
the report builder converts a unit-peak sidelobe level to the raw scale
before applying them.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .ambiguity import AFGrid, CrossAFStack
from .geometry import ArrayScenario, TargetParams, steering_r, steering_t
from .tb_core import TBMatrix

__all__ = [
    "Region",
    "ClearRegionReport",
    "coherent_gains",
    "af_volume",
    "stack_entry_volume",
    "vk_closed_form",
    "eta_limit_worst",
    "eta_limit_best",
    "bound_worst",
    "bound_best",
    "empirical_clear_area",
    "clear_region_report",
]

SELF_TRANSFORM_NOTE = (
    "Bounds follow the two limiting cases of the volume analysis; the "
    "general surface's self-transform can take negative values, so no "
    "exact bound exists and the reported interval brackets the true "
    "clear region."
)


@dataclass(frozen=True)
class Region:
    """Origin-centered convex centrosymmetric integration region."""

    shape: str
    half1: float
    half2: float

    def __post_init__(self):
        if self.shape not in ("rectangle", "ellipse"):
            raise ValueError("region shape must be 'rectangle' or 'ellipse'")
        if self.half1 <= 0 or self.half2 <= 0:
            raise ValueError("region half-extents must be positive")

    def mask(self, axis1: np.ndarray, axis2: np.ndarray) -> np.ndarray:
        a1 = axis1[:, None]
        a2 = axis2[None, :]
        if self.shape == "rectangle":
            return (np.abs(a1) <= self.half1) & (np.abs(a2) <= self.half2)
        return (a1 / self.half1) ** 2 + (a2 / self.half2) ** 2 <= 1.0

    @property
    def area(self) -> float:
        if self.shape == "rectangle":
            return 4.0 * self.half1 * self.half2
        return np.pi * self.half1 * self.half2


def coherent_gains(sc: ArrayScenario, tb: TBMatrix, target: TargetParams) -> np.ndarray:
    """Transmit coherent processing gains a_T^H(T) c_k for k = 1..K."""
    if tb.m != sc.m:
        raise ValueError("beamspace matrix rows must equal M")
    return steering_t(sc, target).conj() @ tb.c


def _cell_sizes(grid: AFGrid) -> tuple[float, float]:
    d1 = np.diff(grid.axis1)
    d2 = np.diff(grid.axis2)
    if not (np.allclose(d1, d1[0], rtol=1e-6) and np.allclose(d2, d2[0], rtol=1e-6)):
        raise ValueError("volume integration requires uniform axes")
    return float(d1[0]), float(d2[0])


def af_volume(grid: AFGrid, region: Region | None = None) -> float:
    """Riemann integral of a real AF grid over an origin-centered region
    (defaults to the full grid rectangle)."""
    if np.iscomplexobj(grid.values):
        raise ValueError("af_volume integrates real AF values")
    d1, d2 = _cell_sizes(grid)
    if region is None:
        return float(np.sum(grid.values) * d1 * d2)
    ext1 = max(abs(grid.axis1[0]), abs(grid.axis1[-1]))
    ext2 = max(abs(grid.axis2[0]), abs(grid.axis2[-1]))
    if region.half1 > ext1 + d1 / 2 or region.half2 > ext2 + d2 / 2:
        raise ValueError("region exceeds the grid extent")
    m = region.mask(grid.axis1, grid.axis2)
    return float(np.sum(grid.values[m]) * d1 * d2)


def stack_entry_volume(stack: CrossAFStack, j: int, k: int,
                       region: Region | None = None) -> float:
    """Integral of |cross-AF entry (j, k)|^2 over the region."""
    grid = AFGrid(axis1=stack.taus, axis2=stack.fds,
                  values=np.abs(stack.entries[j, k]) ** 2, kind="woodward-entry")
    return af_volume(grid, region)


def vk_closed_form(e: float, k: int, gains: np.ndarray, rho: float, v0: float) -> float:
    """Volume of the beamspace AF under the orthogonality conditions:
    (E/K) rho sum_k |gain_k|^2 V_0."""
    return (e / k) * rho * float(np.sum(np.abs(gains) ** 2)) * v0


def eta_limit_worst(v_k: float, rho: float, n: int, k: int) -> float:
    """Largest raw sidelobe level for which the worst-case bound holds."""
    return n * n * k * v_k / (4.0 * rho)


def eta_limit_best(v_k: float, rho: float, n: int) -> float:
    """Largest raw sidelobe level for which the best-case bound holds."""
    return n * n * v_k / (4.0 * rho)


def bound_worst(v_k: float, rho: float, n: int, k: int, eta: float) -> float | None:
    """Worst-case clear-region area bound 4 V_K / (N^2 K V_K / rho - 4 eta).

    Returns None when eta violates the validity precondition.
    """
    if not eta < eta_limit_worst(v_k, rho, n, k):
        return None
    return 4.0 * v_k / (n * n * k * v_k / rho - 4.0 * eta)


def bound_best(v_k: float, rho: float, n: int, eta: float) -> float | None:
    """Best-case clear-region area bound 4 V_K / (N^2 V_K / rho - 4 eta);
    independent of the number of waveforms."""
    if not eta < eta_limit_best(v_k, rho, n):
        return None
    return 4.0 * v_k / (n * n * v_k / rho - 4.0 * eta)


def _origin_indices(grid: AFGrid) -> tuple[int, int]:
    return grid.index_of(1, 0.0), grid.index_of(2, 0.0)


def empirical_clear_area(grid: AFGrid, eta: float,
                         shape: str = "rectangle") -> float:
    """Area of the largest origin-centered region of the given shape
    whose cells all sit at or below ``eta`` on a unit-peak grid.

    The contiguous above-eta component containing the origin counts as
    the mainlobe and never disqualifies a candidate region.
    """
    if np.iscomplexobj(grid.values):
        raise ValueError("empirical areas need a real unit-peak grid")
    if grid.normalization != "unit-peak":
        raise ValueError("normalize the grid to unit peak first")
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    if shape not in ("rectangle", "ellipse"):
        raise ValueError("shape must be 'rectangle' or 'ellipse'")

    d1, d2 = _cell_sizes(grid)
    i0, j0 = _origin_indices(grid)
    bad = grid.values > eta
    if bad[i0, j0]:
        labels, _ = ndimage.label(bad)
        bad = bad & (labels != labels[i0, j0])

    max_a = min(i0, grid.axis1.size - 1 - i0)
    max_b = min(j0, grid.axis2.size - 1 - j0)
    if shape == "rectangle":
        # Cumulative counts of disqualified cells allow O(1) window tests.
        csum = np.cumsum(np.cumsum(bad.astype(np.int64), axis=0), axis=1)

        def bad_in(a, b):
            r0, r1 = i0 - a, i0 + a
            c0, c1 = j0 - b, j0 + b
            total = csum[r1, c1]
            if r0 > 0:
                total -= csum[r0 - 1, c1]
            if c0 > 0:
                total -= csum[r1, c0 - 1]
            if r0 > 0 and c0 > 0:
                total += csum[r0 - 1, c0 - 1]
            return total > 0

        best = 0.0
        b = max_b
        for a in range(max_a + 1):
            while b >= 0 and bad_in(a, b):
                b -= 1
            if b < 0:
                break
            best = max(best, (2 * a * d1) * (2 * b * d2))
        return best

    # Ellipse: for each semi-axis along axis1, the tightest semi-axis
    # along axis2 allowed by the disqualified cells strictly inside.
    bi, bj = np.nonzero(bad)
    x = np.abs((bi - i0) * d1)
    y = np.abs((bj - j0) * d2)
    best = 0.0
    for a_cells in range(1, max_a + 1):
        alpha = a_cells * d1
        beta = max_b * d2
        inside = x < alpha
        if np.any(inside):
            lim = y[inside] / np.sqrt(1.0 - (x[inside] / alpha) ** 2)
            beta = min(beta, float(np.min(lim)))
        if beta <= 0:
            continue
        best = max(best, np.pi * alpha * beta)
    return best


@dataclass(frozen=True)
class ClearRegionReport:
    """Volumes, gains, bounds, and the measured eta-clear area."""

    v_0: float
    v_k: float
    gains: np.ndarray
    rho: float
    eta: float
    eta_raw: float
    bound_worst: float | None
    bound_best: float | None
    eta_valid_worst: bool
    eta_valid_best: bool
    empirical_area: float
    measured_volume: float
    cross_auto_ratio: float
    approximate: bool
    shape: str
    note: str = SELF_TRANSFORM_NOTE


def clear_region_report(grid: AFGrid, stack: CrossAFStack, sc: ArrayScenario,
                        tb: TBMatrix, target: TargetParams, eta: float,
                        e: float, region: Region | None = None,
                        shape: str = "rectangle") -> ClearRegionReport:
    """Assemble the clear-region analysis for one AF surface.

    ``grid`` must be the raw delay-Doppler surface; ``eta`` is a level
    on the unit-peak surface and is rescaled by the raw peak before the
    bound formulas apply; ``e`` is the total transmit energy of the
    waveform set behind the surface. Bounds are flagged approximate
    whenever the waveform set's cross-AF volumes exceed 5% of the
    auto-AF volumes, since the closed-form volume assumes they vanish.
    """
    if grid.normalization != "raw":
        raise ValueError("clear-region reports start from the raw surface")
    k = stack.k
    auto = [stack_entry_volume(stack, j, j, region) for j in range(k)]
    cross = [stack_entry_volume(stack, j, i, region)
             for j in range(k) for i in range(k) if i != j]
    v_0 = float(np.mean(auto))
    ratio = max(cross) / min(auto) if cross else 0.0

    gains = coherent_gains(sc, tb, target)
    a_r = steering_r(sc, target)
    rho = float(np.abs(np.vdot(a_r, a_r)) ** 2)
    v_k = vk_closed_form(e, k, gains, rho, v_0)

    peak = float(np.max(grid.values))
    eta_raw = eta * peak
    bw = bound_worst(v_k, rho, sc.n, k, eta_raw)
    bb = bound_best(v_k, rho, sc.n, eta_raw)
    area = empirical_clear_area(grid.normalized(), eta, shape=shape)
    return ClearRegionReport(
        v_0=v_0,
        v_k=v_k,
        gains=gains,
        rho=rho,
        eta=eta,
        eta_raw=eta_raw,
        bound_worst=bw,
        bound_best=bb,
        eta_valid_worst=bw is not None,
        eta_valid_best=bb is not None,
        empirical_area=area,
        measured_volume=af_volume(grid, region),
        cross_auto_ratio=float(ratio),
        approximate=bool(ratio > 0.05),
        shape=shape,
    )
