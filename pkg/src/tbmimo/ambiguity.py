"""Woodward auto-ambiguity and the K x K cross-ambiguity matrix on
sampled delay-Doppler grids.

Delays are snapped to the sample grid (resolution 1/f_s); values beyond
the pulse support are zero. The integration measure dt = 1/f_s makes the
zero-delay zero-Doppler value of a unit-energy waveform exactly one.
Evaluation modulates the waveform per Doppler bin and correlates over
delay via FFT.
"""

from dataclasses import dataclass, field

import numpy as np

from .waveforms import WaveformSet

__all__ = [
    "AFGrid",
    "CrossAFStack",
    "woodward",
    "cross_af_matrix",
    "eval_at",
    "default_delay_axis",
    "default_doppler_axis",
    "full_support_axes",
    "kernel_slice",
]


@dataclass(frozen=True)
class AFGrid:
    """Sampled ambiguity surface over a 2-D axis pair.

    ``axis1`` is delay in seconds (or angle in radians for angle-Doppler
    surfaces), ``axis2`` is Doppler in Hz. ``values`` has shape
    (len(axis1), len(axis2)).
    """

    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    kind: str
    normalization: str = "raw"
    axis1_name: str = field(default="delay_s", compare=False)
    axis2_name: str = field(default="doppler_hz", compare=False)

    def __post_init__(self):
        a1 = np.asarray(self.axis1, dtype=np.float64)
        a2 = np.asarray(self.axis2, dtype=np.float64)
        v = np.asarray(self.values)
        if a1.ndim != 1 or a2.ndim != 1:
            raise ValueError("axes must be 1-D")
        if np.any(np.diff(a1) <= 0) or np.any(np.diff(a2) <= 0):
            raise ValueError("axes must be strictly increasing")
        if v.shape != (a1.size, a2.size):
            raise ValueError("values shape must match the axes")
        for name, arr in (("axis1", a1), ("axis2", a2), ("values", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def normalized(self) -> "AFGrid":
        """Scale so the maximum magnitude is exactly one."""
        peak = np.max(np.abs(self.values))
        if peak == 0:
            raise ValueError("cannot normalize an all-zero grid")
        return AFGrid(
            axis1=self.axis1,
            axis2=self.axis2,
            values=self.values / peak,
            kind=self.kind,
            normalization="unit-peak",
            axis1_name=self.axis1_name,
            axis2_name=self.axis2_name,
        )

    def index_of(self, axis: int, value: float, tol: float = 1e-9) -> int:
        """Index of an axis sample equal to ``value`` within ``tol``."""
        ax = self.axis1 if axis == 1 else self.axis2
        idx = int(np.argmin(np.abs(ax - value)))
        scale = max(1.0, np.max(np.abs(ax)))
        if abs(ax[idx] - value) > tol * scale:
            raise ValueError(f"value {value} is not on axis{axis}")
        return idx


@dataclass(frozen=True)
class CrossAFStack:
    """K x K cross-ambiguity entries sharing one delay-Doppler grid.

    ``entries[j, k]`` is the cross-AF of waveform j against reference
    waveform k, sampled on (taus, fds).
    """

    entries: np.ndarray
    taus: np.ndarray
    fds: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.complex128)
        taus = np.asarray(self.taus, dtype=np.float64)
        fds = np.asarray(self.fds, dtype=np.float64)
        if e.ndim != 4 or e.shape[0] != e.shape[1]:
            raise ValueError("entries must have shape (K, K, n_tau, n_fd)")
        if e.shape[2:] != (taus.size, fds.size):
            raise ValueError("entries grid must match the axes")
        if np.any(np.diff(taus) <= 0) or np.any(np.diff(fds) <= 0):
            raise ValueError("axes must be strictly increasing")
        for name, arr in (("entries", e), ("taus", taus), ("fds", fds)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    def entry_grid(self, j: int, k: int, kind: str = "woodward-entry") -> AFGrid:
        return AFGrid(axis1=self.taus, axis2=self.fds,
                      values=self.entries[j, k], kind=kind)


def _delay_indices(taus: np.ndarray, f_s: float) -> np.ndarray:
    return np.round(np.asarray(taus, dtype=np.float64) * f_s).astype(int)


def kernel_slice(samples: np.ndarray, f_s: float, delay_idx: np.ndarray,
                 f_d: float) -> np.ndarray:
    """Cross-AF matrix at one Doppler for integer sample delays.

    Returns a (K, K, n_delay) array with entry (j, k, d) equal to
    sum_n phi_j[n] conj(phi_k[n - d]) exp(j 2 pi f_d n / f_s) / f_s.
    """
    k_count, length = samples.shape
    nfft = 2 * length
    n = np.arange(length)
    mod = samples * np.exp(2j * np.pi * f_d * n / f_s)
    z_mod = np.fft.fft(mod, n=nfft, axis=1)
    z_ref = np.conj(np.fft.fft(samples, n=nfft, axis=1))
    corr = np.fft.ifft(z_mod[:, None, :] * z_ref[None, :, :], axis=2) / f_s
    out = np.zeros((k_count, k_count, delay_idx.size), dtype=np.complex128)
    inside = np.abs(delay_idx) < length
    out[:, :, inside] = corr[:, :, delay_idx[inside] % nfft]
    return out


def cross_af_matrix(ws: WaveformSet, taus: np.ndarray, fds: np.ndarray) -> CrossAFStack:
    """Sample the K x K cross-ambiguity matrix of a waveform set.

    Parameters
    ----------
    ws : WaveformSet
    taus : array of delays in seconds; snapped to multiples of 1/f_s.
    fds : array of Doppler shifts in Hz.
    """
    taus = np.asarray(taus, dtype=np.float64)
    fds = np.asarray(fds, dtype=np.float64)
    idx = _delay_indices(taus, ws.f_s)
    k = ws.k
    entries = np.empty((k, k, taus.size, fds.size), dtype=np.complex128)
    for q, f_d in enumerate(fds):
        entries[:, :, :, q] = kernel_slice(ws.samples, ws.f_s, idx, f_d)
    return CrossAFStack(entries=entries, taus=idx / ws.f_s, fds=fds)


def woodward(u: np.ndarray, taus: np.ndarray, fds: np.ndarray, f_s: float) -> AFGrid:
    """Woodward ambiguity of one waveform row on a delay-Doppler grid."""
    u = np.atleast_2d(np.asarray(u, dtype=np.complex128))
    if u.shape[0] != 1:
        raise ValueError("woodward takes a single waveform row")
    taus = np.asarray(taus, dtype=np.float64)
    fds = np.asarray(fds, dtype=np.float64)
    idx = _delay_indices(taus, f_s)
    values = np.empty((taus.size, fds.size), dtype=np.complex128)
    for q, f_d in enumerate(fds):
        values[:, q] = kernel_slice(u, f_s, idx, f_d)[0, 0]
    return AFGrid(axis1=idx / f_s, axis2=fds, values=values, kind="woodward-entry")


def eval_at(stack: CrossAFStack, d_tau: float, d_fd: float) -> np.ndarray:
    """Bilinear interpolation of every stack entry at one point.

    Exact when the point lies on grid nodes. Raises on points outside
    the grid extent.
    """
    out = np.empty((stack.k, stack.k), dtype=np.complex128)
    _interp_into(stack, d_tau, d_fd, out)
    return out


def _interp_into(stack: CrossAFStack, d_tau: float, d_fd: float, out: np.ndarray):
    taus, fds = stack.taus, stack.fds
    if not (taus[0] <= d_tau <= taus[-1]) or not (fds[0] <= d_fd <= fds[-1]):
        raise ValueError(f"point ({d_tau}, {d_fd}) outside the stack grid")

    def bracket(ax, x):
        hi = int(np.searchsorted(ax, x))
        if hi == 0:
            return 0, 0, 0.0
        if hi >= ax.size:
            return ax.size - 1, ax.size - 1, 0.0
        lo = hi - 1
        w = (x - ax[lo]) / (ax[hi] - ax[lo])
        return lo, hi, w

    i0, i1, wt = bracket(taus, d_tau)
    j0, j1, wf = bracket(fds, d_fd)
    e = stack.entries
    out[:] = (
        (1 - wt) * (1 - wf) * e[:, :, i0, j0]
        + wt * (1 - wf) * e[:, :, i1, j0]
        + (1 - wt) * wf * e[:, :, i0, j1]
        + wt * wf * e[:, :, i1, j1]
    )


def default_delay_axis(ws: WaveformSet, span: float | None = None) -> np.ndarray:
    """Delay axis on multiples of 1/f_s covering +-span (default +-T_p)."""
    if span is None:
        d_max = ws.n_samples - 1
    else:
        d_max = min(int(round(abs(span) * ws.f_s)), ws.n_samples - 1)
    return np.arange(-d_max, d_max + 1) / ws.f_s


def default_doppler_axis(ws: WaveformSet, span: float | None = None,
                         count: int = 257) -> np.ndarray:
    """Symmetric Doppler axis containing zero; default span +-2/T_p."""
    if count < 3 or count % 2 == 0:
        raise ValueError("count must be odd and >= 3 so the axis contains 0")
    half = 2.0 / ws.t_p if span is None else abs(span)
    return np.linspace(-half, half, count)


def full_support_axes(ws: WaveformSet) -> tuple[np.ndarray, np.ndarray]:
    """Axes covering the full ambiguity support: every delay lag and one
    full Doppler period of width f_s sampled at f_s / (2 L). A Riemann
    sum of |auto-AF|^2 over this grid reproduces the squared energy
    exactly (discrete Parseval), which backs the volume-invariance
    checks.
    """
    length = ws.n_samples
    taus = np.arange(-(length - 1), length) / ws.f_s
    n_fd = 2 * length
    fds = (np.arange(n_fd) - n_fd // 2) * (ws.f_s / n_fd)
    return taus, fds
