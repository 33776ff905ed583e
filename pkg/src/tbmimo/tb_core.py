"""Beamspace MIMO ambiguity surfaces and their phased-array /
traditional-MIMO reductions, plus cut extraction.

Surface value at a sweep point (d_tau, d_fd):

    chi = (E/K) |a_R^H(T) a_R(T')|^2 |a_T^H(T) C X(d_tau, d_fd) a_TE(T')|^2

where X is the K x K cross-ambiguity matrix of the waveforms and the
swept hypothesis T' has delay tau + d_tau and Doppler f_d - d_fd (the
grid's Doppler mismatch is actual minus hypothesis; its delay mismatch
is hypothesis minus actual, which keeps the factored surface identical
to the coherent-sum matched-filter simulation).
"""

from dataclasses import dataclass, field

import numpy as np

from .ambiguity import AFGrid, kernel_slice
from .geometry import ArrayScenario, TargetParams, steering_r, steering_t, steering_te
from .waveforms import WaveformSet

__all__ = [
    "TBMatrix",
    "AFQuery",
    "CutSeries",
    "delay_doppler_query",
    "angle_doppler_query",
    "tb_af",
    "mimo_af",
    "pa_af",
    "square_summation_af",
    "cuts",
    "peak_sidelobe_db",
    "DB_FLOOR",
]

DB_FLOOR = -120.0


@dataclass(frozen=True)
class TBMatrix:
    """M x K complex beamspace matrix mapping waveforms to elements."""

    c: np.ndarray
    provenance: str = field(default="custom", compare=False)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.c, dtype=np.complex128))
        if not np.all(np.isfinite(c)):
            raise ValueError("beamspace matrix must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.c.shape[0]

    @property
    def k(self) -> int:
        return self.c.shape[1]

    @classmethod
    def identity(cls, m: int) -> "TBMatrix":
        return cls(c=np.eye(m, dtype=np.complex128), provenance="identity")

    @classmethod
    def pa_weight(cls, w: np.ndarray) -> "TBMatrix":
        w = np.asarray(w, dtype=np.complex128).reshape(-1, 1)
        return cls(c=w, provenance="pa-weight")


@dataclass(frozen=True)
class AFQuery:
    """Fixed target plus a 2-D mismatch sweep.

    ``kind`` selects the sweep: ``delay-doppler`` sweeps (d_tau, d_fd)
    at the target's angle; ``angle-doppler`` sweeps hypothesis angles
    against d_fd at zero delay mismatch.
    """

    target: TargetParams
    kind: str
    axis1: np.ndarray
    axis2: np.ndarray

    def __post_init__(self):
        if self.kind not in ("delay-doppler", "angle-doppler"):
            raise ValueError(f"unknown sweep kind {self.kind!r}")
        a1 = np.asarray(self.axis1, dtype=np.float64)
        a2 = np.asarray(self.axis2, dtype=np.float64)
        if a1.size == 0 or a2.size == 0:
            raise ValueError("sweep axes must be nonempty")
        if np.any(np.diff(a1) <= 0) or np.any(np.diff(a2) <= 0):
            raise ValueError("sweep axes must be strictly increasing")
        object.__setattr__(self, "axis1", a1)
        object.__setattr__(self, "axis2", a2)


def delay_doppler_query(target: TargetParams, taus: np.ndarray,
                        fds: np.ndarray) -> AFQuery:
    return AFQuery(target=target, kind="delay-doppler", axis1=taus, axis2=fds)


def angle_doppler_query(target: TargetParams, thetas: np.ndarray,
                        fds: np.ndarray) -> AFQuery:
    return AFQuery(target=target, kind="angle-doppler", axis1=thetas, axis2=fds)


def _hypothesis(target: TargetParams, d_fd: float, theta: float | None = None,
                d_tau: float = 0.0) -> TargetParams:
    return TargetParams(
        theta=target.theta if theta is None else theta,
        f_d=target.f_d - d_fd,
        tau=target.tau + d_tau,
    )


def _receive_steering_grid(sc: ArrayScenario, positions: np.ndarray,
                           thetas: np.ndarray, f_d: float) -> np.ndarray:
    """Steering vectors over many angles at one Doppler; (n_theta, n_elem)."""
    f_prime = sc.f_c + f_d
    u = np.stack([np.sin(thetas), np.cos(thetas), np.zeros_like(thetas)], axis=1)
    return np.exp(-2j * np.pi * f_prime / sc.c * (u @ positions.T))


def tb_af(sc: ArrayScenario, ws: WaveformSet, tb: TBMatrix, query: AFQuery,
          normalize: bool = False) -> AFGrid:
    """Beamspace MIMO ambiguity surface over the query sweep.

    Requires dimensional consistency (tb is M x K for the scenario's M
    and the waveform set's K) and scenario phase centers for the K
    beams.
    """
    if tb.m != sc.m:
        raise ValueError(f"beamspace matrix has {tb.m} rows, scenario has M={sc.m}")
    if tb.k != ws.k:
        raise ValueError(f"beamspace matrix has {tb.k} columns, waveform set has K={ws.k}")
    if sc.q_te is None:
        raise ValueError("scenario needs equivalent transmit phase centers")
    if sc.q_te.shape[0] != ws.k:
        raise ValueError("number of phase centers must equal K")

    target = query.target
    a_t = steering_t(sc, target)
    a_r = steering_r(sc, target)
    g = a_t.conj() @ tb.c  # row vector a_T^H C
    scale = ws.e / ws.k

    if query.kind == "delay-doppler":
        idx = np.round(query.axis1 * ws.f_s).astype(int)
        values = np.empty((query.axis1.size, query.axis2.size))
        for q, d_fd in enumerate(query.axis2):
            hyp = _hypothesis(target, d_fd)
            rho = np.abs(np.vdot(a_r, steering_r(sc, hyp))) ** 2
            chi = kernel_slice(ws.samples, ws.f_s, idx, d_fd)
            inner = np.einsum("k,kit,i->t", g, chi, steering_te(sc, hyp))
            values[:, q] = scale * rho * np.abs(inner) ** 2
        grid = AFGrid(axis1=idx / ws.f_s, axis2=query.axis2, values=values,
                      kind="tb-af")
    else:
        thetas = query.axis1
        zero = np.zeros(1, dtype=int)
        values = np.empty((thetas.size, query.axis2.size))
        for q, d_fd in enumerate(query.axis2):
            f_hyp = target.f_d - d_fd
            chi0 = kernel_slice(ws.samples, ws.f_s, zero, d_fd)[:, :, 0]
            gm = g @ chi0  # (K,)
            a_te_grid = _receive_steering_grid(sc, sc.q_te, thetas, f_hyp)
            a_r_grid = _receive_steering_grid(sc, sc.q_r, thetas, f_hyp)
            rho = np.abs(a_r_grid @ a_r.conj()) ** 2
            inner = a_te_grid @ gm
            values[:, q] = scale * rho * np.abs(inner) ** 2
        grid = AFGrid(axis1=thetas, axis2=query.axis2, values=values,
                      kind="tb-af", axis1_name="angle_rad")
    return grid.normalized() if normalize else grid


def mimo_af(sc: ArrayScenario, ws: WaveformSet, query: AFQuery,
            normalize: bool = False) -> AFGrid:
    """Traditional MIMO ambiguity: every element emits its own waveform,
    phase centers are the element positions; magnitude factor E/M.
    """
    if ws.k != sc.m:
        raise ValueError("traditional MIMO needs K == M")
    target = query.target
    a_t = steering_t(sc, target)
    a_r = steering_r(sc, target)
    scale = ws.e / sc.m

    if query.kind == "delay-doppler":
        idx = np.round(query.axis1 * ws.f_s).astype(int)
        values = np.empty((query.axis1.size, query.axis2.size))
        for q, d_fd in enumerate(query.axis2):
            hyp = _hypothesis(target, d_fd)
            rho = np.abs(np.vdot(a_r, steering_r(sc, hyp))) ** 2
            chi = kernel_slice(ws.samples, ws.f_s, idx, d_fd)
            inner = np.einsum("k,kit,i->t", a_t.conj(), chi, steering_t(sc, hyp))
            values[:, q] = scale * rho * np.abs(inner) ** 2
        grid = AFGrid(axis1=idx / ws.f_s, axis2=query.axis2, values=values,
                      kind="mimo-af")
    else:
        thetas = query.axis1
        zero = np.zeros(1, dtype=int)
        values = np.empty((thetas.size, query.axis2.size))
        for q, d_fd in enumerate(query.axis2):
            f_hyp = target.f_d - d_fd
            chi0 = kernel_slice(ws.samples, ws.f_s, zero, d_fd)[:, :, 0]
            gm = a_t.conj() @ chi0
            a_t_grid = _receive_steering_grid(sc, sc.q_t, thetas, f_hyp)
            a_r_grid = _receive_steering_grid(sc, sc.q_r, thetas, f_hyp)
            rho = np.abs(a_r_grid @ a_r.conj()) ** 2
            values[:, q] = scale * rho * np.abs(a_t_grid @ gm) ** 2
        grid = AFGrid(axis1=thetas, axis2=query.axis2, values=values,
                      kind="mimo-af", axis1_name="angle_rad")
    return grid.normalized() if normalize else grid


def pa_af(sc: ArrayScenario, ws: WaveformSet, w: np.ndarray, query: AFQuery,
          normalize: bool = False) -> AFGrid:
    """Phased-array ambiguity: one waveform through beamforming weights w,
    chi = E |a_R^H a_R'|^2 |a_T^H(T) w|^2 |X(d_tau, d_fd)|^2.
    """
    if ws.k != 1:
        raise ValueError("phased-array mode needs a single waveform (K == 1)")
    w = np.asarray(w, dtype=np.complex128).reshape(-1)
    if w.size != sc.m:
        raise ValueError("weight vector length must equal M")
    target = query.target
    a_t = steering_t(sc, target)
    a_r = steering_r(sc, target)
    gain = a_t.conj() @ w

    if query.kind == "delay-doppler":
        idx = np.round(query.axis1 * ws.f_s).astype(int)
        values = np.empty((query.axis1.size, query.axis2.size))
        for q, d_fd in enumerate(query.axis2):
            hyp = _hypothesis(target, d_fd)
            rho = np.abs(np.vdot(a_r, steering_r(sc, hyp))) ** 2
            chi = kernel_slice(ws.samples, ws.f_s, idx, d_fd)[0, 0]
            values[:, q] = ws.e * rho * np.abs(gain * chi) ** 2
        grid = AFGrid(axis1=idx / ws.f_s, axis2=query.axis2, values=values,
                      kind="pa-af")
    else:
        thetas = query.axis1
        zero = np.zeros(1, dtype=int)
        values = np.empty((thetas.size, query.axis2.size))
        for q, d_fd in enumerate(query.axis2):
            f_hyp = target.f_d - d_fd
            chi0 = kernel_slice(ws.samples, ws.f_s, zero, d_fd)[0, 0, 0]
            a_r_grid = _receive_steering_grid(sc, sc.q_r, thetas, f_hyp)
            rho = np.abs(a_r_grid @ a_r.conj()) ** 2
            values[:, q] = ws.e * rho * np.abs(gain * chi0) ** 2
        grid = AFGrid(axis1=thetas, axis2=query.axis2, values=values,
                      kind="pa-af", axis1_name="angle_rad")
    return grid.normalized() if normalize else grid


def square_summation_af(sc: ArrayScenario, ws: WaveformSet, query: AFQuery,
                        normalize: bool = False) -> AFGrid:
    """Comparison metric: sum of squared per-pair matched outputs,
    (E/K) N sum_{j,i} |X_ji|^2. No coherent cross-pair terms and no
    phase-shift windowing, so only delay-Doppler sweeps are meaningful.
    """
    if query.kind != "delay-doppler":
        raise ValueError("square-summation metric carries no angle structure")
    idx = np.round(query.axis1 * ws.f_s).astype(int)
    scale = (ws.e / ws.k) * sc.n
    values = np.empty((query.axis1.size, query.axis2.size))
    for q, d_fd in enumerate(query.axis2):
        chi = kernel_slice(ws.samples, ws.f_s, idx, d_fd)
        values[:, q] = scale * np.sum(np.abs(chi) ** 2, axis=(0, 1))
    grid = AFGrid(axis1=idx / ws.f_s, axis2=query.axis2, values=values,
                  kind="sqsum-af")
    return grid.normalized() if normalize else grid


@dataclass(frozen=True)
class CutSeries:
    """1-D slice of an AF surface with dB values relative to the grid peak."""

    axis: np.ndarray
    values: np.ndarray
    values_db: np.ndarray
    which: str
    axis_name: str


def cuts(grid: AFGrid, which, db_floor: float | None = None) -> CutSeries:
    """Extract a row/column of a real AF grid.

    ``which`` is ``"zero-delay"``, ``"zero-doppler"`` or a pair
    ``(axis, value)`` selecting a custom on-grid cut. Values are
    reported in dB relative to the grid peak, optionally clamped at
    ``db_floor``.
    """
    if np.iscomplexobj(grid.values):
        raise ValueError("cuts require a real-valued AF grid")
    if which == "zero-delay":
        which_axis, value = 1, 0.0
    elif which == "zero-doppler":
        which_axis, value = 2, 0.0
    else:
        which_axis, value = which
    idx = grid.index_of(which_axis, value)
    if which_axis == 1:
        series = grid.values[idx, :]
        axis, axis_name = grid.axis2, grid.axis2_name
    else:
        series = grid.values[:, idx]
        axis, axis_name = grid.axis1, grid.axis1_name
    peak = np.max(grid.values)
    if peak <= 0:
        raise ValueError("grid peak must be positive for dB conversion")
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(series / peak)
    if db_floor is not None:
        db = np.maximum(db, db_floor)
    label = which if isinstance(which, str) else f"axis{which_axis}={value}"
    return CutSeries(axis=axis, values=series, values_db=db, which=label,
                     axis_name=axis_name)


def peak_sidelobe_db(cut: CutSeries, window: tuple[float, float] | None = None) -> float:
    """Peak sidelobe of a cut in dB relative to the grid peak.

    The mainlobe is the contiguous region around the cut's maximum out
    to the first local minimum on each side; the sidelobe search can be
    restricted to an axis window.
    """
    v = cut.values
    i_peak = int(np.argmax(v))
    lo = i_peak
    while lo > 0 and v[lo - 1] < v[lo]:
        lo -= 1
    hi = i_peak
    while hi < v.size - 1 and v[hi + 1] < v[hi]:
        hi += 1
    mask = np.ones(v.size, dtype=bool)
    mask[lo:hi + 1] = False
    if window is not None:
        mask &= (cut.axis >= window[0]) & (cut.axis <= window[1])
    if not np.any(mask):
        raise ValueError("no sidelobe samples left after mainlobe exclusion")
    return float(np.max(cut.values_db[mask]))
