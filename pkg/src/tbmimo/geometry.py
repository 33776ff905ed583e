"""Array scenarios, target parameterization, and steering vectors.

Coordinates are 3-D Cartesian in meters. Planar spatial angles are
measured from broadside of an x-axis array: the unit direction toward a
target at angle theta is u = (sin(theta), cos(theta), 0), so theta = 0
gives a direction orthogonal to the array axis.
"""

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "SPEED_OF_LIGHT",
    "ArrayScenario",
    "TargetParams",
    "ula",
    "set_phase_centers",
    "centroid_phase_centers",
    "virtual_ula_phase_centers",
    "steering_t",
    "steering_r",
    "steering_te",
]

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class TargetParams:
    """Spatial angle (rad, x-y plane), Doppler shift (Hz), reference delay (s)."""

    theta: float
    f_d: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.theta) and np.isfinite(self.f_d) and np.isfinite(self.tau)):
            raise ValueError("target parameters must be finite")

    def direction(self) -> np.ndarray:
        """Unit direction from the array toward the target."""
        return np.array([np.sin(self.theta), np.cos(self.theta), 0.0])


@dataclass(frozen=True)
class ArrayScenario:
    """Colocated transmit/receive arrays plus equivalent transmit phase centers.

    Attributes
    ----------
    q_t : ndarray, shape (M, 3)
        Transmit element positions in meters.
    q_r : ndarray, shape (N, 3)
        Receive element positions in meters.
    f_c : float
        Carrier frequency in Hz.
    q_te : ndarray, shape (K, 3) or None
        Equivalent transmit phase centers, one per waveform/beam.
    c : float
        Propagation speed in m/s.
    """

    q_t: np.ndarray
    q_r: np.ndarray
    f_c: float
    q_te: np.ndarray | None = None
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        for name in ("q_t", "q_r", "q_te"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.atleast_2d(np.asarray(arr, dtype=np.float64))
            if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
                raise ValueError(f"{name} must be an (n, 3) position array")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite positions")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.f_c <= 0:
            raise ValueError("f_c must be positive")

    @property
    def m(self) -> int:
        return self.q_t.shape[0]

    @property
    def n(self) -> int:
        return self.q_r.shape[0]

    @property
    def k_beams(self) -> int | None:
        return None if self.q_te is None else self.q_te.shape[0]

    @property
    def wavelength(self) -> float:
        return self.c / self.f_c


def ula(m: int, n: int, f_c: float, spacing: float | None = None,
        c: float = SPEED_OF_LIGHT) -> ArrayScenario:
    """Half-wavelength uniform linear arrays on the x-axis, centered at
    the origin. Phase centers are left unset.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    d = (c / f_c) / 2.0 if spacing is None else spacing
    def line(count):
        x = (np.arange(count) - (count - 1) / 2.0) * d
        pos = np.zeros((count, 3))
        pos[:, 0] = x
        return pos
    return ArrayScenario(q_t=line(m), q_r=line(n), f_c=f_c, c=c)


def set_phase_centers(sc: ArrayScenario, mode: str, payload=None) -> ArrayScenario:
    """Return a scenario with equivalent transmit phase centers populated.

    Modes
    -----
    ``element-positions``
        One center per transmit element (K = M); traditional MIMO
        processing.
    ``reference-element``
        The single first transmit element (K = 1); phased-array
        processing.
    ``subarray-centers``
        ``payload`` is a sequence of index groups; center k is the mean
        position of group k.
    ``explicit``
        ``payload`` is a (K, 3) array stored verbatim.
    """
    if mode == "element-positions":
        q_te = sc.q_t.copy()
    elif mode == "reference-element":
        q_te = sc.q_t[:1].copy()
    elif mode == "subarray-centers":
        if payload is None:
            raise ValueError("subarray-centers mode needs index groups")
        groups = [np.asarray(g, dtype=int) for g in payload]
        if any(g.size == 0 or g.min() < 0 or g.max() >= sc.m for g in groups):
            raise ValueError("subarray index group out of range")
        q_te = np.stack([sc.q_t[g].mean(axis=0) for g in groups])
    elif mode == "explicit":
        if payload is None:
            raise ValueError("explicit mode needs a (K, 3) position array")
        q_te = np.atleast_2d(np.asarray(payload, dtype=np.float64))
        if q_te.shape[1] != 3:
            raise ValueError("explicit phase centers must be (K, 3)")
    else:
        raise ValueError(f"unknown phase-center mode: {mode!r}")
    return replace(sc, q_te=q_te)


def centroid_phase_centers(sc: ArrayScenario, c_matrix: np.ndarray) -> np.ndarray:
    """Magnitude-weighted centroid of the transmit elements per beam:
    center k = sum_m |c_mk|^2 q_t[m] / sum_m |c_mk|^2.
    """
    w = np.abs(np.asarray(c_matrix)) ** 2
    if w.shape[0] != sc.m:
        raise ValueError("beamspace matrix row count must equal M")
    tot = w.sum(axis=0)
    if np.any(tot == 0):
        raise ValueError("beamspace matrix has an all-zero column")
    return (w.T @ sc.q_t) / tot[:, None]


def virtual_ula_phase_centers(k: int, f_c: float, c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """Half-wavelength virtual line of K centers starting at the origin,
    x_k = (k-1) * lambda / 2, whose steering phases equal the linear-phase
    desired vectors used by the beamspace designs (rotational-invariance
    layout).
    """
    pos = np.zeros((k, 3))
    pos[:, 0] = np.arange(k) * (c / f_c) / 2.0
    return pos


def _steering(positions: np.ndarray, target: TargetParams, f_c: float, c: float) -> np.ndarray:
    # Entry i is the carrier rotation of element i's relative propagation
    # delay -u.q_i/c at frequency f' = f_c + f_d. This orientation makes
    # the factored ambiguity surfaces coincide exactly with the coherent
    # matched-filter simulation built on delays tau - u.q/c.
    f_prime = f_c + target.f_d
    u_tilde = -2j * np.pi * f_prime / c * target.direction()
    return np.exp(positions @ u_tilde)


def steering_t(sc: ArrayScenario, target: TargetParams) -> np.ndarray:
    """M x 1 transmit steering vector over the transmit element positions."""
    return _steering(sc.q_t, target, sc.f_c, sc.c)


def steering_r(sc: ArrayScenario, target: TargetParams) -> np.ndarray:
    """N x 1 receive steering vector."""
    return _steering(sc.q_r, target, sc.f_c, sc.c)


def steering_te(sc: ArrayScenario, target: TargetParams) -> np.ndarray:
    """K x 1 equivalent transmit steering vector over the phase centers."""
    if sc.q_te is None:
        raise ValueError("scenario has no equivalent transmit phase centers set")
    return _steering(sc.q_te, target, sc.f_c, sc.c)
