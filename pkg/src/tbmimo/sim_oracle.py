"""Brute-force matched-filter simulation of the beamspace radar chain.

Synthesizes per-element receive records from the full coherent-sum
signal model (per-channel delays, Dopplers and reflection coefficients),
matched-filters them against every waveform for a hypothesized target,
and squares the coherent sum. Used as the independent oracle for the
factored ambiguity surfaces.

Timeline: uniform sampling at f_s, sample n at t = n / f_s. Envelope
delays are snapped to the sample grid; carrier phases use the exact
delays.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayScenario, TargetParams
from .tb_core import TBMatrix
from .waveforms import WaveformSet

__all__ = [
    "ChannelModel",
    "far_field_channel",
    "synthesize_rx",
    "matched_bank",
    "af_from_sum",
    "oracle_af_value",
    "r_matrix",
]


@dataclass(frozen=True)
class ChannelModel:
    """Per transmit/receive channel propagation description.

    ``delays``, ``dopplers`` and ``alphas`` are (M, N) arrays indexed by
    (transmit element, receive element). ``noise_power`` is the complex
    noise variance added to the synthesized records (0 disables noise).
    """

    delays: np.ndarray
    dopplers: np.ndarray
    alphas: np.ndarray
    noise_power: float = 0.0

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.delays, dtype=np.float64))
        f = np.broadcast_to(np.asarray(self.dopplers, dtype=np.float64), d.shape).copy()
        a = np.broadcast_to(np.asarray(self.alphas, dtype=np.complex128), d.shape).copy()
        for name, arr in (("delays", d), ("dopplers", f), ("alphas", a)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.noise_power < 0:
            raise ValueError("noise_power must be >= 0")

    @property
    def m(self) -> int:
        return self.delays.shape[0]

    @property
    def n(self) -> int:
        return self.delays.shape[1]


def far_field_channel(sc: ArrayScenario, target: TargetParams,
                      noise_power: float = 0.0) -> ChannelModel:
    """Planar-wavefront channel: delay tau - (u.q_t + u.q_r) / c per
    channel, a common Doppler, and unit reflection coefficients."""
    u = target.direction()
    proj_t = sc.q_t @ u
    proj_r = sc.q_r @ u
    delays = target.tau - (proj_t[:, None] + proj_r[None, :]) / sc.c
    return ChannelModel(
        delays=delays,
        dopplers=np.full_like(delays, target.f_d),
        alphas=np.ones_like(delays, dtype=np.complex128),
        noise_power=noise_power,
    )


def _place(env: np.ndarray, d: int, n_total: int) -> np.ndarray:
    """Envelope shifted to start at sample d on a length-n_total timeline."""
    out = np.zeros(n_total, dtype=np.complex128)
    out[d:d + env.size] = env
    return out


def synthesize_rx(sc: ArrayScenario, ws: WaveformSet, tb: TBMatrix,
                  target: TargetParams, ch: ChannelModel,
                  n_timeline: int | None = None,
                  noise_seed: int | None = None) -> np.ndarray:
    """Baseband receive records, one row per receive element.

    record_j[n] = sqrt(E/K) sum_m sum_k alpha_mj c_mk phi_k[n - d_mj]
                  exp(-j 2 pi tau_mj (f_c + f_mj)) exp(j 2 pi f_mj n dt)

    The timeline must cover every delayed pulse; delays snapping to
    negative samples or beyond the timeline raise a parameter error.
    """
    if ch.m != sc.m or ch.n != sc.n:
        raise ValueError("channel dimensions must match the scenario")
    if tb.m != sc.m or tb.k != ws.k:
        raise ValueError("beamspace matrix dimensions inconsistent")
    length = ws.n_samples
    d_idx = np.round(ch.delays * ws.f_s).astype(int)
    if np.min(d_idx) < 0:
        raise ValueError("timeline starts after an echo; increase the reference delay")
    needed = int(np.max(d_idx)) + length
    if n_timeline is None:
        n_timeline = needed
    if n_timeline < needed:
        raise ValueError(f"timeline too short: need >= {needed} samples")

    # Per transmit element, the compound emitted envelope sum_k c_mk phi_k.
    compound = np.asarray(tb.c) @ ws.samples  # (M, L)
    t = np.arange(n_timeline) / ws.f_s
    amp = np.sqrt(ws.e / ws.k)
    records = np.zeros((sc.n, n_timeline), dtype=np.complex128)
    for j in range(sc.n):
        for m in range(sc.m):
            f_mj = ch.dopplers[m, j]
            carrier = np.exp(-2j * np.pi * ch.delays[m, j] * (sc.f_c + f_mj))
            env = _place(compound[m], d_idx[m, j], n_timeline)
            records[j] += ch.alphas[m, j] * carrier * env * np.exp(2j * np.pi * f_mj * t)
    records *= amp
    if ch.noise_power > 0:
        rng = np.random.default_rng(noise_seed)
        scale = np.sqrt(ch.noise_power / 2.0)
        records += scale * (rng.standard_normal(records.shape)
                            + 1j * rng.standard_normal(records.shape))
    return records


def _reference_channel(sc: ArrayScenario, reference: TargetParams) -> tuple[np.ndarray, float]:
    """Hypothesis delays over (phase center, receive element) pairs and
    the common hypothesis Doppler."""
    if sc.q_te is None:
        raise ValueError("scenario needs phase centers for matched filtering")
    u = reference.direction()
    proj_te = sc.q_te @ u
    proj_r = sc.q_r @ u
    delays = reference.tau - (proj_te[:, None] + proj_r[None, :]) / sc.c
    return delays, reference.f_d


def matched_bank(records: np.ndarray, ws: WaveformSet, reference: TargetParams,
                 sc: ArrayScenario) -> np.ndarray:
    """Matched-filter every record against every waveform for a
    hypothesized target; output (j, i) pairs as an N x K matrix.

    output_ji = dt * sum_n r_j[n] conj(phi_i[n - d'_ij])
                exp(-j 2 pi f'_ij n dt) exp(j 2 pi tau'_ij (f_c + f'_ij))
    """
    records = np.atleast_2d(np.asarray(records, dtype=np.complex128))
    if records.shape[0] != sc.n:
        raise ValueError("one record per receive element required")
    n_timeline = records.shape[1]
    length = ws.n_samples
    ref_delays, f_ref = _reference_channel(sc, reference)
    d_idx = np.round(ref_delays * ws.f_s).astype(int)
    if np.min(d_idx) < 0 or np.max(d_idx) + length > n_timeline:
        raise ValueError("reference envelope falls outside the record timeline")

    t = np.arange(n_timeline) / ws.f_s
    out = np.empty((sc.n, ws.k), dtype=np.complex128)
    for j in range(sc.n):
        for i in range(ws.k):
            ref_env = _place(ws.samples[i], d_idx[i, j], n_timeline)
            phase = np.exp(2j * np.pi * ref_delays[i, j] * (sc.f_c + f_ref))
            mixer = np.exp(-2j * np.pi * f_ref * t)
            out[j, i] = phase * np.sum(records[j] * np.conj(ref_env) * mixer) / ws.f_s
    return out


def af_from_sum(outputs: np.ndarray) -> float:
    """Squared magnitude of the coherent sum of all matched outputs."""
    return float(np.abs(np.sum(outputs)) ** 2)


def r_matrix(sc: ArrayScenario, ws: WaveformSet, tb: TBMatrix,
             target: TargetParams, reference: TargetParams,
             ch: ChannelModel, j: int) -> np.ndarray:
    """Debug evaluator of the M x K waveform-mixing matrix for receive
    element j: the matched integrals without the coherent carrier-phase
    windowing.

    R_mi = sqrt(E/K) sum_k c_mk
           sum_n phi_k[n - d_mj] conj(phi_i[n - d'_ij])
           exp(j 2 pi (f_mj - f'_ij) n dt) dt
    """
    length = ws.n_samples
    d_tx = np.round(ch.delays[:, j] * ws.f_s).astype(int)
    ref_delays, f_ref = _reference_channel(sc, reference)
    d_ref = np.round(ref_delays[:, j] * ws.f_s).astype(int)
    base = int(min(d_tx.min(), d_ref.min()))
    n_total = int(max(d_tx.max(), d_ref.max())) - base + length
    t = (np.arange(n_total) + base) / ws.f_s
    out = np.zeros((sc.m, ws.k), dtype=np.complex128)
    for m in range(sc.m):
        f_mj = ch.dopplers[m, j]
        for i in range(ws.k):
            env_tx = _place((np.asarray(tb.c)[m] @ ws.samples), d_tx[m] - base, n_total)
            env_ref = _place(ws.samples[i], d_ref[i] - base, n_total)
            mixer = np.exp(2j * np.pi * (f_mj - f_ref) * t)
            out[m, i] = np.sum(env_tx * np.conj(env_ref) * mixer) / ws.f_s
    return np.sqrt(ws.e / ws.k) * out


def oracle_af_value(sc: ArrayScenario, ws: WaveformSet, tb: TBMatrix,
                    target: TargetParams, d_tau: float, d_fd: float,
                    theta_prime: float | None = None) -> float:
    """Full coherent-sum AF at one mismatch point.

    Builds the hypothesis from the sweep offsets (delay tau + d_tau,
    Doppler f_d - d_fd, angle theta unless overridden), shifts both
    timelines by a common whole-sample offset so every echo starts at a
    nonnegative sample, and runs synthesize -> matched bank -> coherent
    sum. Noise-free.
    """
    hyp = TargetParams(
        theta=target.theta if theta_prime is None else theta_prime,
        f_d=target.f_d - d_fd,
        tau=target.tau + d_tau,
    )
    # Common origin shift keeps all envelope starts on the timeline;
    # the AF value is invariant to it.
    u_t, u_h = target.direction(), hyp.direction()
    worst = min(
        target.tau - (np.max(sc.q_t @ u_t) + np.max(sc.q_r @ u_t)) / sc.c,
        hyp.tau - (np.max(sc.q_te @ u_h) + np.max(sc.q_r @ u_h)) / sc.c,
    )
    shift = 0.0
    if worst < 0:
        shift = np.ceil(-worst * ws.f_s) / ws.f_s
    tgt = TargetParams(theta=target.theta, f_d=target.f_d, tau=target.tau + shift)
    hyp = TargetParams(theta=hyp.theta, f_d=hyp.f_d, tau=hyp.tau + shift)

    ch = far_field_channel(sc, tgt)
    ref_delays, _ = _reference_channel(sc, hyp)
    n_timeline = int(max(
        np.max(np.round(ch.delays * ws.f_s)),
        np.max(np.round(ref_delays * ws.f_s)),
    )) + ws.n_samples
    records = synthesize_rx(sc, ws, tb, tgt, ch, n_timeline=n_timeline)
    outputs = matched_bank(records, ws, hyp, sc)
    return af_from_sum(outputs)
