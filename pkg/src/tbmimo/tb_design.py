"""Beamspace matrix design via second-order cone programming.

Two programs are provided: a spatial min-max match of the beamspace
response to desired linear-phase vectors over an angular sector with an
out-of-sector leakage ceiling, and a variant that additionally caps the
ambiguity response over chosen delay/Doppler/angle bins and pins the
coherent gain toward the target.

Complex modulus constraints are second-order cones over the stacked
real/imaginary parts; the solve runs through cvxpy with a deterministic
interior-point solver.
"""

from dataclasses import dataclass, field, replace

import cvxpy as cp
import numpy as np

from .ambiguity import CrossAFStack, eval_at
from .geometry import ArrayScenario, TargetParams, steering_t, steering_te
from .tb_core import TBMatrix

__all__ = [
    "DesignSpec",
    "AFConstraintSpec",
    "ConstraintReport",
    "DesignResult",
    "desired_vector",
    "design_spatial",
    "design_af_constrained",
    "realify_vector",
    "unrealify_vector",
    "realify_matrix",
    "unrealify_matrix",
]

SOLVER_EPS = 1e-7


def desired_vector(theta: float, k: int) -> np.ndarray:
    """Linear-phase desired beamspace response exp(-j (k-1) pi sin(theta)),
    the phase ramp of half-wavelength-spaced virtual phase centers."""
    return np.exp(-1j * np.arange(k) * np.pi * np.sin(theta))


@dataclass(frozen=True)
class AFConstraintSpec:
    """Ambiguity sidelobe constraints added to the spatial design.

    The response |a_T^H(target) C X(delay_p, doppler_q) a_TE(angle_i,
    target_fd + doppler_q)| is capped at ``delta`` on every listed bin,
    and the gain a_T^H C a_TE at the target equals ``gain``.
    """

    delta: float
    dopplers: np.ndarray
    delays: np.ndarray = field(default_factory=lambda: np.zeros(1))
    angles: np.ndarray | None = None
    target_theta: float = 0.0
    target_fd: float = 0.0
    gain: float | None = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        for name in ("dopplers", "delays"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64))
            if arr.size == 0:
                raise ValueError(f"{name} grid must be nonempty")
            object.__setattr__(self, name, arr)
        if self.angles is not None:
            arr = np.atleast_1d(np.asarray(self.angles, dtype=np.float64))
            object.__setattr__(self, "angles", arr)

    def angle_grid(self) -> np.ndarray:
        return self.angles if self.angles is not None \
            else np.array([self.target_theta])


@dataclass(frozen=True)
class DesignSpec:
    """Sector geometry, grids, ceilings and desired vectors for a design.

    The out-of-sector region is everything in ``out_limits`` beyond a
    transition band on each side of the sector.
    """

    k: int
    sector: tuple[float, float]
    gamma: float
    n_sector: int = 61
    transition: float = np.deg2rad(10.0)
    n_out: int = 80
    out_limits: tuple[float, float] = (-np.pi / 2, np.pi / 2)
    desired: np.ndarray | None = None
    af: AFConstraintSpec | None = None

    def __post_init__(self):
        lo, hi = self.sector
        if not lo < hi:
            raise ValueError("sector must satisfy lo < hi")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.k < 1 or self.n_sector < 1 or self.n_out < 1:
            raise ValueError("grid sizes and k must be >= 1")
        if self.transition < 0:
            raise ValueError("transition width must be >= 0")
        if lo < self.out_limits[0] or hi > self.out_limits[1]:
            raise ValueError("sector must lie inside the out-of-sector limits")
        if self.desired is not None:
            d = np.asarray(self.desired, dtype=np.complex128)
            if d.shape != (self.n_sector, self.k):
                raise ValueError("desired must have shape (n_sector, k)")
            object.__setattr__(self, "desired", d)

    def sector_grid(self) -> np.ndarray:
        lo, hi = self.sector
        return np.linspace(lo, hi, self.n_sector)

    def out_grid(self) -> np.ndarray:
        lo, hi = self.sector
        left = (self.out_limits[0], lo - self.transition)
        right = (hi + self.transition, self.out_limits[1])
        spans = [s for s in (left, right) if s[1] > s[0]]
        if not spans:
            raise ValueError("transition bands cover the whole out-of-sector region")
        total = sum(s[1] - s[0] for s in spans)
        pieces = []
        remaining = self.n_out
        for idx, (a, b) in enumerate(spans):
            count = remaining if idx == len(spans) - 1 else \
                max(1, int(round(self.n_out * (b - a) / total)))
            remaining -= count
            pieces.append(np.linspace(a, b, count))
        return np.concatenate(pieces)

    def desired_matrix(self) -> np.ndarray:
        if self.desired is not None:
            return self.desired
        return np.stack([desired_vector(th, self.k) for th in self.sector_grid()])


@dataclass(frozen=True)
class ConstraintReport:
    """Out-of-solver re-evaluation of every constraint family."""

    max_match_residual: float
    max_out_norm: float
    gamma: float
    max_af_response: float | None = None
    delta: float | None = None
    gain_error: float | None = None
    worst_slack: float = np.inf


@dataclass(frozen=True)
class DesignResult:
    tb: TBMatrix | None
    objective: float | None
    status: str
    solver_status: str
    report: ConstraintReport | None
    diagnostic_delta: float | None = None


def _status(problem: cp.Problem) -> str:
    s = problem.status
    if s == cp.OPTIMAL:
        return "optimal"
    if s == cp.OPTIMAL_INACCURATE:
        return "near-optimal"
    if s in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return "infeasible"
    raise RuntimeError(f"cone solver returned unexpected status {s!r}")


def _solve(problem: cp.Problem) -> str:
    problem.solve(solver=cp.CLARABEL)
    return _status(problem)


def _spatial_report(c: np.ndarray, a_in: np.ndarray, desired: np.ndarray,
                    a_out: np.ndarray, gamma: float,
                    te_in: np.ndarray | None = None,
                    te_out: np.ndarray | None = None) -> tuple[float, float]:
    resp_in = a_in.conj() @ c
    if te_in is not None:
        resp_in = resp_in * te_in
    match = np.linalg.norm(resp_in - desired, axis=1).max()
    resp_out = a_out.conj() @ c
    if te_out is not None:
        resp_out = resp_out * te_out
    leak = np.linalg.norm(resp_out, axis=1).max()
    return float(match), float(leak)


def design_spatial(spec: DesignSpec, sc: ArrayScenario) -> DesignResult:
    """Min-max spatial match: minimize t s.t.
    ||C^H a(theta_i) - d(theta_i)|| <= t on the sector grid and
    ||C^H a(theta_j)|| <= gamma outside."""
    if spec.af is not None:
        raise ValueError("spatial design takes no ambiguity constraints")
    thetas_in = spec.sector_grid()
    thetas_out = spec.out_grid()
    a_in = np.stack([steering_t(sc, TargetParams(t)) for t in thetas_in])
    a_out = np.stack([steering_t(sc, TargetParams(t)) for t in thetas_out])
    desired = spec.desired_matrix()

    c_var = cp.Variable((sc.m, spec.k), complex=True)
    t_var = cp.Variable(nonneg=True)
    cons = [cp.norm(c_var.H @ a_in[i] - desired[i], 2) <= t_var
            for i in range(thetas_in.size)]
    cons += [cp.norm(c_var.H @ a_out[j], 2) <= spec.gamma
             for j in range(thetas_out.size)]
    problem = cp.Problem(cp.Minimize(t_var), cons)
    status = _solve(problem)
    if status == "infeasible" or c_var.value is None:
        return DesignResult(tb=None, objective=None, status="infeasible",
                            solver_status=problem.status, report=None)

    c = np.asarray(c_var.value, dtype=np.complex128)
    match, leak = _spatial_report(c, a_in, desired, a_out, spec.gamma)
    report = ConstraintReport(
        max_match_residual=match,
        max_out_norm=leak,
        gamma=spec.gamma,
        worst_slack=spec.gamma - leak,
    )
    return DesignResult(tb=TBMatrix(c, provenance="designed"),
                        objective=float(t_var.value), status=status,
                        solver_status=problem.status, report=report)


def _af_constraint_vectors(spec: AFConstraintSpec, sc: ArrayScenario,
                           stack: CrossAFStack) -> list[np.ndarray]:
    """Fixed K-vectors X(delay_p, doppler_q) a_TE(angle_i, fd_q), one per
    constrained bin."""
    vecs = []
    for d_tau in spec.delays:
        for d_fd in spec.dopplers:
            x = eval_at(stack, d_tau, d_fd)
            f_q = spec.target_fd + d_fd
            for ang in spec.angle_grid():
                a_te = steering_te(sc, TargetParams(theta=ang, f_d=f_q))
                vecs.append(x @ a_te)
    return vecs


def design_af_constrained(spec: DesignSpec, sc: ArrayScenario,
                          stack: CrossAFStack,
                          minimize_af_peak: bool = False,
                          diagnose_delta: bool = False) -> DesignResult:
    """Spatial min-max design with ambiguity sidelobe caps and a pinned
    coherent gain toward the target.

    The in-sector and out-of-sector responses include the elementwise
    equivalent-transmit-phase weighting. With ``minimize_af_peak`` a
    second pass reduces the constrained ambiguity bins to their smallest
    common level among designs achieving the first-pass objective.
    """
    if spec.af is None:
        raise ValueError("af-constrained design needs the constraint block")
    if sc.q_te is None:
        raise ValueError("scenario needs phase centers for the design")
    af = spec.af
    gain_target = float(spec.k if af.gain is None else af.gain)

    thetas_in = spec.sector_grid()
    thetas_out = spec.out_grid()
    a_in = np.stack([steering_t(sc, TargetParams(t)) for t in thetas_in])
    a_out = np.stack([steering_t(sc, TargetParams(t)) for t in thetas_out])
    te_in = np.stack([steering_te(sc, TargetParams(t)) for t in thetas_in])
    te_out = np.stack([steering_te(sc, TargetParams(t)) for t in thetas_out])
    desired = spec.desired_matrix()

    tgt = TargetParams(theta=af.target_theta, f_d=af.target_fd)
    a_t0 = steering_t(sc, tgt)
    a_te0 = steering_te(sc, tgt)
    af_vecs = _af_constraint_vectors(af, sc, stack)

    def build(delta: float, af_cap=None):
        c_var = cp.Variable((sc.m, spec.k), complex=True)
        t_var = cp.Variable(nonneg=True)
        row0 = a_t0.conj() @ c_var  # a_T^H C
        cons = [cp.norm(cp.multiply(c_var.H @ a_in[i], te_in[i]) - desired[i], 2)
                <= t_var for i in range(thetas_in.size)]
        cons += [cp.norm(cp.multiply(c_var.H @ a_out[j], te_out[j]), 2)
                 <= spec.gamma for j in range(thetas_out.size)]
        cap = delta if af_cap is None else af_cap
        cons += [cp.abs(row0 @ v) <= cap for v in af_vecs]
        cons += [row0 @ a_te0 == gain_target]
        return c_var, t_var, cons

    c_var, t_var, cons = build(af.delta)
    problem = cp.Problem(cp.Minimize(t_var), cons)
    status = _solve(problem)

    if status == "infeasible" or c_var.value is None:
        diag = _delta_feasibility_search(spec, sc, stack) if diagnose_delta else None
        return DesignResult(tb=None, objective=None, status="infeasible",
                            solver_status=problem.status, report=None,
                            diagnostic_delta=diag)

    objective = float(t_var.value)
    c = np.asarray(c_var.value, dtype=np.complex128)

    if minimize_af_peak and af_vecs:
        c2 = _af_peak_refinement(spec, sc, a_in, a_out, te_in, te_out, desired,
                                 a_t0, a_te0, af_vecs, gain_target, objective)
        if c2 is not None:
            c = c2

    # Exact gain polish: a unimodular-scale correction inside solver tolerance.
    achieved = a_t0.conj() @ c @ a_te0
    if achieved != 0:
        c = c * (gain_target / achieved)

    match, leak = _spatial_report(c, a_in, desired, a_out, spec.gamma,
                                  te_in=te_in, te_out=te_out)
    row0 = a_t0.conj() @ c
    af_levels = [abs(row0 @ v) for v in af_vecs]
    gain_err = abs(row0 @ a_te0 - gain_target)
    report = ConstraintReport(
        max_match_residual=match,
        max_out_norm=leak,
        gamma=spec.gamma,
        max_af_response=float(max(af_levels)) if af_levels else None,
        delta=af.delta,
        gain_error=float(gain_err),
        worst_slack=float(min(spec.gamma - leak,
                              af.delta - max(af_levels) if af_levels else np.inf)),
    )
    return DesignResult(tb=TBMatrix(c, provenance="designed"),
                        objective=objective, status=status,
                        solver_status=problem.status, report=report)


def _af_peak_refinement(spec, sc, a_in, a_out, te_in, te_out, desired,
                        a_t0, a_te0, af_vecs, gain_target, objective):
    """Among designs matching the achieved min-max objective, push the
    constrained ambiguity bins as low as they go."""
    af = spec.af
    c_var = cp.Variable((sc.m, spec.k), complex=True)
    s_var = cp.Variable(nonneg=True)
    row0 = a_t0.conj() @ c_var
    slack = objective * (1 + 1e-6) + 1e-9
    cons = [cp.norm(cp.multiply(c_var.H @ a_in[i], te_in[i]) - desired[i], 2)
            <= slack for i in range(a_in.shape[0])]
    cons += [cp.norm(cp.multiply(c_var.H @ a_out[j], te_out[j]), 2)
             <= spec.gamma for j in range(a_out.shape[0])]
    cons += [cp.abs(row0 @ v) <= s_var for v in af_vecs]
    cons += [s_var <= af.delta, row0 @ a_te0 == gain_target]
    problem = cp.Problem(cp.Minimize(s_var), cons)
    try:
        status = _solve(problem)
    except RuntimeError:
        return None
    if status == "infeasible" or c_var.value is None:
        return None
    return np.asarray(c_var.value, dtype=np.complex128)


def _delta_feasibility_search(spec: DesignSpec, sc: ArrayScenario,
                              stack: CrossAFStack,
                              max_doublings: int = 12) -> float | None:
    """Smallest feasible delta found by doubling then bisection; a
    diagnostic for infeasible ambiguity caps."""
    af = spec.af
    lo, hi = af.delta, af.delta
    feasible_hi = None
    for _ in range(max_doublings):
        hi *= 2.0
        trial = replace(spec, af=replace(af, delta=hi))
        if design_af_constrained(trial, sc, stack).status != "infeasible":
            feasible_hi = hi
            break
        lo = hi
    if feasible_hi is None:
        return None
    for _ in range(20):
        mid = 0.5 * (lo + feasible_hi)
        trial = replace(spec, af=replace(af, delta=mid))
        if design_af_constrained(trial, sc, stack).status != "infeasible":
            feasible_hi = mid
        else:
            lo = mid
        if feasible_hi / lo < 1.02:
            break
    return feasible_hi


def realify_vector(z: np.ndarray) -> np.ndarray:
    """Stack a complex vector as [Re; Im]."""
    z = np.asarray(z)
    return np.concatenate([z.real, z.imag])


def unrealify_vector(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    half = x.size // 2
    return x[:half] + 1j * x[half:]


def realify_matrix(a: np.ndarray) -> np.ndarray:
    """Real block form [[Re, -Im], [Im, Re]] of a complex matrix."""
    a = np.asarray(a)
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def unrealify_matrix(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    rows, cols = x.shape
    return x[: rows // 2, : cols // 2] + 1j * x[rows // 2:, : cols // 2]
