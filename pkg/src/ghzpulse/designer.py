"""Reverse engineering of coupling pulses from endpoint constraints.

Two design problems are solved over the K-dimensional sine-series
coefficient space:

photonic   alpha(t_f) = d_max (real target, imaginary part zero).  alpha is
           linear in the coefficients, so the minimum-norm solution of the
           2 x K linear system is exact; gradient descent then polishes the
           penalty objective (it terminates immediately when the linear
           solve is already tight).

qubit      A(t_f) = 0 and Re B(t_f) = theta_target.  A is linear and B is a
           quadratic form, so the solver restricts to the null space of the
           A constraint and scales the generalized eigenvector of the pair
           (sym Re Q, W) that meets the target with the smallest transient
           weight int |A(t)|^2 dt.  W-optimality keeps the intermediate
           mode displacement small, which is what makes tight Fock
           truncations viable in the verification runs.  Gradient descent
           again polishes the penalty objective.

Both paths are deterministic: identical problems produce bit-identical
results (no randomized initialization is used).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, ConvergenceError
from .functionals import (
    displacement,
    displacement_coefficients,
    gate_A,
    gate_B,
    gate_a_coefficients,
    gate_a_weight_matrix,
    gate_b_matrix,
)
from .pulses import FourierPulse

DEFAULT_K = 6
DEFAULT_TOLERANCE = 1e-6

#: Endpoint entangling-phase target for the two-qubit gate design.
THETA_DEFAULT = math.pi / 4


@dataclass(frozen=True)
class OptimizerSettings:
    step_size: float = 1.0
    max_iterations: int = 500
    tol_objective: float = 1e-12
    tol_rel_decrease: float = 1e-12
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60


@dataclass(frozen=True)
class DesignProblem:
    """Target specification for one pulse design.

    kind is 'photonic' or 'qubit'.  omega is the mode angular frequency in
    rad/s, t_f the pulse duration in seconds, k_terms the sine-series size.
    d_max is the photonic displacement target; theta_target the qubit
    entangling-phase target in radians.
    """

    kind: str
    omega: float
    t_f: float
    k_terms: int = DEFAULT_K
    d_max: float = 0.0
    theta_target: float = THETA_DEFAULT
    weight_a: float = 1.0
    weight_b: float = 1.0
    tolerance: float = DEFAULT_TOLERANCE
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)

    def __post_init__(self):
        if self.kind not in ("photonic", "qubit"):
            raise ConfigError(f"unknown design kind {self.kind!r}")
        if not (self.omega > 0 and self.t_f > 0):
            raise ConfigError("omega and t_f must be positive")
        min_k = 2 if self.kind == "photonic" else 3
        if self.k_terms < min_k:
            raise ConfigError(
                f"{self.kind} design needs k_terms >= {min_k}, got {self.k_terms}"
            )
        if self.kind == "photonic" and self.d_max < 0:
            raise ConfigError("d_max must be >= 0")

    def to_json(self) -> str:
        data = asdict(self)
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DesignProblem":
        data = json.loads(text)
        opt = data.pop("optimizer", None)
        settings = OptimizerSettings(**opt) if opt else OptimizerSettings()
        return cls(optimizer=settings, **data)


@dataclass(frozen=True)
class DesignResult:
    pulse: FourierPulse
    residuals: dict[str, float]
    objective: float
    iterations: int
    peak_coupling: float
    converged: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "pulse": json.loads(self.pulse.to_json()),
                "residuals": self.residuals,
                "objective": self.objective,
                "iterations": self.iterations,
                "peak_coupling_rad_per_s": self.peak_coupling,
                "converged": self.converged,
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class GradientDescentResult:
    x: np.ndarray
    trace: np.ndarray
    iterations: int
    converged: bool


def _finite_difference_gradient(objective: Callable, x: np.ndarray, h: float = 1e-7) -> np.ndarray:
    grad = np.zeros_like(x)
    for i in range(x.shape[0]):
        step = h * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        grad[i] = (objective(xp) - objective(xm)) / (2.0 * step)
    return grad


def gradient_descent(
    objective: Callable[[np.ndarray], float],
    x0: np.ndarray,
    settings: OptimizerSettings = OptimizerSettings(),
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> GradientDescentResult:
    """Deterministic gradient descent with Armijo backtracking.

    The objective trace is monotone non-increasing by construction; a step
    is only taken when the sufficient-decrease condition holds.  With
    gradient=None a central finite-difference gradient is used.
    """
    if gradient is None:
        gradient = lambda x: _finite_difference_gradient(objective, x)

    x = np.array(x0, dtype=float)
    f = float(objective(x))
    trace = [f]
    step = settings.step_size
    converged = False
    iterations = 0

    for iterations in range(1, settings.max_iterations + 1):
        if f <= settings.tol_objective:
            converged = True
            iterations -= 1
            break
        g = np.asarray(gradient(x), dtype=float)
        gnorm2 = float(g @ g)
        if gnorm2 == 0.0:
            converged = f <= settings.tol_objective
            iterations -= 1
            break
        accepted = False
        s = step
        for _ in range(settings.max_backtracks):
            x_new = x - s * g
            f_new = float(objective(x_new))
            if f_new <= f - settings.armijo * s * gnorm2:
                accepted = True
                break
            s *= settings.backtrack
        if not accepted:
            break
        rel_drop = (f - f_new) / max(f, 1e-300)
        x, f = x_new, f_new
        trace.append(f)
        step = min(s / settings.backtrack, settings.step_size * 1e6)
        if f <= settings.tol_objective or rel_drop <= settings.tol_rel_decrease:
            converged = f <= settings.tol_objective or rel_drop <= settings.tol_rel_decrease
            break

    return GradientDescentResult(x, np.asarray(trace), iterations, converged)


def peak_coupling(pulse: FourierPulse, n_samples: int = 8193) -> float:
    """Maximum |g(t)| over a dense uniform grid on [0, t_f]."""
    t = np.linspace(0.0, pulse.t_f, n_samples)
    return float(np.abs(pulse.value(t)).max())


def design_photonic(problem: DesignProblem) -> DesignResult:
    """Pulse meeting alpha(t_f) = d_max with minimum coefficient norm.

    The solution is linear in d_max by construction (the unit-target system
    is solved once and scaled), so peak |g| is exactly proportional to the
    displacement target.
    """
    if problem.kind != "photonic":
        raise ConfigError("design_photonic requires a photonic problem")
    k, t_f, omega = problem.k_terms, problem.t_f, problem.omega

    d_vec = displacement_coefficients(k, t_f, omega)
    m = np.vstack([d_vec.real, d_vec.imag])
    svals = np.linalg.svd(m, compute_uv=False)
    if svals[1] <= 1e-12 * svals[0]:
        raise ConvergenceError(
            "singular photonic constraint matrix: the two displacement "
            f"constraints are degenerate at omega*t_f = {omega * t_f:.6g}"
        )

    c_unit, *_ = np.linalg.lstsq(m, np.array([1.0, 0.0]), rcond=None)
    c = problem.d_max * c_unit

    target = np.array([problem.d_max, 0.0])

    def objective(x):
        r = m @ x - target
        return float(r @ r)

    def grad(x):
        return 2.0 * m.T @ (m @ x - target)

    gd = gradient_descent(objective, c, problem.optimizer, gradient=grad)
    pulse = FourierPulse(tuple(gd.x), t_f)

    alpha_f = complex(displacement(pulse, omega, t_f))
    residuals = {
        "re_alpha": abs(alpha_f.real - problem.d_max),
        "im_alpha": abs(alpha_f.imag),
    }
    converged = all(v < problem.tolerance for v in residuals.values())
    return DesignResult(
        pulse=pulse,
        residuals=residuals,
        objective=float(gd.trace[-1]),
        iterations=gd.iterations,
        peak_coupling=peak_coupling(pulse),
        converged=converged,
    )


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def design_qubit(problem: DesignProblem) -> DesignResult:
    """Pulse meeting A(t_f) = 0 and Re B(t_f) = theta_target.

    Im B(t_f) needs no constraint: it equals |A(t_f)|^2 / 2 identically and
    is forced to zero with A.  Gradient descent certifies the penalty
    objective J = w_a |A|^2 + w_b (Re B - theta)^2 below tolerance.
    """
    if problem.kind != "qubit":
        raise ConfigError("design_qubit requires a qubit problem")
    k, t_f, omega = problem.k_terms, problem.t_f, problem.omega
    theta = problem.theta_target

    l_vec = gate_a_coefficients(k, t_f, omega)
    q_mat = gate_b_matrix(k, t_f, omega)
    s_mat = 0.5 * (q_mat.real + q_mat.real.T)
    w_mat = gate_a_weight_matrix(k, t_f, omega)

    if theta == 0.0:
        c0 = np.zeros(k)
    else:
        rows = np.vstack([l_vec.real, l_vec.imag])
        _, svals, vt = np.linalg.svd(rows)
        rank = int(np.sum(svals > 1e-12 * svals[0]))
        null = vt[rank:].T
        if null.shape[1] == 0:
            raise ConvergenceError("A(t_f) constraint leaves no free directions")
        s_red = null.T @ s_mat @ null
        w_red = null.T @ w_mat @ null
        from scipy.linalg import eigh

        evals, evecs = eigh(s_red, w_red)
        order = np.argsort(evals)[::-1] if theta > 0 else np.argsort(evals)
        lam = evals[order[0]]
        if lam * theta <= 0:
            raise ConvergenceError(
                f"target phase {theta:.4g} unreachable: the reduced quadratic "
                "form admits no matching sign"
            )
        v = _canonical_sign(evecs[:, order[0]])
        y = v * math.sqrt(theta / float(v @ s_red @ v))
        c0 = null @ y

    lr, li = l_vec.real, l_vec.imag
    wa, wb = problem.weight_a, problem.weight_b

    def objective(x):
        a2 = float((lr @ x) ** 2 + (li @ x) ** 2)
        rb = float(x @ s_mat @ x) - theta
        return wa * a2 + wb * rb * rb

    def grad(x):
        g = 2.0 * wa * ((lr @ x) * lr + (li @ x) * li)
        rb = float(x @ s_mat @ x) - theta
        g += 4.0 * wb * rb * (s_mat @ x)
        return g

    gd = gradient_descent(objective, c0, problem.optimizer, gradient=grad)
    pulse = FourierPulse(tuple(gd.x), t_f)

    a_f = complex(gate_A(pulse, omega, t_f))
    b_f = complex(gate_B(pulse, omega, t_f))
    residuals = {
        "abs_a": abs(a_f),
        "re_b": abs(b_f.real - theta),
        "im_b": abs(b_f.imag),
    }
    converged = (
        residuals["abs_a"] < problem.tolerance
        and residuals["re_b"] < problem.tolerance
    )
    return DesignResult(
        pulse=pulse,
        residuals=residuals,
        objective=float(gd.trace[-1]),
        iterations=gd.iterations,
        peak_coupling=peak_coupling(pulse),
        converged=converged,
    )


def design_qubit_minimax(
    problem: DesignProblem,
    transient_norm_order: int = 16,
    n_grid: int = 2001,
    max_iterations: int = 12000,
) -> DesignResult:
    """Qubit design that additionally flattens the transient |A(t)|.

    Endpoint constraints are identical to design_qubit.  Among all
    coefficient vectors on the constraint surface this variant minimizes a
    high-order mean of |A(t)|^2 by gradient descent over constraint-surface
    directions (any direction with a sign-compatible quadratic form can be
    scaled exactly onto Re B(t_f) = theta, so the search is unconstrained).

    The peak of |A(t)| bounds the transient displacement m |A| of the
    sigma_x branch with total spin projection m; flattening it is what
    keeps tightly truncated bus modes faithful for wide qubit registers.
    The plain design gives max |A| about 0.29 for theta = -pi/8; this
    variant reaches about 0.22, close to the flat-envelope bound
    sqrt(|theta| / (omega t_f)).
    """
    if problem.kind != "qubit":
        raise ConfigError("design_qubit_minimax requires a qubit problem")
    if problem.theta_target == 0.0:
        return design_qubit(problem)
    k, t_f, omega = problem.k_terms, problem.t_f, problem.omega
    theta = problem.theta_target

    nu = math.pi * np.arange(1, k + 1) / t_f
    ts = np.linspace(0.0, t_f, n_grid)
    from .functionals import sine_exp_integral

    a_rows = np.stack([sine_exp_integral(n, -omega, ts) for n in nu])
    l_vec = a_rows[:, -1]
    q_mat = gate_b_matrix(k, t_f, omega)
    s_mat = 0.5 * (q_mat.real + q_mat.real.T)
    rows = np.vstack([l_vec.real, l_vec.imag])
    _, svals, vt = np.linalg.svd(rows)
    rank = int(np.sum(svals > 1e-12 * svals[0]))
    null = vt[rank:].T
    s_red = null.T @ s_mat @ null
    gram = np.real(a_rows @ a_rows.conj().T)
    w_red = null.T @ (0.5 * (gram + gram.T)) @ null
    from scipy.linalg import eigh

    evals, evecs = eigh(s_red, w_red)
    idx = int(np.argmin(evals)) if theta < 0 else int(np.argmax(evals))
    if evals[idx] * theta <= 0:
        raise ConvergenceError("target phase sign unreachable in the null space")
    u0 = _canonical_sign(evecs[:, idx])
    u0 = u0 / np.linalg.norm(u0)

    a_re = null.T @ a_rows.real
    a_im = null.T @ a_rows.imag
    p = transient_norm_order

    def scaled(u: np.ndarray):
        s2 = float(u @ s_red @ u)
        if s2 * theta <= 0:
            return None
        return u * math.sqrt(theta / s2)

    def objective(u: np.ndarray) -> float:
        y = scaled(u)
        if y is None:
            return 1e9
        a2 = (y @ a_re) ** 2 + (y @ a_im) ** 2
        return float(np.mean(a2**p)) ** (1.0 / p)

    settings = OptimizerSettings(
        step_size=0.05,
        max_iterations=max_iterations,
        tol_objective=0.0,
        tol_rel_decrease=0.0,
    )
    gd = gradient_descent(objective, u0, settings)
    c = null @ scaled(gd.x)
    pulse = FourierPulse(tuple(c), t_f)
    a_f = complex(gate_A(pulse, omega, t_f))
    b_f = complex(gate_B(pulse, omega, t_f))
    residuals = {
        "abs_a": abs(a_f),
        "re_b": abs(b_f.real - theta),
        "im_b": abs(b_f.imag),
    }
    converged = (
        residuals["abs_a"] < problem.tolerance
        and residuals["re_b"] < problem.tolerance
    )
    return DesignResult(
        pulse=pulse,
        residuals=residuals,
        objective=float(gd.trace[-1]),
        iterations=gd.iterations,
        peak_coupling=peak_coupling(pulse),
        converged=converged,
    )
