"""Constraint functionals of the pulse design problem.

For a coupling pulse g(t) and a mode at angular frequency omega these are

    alpha(t) = -i int_0^t g(s) exp(+i omega s) ds      (cavity displacement)
    A(t)     =    int_0^t g(s) exp(-i omega s) ds      (qubit-mode residual)
    B(t)     =  i int_0^t A(s) dA*(s)/ds ds            (pair entangling phase)

alpha and A are linear in the sine-series coefficients and evaluate in
closed form per term; B is quadratic and is integrated by composite Simpson
with grid doubling.  Im B(t) = |A(t)|^2 / 2 identically, so only Re B is an
independent design target.

All couplings are homogeneous: one scalar g(t) shared by every qubit-mode
pair, hence a single scalar A and B.  Inhomogeneous generalizations are out
of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .pulses import (
    ConstantPulse,
    FourierPulse,
    Pulse,
    AuxiliaryTrajectory,
    composite_simpson,
    cumulative_simpson_uniform,
)


def phasor_integral(eps: float, t) -> np.ndarray:
    """int_0^t exp(i eps u) du, stable for every eps including 0.

    Uses the exact identity t exp(i eps t / 2) sinc(eps t / (2 pi)), which
    has no small-denominator cancellation.
    """
    t = np.asarray(t, dtype=float)
    return t * np.exp(0.5j * eps * t) * np.sinc(eps * t / (2.0 * math.pi))


def sine_exp_integral(nu: float, w: float, t) -> np.ndarray:
    """int_0^t sin(nu u) exp(i w u) du in closed form."""
    return (phasor_integral(w + nu, t) - phasor_integral(w - nu, t)) / 2.0j


def displacement(pulse: Pulse, omega: float, t) -> np.ndarray:
    """Interaction-picture cavity displacement alpha(t).

    Linear in the pulse coefficients; closed form per sine term.  A constant
    pulse gives alpha(t) = -(g/omega)(exp(i omega t) - 1) with maximum
    modulus 2 g / omega at omega t = pi.
    """
    t = np.asarray(t, dtype=float)
    if isinstance(pulse, ConstantPulse):
        return -1.0j * pulse.amplitude * phasor_integral(omega, t)
    out = np.zeros(t.shape, dtype=complex)
    for c, nu in zip(pulse.coefficients, pulse.angular_knots()):
        out += c * sine_exp_integral(nu, omega, t)
    return -1.0j * out


def gate_A(pulse: Pulse, omega: float, t) -> np.ndarray:
    """First gate coefficient A(t); conjugate-kernel companion of alpha."""
    t = np.asarray(t, dtype=float)
    if isinstance(pulse, ConstantPulse):
        return pulse.amplitude * phasor_integral(-omega, t)
    out = np.zeros(t.shape, dtype=complex)
    for c, nu in zip(pulse.coefficients, pulse.angular_knots()):
        out += c * sine_exp_integral(nu, -omega, t)
    return out


def gate_B(pulse: Pulse, omega: float, t: float, rel_tol: float = 1e-9,
           n0: int = 2001) -> complex:
    """Pair entangling phase B(t) by Simpson quadrature with doubling.

    The integrand i A(s) g(s) exp(i omega s) uses the closed-form A, so the
    only numerical error is the quadrature itself.
    """
    t = float(t)
    if t == 0.0:
        return 0.0 + 0.0j

    def integrand(s):
        return 1.0j * gate_A(pulse, omega, s) * np.asarray(pulse.value(s)) * np.exp(1.0j * omega * s)

    n = n0 if n0 % 2 == 1 else n0 + 1
    xs = np.linspace(0.0, t, n)
    last = _simpson_complex(integrand(xs), xs[1] - xs[0])
    for _ in range(6):
        n = 2 * n - 1
        xs = np.linspace(0.0, t, n)
        cur = _simpson_complex(integrand(xs), xs[1] - xs[0])
        if abs(cur - last) <= rel_tol * max(abs(cur), 1e-300):
            return cur
        last = cur
    return last


def _simpson_complex(y: np.ndarray, dx: float) -> complex:
    return complex(
        composite_simpson(y.real, dx) + 1.0j * composite_simpson(y.imag, dx)
    )


@dataclass(frozen=True)
class ConstantCouplingParams:
    """Time-independent coupling g and mode frequency omega (rad/s)."""

    g: float
    omega: float

    def __post_init__(self):
        if not (self.g > 0 and self.omega > 0):
            raise ConfigError("g and omega must both be positive")


def constant_forms(params: ConstantCouplingParams, t) -> tuple[np.ndarray, np.ndarray]:
    """Exact A(t), B(t) for constant coupling.

    A(t) = (i g / omega)(exp(-i omega t) - 1)
    B(t) = (g/omega)^2 [-i (exp(i omega t) - 1)] - (g^2/omega) t

    At t = 2 pi / omega these give A = 0 and B = -2 pi g^2 / omega^2.
    """
    g, w = params.g, params.omega
    t = np.asarray(t, dtype=float)
    a = (1.0j * g / w) * (np.exp(-1.0j * w * t) - 1.0)
    b = (g / w) ** 2 * (-1.0j) * (np.exp(1.0j * w * t) - 1.0) - (g * g / w) * t
    return a, b


def sta_amplitude(aux: AuxiliaryTrajectory, omega: float, t) -> np.ndarray:
    """Lab-frame coherent amplitude zeta(t) of the +1 sigma_x branch.

    zeta = g_c / omega + i g_c' / omega^2 satisfies the driven mode equation
    zeta' = -i omega zeta - i g(t), and exp(i omega t) zeta(t) = alpha(t).
    """
    g_c, d1, _ = aux.evaluate(t)
    return g_c / omega + 1.0j * d1 / omega**2


@dataclass(frozen=True)
class GateTrajectories:
    """Sampled alpha(t), A(t), B(t) on a common uniform grid."""

    times: np.ndarray
    alpha: np.ndarray
    gate_a: np.ndarray
    gate_b: np.ndarray


def gate_trajectories(pulse: Pulse, omega: float, n_samples: int = 4001) -> GateTrajectories:
    """Evaluate all three functionals on a uniform grid over [0, t_f].

    alpha and A are exact; B is a cumulative Simpson integral of the same
    closed-form integrand, 4th order accurate on the grid.
    """
    if n_samples % 2 == 0:
        n_samples += 1
    times = np.linspace(0.0, pulse.t_f, n_samples)
    alpha = displacement(pulse, omega, times)
    a = gate_A(pulse, omega, times)
    integrand = 1.0j * a * np.asarray(pulse.value(times)) * np.exp(1.0j * omega * times)
    dx = times[1] - times[0]
    b = cumulative_simpson_uniform(integrand.real, dx) + 1.0j * cumulative_simpson_uniform(
        integrand.imag, dx
    )
    return GateTrajectories(times, alpha, a, b)


# ---------------------------------------------------------------------------
# Coefficient-space views used by the designer.  For a K-term sine series
# alpha(t_f) and A(t_f) are linear maps of the coefficient vector and
# B(t_f) is a quadratic form; the matrices below freeze those maps.
# ---------------------------------------------------------------------------

def displacement_coefficients(k_terms: int, t_f: float, omega: float) -> np.ndarray:
    """Complex K-vector D with alpha(t_f) = D . c."""
    nu = math.pi * np.arange(1, k_terms + 1) / t_f
    return np.array([-1.0j * sine_exp_integral(n, omega, t_f) for n in nu])


def gate_a_coefficients(k_terms: int, t_f: float, omega: float) -> np.ndarray:
    """Complex K-vector L with A(t_f) = L . c."""
    nu = math.pi * np.arange(1, k_terms + 1) / t_f
    return np.array([sine_exp_integral(n, -omega, t_f) for n in nu])


def gate_b_matrix(k_terms: int, t_f: float, omega: float, rel_tol: float = 1e-10) -> np.ndarray:
    """Complex K x K matrix Q with B(t_f) = c^T Q c, by Simpson doubling.

    Q_{kl} = i int_0^{t_f} A_k(s) sin(nu_l s) exp(i omega s) ds where A_k is
    the closed-form response of a unit k-th sine term.
    """
    nu = math.pi * np.arange(1, k_terms + 1) / t_f

    def matrix_on(n: int) -> np.ndarray:
        xs = np.linspace(0.0, t_f, n)
        dx = xs[1] - xs[0]
        w = np.ones(n)
        w[1:-1:2] = 4.0
        w[2:-2:2] = 2.0
        w *= dx / 3.0
        a_rows = np.stack([sine_exp_integral(nk, -omega, xs) for nk in nu])
        sin_rows = np.sin(np.multiply.outer(nu, xs))
        kernel = np.exp(1.0j * omega * xs) * w
        return 1.0j * (a_rows * kernel) @ sin_rows.T

    n = 2049
    last = matrix_on(n)
    for _ in range(5):
        n = 2 * n - 1
        cur = matrix_on(n)
        scale = max(np.abs(cur).max(), 1e-300)
        if np.abs(cur - last).max() <= rel_tol * scale:
            return cur
        last = cur
    return last


def gate_a_weight_matrix(k_terms: int, t_f: float, omega: float, n: int = 4097) -> np.ndarray:
    """Real symmetric K x K Gram matrix W with int |A(t)|^2 dt = c^T W c.

    Positive definite; used to pick the smoothest solution among all
    coefficient vectors meeting the endpoint constraints (small transient
    mode displacement keeps Fock truncation honest).
    """
    nu = math.pi * np.arange(1, k_terms + 1) / t_f
    if n % 2 == 0:
        n += 1
    xs = np.linspace(0.0, t_f, n)
    dx = xs[1] - xs[0]
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-2:2] = 2.0
    w *= dx / 3.0
    a_rows = np.stack([sine_exp_integral(nk, -omega, xs) for nk in nu])
    gram = (a_rows * w) @ a_rows.conj().T
    return np.real(0.5 * (gram + gram.conj().T))
