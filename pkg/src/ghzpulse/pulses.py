"""Coupling pulses and the auxiliary oscillator trajectory they drive.

The designed coupling g(t) is a finite sine series on [0, t_f], so g(0) and
g(t_f) vanish by construction.  The auxiliary variable g_c(t) is the
classical trajectory of a driven harmonic oscillator,

    g_c'' + omega^2 (g_c + g) = 0,   g_c(0) = g_c'(0) = 0,

whose Duhamel solution g_c(t) = -omega * int_0^t g(s) sin(omega (t - s)) ds
is evaluated here in closed form, term by term, including the resonant
limit pi k / t_f -> omega.  The phase beta(t) accumulated by the classical
action is a diagnostic global phase and is computed by quadrature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError

#: Relative window tolerance for time arguments at the interval edges.
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class FourierPulse:
    """Coupling pulse g(t) = sum_k c_k sin(pi k t / t_f), k = 1..K.

    coefficients are angular rates (rad/s); t_f is in seconds.
    """

    coefficients: tuple[float, ...]
    t_f: float

    def __post_init__(self):
        if len(self.coefficients) < 1:
            raise ConfigError("FourierPulse needs at least one coefficient")
        if not self.t_f > 0:
            raise ConfigError(f"t_f must be positive, got {self.t_f}")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    @property
    def k_terms(self) -> int:
        return len(self.coefficients)

    def angular_knots(self) -> np.ndarray:
        """Sine-basis angular frequencies nu_k = pi k / t_f."""
        k = np.arange(1, self.k_terms + 1, dtype=float)
        return math.pi * k / self.t_f

    def value(self, t):
        t = np.asarray(t, dtype=float)
        nu = self.angular_knots()
        c = np.asarray(self.coefficients)
        return np.sin(np.multiply.outer(t, nu)) @ c

    def to_json(self) -> str:
        return json.dumps(
            {
                "t_f_seconds": self.t_f,
                "coefficients_rad_per_s": list(self.coefficients),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "FourierPulse":
        try:
            data = json.loads(text)
            return cls(tuple(data["coefficients_rad_per_s"]), float(data["t_f_seconds"]))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"invalid pulse JSON: {exc}") from exc


@dataclass(frozen=True)
class ConstantPulse:
    """Flat coupling g(t) = g0 on [0, t_f], used for calibration runs."""

    amplitude: float
    t_f: float

    def __post_init__(self):
        if not self.t_f > 0:
            raise ConfigError(f"t_f must be positive, got {self.t_f}")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return np.full_like(t, self.amplitude, dtype=float)


Pulse = Union[FourierPulse, ConstantPulse]


def eval_pulse(pulse: Pulse, t) -> np.ndarray:
    """Pulse value at time(s) t, restricted to 0 <= t <= t_f."""
    t_arr = np.asarray(t, dtype=float)
    slack = _EDGE_TOL * pulse.t_f
    if np.any(t_arr < -slack) or np.any(t_arr > pulse.t_f + slack):
        raise ConfigError(f"time outside [0, {pulse.t_f}]")
    return pulse.value(t_arr)


def _aux_sine_term(nu: float, omega: float, t: np.ndarray):
    """(g_c, g_c', g_c'') response to a unit drive sin(nu t).

    Non-degenerate form  g_c = omega (nu sin(omega t) - omega sin(nu t))
    / (omega^2 - nu^2); the resonant branch nu = omega uses the limit
    -(sin(omega t) - omega t cos(omega t)) / 2 so no division by zero occurs.
    """
    den = omega * omega - nu * nu
    if abs(den) > 1e-9 * omega * omega:
        g_c = omega * (nu * np.sin(omega * t) - omega * np.sin(nu * t)) / den
        d1 = omega * omega * nu * (np.cos(omega * t) - np.cos(nu * t)) / den
        d2 = omega * omega * nu * (-omega * np.sin(omega * t) + nu * np.sin(nu * t)) / den
    else:
        g_c = -0.5 * (np.sin(omega * t) - omega * t * np.cos(omega * t))
        d1 = -0.5 * omega * omega * t * np.sin(omega * t)
        d2 = -0.5 * omega * omega * (np.sin(omega * t) + omega * t * np.cos(omega * t))
    return g_c, d1, d2


def _aux_eval(pulse: Pulse, omega: float, t: np.ndarray):
    """Closed-form (g_c, g_c', g_c'') for sine-series or constant pulses."""
    t = np.asarray(t, dtype=float)
    if isinstance(pulse, ConstantPulse):
        g0 = pulse.amplitude
        g_c = -g0 * (1.0 - np.cos(omega * t))
        d1 = -g0 * omega * np.sin(omega * t)
        d2 = -g0 * omega * omega * np.cos(omega * t)
        return g_c, d1, d2
    g_c = np.zeros_like(t)
    d1 = np.zeros_like(t)
    d2 = np.zeros_like(t)
    for c, nu in zip(pulse.coefficients, pulse.angular_knots()):
        a, b, cc = _aux_sine_term(nu, omega, t)
        g_c += c * a
        d1 += c * b
        d2 += c * cc
    return g_c, d1, d2


@dataclass(frozen=True)
class AuxiliaryTrajectory:
    """Sampled auxiliary oscillator trajectory with exact re-evaluation.

    Boundary structure at t = 0 holds by construction: g_c, g_c' and (via
    the equation of motion together with g(0) = 0) g_c'' all vanish.
    """

    times: np.ndarray
    g_c: np.ndarray
    g_c_dot: np.ndarray
    g_c_ddot: np.ndarray
    pulse: Pulse
    omega: float

    def evaluate(self, t):
        """Exact (g_c, g_c', g_c'') at arbitrary times within [0, t_f]."""
        return _aux_eval(self.pulse, self.omega, np.asarray(t, dtype=float))


def auxiliary_from_pulse(pulse: Pulse, omega: float, n_samples: int = 2001) -> AuxiliaryTrajectory:
    """Auxiliary trajectory for the driven oscillator, sampled on [0, t_f].

    omega is the mode angular frequency in rad/s and must be positive.
    """
    if not omega > 0:
        raise ConfigError(f"omega must be positive, got {omega}")
    times = np.linspace(0.0, pulse.t_f, n_samples)
    g_c, d1, d2 = _aux_eval(pulse, omega, times)
    return AuxiliaryTrajectory(times, g_c, d1, d2, pulse, omega)


def composite_simpson(y: np.ndarray, dx: float) -> float:
    """Composite Simpson rule; len(y) must be odd."""
    n = y.shape[0]
    if n % 2 == 0:
        raise ConfigError("Simpson rule needs an odd sample count")
    return float(dx / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()))


def simpson_doubling(f, a: float, b: float, rel_tol: float = 1e-9,
                     n0: int = 2001, max_doublings: int = 6) -> float:
    """Composite Simpson with grid doubling until successive results agree.

    f must accept a vector of sample points.  The integrands here are smooth
    trigonometric products, so convergence is fast.
    """
    n = n0 if n0 % 2 == 1 else n0 + 1
    xs = np.linspace(a, b, n)
    last = composite_simpson(f(xs), xs[1] - xs[0])
    for _ in range(max_doublings):
        n = 2 * n - 1
        xs = np.linspace(a, b, n)
        cur = composite_simpson(f(xs), xs[1] - xs[0])
        if abs(cur - last) <= rel_tol * max(abs(cur), 1e-300):
            return cur
        last = cur
    return last


def cumulative_simpson_uniform(y: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative integral on a uniform grid, Simpson on interior pairs.

    Matches composite Simpson at every even sample; odd samples use a
    locally quadratic correction, keeping 4th order accuracy throughout.
    """
    from scipy.integrate import cumulative_simpson

    return np.concatenate(([0.0], cumulative_simpson(y, dx=dx)))


@dataclass(frozen=True)
class PhaseTrajectory:
    """Accumulated classical-action phase beta(t), beta(0) = 0 (radians)."""

    times: np.ndarray
    beta: np.ndarray


def lagrangian_phase(pulse: Pulse, omega: float, n_samples: int = 4001) -> PhaseTrajectory:
    """Phase beta(t) = -int_0^t [g_c'^2/w^3 - g_c^2/w - 2 g_c g / w] ds.

    Purely diagnostic: it multiplies the evolved state as a global phase and
    drops out of any fidelity.
    """
    if n_samples % 2 == 0:
        n_samples += 1
    times = np.linspace(0.0, pulse.t_f, n_samples)
    g = np.asarray(pulse.value(times), dtype=float)
    g_c, d1, _ = _aux_eval(pulse, omega, times)
    lag = d1 * d1 / omega**3 - g_c * g_c / omega - 2.0 * g_c * g / omega
    beta = -cumulative_simpson_uniform(lag, times[1] - times[0])
    return PhaseTrajectory(times, beta)


def reconstruct_pulse_from_auxiliary(aux: AuxiliaryTrajectory, t) -> np.ndarray:
    """Invert the oscillator equation: g = -g_c - g_c'' / omega^2.

    Round-trips eval_pulse for any sine-series pulse; used as a consistency
    check of the closed forms.
    """
    g_c, _, d2 = aux.evaluate(t)
    return -g_c - d2 / (aux.omega**2)
