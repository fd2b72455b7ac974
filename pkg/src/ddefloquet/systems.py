"""Bundled benchmark systems used by the tests, demos and the verify command.

S1  scalar constant coefficient system q' = a q + b q(t - tau) with
    a = 0, b = -pi/2, tau = 1; its exponents are the characteristic roots
    +-i pi/2, which makes every route checkable in closed form.
S2  delayed van der Pol oscillator q'' + q = mu (1 - q^2) q'(t - 1/2);
    order one of the perturbation expansion gives amplitude 2 and
    frequency correction sin(1/2) exactly.  The moderate delay keeps the
    expansion constants small enough that the zero mode of the order two
    orbit sits well inside 5e-3 of the origin at mu = 0.1; at tau = 1 the
    orbit error already pairs the two near zero exponents into a complex
    pair of magnitude about 0.04.
S3  scalar parametric kernel dq/dxi = (a + c cos xi) q + b q(xi - 1) with
    a = -0.3, c = 0.1, b = -0.5: the smallest genuinely time periodic
    problem, used for every cross method comparison.
"""

from __future__ import annotations

import numpy as np

from .model import DdeSystem, FourierMatrixDensity, MonomialTerm
from .orbit import DrivenOscillator

__all__ = [
    "linear_scalar_system",
    "constant_density",
    "parametric_density",
    "s1_system",
    "s1_density",
    "s2_model",
    "s3_density",
]

S1_A = 0.0
S1_B = -np.pi / 2.0
S1_TAU = 1.0

S3_A = -0.3
S3_C = 0.1
S3_B = -0.5
S3_TAU = 1.0


def linear_scalar_system(a: float, b: float, tau: float) -> DdeSystem:
    """q' = a q + b q(t - tau) as a monomial system."""
    terms = []
    if a != 0.0:
        terms.append(MonomialTerm(a, 0, (1,), (0,)))
    if b != 0.0:
        terms.append(MonomialTerm(b, 0, (0,), (1,)))
    return DdeSystem(1, tau, tuple(terms))


def constant_density(a, b, omega: float = 1.0, tau: float = 1.0) -> FourierMatrixDensity:
    """Constant coefficient kernel (a + b delayed)/omega, bandwidth zero."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    n = a.shape[0]
    coeffs = np.zeros((2, 1, n, n), dtype=complex)
    coeffs[0, 0] = b / omega
    coeffs[1, 0] = a / omega
    return FourierMatrixDensity(
        omega=omega, delays=np.array([-omega * tau, 0.0]), coeffs=coeffs
    )


def parametric_density(
    a: float, c: float, b: float, tau: float = 1.0, omega: float = 1.0
) -> FourierMatrixDensity:
    """Scalar kernel (a + c cos xi) delta(theta) + b delta(theta + omega tau)."""
    coeffs = np.zeros((2, 3, 1, 1), dtype=complex)
    coeffs[0, 1, 0, 0] = b / omega
    coeffs[1, 0, 0, 0] = c / (2.0 * omega)
    coeffs[1, 1, 0, 0] = a / omega
    coeffs[1, 2, 0, 0] = c / (2.0 * omega)
    return FourierMatrixDensity(
        omega=omega, delays=np.array([-omega * tau, 0.0]), coeffs=coeffs
    )


def s1_system() -> DdeSystem:
    return linear_scalar_system(S1_A, S1_B, S1_TAU)


def s1_density(omega: float = 1.0) -> FourierMatrixDensity:
    return constant_density(S1_A, S1_B, omega=omega, tau=S1_TAU)


S2_TAU = 0.5


def s2_model() -> DrivenOscillator:
    """Delayed van der Pol forcing f = (1 - q^2) q'(t - tau), tau = 1/2."""
    return DrivenOscillator(
        omega0=1.0, tau=S2_TAU, forcing=((1.0, (0, 0, 0, 1)), (-1.0, (2, 0, 0, 1)))
    )


def s3_density() -> FourierMatrixDensity:
    return parametric_density(S3_A, S3_C, S3_B, tau=S3_TAU, omega=1.0)
