"""Quantum illumination of a weakly reflective object through an absorbing medium.

The target is a beam splitter of reflectivity eta embedded in a thermal
bath; absorption over the signal path contributes a multiplicative
e^{-gamma} to the effective (amplitude) reflectivity. Closed-form quantum
and classical Fisher informations are provided together with constructive
covariance-matrix routes for cross-checking.
"""

from dataclasses import dataclass

import numpy as np

from . import core
from .core import GaussianState, SIGMA_Z, beam_splitter, apply, partial_trace
from .entanglement import BipartiteCM
from .estimation import GaussianFamily, RegularizationError


@dataclass
class QiParams:
    n_s: float          # signal photons
    n_th: float         # bath photons
    gamma: float = 0.0  # absorption exponent mu * L (dimensionless)
    eta: float = 0.0    # object intensity reflectivity

    def __post_init__(self):
        if min(self.n_s, self.n_th, self.gamma) < 0 or not 0 <= self.eta <= 1:
            raise ValueError("invalid illumination parameters")


def eta_eff(eta, gamma):
    """Effective amplitude reflectivity eta * e^{-gamma} of object plus medium."""
    return eta * np.exp(-gamma)


def eta_eff_iterated(gamma, n_doublings=20):
    """Transmittivity of 2^k identical infinitesimal splitters, composed pairwise.

    Converges to e^{-gamma}; kept as an independent check of the
    continuum limit.
    """
    n = 2 ** n_doublings
    tau = gamma / n
    for _ in range(n_doublings):
        tau = 2.0 * tau * (1.0 - tau / 2.0)
    return 1.0 - tau


def qi_probe(n_s, n_th):
    """Three-mode probe: thermal bath, signal, idler (zero displacement).

    The signal block carries the bath occupation on top of the two-mode
    squeezing so the thermal photon number is fixed and the protocol is
    free of shadow effects.
    """
    if n_s < 0 or n_th < 0:
        raise ValueError("photon numbers must be non-negative")
    sigma = np.zeros((6, 6))
    sigma[0:2, 0:2] = (1.0 + 2.0 * n_th) * np.eye(2)
    sigma[2:4, 2:4] = (1.0 + 2.0 * n_s + 2.0 * n_th) * np.eye(2)
    sigma[4:6, 4:6] = (1.0 + 2.0 * n_s) * np.eye(2)
    corr = 2.0 * np.sqrt(n_s * (n_s + 1.0)) * SIGMA_Z
    sigma[2:4, 4:6] = corr
    sigma[4:6, 2:4] = corr
    return GaussianState(np.zeros(6), sigma)


def probe_nu_minus(n_s, n_th):
    """Smaller PT symplectic eigenvalue of the signal-idler block, closed form."""
    root = np.sqrt(4.0 * n_s * (n_s + 1.0) + n_th ** 2)
    val = (8.0 * n_s ** 2 - 2.0 * (2.0 * n_s + n_th + 1.0) * root
           + 4.0 * n_s * n_th + 8.0 * n_s + 2.0 * n_th ** 2 + 2.0 * n_th + 1.0)
    return np.sqrt(val)


def qi_received(params):
    """Received signal-idler covariance matrix, closed form."""
    x = eta_eff(params.eta, params.gamma)
    f = 1.0 + 2.0 * params.n_th + 2.0 * params.n_s * x ** 2
    g = 2.0 * np.sqrt(params.n_s * (1.0 + params.n_s)) * x
    sig_c = (1.0 + 2.0 * params.n_s) * np.eye(2)
    return BipartiteCM(f * np.eye(2), sig_c, g * SIGMA_Z)


def qi_received_constructive(params):
    """Same state built by applying the beam splitter to the probe and tracing.

    The combined object + medium acts with amplitude reflectivity
    eta * e^{-gamma} on the signal, i.e. intensity (eta * e^{-gamma})^2.
    """
    probe = qi_probe(params.n_s, params.n_th)
    x = eta_eff(params.eta, params.gamma)
    transformed = apply(probe, beam_splitter(x ** 2), on=(0, 1))
    return BipartiteCM.from_state(partial_trace(transformed, keep=(1, 2)))


def h_q(params):
    """Quantum-probe QFI for the reflectivity, closed form at eta ~ 0."""
    if params.n_th <= 0.0:
        raise RegularizationError(
            "H_Q requires n_th > 0 (received state pure at the boundary)")
    n_s, n_th = params.n_s, params.n_th
    return (4.0 * n_s * np.exp(-2.0 * params.gamma) * (1.0 + n_s)
            / (1.0 + 2.0 * n_s * n_th + n_s + n_th))


def h_c(params):
    """Coherent-probe QFI for the reflectivity, closed form at eta ~ 0."""
    return (4.0 * np.exp(-2.0 * params.gamma) * params.n_s
            / (2.0 * params.n_th + 1.0))


def gain(params):
    """R = H_Q / H_C; independent of the absorption exponent."""
    n_s, n_th = params.n_s, params.n_th
    return ((1.0 + n_s) * (1.0 + 2.0 * n_th)
            / (1.0 + 2.0 * n_s * n_th + n_s + n_th))


def received_family(params, step=1e-5):
    """Quantum received state as a Gaussian family in the reflectivity."""
    n_s, n_th, gamma = params.n_s, params.n_th, params.gamma

    def evaluate(eta):
        return qi_received(QiParams(n_s, n_th, gamma, eta)).to_state()

    return GaussianFamily(evaluate, lambda0=params.eta, step=step)


def classical_received_family(params, step=1e-5):
    """Coherent-probe received state (with a passive thermal spectator mode).

    Pre-channel the probe is a coherent state with alpha^2 = n_s in the
    real-basis displacement (0, 0, sqrt(2) alpha, 0) on (bath, signal);
    after the interaction and the trace of the losses the received mode
    carries d = (sqrt(2) e^{-gamma} alpha eta, 0). The spectator keeps the
    family two-mode without touching the information content.
    """
    n_s, n_th, gamma = params.n_s, params.n_th, params.gamma
    alpha = np.sqrt(n_s)

    def evaluate(eta):
        x = eta * np.exp(-gamma)
        sigma = np.eye(4)
        sigma[0, 0] = sigma[1, 1] = 1.0 + 2.0 * n_th * (1.0 - x ** 2)
        sigma[2, 2] = sigma[3, 3] = 1.0 + 2.0 * n_th
        d = np.array([np.sqrt(2.0) * alpha * x, 0.0, 0.0, 0.0])
        return GaussianState(d, sigma)

    return GaussianFamily(evaluate, lambda0=params.eta, step=step)
