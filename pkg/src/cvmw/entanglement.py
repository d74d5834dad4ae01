"""Bipartite Gaussian entanglement measures and covariance-matrix validity."""

import numpy as np

from .core import GaussianState, SIGMA_Z


class BipartiteCM:
    """Two-mode covariance matrix in submatrix form (Sigma_A, Sigma_B, eps_AB)."""

    def __init__(self, sigma_a, sigma_b, eps, check=True):
        self.sigma_a = np.array(sigma_a, dtype=float)
        self.sigma_b = np.array(sigma_b, dtype=float)
        self.eps = np.array(eps, dtype=float)
        if any(m.shape != (2, 2) for m in (self.sigma_a, self.sigma_b, self.eps)):
            raise ValueError("submatrices must be 2x2")
        if check:
            self.to_state()  # physicality of the assembled matrix

    @classmethod
    def standard_form(cls, alpha, beta, gamma, check=True):
        """Sigma_A = alpha*I, Sigma_B = beta*I, eps = gamma*sigma_z."""
        return cls(alpha * np.eye(2), beta * np.eye(2), gamma * SIGMA_Z, check=check)

    @classmethod
    def from_matrix(cls, sigma, check=True):
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (4, 4):
            raise ValueError("expected a 4x4 covariance matrix")
        return cls(sigma[:2, :2], sigma[2:, 2:], sigma[:2, 2:], check=check)

    @classmethod
    def from_state(cls, state, check=True):
        if state.n_modes != 2:
            raise ValueError("expected a two-mode state")
        return cls.from_matrix(state.sigma, check=check)

    @property
    def matrix(self):
        out = np.zeros((4, 4))
        out[:2, :2] = self.sigma_a
        out[2:, 2:] = self.sigma_b
        out[:2, 2:] = self.eps
        out[2:, :2] = self.eps.T
        return out

    def to_state(self):
        return GaussianState(np.zeros(4), self.matrix)

    def standard_params(self, tol=1e-10):
        """(alpha, beta, gamma) if the CM is in standard form, else ValueError."""
        alpha = self.sigma_a[0, 0]
        beta = self.sigma_b[0, 0]
        gamma = self.eps[0, 0]
        if (np.max(np.abs(self.sigma_a - alpha * np.eye(2))) > tol
                or np.max(np.abs(self.sigma_b - beta * np.eye(2))) > tol
                or np.max(np.abs(self.eps - gamma * SIGMA_Z)) > tol):
            raise ValueError("covariance matrix is not in standard form")
        return alpha, beta, gamma


def pts_eigenvalues(cm):
    """Partially transposed symplectic eigenvalues (nu_minus, nu_plus)."""
    det_a = np.linalg.det(cm.sigma_a)
    det_b = np.linalg.det(cm.sigma_b)
    det_e = np.linalg.det(cm.eps)
    det_s = np.linalg.det(cm.matrix)
    delta = det_a + det_b - 2.0 * det_e
    disc = delta ** 2 - 4.0 * det_s
    if disc < -1e-9 * max(1.0, delta ** 2):
        raise ValueError("complex branch: input is not a valid covariance matrix")
    root = np.sqrt(max(disc, 0.0))
    nu_minus = np.sqrt(max((delta - root) / 2.0, 0.0))
    nu_plus = np.sqrt((delta + root) / 2.0)
    return nu_minus, nu_plus


def negativity(cm):
    """N = max{0, (1 - nu_minus) / (2 nu_minus)} of the partial transpose."""
    nu_minus, _ = pts_eigenvalues(cm)
    return max(0.0, (1.0 - nu_minus) / (2.0 * nu_minus))


def log_negativity(cm):
    """E_N = log2(2N + 1), clipped at zero for separable states."""
    nu_minus, _ = pts_eigenvalues(cm)
    return max(0.0, -np.log2(nu_minus))


def cm_validity(alpha, beta, gamma):
    """Combined positivity / uncertainty check for standard-form submatrices.

    Returns (theta, valid) with theta = |sqrt(det Sigma) - 1| - |alpha - beta|;
    valid additionally requires alpha >= 1 and beta >= 1.
    """
    if alpha < 1.0 or beta < 1.0:
        return -np.inf, False
    det_s = (alpha * beta - gamma ** 2) ** 2
    theta = abs(np.sqrt(det_s) - 1.0) - abs(alpha - beta)
    return theta, theta >= -1e-10
