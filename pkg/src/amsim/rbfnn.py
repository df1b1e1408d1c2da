"""Gaussian radial basis function network with online gradient descent.

One network per control channel estimates the channel's additional
disturbance.  Kernels are isotropic Gaussians

    s_i(x) = exp(-|x - c_i|^2 / b_i^2)

and the weights follow the per-sample update W <- W + eta * E * S(x),
driven by the backstepping error signal E.  Weights start at zero so the
controller degrades gracefully to plain backstepping before any learning
has happened.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc


class RbfNetwork:
    """Linear-in-weights Gaussian RBF approximator with OGD updates.

    Owned by a single control loop (single writer); instances are
    independent across channels.
    """

    def __init__(self, centers, widths, learning_rate: float,
                 dt_scaled: bool = False):
        self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
        self.widths = np.asarray(widths, dtype=float)
        if self.widths.ndim == 0:
            self.widths = np.full(self.centers.shape[0], float(widths))
        if self.centers.shape[0] != self.widths.shape[0]:
            raise ValueError("one width per center required")
        if np.any(self.widths <= 0.0):
            raise ValueError("widths must be strictly positive")
        if not 0.0 < learning_rate < 1.0:
            raise ValueError(f"learning rate must be in (0, 1), got {learning_rate}")
        self.learning_rate = float(learning_rate)
        self.dt_scaled = dt_scaled
        self.weights = np.zeros(self.centers.shape[0])
        self.skipped_updates = 0

    @classmethod
    def latin_hypercube(cls, lower, upper, n_nodes: int, learning_rate: float,
                        width_scale: float = 2.0, seed: int | None = None,
                        dt_scaled: bool = False) -> "RbfNetwork":
        """Centers from a Latin-hypercube sample of the input envelope.

        Widths are width_scale times the mean nearest-center distance, so
        neighbouring kernels overlap and the approximator has support over
        the whole envelope.
        """
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != upper.shape or np.any(upper <= lower):
            raise ValueError("need upper > lower elementwise")
        sampler = qmc.LatinHypercube(d=lower.size, seed=seed)
        unit = sampler.random(n_nodes)
        centers = lower + unit * (upper - lower)
        dists = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=2)
        np.fill_diagonal(dists, np.inf)
        width = width_scale * float(np.mean(np.min(dists, axis=1)))
        return cls(centers, np.full(n_nodes, width), learning_rate,
                   dt_scaled=dt_scaled)

    @property
    def n_nodes(self) -> int:
        return self.centers.shape[0]

    def basis(self, x) -> np.ndarray:
        """Kernel activations S(x); each entry in (0, 1], 1 iff x hits a center."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.centers.shape[1],):
            raise ValueError(
                f"input dimension {x.shape} does not match centers "
                f"({self.centers.shape[1]},)")
        diff = x - self.centers
        return np.exp(-np.sum(diff * diff, axis=1) / self.widths ** 2)

    def evaluate(self, x) -> float:
        """Network output W^T S(x)."""
        return float(self.weights @ self.basis(x))

    def ogd_update(self, error: float, x, dt: float | None = None) -> np.ndarray:
        """One OGD step W += eta * E * S(x); returns the updated weights.

        Non-finite error signals are rejected (update skipped and counted)
        rather than poisoning the weights.  With dt_scaled=True the step is
        additionally multiplied by dt (continuous-time reading of the
        update law); the published learning rates assume the plain
        per-sample form.
        """
        if not np.isfinite(error):
            self.skipped_updates += 1
            return self.weights
        gain = self.learning_rate * float(error)
        if self.dt_scaled:
            if dt is None:
                raise ValueError("dt required when dt_scaled is enabled")
            gain *= dt
        self.weights = self.weights + gain * self.basis(x)
        return self.weights


def error_signal(z_prev: float | None, z_curr: float, z_odd: float,
                 k: float, dt: float) -> float:
    """Backstepping NN error signal E = zdot + z_odd + k * z_curr.

    zdot is the backward difference of the even error coordinate over one
    control period; the first sample (z_prev is None) returns 0 so that no
    update happens before a velocity estimate exists.  Note the bare
    backward difference amplifies measurement noise by 1/dt; a first-order
    low-pass on E is available as a controller option for noisy setups.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if z_prev is None:
        return 0.0
    z_dot = (z_curr - z_prev) / dt
    return z_dot + z_odd + k * z_curr
