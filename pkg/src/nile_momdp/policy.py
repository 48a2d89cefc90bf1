"""Gaussian radial-basis-function control policies over a box genome.

A policy with n basis functions on an m-dimensional observation producing a
k-dimensional action is encoded as a flat genome in [0, 1]^L,

    L = n*m (centers) + n*m (radii) + k*n (weights),

laid out in that order, row-major. Decoding is a fixed map: centers pass
through (clipped to [0, 1]), radii are scaled affinely onto [1e-3, 1] so no
basis function can degenerate, and each action's n weights are normalized to
sum to one (an all-zero row becomes uniform). Because phi_i(x) in (0, 1] and
weights lie on the simplex, every action component lands in [0, 1] with no
output clipping needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

RADIUS_MIN = 1e-3
RADIUS_MAX = 1.0


def genome_length(n_rbf: int, obs_dim: int, action_dim: int) -> int:
    return 2 * n_rbf * obs_dim + action_dim * n_rbf


@dataclass(frozen=True)
class RBFPolicy:
    """Decoded policy: callable mapping an observation to an action in [0,1]^k."""

    centers: np.ndarray  # (n, m)
    radii: np.ndarray    # (n, m), all >= RADIUS_MIN
    weights: np.ndarray  # (k, n), rows on the simplex

    def __post_init__(self):
        n, m = self.centers.shape
        if self.radii.shape != (n, m):
            raise UsageError("radii shape must match centers")
        if self.weights.ndim != 2 or self.weights.shape[1] != n:
            raise UsageError("weights must have one column per basis function")

    def __call__(self, obs: np.ndarray) -> np.ndarray:
        obs = np.asarray(obs, dtype=float)
        z = (obs - self.centers) / self.radii
        phi = np.exp(-np.einsum("ij,ij->i", z, z))
        action = self.weights @ phi
        return np.clip(action, 0.0, 1.0)

    def basis_activations(self, obs: np.ndarray) -> np.ndarray:
        obs = np.asarray(obs, dtype=float)
        z = (obs - self.centers) / self.radii
        return np.exp(-np.einsum("ij,ij->i", z, z))


def decode_genome(genome: np.ndarray, n_rbf: int, obs_dim: int,
                  action_dim: int) -> RBFPolicy:
    """Fixed genome -> policy map; tolerant of slightly out-of-box genomes."""
    genome = np.asarray(genome, dtype=float)
    expected = genome_length(n_rbf, obs_dim, action_dim)
    if genome.shape != (expected,):
        raise UsageError(f"genome must have length {expected}, got {genome.shape}")
    g = np.clip(genome, 0.0, 1.0)

    nm = n_rbf * obs_dim
    centers = g[:nm].reshape(n_rbf, obs_dim).copy()
    radii = RADIUS_MIN + g[nm:2 * nm].reshape(n_rbf, obs_dim) * (RADIUS_MAX - RADIUS_MIN)
    raw_w = g[2 * nm:].reshape(action_dim, n_rbf)

    sums = raw_w.sum(axis=1, keepdims=True)
    weights = np.where(sums > 0.0, raw_w / np.where(sums > 0.0, sums, 1.0),
                       1.0 / n_rbf)
    return RBFPolicy(centers=centers, radii=radii, weights=weights)


def random_genome(rng: np.random.Generator, n_rbf: int, obs_dim: int,
                  action_dim: int) -> np.ndarray:
    return rng.random(genome_length(n_rbf, obs_dim, action_dim))
