"""Numerical scheme config."""

import copy

import ml_collections


def default_config() -> ml_collections.ConfigDict:
  """Get a mutable copy of the default numerical config."""
  return copy.deepcopy(CONFIG)


CONFIG = ml_collections.ConfigDict({
    'fock': {
        # Gauss-Hermite nodes per axis for the characteristic function
        # inversion; exact for undisplaced polynomial degree <= 191.
        'num_quadrature_nodes': 96,
        # Laguerre closed form while 2 * cutoff stays at or below this.
        'recurrence_threshold': 30,
        'node_batch_size': 512,
        # Normally ordered covariances below this are treated as zero.
        'coherent_atol': 1e-14,
        # Tolerance on negative populations, excess trace and skew of an
        # inverted matrix.
        'inversion_atol': 1e-8,
    },
    'distorting_field': {
        # Smallest eigenvalue of the normally ordered covariance for which
        # the P function is regular.
        'classical_margin': 1e-12,
    },
    'channel': {
        'num_quadrature_nodes': 32,
    },
    'simulator': {
        'shard_size': 16384,
        'num_workers': 1,
        'z_threshold': 4.0,
    },
})
