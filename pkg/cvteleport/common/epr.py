"""EPR-operator statistics of two-mode Gaussian states.

The commuting pair Q = q1 - q2, P = p1 + p2 is a linear image of the two-mode
quadratures, so its law under a Gaussian state is Gaussian with mean T d and
covariance T V T^T. The EPR operator is Delta = (Q^2 + P^2) / 2.
"""

import dataclasses
from typing import Any, Mapping, Optional, Tuple

import numpy as np

from cvteleport.common import gaussian

# Maps (q1, p1, q2, p2) to (Q, P).
EPR_TRANSFORM = np.array([[1., 0., -1., 0.], [0., 1., 0., 1.]])

DEFAULT_QUADRATURE_NODES = 64


@dataclasses.dataclass(frozen=True)
class EprMoments:
  """First and raw second moments of Q and P."""
  mean_q: float
  mean_p: float
  var_qq: float  # <Q^2>
  var_pp: float  # <P^2>
  cov_qp: float  # <QP>
  delta_mean: float  # (<Q^2> + <P^2>) / 2

  def noise_matrix(self) -> np.ndarray:
    """Centered covariance of (Q, P)."""
    return np.array([
        [self.var_qq - self.mean_q**2, self.cov_qp - self.mean_q * self.mean_p],
        [self.cov_qp - self.mean_q * self.mean_p, self.var_pp - self.mean_p**2],
    ])

  @property
  def inseparable(self) -> bool:
    return self.delta_mean < 1.0

  def to_dict(self) -> Mapping[str, Any]:
    result = dataclasses.asdict(self)
    result['inseparable'] = self.inseparable
    return result


def _check_two_mode(state: gaussian.GaussianState):
  if state.n_modes != 2:
    raise ValueError(
        f'EPR statistics need a two-mode state, got {state.n_modes} modes.')


def epr_quadrature_moments(
    state: gaussian.GaussianState) -> Tuple[np.ndarray, np.ndarray]:
  """Mean [2] and centered covariance [2, 2] of (Q, P)."""
  _check_two_mode(state)
  mean = EPR_TRANSFORM @ state.mean
  cov = EPR_TRANSFORM @ state.cov @ EPR_TRANSFORM.T
  return mean, 0.5 * (cov + cov.T)


def epr_moments(state: gaussian.GaussianState) -> EprMoments:
  """Assembles <Q>, <P>, <Q^2>, <P^2>, <QP> and <Delta> from the moments.

  Args:
    state: Two-mode Gaussian state.

  Returns:
    EprMoments with raw (uncentered) second moments, so that displaced states
    contribute their mean values quadratically.

  Raises:
    ValueError: If the state does not have two modes.
  """
  mean, cov = epr_quadrature_moments(state)
  var_qq = cov[0, 0] + mean[0]**2
  var_pp = cov[1, 1] + mean[1]**2
  return EprMoments(
      mean_q=float(mean[0]),
      mean_p=float(mean[1]),
      var_qq=float(var_qq),
      var_pp=float(var_pp),
      cov_qp=float(cov[0, 1] + mean[0] * mean[1]),
      delta_mean=float(0.5 * (var_qq + var_pp)))


def epr_uncertainty(state: gaussian.GaussianState) -> float:
  """<Delta>; values below one certify inseparability."""
  return epr_moments(state).delta_mean


def inseparable(state: gaussian.GaussianState) -> bool:
  return epr_moments(state).inseparable


def exp_quadratic_moment(mean: np.ndarray, cov: np.ndarray, t: float) -> float:
  """E[exp(-t |y|^2 / 2)] for a two-dimensional Gaussian y ~ N(mean, cov).

  Equals det(I + t cov)^(-1/2) exp(-t m^T (I + t cov)^-1 m / 2).

  Args:
    mean: [2] mean of y.
    cov: [2, 2] covariance of y.
    t: Scale of the exponent.

  Returns:
    The expectation.

  Raises:
    UnphysicalStateError: If the Gaussian integral diverges.
  """
  mean = np.asarray(mean, dtype=np.float64)
  kernel = np.eye(mean.shape[0]) + t * np.asarray(cov, dtype=np.float64)
  det = np.linalg.det(kernel)
  if det <= 0 or np.min(np.linalg.eigvalsh(kernel)) <= 0:
    raise gaussian.UnphysicalStateError(
        f'Gaussian integral diverges: det(I + t V) = {det:.3e} at t={t}.')
  exponent = -0.5 * t * mean @ np.linalg.solve(kernel, mean)
  return float(np.exp(exponent) / np.sqrt(det))


def exp_neg_delta(state: gaussian.GaussianState,
                  method: str = 'closed_form',
                  num_nodes: Optional[int] = None) -> float:
  """<exp(-Delta)> = (1/pi) int d^2 lambda exp(-|lambda|^2) chi(lambda*, lambda).

  Args:
    state: Two-mode Gaussian state.
    method: 'closed_form' for the analytic Gaussian integral, 'quadrature' for
      a tensor Gauss-Hermite rule, used as an independent check.
    num_nodes: Nodes per axis of the quadrature rule.

  Returns:
    The expectation, in (0, 1] for physical states.
  """
  if method == 'closed_form':
    mean, cov = epr_quadrature_moments(state)
    return exp_quadratic_moment(mean, cov, 1.0)
  if method != 'quadrature':
    raise ValueError(f'Unknown method {method!r}.')
  _check_two_mode(state)
  nodes, weights = np.polynomial.hermite.hermgauss(
      num_nodes or DEFAULT_QUADRATURE_NODES)
  lam = nodes[:, None] + 1j * nodes[None, :]
  chi = gaussian.characteristic_function(
      state, np.stack([np.conj(lam), lam], axis=-1))
  return float(np.real(weights @ chi @ weights) / np.pi)
