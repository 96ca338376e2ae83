"""The distorting field of a two-mode Gaussian resource.

The distorting field is the one-mode state whose normally ordered
characteristic function is chi_AB(lambda^*, lambda). Since
D_1(lambda^*) D_2(lambda) = exp(lambda^* A^dag - lambda A) with
A = a_1 - a_2^dag, it is the classical state whose P function is the joint law
of (-Q, P). Its mean is therefore (-<Q>, <P>) and its covariance matrix is
I/2 plus the covariance of (-Q, P).
"""

import dataclasses
import math
from typing import Any, Mapping, Optional

import numpy as np
from scipy import stats

from cvteleport.common import epr
from cvteleport.common import gaussian
from cvteleport.model import config as config_lib
from cvteleport.model import fock

# Maps (Q, P) onto the P-function coordinates of the distorting field.
_REFLECTION = np.diag([-1.0, 1.0])


class DistributionalLimitError(gaussian.Error):
  """Raised when the P function of a field is a distribution, not a density."""


@dataclasses.dataclass(frozen=True, eq=False)
class DistortingFieldState:
  state: gaussian.GaussianState
  source_epr: epr.EprMoments

  @property
  def normal_cov(self) -> np.ndarray:
    """Normally ordered covariance matrix V - I/2."""
    return self.state.cov - 0.5 * np.eye(2)

  def to_dict(self) -> Mapping[str, Any]:
    return {
        'state': gaussian.to_dict(self.state),
        'source_epr': self.source_epr.to_dict(),
        'classical': is_classical(self),
        'thermal': is_thermal(self),
        'mean_photon_number': mean_photon_number(self),
    }


def distorting_field(resource: gaussian.GaussianState) -> DistortingFieldState:
  """Builds the distorting field of a two-mode resource.

  Args:
    resource: Physical two-mode Gaussian state.

  Returns:
    DistortingFieldState with covariance
    [[1/2 + Var Q, -Cov(Q, P)], [-Cov(Q, P), 1/2 + Var P]].

  Raises:
    ValueError: If the resource does not have two modes.
    UnphysicalStateError: If the resource violates the uncertainty relation.
  """
  if resource.n_modes != 2:
    raise ValueError(
        f'Resource must have two modes, got {resource.n_modes}.')
  gaussian.validate_physical(resource, 'resource')
  mean, cov = epr.epr_quadrature_moments(resource)
  state = gaussian.GaussianState(
      mean=_REFLECTION @ mean,
      cov=0.5 * np.eye(2) + _REFLECTION @ cov @ _REFLECTION)
  return DistortingFieldState(state=state, source_epr=epr.epr_moments(resource))


def normally_ordered_cf(d: DistortingFieldState, lam: Any) -> np.ndarray:
  """chi^(N)(lambda) = exp(|lambda|^2/2) chi(lambda); vectorized over lam."""
  lam = np.asarray(lam, dtype=np.complex128)
  return np.exp(0.5 * np.abs(lam)**2) * gaussian.characteristic_function(
      d.state, lam)


def _amplitude_coordinates(alpha: Any) -> np.ndarray:
  alpha = np.asarray(alpha, dtype=np.complex128)
  return np.sqrt(2.0) * np.stack([alpha.real, alpha.imag], axis=-1)


def is_classical(d: DistortingFieldState) -> bool:
  """V - I/2 >= 0 up to the physicality floor."""
  return bool(np.min(np.linalg.eigvalsh(d.normal_cov)) >= -gaussian.PSD_FLOOR)


def is_thermal(d: DistortingFieldState, atol: float = 1e-12) -> bool:
  normal = d.normal_cov
  return bool(
      np.all(np.abs(d.state.mean) <= atol) and abs(normal[0, 1]) <= atol and
      abs(normal[0, 0] - normal[1, 1]) <= atol)


def p_function(d: DistortingFieldState,
               alpha: Any,
               classical_margin: Optional[float] = None) -> np.ndarray:
  """Glauber-Sudarshan P function at alpha.

  With x = sqrt(2) (Re alpha, Im alpha), P(alpha) = 2 phi(x) for phi the
  normal density with the field's mean and normally ordered covariance.

  Args:
    d: Distorting field.
    alpha: Complex point or array of points.
    classical_margin: Smallest admissible eigenvalue of V - I/2.

  Returns:
    Density values with the shape of alpha.

  Raises:
    DistributionalLimitError: If V - I/2 is singular, so that P is a delta
      distribution along some direction.
  """
  if classical_margin is None:
    classical_margin = config_lib.CONFIG.distorting_field.classical_margin
  min_eigenvalue = np.min(np.linalg.eigvalsh(d.normal_cov))
  if min_eigenvalue <= classical_margin:
    raise DistributionalLimitError(
        f'P function is singular: normally ordered covariance has eigenvalue '
        f'{min_eigenvalue:.3e}.')
  x = _amplitude_coordinates(alpha)
  density = stats.multivariate_normal(mean=d.state.mean, cov=d.normal_cov)
  return 2.0 * np.reshape(density.pdf(x), np.shape(alpha))


def q_function(d: DistortingFieldState, beta: Any) -> np.ndarray:
  """Husimi function (1/pi) <beta|rho|beta>, the smoothing of P by the vacuum."""
  x = _amplitude_coordinates(beta)
  density = stats.multivariate_normal(
      mean=d.state.mean, cov=d.state.cov + 0.5 * np.eye(2))
  return 2.0 * np.reshape(density.pdf(x), np.shape(beta))


def r_function(d: DistortingFieldState, beta_conj: complex,
               beta_prime: complex) -> complex:
  """Glauber R function R(beta^*, beta').

  <beta|rho|beta'> = exp(-(|beta|^2 + |beta'|^2)/2) R(beta^*, beta'). For a
  Gaussian P function N(d, N) in x coordinates, with
  c = ((b* + b') / sqrt(2), i (b* - b') / sqrt(2)) and v = c - d,

    R = det(I + N)^(-1/2) exp(-|d|^2/2 + c^T d + v^T N (I + N)^-1 v / 2),

  which stays finite for singular N.
  """
  mean = d.state.mean
  normal = d.normal_cov
  c = np.array([beta_conj + beta_prime,
                1j * (beta_conj - beta_prime)]) / np.sqrt(2.0)
  v = c - mean
  kernel = np.eye(2) + normal
  exponent = (-0.5 * mean @ mean + c @ mean +
              0.5 * v @ normal @ np.linalg.solve(kernel, v))
  return complex(np.exp(exponent) / np.sqrt(np.linalg.det(kernel)))


def fock_matrix(d: DistortingFieldState,
                cutoff: int,
                max_deficit: Optional[float] = None,
                method: str = 'auto') -> fock.FockMatrix:
  """Number-basis matrix of the field; see fock.fock_matrix_from_state."""
  return fock.fock_matrix_from_state(
      d.state, cutoff, max_deficit=max_deficit, method=method)


def photon_distribution(d: DistortingFieldState,
                        cutoff: int,
                        max_deficit: Optional[float] = None) -> np.ndarray:
  diagonal = fock_matrix(d, cutoff, max_deficit=max_deficit).diagonal()
  return np.clip(diagonal, 0.0, None)


def generating_function(d: DistortingFieldState, s: float) -> float:
  """G(s) = sum_l s^l p_l = <exp((s - 1) Delta)>.

  Raises:
    ValueError: If |s| > 1.
  """
  if abs(s) > 1:
    raise ValueError(f'Generating function needs |s| <= 1, got {s}.')
  return epr.exp_quadratic_moment(d.state.mean, d.normal_cov, 1.0 - s)


def correlation_function(d: DistortingFieldState, l: int, m: int) -> complex:
  """Normally ordered moment <(a^dag)^l a^m> of the field.

  The P function makes alpha = m0 + z with z a centered complex Gaussian,
  <z^* z> = n and <z z> = s. Expanding the moment generating function
  exp(u m0^* + v m0 + (u^2 s^* + v^2 s)/2 + u v n) gives a triple sum.

  Raises:
    ValueError: If l or m is negative.
  """
  if l < 0 or m < 0:
    raise ValueError(f'Indices must be non-negative, got l={l}, m={m}.')
  normal = d.normal_cov
  m0 = complex(d.state.mean[0], d.state.mean[1]) / np.sqrt(2.0)
  n = 0.5 * (normal[0, 0] + normal[1, 1])
  s = 0.5 * complex(normal[0, 0] - normal[1, 1], 2 * normal[0, 1])
  total = 0j
  for k in range(min(l, m) + 1):
    for j1 in range((l - k) // 2 + 1):
      a = l - k - 2 * j1
      left = (np.conj(s) / 2)**j1 / math.factorial(j1) * (
          np.conj(m0)**a / math.factorial(a))
      for j2 in range((m - k) // 2 + 1):
        b = m - k - 2 * j2
        right = (s / 2)**j2 / math.factorial(j2) * (m0**b / math.factorial(b))
        total += n**k / math.factorial(k) * left * right
  return complex(math.factorial(l) * math.factorial(m) * total)


def mean_photon_number(d: DistortingFieldState) -> float:
  return correlation_function(d, 1, 1).real
