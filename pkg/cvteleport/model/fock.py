"""Number-basis density matrices of one-mode Gaussian states.

General states are handled by inverting the characteristic function,

  rho_lm = (1/pi) int d^2 lambda chi(lambda) <l|D(-lambda)|m>,

on a tensor Gauss-Hermite rule. The Gaussian factor of chi(lambda) times the
exp(-|lambda|^2/2) of the displacement elements is absorbed into the weight
through the Cholesky factor of V + I/2, which leaves a polynomial integrand
(times a phase for displaced states).
"""

import dataclasses
import json
from typing import Any, Mapping, Optional, Tuple

from absl import logging
import ml_collections
import numpy as np
from scipy import special

from cvteleport.common import gaussian
from cvteleport.model import config as config_lib


class TruncationError(gaussian.Error):
  """Raised when the Fock cutoff leaves more weight than allowed."""

  def __init__(self, deficit: float, bound: float, cutoff: int):
    super().__init__(
        f'Truncation deficit {deficit:.3e} at cutoff {cutoff} is not below '
        f'the bound {bound:.3e}.')
    self.deficit = deficit
    self.bound = bound
    self.cutoff = cutoff


class InversionError(gaussian.Error):
  """Raised when an inverted Fock matrix is not a density matrix."""


@dataclasses.dataclass(frozen=True, eq=False)
class FockMatrix:
  """Density matrix truncated to photon numbers 0..cutoff."""

  cutoff: int
  entries: np.ndarray  # complex [cutoff + 1, cutoff + 1]
  # 1 - trace, clipped at zero.
  truncation_deficit: float

  def __post_init__(self):
    entries = np.array(self.entries, dtype=np.complex128)
    if self.cutoff < 1:
      raise ValueError(f'Cutoff must be at least 1, got {self.cutoff}.')
    if entries.shape != (self.cutoff + 1, self.cutoff + 1):
      raise ValueError(
          f'Entries of shape {entries.shape} do not match cutoff '
          f'{self.cutoff}.')
    if np.max(np.abs(entries - entries.conj().T)) > 1e-10:
      raise ValueError('Fock matrix is not Hermitian.')
    entries.setflags(write=False)
    object.__setattr__(self, 'entries', entries)

  def diagonal(self) -> np.ndarray:
    return np.real(np.diag(self.entries)).copy()

  def trace(self) -> float:
    return float(np.sum(self.diagonal()))

  def to_dict(self) -> Mapping[str, Any]:
    return {
        'cutoff': self.cutoff,
        're': self.entries.real.tolist(),
        'im': self.entries.imag.tolist(),
        'deficit': self.truncation_deficit,
    }

  def to_json(self) -> str:
    return json.dumps(self.to_dict())

  @classmethod
  def from_json(cls, text: str) -> 'FockMatrix':
    data = json.loads(text)
    missing = {'cutoff', 're', 'im', 'deficit'} - set(data)
    if missing:
      raise ValueError(f'Fock matrix is missing keys: {sorted(missing)}.')
    entries = np.asarray(data['re']) + 1j * np.asarray(data['im'])
    return cls(
        cutoff=int(data['cutoff']),
        entries=entries,
        truncation_deficit=float(data['deficit']))


def _check_cutoff(cutoff: int):
  if cutoff < 1:
    raise ValueError(f'Cutoff must be at least 1, got {cutoff}.')


def _index_grids(dim: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
  """min(l, m), |l - m| and the l >= m mask on the (l, m) grid."""
  l, m = np.meshgrid(np.arange(dim), np.arange(dim), indexing='ij')
  return np.minimum(l, m), np.abs(l - m), l >= m


def _laguerre_table(x: np.ndarray, dim: int) -> np.ndarray:
  """L_n^(k)(x) for all 0 <= n, k < dim, indexed [..., n, k].

  Three-term recurrence in the degree n, run for every order k at once.
  """
  k = np.arange(dim)
  x = x[..., None]
  table = np.empty(x.shape[:-1] + (dim, dim))
  table[..., 0, :] = 1.0
  if dim > 1:
    table[..., 1, :] = 1.0 + k - x
  for n in range(1, dim - 1):
    table[..., n + 1, :] = (
        (2 * n + 1 + k - x) * table[..., n, :] -
        (n + k) * table[..., n - 1, :]) / (n + 1)
  return table


def _scaled_elements(mu: np.ndarray, dim: int,
                     use_recurrence: bool) -> np.ndarray:
  """exp(|mu|^2/2) <l|D(mu)|m> from associated Laguerre polynomials.

  The factorial ratio sqrt(min(l,m)! / max(l,m)!) is taken in log space.
  """
  low, diff, lower = _index_grids(dim)
  x = np.abs(mu)**2
  if use_recurrence:
    laguerre = _laguerre_table(x, dim)[..., low, diff]
  else:
    laguerre = special.eval_genlaguerre(low, diff, x[..., None, None])
  orders = np.arange(dim)
  # mu^(l-m) below the diagonal, (-mu^*)^(m-l) above it.
  mu_powers = mu[..., None]**orders
  conj_powers = (-np.conj(mu))[..., None]**orders
  base = np.where(lower, mu_powers[..., diff], conj_powers[..., diff])
  norm = np.exp(
      0.5 * (special.gammaln(low + 1) - special.gammaln(low + diff + 1)))
  return norm * base * laguerre


def displacement_matrix_elements(
    mu: Any,
    cutoff: int,
    scaled: bool = False,
    recurrence_threshold: Optional[int] = None) -> np.ndarray:
  """Matrix elements <l|D(mu)|m> for l, m in 0..cutoff.

  Args:
    mu: Complex displacement, scalar or array of any shape.
    cutoff: Largest photon number.
    scaled: If set, the common factor exp(-|mu|^2/2) is omitted.
    recurrence_threshold: The Laguerre polynomials are evaluated one by one
      while 2 * cutoff is at most this value, and by the recurrence in the
      degree above it.

  Returns:
    Complex array of shape mu.shape + (cutoff + 1, cutoff + 1).
  """
  _check_cutoff(cutoff)
  if recurrence_threshold is None:
    recurrence_threshold = config_lib.CONFIG.fock.recurrence_threshold
  mu = np.asarray(mu, dtype=np.complex128)
  elements = _scaled_elements(
      mu, cutoff + 1, use_recurrence=2 * cutoff > recurrence_threshold)
  if not scaled:
    elements = elements * np.exp(-0.5 * np.abs(mu)**2)[..., None, None]
  return elements


def coherent_fock_matrix(alpha: complex, cutoff: int) -> np.ndarray:
  """|alpha><alpha| truncated to 0..cutoff."""
  _check_cutoff(cutoff)
  amplitudes = np.empty(cutoff + 1, dtype=np.complex128)
  amplitudes[0] = np.exp(-0.5 * abs(alpha)**2)
  for l in range(1, cutoff + 1):
    amplitudes[l] = amplitudes[l - 1] * alpha / np.sqrt(l)
  return np.outer(amplitudes, amplitudes.conj())


def thermal_fock_matrix(nbar: float, cutoff: int) -> np.ndarray:
  _check_cutoff(cutoff)
  ratio = nbar / (1.0 + nbar)
  return np.diag(ratio**np.arange(cutoff + 1) / (1.0 + nbar)).astype(
      np.complex128)


def gaussian_fock_matrix(
    state: gaussian.GaussianState,
    cutoff: int,
    num_nodes: Optional[int] = None,
    batch_size: Optional[int] = None,
    recurrence_threshold: Optional[int] = None) -> np.ndarray:
  """Characteristic-function inversion on a Gauss-Hermite grid.

  The weighted integrand is bounded by exp(-|t|^2/2) when V >= I/2, which
  holds for every distorting field; strongly squeezed inputs lose accuracy.

  Args:
    state: One-mode Gaussian state.
    cutoff: Largest photon number.
    num_nodes: Nodes per axis; exact for undisplaced states while
      2 * cutoff < 2 * num_nodes.
    batch_size: Number of nodes whose displacement elements are held at once.
    recurrence_threshold: See displacement_matrix_elements.

  Returns:
    Complex [cutoff + 1, cutoff + 1] Hermitian matrix.
  """
  _check_cutoff(cutoff)
  if state.n_modes != 1:
    raise ValueError(f'Expected a one-mode state, got {state.n_modes} modes.')
  fock_config = config_lib.CONFIG.fock
  num_nodes = num_nodes or fock_config.num_quadrature_nodes
  batch_size = batch_size or fock_config.node_batch_size

  kernel = state.cov + 0.5 * np.eye(2)
  chol = np.linalg.cholesky(kernel)
  nodes, weights = np.polynomial.hermite.hermgauss(num_nodes)
  t = np.stack(np.meshgrid(nodes, nodes, indexing='ij'), axis=-1).reshape(-1, 2)
  w = np.outer(weights, weights).reshape(-1)
  # xi = sqrt(2) L^-T t maps xi^T (V + I/2) xi / 2 onto |t|^2.
  xi = np.sqrt(2.0) * np.linalg.solve(chol.T, t.T).T
  lam = (-xi[:, 1] + 1j * xi[:, 0]) / np.sqrt(2.0)
  coefficients = w * np.exp(1j * xi @ state.mean) / (
      np.pi * np.sqrt(np.linalg.det(kernel)))

  entries = np.zeros((cutoff + 1, cutoff + 1), dtype=np.complex128)
  for start in range(0, lam.shape[0], batch_size):
    stop = start + batch_size
    elements = displacement_matrix_elements(
        -lam[start:stop], cutoff, scaled=True,
        recurrence_threshold=recurrence_threshold)
    entries += np.einsum('k,klm->lm', coefficients[start:stop], elements)
  lower = np.tril(entries, -1)
  return (lower + lower.conj().T +
          np.diag(np.real(np.diag(entries))).astype(np.complex128))


def _check_inversion(entries: np.ndarray, atol: float):
  populations = np.real(np.diag(entries))
  skew = float(np.max(np.abs(entries - entries.conj().T)))
  if skew > atol:
    raise InversionError(f'Inverted matrix is not Hermitian (skew {skew:.3e}).')
  if populations.min() < -atol:
    raise InversionError(
        f'Negative population {populations.min():.3e} at n='
        f'{int(np.argmin(populations))}; the inversion did not converge.')
  if populations.sum() > 1.0 + atol:
    raise InversionError(
        f'Trace {populations.sum():.12g} exceeds one; the inversion did not '
        'converge.')


def fock_matrix_from_state(
    state: gaussian.GaussianState,
    cutoff: int,
    max_deficit: Optional[float] = None,
    method: str = 'auto',
    config: Optional[ml_collections.ConfigDict] = None) -> FockMatrix:
  """Number-basis matrix of a one-mode Gaussian state.

  With method 'auto', states with vanishing normally ordered covariance use
  the coherent closed form, undisplaced states with isotropic normally
  ordered covariance the thermal closed form, and all others the
  characteristic-function inversion.

  Args:
    state: One-mode Gaussian state.
    cutoff: Largest photon number, at least 1.
    max_deficit: If given, the achieved deficit must stay below it.
    method: 'auto' or 'quadrature'.
    config: Fock section of the numerical config.

  Returns:
    FockMatrix with the truncation deficit reported, never renormalized.

  Raises:
    ValueError: On a bad cutoff, method or mode count.
    TruncationError: If the deficit is not below max_deficit.
    InversionError: If the quadrature result has negative populations or
      a trace above one.
  """
  _check_cutoff(cutoff)
  if state.n_modes != 1:
    raise ValueError(f'Expected a one-mode state, got {state.n_modes} modes.')
  if method not in ('auto', 'quadrature'):
    raise ValueError(f'Unknown method {method!r}.')
  config = config or config_lib.CONFIG.fock
  normal = state.cov - 0.5 * np.eye(2)

  if method == 'auto' and np.max(np.abs(normal)) <= config.coherent_atol:
    alpha = (state.mean[0] + 1j * state.mean[1]) / np.sqrt(2.0)
    logging.info('Coherent Fock closed form, alpha=%s', alpha)
    entries = coherent_fock_matrix(alpha, cutoff)
  elif (method == 'auto' and not np.any(state.mean) and
        normal[0, 1] == 0.0 and normal[0, 0] == normal[1, 1]):
    logging.info('Thermal Fock closed form, nbar=%s', normal[0, 0])
    entries = thermal_fock_matrix(normal[0, 0], cutoff)
  else:
    logging.info('Fock matrix by characteristic function inversion, '
                 'cutoff=%d, nodes=%d', cutoff, config.num_quadrature_nodes)
    entries = gaussian_fock_matrix(
        state, cutoff,
        num_nodes=config.num_quadrature_nodes,
        batch_size=config.node_batch_size,
        recurrence_threshold=config.recurrence_threshold)
    _check_inversion(entries, config.inversion_atol)

  deficit = max(0.0, 1.0 - float(np.sum(np.real(np.diag(entries)))))
  logging.info('Fock truncation deficit %.3e at cutoff %d', deficit, cutoff)
  if max_deficit is not None and deficit >= max_deficit:
    raise TruncationError(deficit, max_deficit, cutoff)
  return FockMatrix(cutoff=cutoff, entries=entries, truncation_deficit=deficit)
