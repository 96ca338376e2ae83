"""Gaussian state data type and phase-space operations.

States are described by their first and second moments in the quadrature
convention q = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)), hbar = 1, so
that the vacuum has variance 1/2 in every quadrature. Moment vectors are
interleaved per mode: (q1, p1, q2, p2, ...).

The Weyl displacement is D(lambda) = exp(lambda a^dag - lambda^* a). Writing
lambda = lambda_x + i lambda_y, D(lambda) = exp(i xi^T x) with
xi = sqrt(2) (lambda_y, -lambda_x), hence the characteristic function of a
Gaussian state is chi(lambda) = exp(i xi^T d - xi^T V xi / 2).
"""

import dataclasses
import json
from typing import Any, Mapping, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

# Relative tolerance for the symmetry of covariance matrices.
SYMMETRY_RTOL = 1e-12
# Eigenvalue floor of V + (i/2) J; pure states sit exactly on the boundary.
PSD_FLOOR = 1e-10
# Entrywise tolerance for S^T J S = J.
SYMPLECTIC_ATOL = 1e-10

VACUUM_VARIANCE = 0.5
ORDERINGS = ('xpxp', 'xxpp')

ComplexAmplitudes = Union[complex, Sequence[complex], np.ndarray]


class Error(Exception):
  """Base class for exceptions raised by cvteleport."""


class UnphysicalStateError(Error):
  """Raised when moments violate the Robertson-Schroedinger relation."""


class NotSymplecticError(Error):
  """Raised when a matrix does not preserve the symplectic form."""


def symplectic_form(n_modes: int) -> np.ndarray:
  """Block-diagonal J built from [[0, 1], [-1, 0]] per mode."""
  return np.kron(np.eye(n_modes), np.array([[0., 1.], [-1., 0.]]))


def _is_symmetric(matrix: np.ndarray) -> bool:
  scale = max(1.0, float(np.max(np.abs(matrix))))
  return bool(np.all(np.abs(matrix - matrix.T) <= SYMMETRY_RTOL * scale))


@dataclasses.dataclass(frozen=True, eq=False)
class GaussianState:
  """Multimode Gaussian state given by its mean vector and covariance matrix."""

  # Quadrature means in (q1, p1, ..., qn, pn) order.
  mean: np.ndarray  # [2 * n_modes]

  # Symmetrized covariance matrix, same ordering; vacuum is 0.5 * I.
  cov: np.ndarray  # [2 * n_modes, 2 * n_modes]

  def __post_init__(self):
    mean = np.array(self.mean, dtype=np.float64)
    cov = np.array(self.cov, dtype=np.float64)
    if mean.ndim != 1 or mean.shape[0] == 0 or mean.shape[0] % 2:
      raise ValueError(
          f'Mean must be a vector of even length, got shape {mean.shape}.')
    if cov.shape != (mean.shape[0], mean.shape[0]):
      raise ValueError(
          f'Covariance shape {cov.shape} does not match mean of length '
          f'{mean.shape[0]}.')
    if not _is_symmetric(cov):
      raise ValueError('Covariance matrix is not symmetric.')
    mean.setflags(write=False)
    cov.setflags(write=False)
    object.__setattr__(self, 'mean', mean)
    object.__setattr__(self, 'cov', cov)

  @property
  def n_modes(self) -> int:
    return self.mean.shape[0] // 2


def check_physical(cov: np.ndarray) -> Tuple[bool, float]:
  """Tests V + (i/2) J >= 0.

  Args:
    cov: [2n, 2n] real symmetric covariance matrix.

  Returns:
    Tuple of the verdict and the minimum eigenvalue of V + (i/2) J.

  Raises:
    ValueError: If `cov` is not square, even-dimensional and symmetric.
  """
  cov = np.asarray(cov, dtype=np.float64)
  if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
    raise ValueError(
        f'Covariance must be square with even dimension, got {cov.shape}.')
  if not _is_symmetric(cov):
    raise ValueError('Covariance matrix is not symmetric.')
  hermitian = cov + 0.5j * symplectic_form(cov.shape[0] // 2)
  min_eigenvalue = float(np.min(np.linalg.eigvalsh(hermitian)))
  return min_eigenvalue >= -PSD_FLOOR, min_eigenvalue


def validate_physical(state: GaussianState, name: str = 'state'):
  """Raises UnphysicalStateError unless the state obeys the uncertainty relation."""
  physical, min_eigenvalue = check_physical(state.cov)
  if not physical:
    raise UnphysicalStateError(
        f'The {name} violates V + iJ/2 >= 0 (minimum eigenvalue '
        f'{min_eigenvalue:.3e}).')


def purity(state: GaussianState) -> float:
  """Tr[rho^2] = 1 / sqrt(det(2V))."""
  return float(1.0 / np.sqrt(np.linalg.det(2.0 * state.cov)))


def vacuum(n_modes: int) -> GaussianState:
  if n_modes < 1:
    raise ValueError(f'Number of modes must be positive, got {n_modes}.')
  return GaussianState(
      mean=np.zeros(2 * n_modes), cov=VACUUM_VARIANCE * np.eye(2 * n_modes))


def _amplitudes_to_quadratures(alphas: ComplexAmplitudes,
                               n_modes: int) -> np.ndarray:
  alphas = np.atleast_1d(np.asarray(alphas, dtype=np.complex128))
  if alphas.shape != (n_modes,):
    raise ValueError(
        f'Expected {n_modes} complex amplitudes, got shape {alphas.shape}.')
  shift = np.empty(2 * n_modes)
  shift[0::2] = np.sqrt(2.0) * alphas.real
  shift[1::2] = np.sqrt(2.0) * alphas.imag
  return shift


def coherent(alpha: complex) -> GaussianState:
  """Coherent state D(alpha)|0>."""
  return GaussianState(
      mean=_amplitudes_to_quadratures(alpha, 1),
      cov=VACUUM_VARIANCE * np.eye(2))


def thermal(nbar: float) -> GaussianState:
  """One-mode thermal state with mean photon number `nbar`."""
  if nbar < 0:
    raise ValueError(f'Mean photon number must be non-negative, got {nbar}.')
  return GaussianState(mean=np.zeros(2), cov=(nbar + 0.5) * np.eye(2))


def two_mode_squeezed_vacuum(r: float) -> GaussianState:
  """Two-mode squeezed vacuum (cosh r)^-1 sum_n (tanh r)^n |n, n>."""
  if r < 0:
    raise ValueError(f'Squeezing parameter must be non-negative, got {r}.')
  diagonal = 0.5 * np.cosh(2 * r) * np.eye(2)
  cross = 0.5 * np.sinh(2 * r) * np.diag([1.0, -1.0])
  return GaussianState(
      mean=np.zeros(4), cov=np.block([[diagonal, cross], [cross, diagonal]]))


def two_mode_squeezed_thermal(r: float, nbar: float) -> GaussianState:
  """Two-mode squeezer applied to a pair of equal thermal modes."""
  if nbar < 0:
    raise ValueError(f'Mean photon number must be non-negative, got {nbar}.')
  svs = two_mode_squeezed_vacuum(r)
  return GaussianState(mean=svs.mean, cov=(2 * nbar + 1) * svs.cov)


def quadrature_argument(lambdas: np.ndarray) -> np.ndarray:
  """Maps complex Weyl arguments [..., n] to real vectors xi [..., 2n]."""
  lambdas = np.asarray(lambdas, dtype=np.complex128)
  xi = np.empty(lambdas.shape[:-1] + (2 * lambdas.shape[-1],))
  xi[..., 0::2] = np.sqrt(2.0) * lambdas.imag
  xi[..., 1::2] = -np.sqrt(2.0) * lambdas.real
  return xi


def characteristic_function(state: GaussianState,
                            lambdas: ComplexAmplitudes) -> np.ndarray:
  """Evaluates chi(lambda_1, ..., lambda_n) = Tr[rho D(lambda_1)...D(lambda_n)].

  Args:
    state: Gaussian state.
    lambdas: [..., n_modes] complex arguments. For one-mode states any array
      of scalars is accepted and treated as a batch of arguments.

  Returns:
    Complex array with the batch shape of `lambdas`.

  Raises:
    ValueError: If the trailing dimension does not match the number of modes.
  """
  lambdas = np.asarray(lambdas, dtype=np.complex128)
  if state.n_modes == 1 and (lambdas.ndim == 0 or lambdas.shape[-1] != 1):
    lambdas = lambdas[..., None]
  if lambdas.ndim == 0 or lambdas.shape[-1] != state.n_modes:
    raise ValueError(
        f'Expected {state.n_modes} arguments per point, got shape '
        f'{lambdas.shape}.')
  xi = quadrature_argument(lambdas)
  quadratic = np.einsum('...i,ij,...j->...', xi, state.cov, xi)
  linear = xi @ state.mean
  return np.exp(1j * linear - 0.5 * quadratic)


def displace(state: GaussianState, alphas: ComplexAmplitudes) -> GaussianState:
  """Applies D(alpha_1) x ... x D(alpha_n); the covariance is unchanged."""
  shift = _amplitudes_to_quadratures(alphas, state.n_modes)
  return GaussianState(mean=state.mean + shift, cov=state.cov)


@dataclasses.dataclass(frozen=True, eq=False)
class SymplecticMatrix:
  """Real 2n x 2n matrix with S^T J S = J."""

  matrix: np.ndarray

  def __post_init__(self):
    matrix = np.array(self.matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or (
        matrix.shape[0] % 2):
      raise ValueError(
          f'Symplectic matrix must be square with even dimension, got '
          f'{matrix.shape}.')
    j = symplectic_form(matrix.shape[0] // 2)
    deviation = np.max(np.abs(matrix.T @ j @ matrix - j))
    if deviation > SYMPLECTIC_ATOL:
      raise NotSymplecticError(
          f'S^T J S deviates from J by {deviation:.3e}.')
    matrix.setflags(write=False)
    object.__setattr__(self, 'matrix', matrix)

  @property
  def n_modes(self) -> int:
    return self.matrix.shape[0] // 2

  def __matmul__(self, other: 'SymplecticMatrix') -> 'SymplecticMatrix':
    return SymplecticMatrix(self.matrix @ other.matrix)


def apply_symplectic(
    state: GaussianState,
    s: Union[SymplecticMatrix, np.ndarray]) -> GaussianState:
  """mean -> S mean, cov -> S cov S^T."""
  if not isinstance(s, SymplecticMatrix):
    s = SymplecticMatrix(s)
  if s.n_modes != state.n_modes:
    raise ValueError(
        f'Symplectic matrix acts on {s.n_modes} modes, state has '
        f'{state.n_modes}.')
  cov = s.matrix @ state.cov @ s.matrix.T
  return GaussianState(mean=s.matrix @ state.mean, cov=0.5 * (cov + cov.T))


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
  return GaussianState(
      mean=np.concatenate([a.mean, b.mean]),
      cov=scipy.linalg.block_diag(a.cov, b.cov))


def reduce(state: GaussianState, modes: Sequence[int]) -> GaussianState:
  """Partial trace keeping `modes`, in the given order."""
  for mode in modes:
    if not 0 <= mode < state.n_modes:
      raise ValueError(f'Mode {mode} out of range for {state.n_modes} modes.')
  index = np.ravel([[2 * m, 2 * m + 1] for m in modes])
  return GaussianState(
      mean=state.mean[index], cov=state.cov[np.ix_(index, index)])


def _check_modes(n_modes: int, *modes: int):
  for mode in modes:
    if not 0 <= mode < n_modes:
      raise ValueError(f'Mode {mode} out of range for {n_modes} modes.')
  if len(set(modes)) != len(modes):
    raise ValueError(f'Modes must be distinct, got {modes}.')


def phase_rotation(theta: float, mode: int, n_modes: int) -> SymplecticMatrix:
  """a -> a exp(-i theta) on `mode`."""
  _check_modes(n_modes, mode)
  c, s = np.cos(theta), np.sin(theta)
  matrix = np.eye(2 * n_modes)
  matrix[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = [[c, s], [-s, c]]
  return SymplecticMatrix(matrix)


def single_mode_squeezer(r: float, phi: float, mode: int,
                         n_modes: int) -> SymplecticMatrix:
  """Squeezes the quadrature at angle phi / 2 by exp(-r)."""
  _check_modes(n_modes, mode)
  c, s = np.cos(phi / 2), np.sin(phi / 2)
  rotation = np.array([[c, -s], [s, c]])
  block = rotation @ np.diag([np.exp(-r), np.exp(r)]) @ rotation.T
  matrix = np.eye(2 * n_modes)
  matrix[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = block
  return SymplecticMatrix(matrix)


def beamsplitter(theta: float, mode_i: int, mode_j: int,
                 n_modes: int) -> SymplecticMatrix:
  """Lossless beamsplitter mixing both quadratures of modes i and j.

  Output i is cos(theta) x_i - sin(theta) x_j and output j is
  sin(theta) x_i + cos(theta) x_j, for x = q and x = p alike.

  Args:
    theta: Mixing angle; pi / 4 is the balanced beamsplitter.
    mode_i: First mode.
    mode_j: Second mode.
    n_modes: Total number of modes.

  Returns:
    The symplectic matrix, identity on all other modes.

  Raises:
    ValueError: If the modes coincide or are out of range.
  """
  _check_modes(n_modes, mode_i, mode_j)
  c, s = np.cos(theta), np.sin(theta)
  matrix = np.eye(2 * n_modes)
  for offset in (0, 1):
    i, j = 2 * mode_i + offset, 2 * mode_j + offset
    matrix[i, i], matrix[i, j] = c, -s
    matrix[j, i], matrix[j, j] = s, c
  return SymplecticMatrix(matrix)


def beamsplitter_50_50(mode_i: int, mode_j: int,
                       n_modes: int) -> SymplecticMatrix:
  """Balanced beamsplitter.

  Output mode i carries q_A = (q_i - q_j)/sqrt(2) and output mode j carries
  p_A = (p_i + p_j)/sqrt(2); these are the commuting quadratures read out by
  the double homodyne measurement.
  """
  return beamsplitter(np.pi / 4, mode_i, mode_j, n_modes)


def two_mode_squeezer(r: float, mode_i: int, mode_j: int,
                      n_modes: int) -> SymplecticMatrix:
  _check_modes(n_modes, mode_i, mode_j)
  c, s = np.cosh(r), np.sinh(r)
  matrix = np.eye(2 * n_modes)
  index = [2 * mode_i, 2 * mode_i + 1, 2 * mode_j, 2 * mode_j + 1]
  matrix[np.ix_(index, index)] = [
      [c, 0, s, 0],
      [0, c, 0, -s],
      [s, 0, c, 0],
      [0, -s, 0, c],
  ]
  return SymplecticMatrix(matrix)


def _xxpp_permutation(n_modes: int) -> np.ndarray:
  return np.ravel([[k, n_modes + k] for k in range(n_modes)])


def xxpp_to_xpxp(array: np.ndarray) -> np.ndarray:
  """Reorders a vector or matrix from (q1..qn, p1..pn) to (q1, p1, ...)."""
  array = np.asarray(array, dtype=np.float64)
  perm = _xxpp_permutation(array.shape[0] // 2)
  if array.ndim == 1:
    return array[perm]
  return array[np.ix_(perm, perm)]


def xpxp_to_xxpp(array: np.ndarray) -> np.ndarray:
  """Inverse of `xxpp_to_xpxp`."""
  array = np.asarray(array, dtype=np.float64)
  inverse = np.argsort(_xxpp_permutation(array.shape[0] // 2))
  if array.ndim == 1:
    return array[inverse]
  return array[np.ix_(inverse, inverse)]


def to_dict(state: GaussianState) -> Mapping[str, Any]:
  return {
      'n_modes': state.n_modes,
      'mean': state.mean.tolist(),
      'cov': state.cov.tolist(),
  }


def from_dict(data: Mapping[str, Any]) -> GaussianState:
  """Builds a state from its serialized form and enforces its invariants.

  Args:
    data: Mapping with keys 'n_modes', 'mean', 'cov' and optionally
      'ordering' ('xpxp', the default, or 'xxpp').

  Returns:
    The validated GaussianState in xpxp ordering.

  Raises:
    ValueError: If keys are missing or shapes are inconsistent.
    UnphysicalStateError: If the covariance violates the uncertainty relation.
  """
  missing = {'n_modes', 'mean', 'cov'} - set(data)
  if missing:
    raise ValueError(f'Gaussian state is missing keys: {sorted(missing)}.')
  ordering = data.get('ordering', 'xpxp')
  if ordering not in ORDERINGS:
    raise ValueError(f'Unknown ordering {ordering!r}, expected {ORDERINGS}.')
  mean = np.asarray(data['mean'], dtype=np.float64)
  cov = np.asarray(data['cov'], dtype=np.float64)
  if mean.shape != (2 * int(data['n_modes']),):
    raise ValueError(
        f'n_modes={data["n_modes"]} does not match mean of shape '
        f'{mean.shape}.')
  if ordering == 'xxpp':
    mean, cov = xxpp_to_xpxp(mean), xxpp_to_xpxp(cov)
  state = GaussianState(mean=mean, cov=cov)
  validate_physical(state)
  return state


def to_json(state: GaussianState) -> str:
  return json.dumps(to_dict(state))


def from_json(text: str) -> GaussianState:
  return from_dict(json.loads(text))
