"""Monte Carlo execution of the teleportation protocol.

The input (mode 0) is mixed with the sender's half of the resource (mode 1)
on a balanced beamsplitter. Ideal homodyne detection reads q of output mode 0
and p of output mode 1, which are q_A = (q_in - q_1)/sqrt(2) and
p_A = (p_in + p_1)/sqrt(2). Conditioning the joint Gaussian on the outcome
mu = q_A + i p_A leaves the receiver's mode 2 in a Gaussian state whose
covariance does not depend on the outcome; the receiver then applies D(mu).
"""

import concurrent.futures
import csv
import dataclasses
import json
from typing import Any, Mapping, Optional, Sequence, Tuple

from absl import logging
import numpy as np
from scipy import stats
import tqdm

from cvteleport.common import gaussian
from cvteleport.common import utils
from cvteleport.model import config as config_lib
from cvteleport.model import prng

# Quadrature indices in the three-mode state after the beamsplitter.
MEASURED = np.array([0, 3])
RECEIVER = np.array([4, 5])

# Smallest eigenvalue of the measured covariance accepted for conditioning.
_MEASUREMENT_FLOOR = 1e-14


class MeasurementError(gaussian.Error):
  """Raised when the measured quadratures have a singular covariance."""


@dataclasses.dataclass(frozen=True)
class ProtocolConfig:
  n_samples: int
  seed: int = 0
  record_outcomes: bool = False
  shard_size: int = 16384
  num_workers: int = 1
  show_progress: bool = False

  def __post_init__(self):
    if self.n_samples < 1:
      raise ValueError(f'n_samples must be at least 1, got {self.n_samples}.')
    if not 0 <= self.seed < prng.MAX_SEED:
      raise ValueError(
          f'Seed must be an unsigned 64-bit integer, got {self.seed}.')
    if self.shard_size < 1 or self.num_workers < 1:
      raise ValueError(
          f'shard_size and num_workers must be positive, got '
          f'{self.shard_size} and {self.num_workers}.')

  @classmethod
  def from_config(cls, n_samples: int, seed: int = 0,
                  record_outcomes: bool = False,
                  config: Optional[Any] = None) -> 'ProtocolConfig':
    config = config or config_lib.CONFIG.simulator
    return cls(
        n_samples=n_samples,
        seed=seed,
        record_outcomes=record_outcomes,
        shard_size=config.shard_size,
        num_workers=config.num_workers)


@dataclasses.dataclass(frozen=True, eq=False)
class OutcomeDistribution:
  """Gaussian law of the measured pair (q_A, p_A)."""
  mean: np.ndarray  # [2]
  cov: np.ndarray  # [2, 2]

  def density(self, q: Any, p: Any) -> np.ndarray:
    points = np.stack(np.broadcast_arrays(q, p), axis=-1)
    values = stats.multivariate_normal(mean=self.mean, cov=self.cov).pdf(points)
    return np.reshape(values, points.shape[:-1])


@dataclasses.dataclass(frozen=True, eq=False)
class MomentEstimate:
  """Sample mean and covariance with jackknife standard errors."""
  mean: np.ndarray  # [2]
  cov: np.ndarray  # [2, 2]
  mean_se: np.ndarray  # [2]
  cov_se: np.ndarray  # [2, 2]

  def to_dict(self) -> Mapping[str, Any]:
    return {
        'mean': self.mean.tolist(),
        'cov': self.cov.tolist(),
        'mean_se': self.mean_se.tolist(),
        'cov_se': self.cov_se.tolist(),
    }


@dataclasses.dataclass(frozen=True, eq=False)
class EnsembleEstimate:
  """Moments of the averaged output state estimated from the protocol runs."""
  mean_hat: np.ndarray  # [2]
  cov_hat: np.ndarray  # [2, 2]
  mean_se: np.ndarray  # [2]
  cov_se: np.ndarray  # [2, 2]
  n_samples: int
  # Sample moments of the measured outcomes mu = (q, p).
  outcome_moments: MomentEstimate
  seed: int
  rng_algorithm: str = prng.RNG_ALGORITHM
  # [n_samples, 2] outcomes when recording was requested.
  outcomes: Optional[np.ndarray] = None

  @property
  def standard_errors(self) -> Tuple[np.ndarray, np.ndarray]:
    return self.mean_se, self.cov_se

  def to_dict(self) -> Mapping[str, Any]:
    return {
        'mean_hat': self.mean_hat.tolist(),
        'cov_hat': self.cov_hat.tolist(),
        'standard_errors': {
            'mean': self.mean_se.tolist(),
            'cov': self.cov_se.tolist(),
        },
        'n_samples': self.n_samples,
        'outcome_moments': self.outcome_moments.to_dict(),
        'seed': self.seed,
        'rng_algorithm': self.rng_algorithm,
    }

  def to_json(self) -> str:
    return json.dumps(self.to_dict())

  def write_outcomes_csv(self, path: str):
    """Writes one "sample,q,p" row per recorded outcome."""
    if self.outcomes is None:
      raise ValueError('Outcomes were not recorded for this estimate.')
    with open(path, 'w', newline='') as f:
      writer = csv.writer(f)
      writer.writerow(['sample', 'q', 'p'])
      for index, (q, p) in enumerate(self.outcomes):
        writer.writerow([index, repr(float(q)), repr(float(p))])


@dataclasses.dataclass(frozen=True, eq=False)
class ComparisonReport:
  """Per-entry z-scores of an estimate against a prediction."""
  z_mean: np.ndarray  # [2]
  z_cov: np.ndarray  # [2, 2]
  max_abs_z: float
  threshold: float
  passed: bool

  def to_dict(self) -> Mapping[str, Any]:
    return {
        'z_mean': self.z_mean.tolist(),
        'z_cov': self.z_cov.tolist(),
        'max_abs_z': self.max_abs_z,
        'threshold': self.threshold,
        'passed': self.passed,
    }


def post_measurement_state(
    input_state: gaussian.GaussianState,
    resource: gaussian.GaussianState) -> gaussian.GaussianState:
  """Three-mode state (input, sender, receiver) after the beamsplitter.

  Raises:
    ValueError: On wrong mode counts.
    UnphysicalStateError: If either state is unphysical.
  """
  if input_state.n_modes != 1 or resource.n_modes != 2:
    raise ValueError(
        f'Expected a one-mode input and a two-mode resource, got '
        f'{input_state.n_modes} and {resource.n_modes} modes.')
  gaussian.validate_physical(input_state, 'input state')
  gaussian.validate_physical(resource, 'resource')
  return gaussian.apply_symplectic(
      gaussian.tensor(input_state, resource),
      gaussian.beamsplitter_50_50(0, 1, 3))


def outcome_distribution(
    input_state: gaussian.GaussianState,
    resource: gaussian.GaussianState) -> OutcomeDistribution:
  state = post_measurement_state(input_state, resource)
  return OutcomeDistribution(
      mean=state.mean[MEASURED].copy(),
      cov=state.cov[np.ix_(MEASURED, MEASURED)].copy())


def _conditioning(
    state: gaussian.GaussianState) -> Tuple[np.ndarray, np.ndarray]:
  """Gain K = V_Bm V_mm^-1 and Schur complement V_BB - K V_mB."""
  v_mm = state.cov[np.ix_(MEASURED, MEASURED)]
  v_mb = state.cov[np.ix_(MEASURED, RECEIVER)]
  v_bb = state.cov[np.ix_(RECEIVER, RECEIVER)]
  min_eigenvalue = np.min(np.linalg.eigvalsh(v_mm))
  if min_eigenvalue <= _MEASUREMENT_FLOOR:
    raise MeasurementError(
        f'Measured covariance is singular (eigenvalue {min_eigenvalue:.3e}).')
  gain = np.linalg.solve(v_mm, v_mb).T
  cond_cov = v_bb - gain @ v_mb
  return gain, 0.5 * (cond_cov + cond_cov.T)


def conditional_b_state(input_state: gaussian.GaussianState,
                        resource: gaussian.GaussianState,
                        outcome: Sequence[float]) -> gaussian.GaussianState:
  """Receiver's state given the homodyne outcome (q, p), before correction."""
  state = post_measurement_state(input_state, resource)
  gain, cond_cov = _conditioning(state)
  outcome = np.asarray(outcome, dtype=np.float64)
  cond_mean = state.mean[RECEIVER] + gain @ (outcome - state.mean[MEASURED])
  return gaussian.GaussianState(mean=cond_mean, cov=cond_cov)


def _jackknife_moments(samples: np.ndarray) -> MomentEstimate:
  """Sample moments with delete-one jackknife standard errors.

  Leave-one-out means are the mean minus e_i / (n - 1) and leave-one-out
  scatter matrices are S - n e_i e_i^T / (n - 1), with e_i the centered
  samples, so the replicates never have to be materialized.
  """
  n = samples.shape[0]
  mean = samples.mean(axis=0)
  centered = samples - mean
  scatter = centered.T @ centered
  scatter = 0.5 * (scatter + scatter.T)
  cov = scatter / (n - 1) if n > 1 else np.full((2, 2), np.nan)
  if n < 3:
    return MomentEstimate(
        mean=mean, cov=cov, mean_se=np.full(2, np.nan),
        cov_se=np.full((2, 2), np.nan))
  mean_se = np.sqrt((n - 1) / n * np.sum(
      (centered / (n - 1))**2, axis=0))
  products = centered[:, :, None] * centered[:, None, :]
  deviation = products - scatter / n
  scale = n / ((n - 1) * (n - 2))
  cov_se = np.sqrt((n - 1) / n * scale**2 * np.sum(deviation**2, axis=0))
  return MomentEstimate(mean=mean, cov=cov, mean_se=mean_se, cov_se=cov_se)


def _shard_sizes(n_samples: int, shard_size: int) -> Sequence[int]:
  full, rest = divmod(n_samples, shard_size)
  return [shard_size] * full + ([rest] if rest else [])


def run_protocol(input_state: gaussian.GaussianState,
                 resource: gaussian.GaussianState,
                 config: ProtocolConfig) -> EnsembleEstimate:
  """Samples outcomes, conditions, corrects with unit gain and averages.

  Each shard of outcomes is drawn from its own substream of the seed and the
  shards are concatenated in index order, so the estimate does not depend on
  the number of workers.

  Args:
    input_state: One-mode Gaussian input.
    resource: Two-mode Gaussian resource.
    config: Sample count, seed and execution options.

  Returns:
    EnsembleEstimate of the output moments, deterministic given the seed.
  """
  state = post_measurement_state(input_state, resource)
  gain, cond_cov = _conditioning(state)
  outcome_mean = state.mean[MEASURED]
  outcome_chol = np.linalg.cholesky(state.cov[np.ix_(MEASURED, MEASURED)])

  sizes = _shard_sizes(config.n_samples, config.shard_size)
  keys = prng.key_from_seed(config.seed).fold_in_range(len(sizes))
  logging.info('Sampling %d outcomes in %d shards on %d workers',
               config.n_samples, len(sizes), config.num_workers)

  def draw(args):
    key, size = args
    z = prng.standard_normal(key, (size, 2))
    return outcome_mean + z @ outcome_chol.T

  with utils.timing(f'protocol sampling of {config.n_samples} outcomes'):
    with concurrent.futures.ThreadPoolExecutor(
        max_workers=config.num_workers) as pool:
      shards = list(
          tqdm.tqdm(
              pool.map(draw, zip(keys, sizes)),
              total=len(sizes),
              disable=not config.show_progress,
              desc='shards'))
  outcomes = np.concatenate(shards, axis=0)

  # Conditional means plus the receiver's displacement by sqrt(2) (q, p).
  corrected = (state.mean[RECEIVER] + (outcomes - outcome_mean) @ gain.T +
               np.sqrt(2.0) * outcomes)
  output_moments = _jackknife_moments(corrected)
  return EnsembleEstimate(
      mean_hat=output_moments.mean,
      cov_hat=cond_cov + output_moments.cov,
      mean_se=output_moments.mean_se,
      cov_se=output_moments.cov_se,
      n_samples=config.n_samples,
      outcome_moments=_jackknife_moments(outcomes),
      seed=config.seed,
      outcomes=outcomes if config.record_outcomes else None)


def _z_scores(estimate: np.ndarray, expected: np.ndarray,
              se: np.ndarray) -> np.ndarray:
  diff = estimate - expected
  with np.errstate(divide='ignore', invalid='ignore'):
    z = diff / se
  return np.where(diff == 0, 0.0, z)


def _compare(mean, cov, mean_se, cov_se, expected_mean, expected_cov,
             threshold) -> ComparisonReport:
  if threshold is None:
    threshold = config_lib.CONFIG.simulator.z_threshold
  z_mean = _z_scores(mean, expected_mean, mean_se)
  z_cov = _z_scores(cov, expected_cov, cov_se)
  max_abs_z = float(np.max(np.abs(np.concatenate([z_mean, z_cov.ravel()]))))
  return ComparisonReport(
      z_mean=z_mean, z_cov=z_cov, max_abs_z=max_abs_z, threshold=threshold,
      passed=bool(max_abs_z < threshold))


def compare_to_analytic(estimate: EnsembleEstimate,
                        analytic: gaussian.GaussianState,
                        threshold: Optional[float] = None) -> ComparisonReport:
  """z-scores of the two means and four covariance entries.

  An entry matching exactly scores zero even when its standard error is zero.
  """
  if analytic.n_modes != 1:
    raise ValueError(
        f'Analytic state must have one mode, got {analytic.n_modes}.')
  return _compare(estimate.mean_hat, estimate.cov_hat, estimate.mean_se,
                  estimate.cov_se, analytic.mean, analytic.cov, threshold)


def compare_outcomes(estimate: EnsembleEstimate,
                     distribution: OutcomeDistribution,
                     threshold: Optional[float] = None) -> ComparisonReport:
  """Checks the sampled outcome moments against their exact law."""
  moments = estimate.outcome_moments
  return _compare(moments.mean, moments.cov, moments.mean_se, moments.cov_se,
                  distribution.mean, distribution.cov, threshold)
