"""Counter-based PRNG keys for reproducible protocol sampling."""

import jax
import jax.numpy as jnp
import numpy as np

jax.config.update('jax_enable_x64', True)

RNG_ALGORITHM = 'jax.random.threefry2x32'
MAX_SEED = 2**64


class SafeKey:
  """Safety wrapper for PRNG keys."""

  def __init__(self, key):
    self._key = key
    self._used = False

  def _assert_not_used(self):
    if self._used:
      raise RuntimeError('Random key has been used previously.')

  def get(self):
    self._assert_not_used()
    self._used = True
    return self._key

  def fold_in_range(self, num_keys):
    """Substream keys fold_in(key, k) for k in 0..num_keys-1.

    Key k depends only on the parent key and k, so the number of substreams
    requested never changes the earlier ones.
    """
    self._assert_not_used()
    self._used = True
    return tuple(
        SafeKey(jax.random.fold_in(self._key, k)) for k in range(num_keys))


def key_from_seed(seed: int) -> SafeKey:
  """Key for an unsigned 64-bit seed; high and low words both matter."""
  if not 0 <= seed < MAX_SEED:
    raise ValueError(f'Seed must be an unsigned 64-bit integer, got {seed}.')
  key = jax.random.PRNGKey(seed & 0xFFFFFFFF)
  return SafeKey(jax.random.fold_in(key, seed >> 32))


def standard_normal(safe_key: SafeKey, shape) -> np.ndarray:
  """float64 standard normal draws as a numpy array."""
  return np.asarray(
      jax.random.normal(safe_key.get(), shape, dtype=jnp.float64))
