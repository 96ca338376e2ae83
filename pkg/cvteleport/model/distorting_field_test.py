"""Tests for distorting_field."""

import math

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np
from scipy import integrate
from scipy import special

from cvteleport.common import epr
from cvteleport.common import gaussian
from cvteleport.common import test_utils
from cvteleport.model import distorting_field
from cvteleport.model import fock


def _svs_field(r):
  return distorting_field.distorting_field(
      gaussian.two_mode_squeezed_vacuum(r))


def _p_average(d, fn, num_nodes=120):
  """E_P[fn(alpha)] on a Gauss-Hermite rule adapted to the P function."""
  nodes, weights = np.polynomial.hermite.hermgauss(num_nodes)
  t = np.stack(np.meshgrid(nodes, nodes, indexing='ij'), axis=-1).reshape(-1, 2)
  w = np.outer(weights, weights).reshape(-1)
  chol = np.linalg.cholesky(d.normal_cov)
  x = d.state.mean + np.sqrt(2.0) * t @ chol.T
  alpha = (x[:, 0] + 1j * x[:, 1]) / np.sqrt(2.0)
  return np.sum(w * fn(alpha)) / np.pi


def _r_from_fock(entries, beta_conj, beta_prime):
  l = np.arange(entries.shape[0])
  norm = np.exp(-0.5 * special.gammaln(l + 1))
  left = norm * np.asarray(beta_conj + 0j)**l
  right = norm * np.asarray(beta_prime + 0j)**l
  return left @ entries @ right


def _moderate_resource(rng):
  return test_utils.random_gaussian_state(
      2, rng, max_squeezing=0.15, max_thermal=0.15, max_displacement=0.3)


class ConstructionTest(parameterized.TestCase):

  @parameterized.parameters(0.0, 0.4, 1.0, 2.0)
  def test_two_mode_squeezed_vacuum_gives_thermal_field(self, r):
    d = _svs_field(r)
    np.testing.assert_allclose(
        d.state.cov, (0.5 + np.exp(-2 * r)) * np.eye(2), rtol=1e-10,
        atol=1e-15)
    np.testing.assert_array_equal(np.abs(d.state.mean), [0., 0.])
    self.assertTrue(distorting_field.is_thermal(d))

  def test_vacuum_resource(self):
    d = distorting_field.distorting_field(gaussian.vacuum(2))
    np.testing.assert_allclose(d.state.cov, 1.5 * np.eye(2), atol=1e-15)

  def test_classical_and_mixed_for_random_resources(self):
    rng = np.random.default_rng(20)
    for _ in range(1000):
      d = distorting_field.distorting_field(
          test_utils.random_gaussian_state(2, rng))
      self.assertGreaterEqual(
          np.min(np.linalg.eigvalsh(d.normal_cov)), -1e-10)
      self.assertTrue(distorting_field.is_classical(d))
      self.assertGreater(np.linalg.det(d.state.cov), 0.25)

  def test_covariance_follows_epr_moments(self):
    resource = test_utils.random_gaussian_state(2, np.random.default_rng(21))
    d = distorting_field.distorting_field(resource)
    noise = d.source_epr.noise_matrix()
    np.testing.assert_allclose(d.state.cov[0, 0], 0.5 + noise[0, 0], rtol=1e-12)
    np.testing.assert_allclose(d.state.cov[1, 1], 0.5 + noise[1, 1], rtol=1e-12)
    np.testing.assert_allclose(d.state.cov[0, 1], -noise[0, 1], atol=1e-12)
    np.testing.assert_allclose(
        d.state.mean, [-d.source_epr.mean_q, d.source_epr.mean_p], atol=1e-14)

  def test_rejects_bad_resources(self):
    with self.assertRaises(ValueError):
      distorting_field.distorting_field(gaussian.vacuum(1))
    unphysical = gaussian.GaussianState(mean=np.zeros(4), cov=0.2 * np.eye(4))
    with self.assertRaises(gaussian.UnphysicalStateError):
      distorting_field.distorting_field(unphysical)


class NormallyOrderedCfTest(parameterized.TestCase):

  def test_origin(self):
    d = distorting_field.distorting_field(
        test_utils.random_gaussian_state(2, np.random.default_rng(22)))
    self.assertEqual(distorting_field.normally_ordered_cf(d, 0.0), 1.0)

  @parameterized.parameters(0.2, 1.1)
  def test_two_mode_squeezed_vacuum(self, r):
    lam = test_utils.random_amplitudes(np.random.default_rng(23), 25)
    np.testing.assert_allclose(
        distorting_field.normally_ordered_cf(_svs_field(r), lam),
        np.exp(-np.exp(-2 * r) * np.abs(lam)**2), rtol=1e-12)

  def test_equals_resource_cf_along_epr_direction(self):
    rng = np.random.default_rng(24)
    for _ in range(10):
      resource = test_utils.random_gaussian_state(2, rng)
      d = distorting_field.distorting_field(resource)
      lam = test_utils.random_amplitudes(rng, 50)
      expected = gaussian.characteristic_function(
          resource, np.stack([np.conj(lam), lam], axis=-1))
      np.testing.assert_allclose(
          distorting_field.normally_ordered_cf(d, lam), expected,
          rtol=1e-10, atol=1e-13)


class QuasiProbabilityTest(parameterized.TestCase):

  @parameterized.parameters(0.3, 1.0)
  def test_p_function_two_mode_squeezed_vacuum(self, r):
    alpha = test_utils.random_amplitudes(np.random.default_rng(25), 20, 0.3)
    np.testing.assert_allclose(
        distorting_field.p_function(_svs_field(r), alpha),
        np.exp(2 * r) / np.pi * np.exp(-np.exp(2 * r) * np.abs(alpha)**2),
        rtol=1e-10)

  def test_p_function_normalized_and_nonnegative(self):
    rng = np.random.default_rng(26)
    d = distorting_field.distorting_field(_moderate_resource(rng))
    alpha = test_utils.random_amplitudes(rng, 1000, 2.0)
    self.assertTrue(np.all(distorting_field.p_function(d, alpha) >= 0))
    radius = 6.0
    total, _ = integrate.dblquad(
        lambda y, x: distorting_field.p_function(d, complex(x, y)),
        -radius, radius,
        lambda x: -np.sqrt(max(radius**2 - x**2, 0.0)),
        lambda x: np.sqrt(max(radius**2 - x**2, 0.0)),
        epsabs=1e-10, epsrel=1e-10)
    np.testing.assert_allclose(total, 1.0, atol=1e-6)

  def test_p_function_singular(self):
    d = distorting_field.DistortingFieldState(
        state=gaussian.vacuum(1),
        source_epr=epr.epr_moments(gaussian.vacuum(2)))
    with self.assertRaises(distorting_field.DistributionalLimitError):
      distorting_field.p_function(d, 0.0)
    half_singular = distorting_field.DistortingFieldState(
        state=gaussian.GaussianState(
            mean=np.zeros(2), cov=np.diag([0.5, 1.0])),
        source_epr=epr.epr_moments(gaussian.vacuum(2)))
    with self.assertRaises(gaussian.Error):
      distorting_field.p_function(half_singular, 0.1)

  @parameterized.parameters(0.0, 0.5, 1.5)
  def test_q_function_two_mode_squeezed_vacuum(self, r):
    beta = test_utils.random_amplitudes(np.random.default_rng(27), 20)
    n = np.exp(-2 * r)
    np.testing.assert_allclose(
        distorting_field.q_function(_svs_field(r), beta),
        np.exp(-np.abs(beta)**2 / (1 + n)) / (np.pi * (1 + n)), rtol=1e-10)

  def test_q_function_at_origin_is_fidelity(self):
    rng = np.random.default_rng(28)
    for _ in range(20):
      resource = test_utils.random_gaussian_state(2, rng)
      d = distorting_field.distorting_field(resource)
      np.testing.assert_allclose(
          np.pi * distorting_field.q_function(d, 0.0),
          epr.exp_neg_delta(resource), rtol=0, atol=1e-10)

  def test_q_function_bounded(self):
    rng = np.random.default_rng(29)
    d = distorting_field.distorting_field(test_utils.random_gaussian_state(2, rng))
    values = np.pi * distorting_field.q_function(
        d, test_utils.random_amplitudes(rng, 500, 2.0))
    self.assertTrue(np.all(values >= 0))
    self.assertTrue(np.all(values <= 1))


class RFunctionTest(parameterized.TestCase):

  @parameterized.parameters(0.2, 0.9)
  def test_two_mode_squeezed_vacuum(self, r):
    n = np.exp(-2 * r)
    d = _svs_field(r)
    for beta_conj, beta_prime in [(0.0, 0.0), (0.4 - 0.2j, 1.1j),
                                  (-0.7, 0.3 + 0.3j)]:
      np.testing.assert_allclose(
          distorting_field.r_function(d, beta_conj, beta_prime),
          np.exp(n * beta_conj * beta_prime / (1 + n)) / (1 + n), rtol=1e-12)

  def test_origin_is_vacuum_probability(self):
    d = distorting_field.distorting_field(
        _moderate_resource(np.random.default_rng(30)))
    rho = distorting_field.fock_matrix(d, 60)
    np.testing.assert_allclose(
        distorting_field.r_function(d, 0.0, 0.0), rho.entries[0, 0],
        rtol=0, atol=1e-10)

  def test_diagonal_gives_husimi(self):
    d = distorting_field.distorting_field(
        test_utils.random_gaussian_state(2, np.random.default_rng(31)))
    for beta in test_utils.random_amplitudes(np.random.default_rng(32), 10):
      value = distorting_field.r_function(d, np.conj(beta), beta)
      np.testing.assert_allclose(
          np.exp(-abs(beta)**2) * value / np.pi,
          distorting_field.q_function(d, beta), rtol=1e-10)

  def test_coherent_field(self):
    alpha = 0.6 - 0.8j
    d = distorting_field.DistortingFieldState(
        state=gaussian.coherent(alpha),
        source_epr=epr.epr_moments(gaussian.vacuum(2)))
    beta_conj, beta_prime = 0.3 + 0.1j, -0.2 + 0.5j
    expected = np.exp(-abs(alpha)**2 + beta_conj * alpha +
                      np.conj(alpha) * beta_prime)
    np.testing.assert_allclose(
        distorting_field.r_function(d, beta_conj, beta_prime), expected,
        rtol=1e-12)


class PhotonStatisticsTest(parameterized.TestCase):

  @parameterized.parameters(0.2, 0.5, 1.0, 2.0)
  def test_two_mode_squeezed_vacuum_fock_matrix(self, r):
    n = np.exp(-2 * r)
    rho = distorting_field.fock_matrix(_svs_field(r), 60)
    l = np.arange(61)
    np.testing.assert_allclose(
        rho.diagonal(), (1 / (1 + n)) * (n / (1 + n))**l, rtol=0, atol=1e-9)
    off_diagonal = rho.entries - np.diag(np.diag(rho.entries))
    self.assertLess(np.max(np.abs(off_diagonal)), 1e-9)
    self.assertLess(rho.truncation_deficit, 1e-8)
    np.testing.assert_allclose(rho.trace(), 1 - rho.truncation_deficit,
                               atol=1e-15)

  def test_quadrature_path_reproduces_thermal_closed_form(self):
    d = _svs_field(0.4)
    closed = distorting_field.fock_matrix(d, 60)
    quadrature = distorting_field.fock_matrix(d, 60, method='quadrature')
    np.testing.assert_allclose(
        quadrature.entries, closed.entries, rtol=0, atol=1e-9)

  def test_random_field_is_density_matrix(self):
    d = distorting_field.distorting_field(
        _moderate_resource(np.random.default_rng(33)))
    rho = distorting_field.fock_matrix(d, 60)
    self.assertGreaterEqual(np.min(np.linalg.eigvalsh(rho.entries)), -1e-9)
    np.testing.assert_allclose(
        rho.entries, rho.entries.conj().T, rtol=0, atol=1e-10)

  def test_photon_distribution(self):
    d = _svs_field(0.7)
    distribution = distorting_field.photon_distribution(d, 30)
    self.assertTrue(np.all(distribution >= 0))
    np.testing.assert_array_equal(
        distribution, distorting_field.fock_matrix(d, 30).diagonal())

  def test_deficit_bound(self):
    with self.assertRaises(fock.TruncationError):
      distorting_field.fock_matrix(_svs_field(0.0), 3, max_deficit=1e-6)

  @parameterized.parameters(np.linspace(-1, 1, 9))
  def test_generating_function_two_mode_squeezed_vacuum(self, s):
    r = 0.6
    np.testing.assert_allclose(
        distorting_field.generating_function(_svs_field(r), s),
        1 / (1 + (1 - s) * np.exp(-2 * r)), rtol=0, atol=1e-9)

  def test_generating_function_endpoints(self):
    rng = np.random.default_rng(34)
    resource = test_utils.random_gaussian_state(2, rng)
    d = distorting_field.distorting_field(resource)
    self.assertEqual(distorting_field.generating_function(d, 1.0), 1.0)
    np.testing.assert_allclose(
        distorting_field.generating_function(d, 0.0),
        np.pi * distorting_field.q_function(d, 0.0), rtol=1e-12)

  def test_generating_function_matches_series(self):
    d = distorting_field.distorting_field(
        _moderate_resource(np.random.default_rng(35)))
    distribution = distorting_field.photon_distribution(d, 80)
    for s in (-0.5, 0.0, 0.5):
      series = np.sum(s**np.arange(81) * distribution)
      np.testing.assert_allclose(
          series, distorting_field.generating_function(d, s), atol=1e-7)

  def test_generating_function_rejects_out_of_range(self):
    with self.assertRaises(ValueError):
      distorting_field.generating_function(_svs_field(0.5), 1.5)


class CorrelationFunctionTest(parameterized.TestCase):

  @parameterized.parameters(0.1, 0.8)
  def test_two_mode_squeezed_vacuum(self, r):
    d = _svs_field(r)
    np.testing.assert_allclose(
        distorting_field.correlation_function(d, 1, 1), np.exp(-2 * r),
        rtol=1e-12)
    np.testing.assert_allclose(
        distorting_field.correlation_function(d, 2, 2), 2 * np.exp(-4 * r),
        rtol=1e-12)
    self.assertEqual(distorting_field.correlation_function(d, 1, 0), 0)
    for l in range(5):
      self.assertAlmostEqual(
          distorting_field.correlation_function(d, l, l).real,
          math.factorial(l) * np.exp(-2 * r * l), places=12)

  def test_matches_truncated_operators(self):
    d = distorting_field.distorting_field(
        _moderate_resource(np.random.default_rng(36)))
    rho = distorting_field.fock_matrix(d, 60).entries
    a = np.diag(np.sqrt(np.arange(1, 61)), k=1)
    for l, m in [(1, 0), (0, 2), (1, 1), (2, 1), (2, 2)]:
      operator = (np.linalg.matrix_power(a.conj().T, l) @
                  np.linalg.matrix_power(a, m))
      np.testing.assert_allclose(
          distorting_field.correlation_function(d, l, m),
          np.trace(rho @ operator), rtol=0, atol=1e-7)

  def test_diagonal_moments_nonnegative(self):
    rng = np.random.default_rng(37)
    for _ in range(50):
      d = distorting_field.distorting_field(
          test_utils.random_gaussian_state(2, rng))
      for l in range(4):
        value = distorting_field.correlation_function(d, l, l)
        self.assertGreaterEqual(value.real, -1e-12)
        self.assertAlmostEqual(value.imag, 0.0, places=10)

  def test_mean_photon_number_is_epr_uncertainty(self):
    rng = np.random.default_rng(38)
    for _ in range(100):
      resource = test_utils.random_gaussian_state(2, rng, displaced=False)
      d = distorting_field.distorting_field(resource)
      np.testing.assert_allclose(
          distorting_field.mean_photon_number(d),
          epr.epr_uncertainty(resource), rtol=1e-12)

  def test_negative_indices(self):
    with self.assertRaises(ValueError):
      distorting_field.correlation_function(_svs_field(0.5), -1, 0)


class CrossRepresentationTest(absltest.TestCase):
  """P, Q, R, Fock and generating function of one field agree."""

  def test_random_resources(self):
    rng = np.random.default_rng(39)
    betas = [(0.0, 0.0), (0.3 - 0.2j, 0.1 + 0.4j), (-0.5j, 0.2)]
    for _ in range(20):
      d = distorting_field.distorting_field(_moderate_resource(rng))
      rho = distorting_field.fock_matrix(d, 80)
      self.assertLess(rho.truncation_deficit, 1e-8)

      for beta_conj, beta_prime in betas:
        r_value = distorting_field.r_function(d, beta_conj, beta_prime)
        p_value = _p_average(
            d, lambda a, bc=beta_conj, bp=beta_prime: np.exp(
                -np.abs(a)**2 + bc * a + np.conj(a) * bp))
        np.testing.assert_allclose(r_value, p_value, rtol=0, atol=1e-7)
        np.testing.assert_allclose(
            r_value, _r_from_fock(rho.entries, beta_conj, beta_prime),
            rtol=0, atol=1e-7)

      beta = 0.25 + 0.35j
      np.testing.assert_allclose(
          distorting_field.q_function(d, beta),
          _p_average(d, lambda a: np.exp(-np.abs(a - beta)**2)) / np.pi,
          rtol=0, atol=1e-7)

      distribution = rho.diagonal()
      for s in (-0.5, 0.0, 0.5):
        closed = distorting_field.generating_function(d, s)
        np.testing.assert_allclose(
            closed, _p_average(d, lambda a, s=s: np.exp((s - 1) * np.abs(a)**2)),
            rtol=0, atol=1e-7)
        np.testing.assert_allclose(
            closed, np.sum(s**np.arange(81) * distribution), rtol=0, atol=1e-7)


if __name__ == '__main__':
  absltest.main()
