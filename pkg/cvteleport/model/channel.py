"""Analytic unit-gain teleportation channel for Gaussian resources.

The output normally ordered characteristic function is the product of the
input's and the distorting field's, so on moments the channel adds the
field's mean and normally ordered covariance to the input.
"""

import dataclasses
import json
from typing import Any, Mapping, Optional

from absl import logging
import numpy as np

from cvteleport.common import epr
from cvteleport.common import gaussian
from cvteleport.model import config as config_lib
from cvteleport.model import distorting_field


@dataclasses.dataclass(frozen=True, eq=False)
class ChannelReport:
  """Output state and quality figures of one teleportation."""
  output: gaussian.GaussianState
  # <Delta> of the resource, the photon number the channel adds.
  added_noise: float
  # Coherent-state fidelity, independent of the input amplitude.
  fidelity_coherent: float
  inseparable: bool

  def to_dict(self) -> Mapping[str, Any]:
    return {
        'output': gaussian.to_dict(self.output),
        'added_noise': self.added_noise,
        'fidelity_coherent': self.fidelity_coherent,
        'inseparable': self.inseparable,
    }

  def to_json(self) -> str:
    return json.dumps(self.to_dict())


def _check_input(state: gaussian.GaussianState):
  if state.n_modes != 1:
    raise ValueError(f'Input must be a one-mode state, got {state.n_modes}.')
  gaussian.validate_physical(state, 'input state')


def teleport(input_state: gaussian.GaussianState,
             resource: gaussian.GaussianState) -> gaussian.GaussianState:
  """Output state of unit-gain teleportation.

  Args:
    input_state: Physical one-mode Gaussian state.
    resource: Physical two-mode Gaussian state shared by the two parties.

  Returns:
    State with mean d_in + d_D and covariance V_in + V_D - I/2.

  Raises:
    ValueError: On wrong mode counts.
    UnphysicalStateError: If either state is unphysical.
  """
  _check_input(input_state)
  field = distorting_field.distorting_field(resource)
  return gaussian.GaussianState(
      mean=input_state.mean + field.state.mean,
      cov=input_state.cov + field.normal_cov)


def channel_as_displacement_average(
    input_state: gaussian.GaussianState,
    resource: gaussian.GaussianState,
    n_quadrature_nodes: Optional[int] = None) -> gaussian.GaussianState:
  """Output moments of the P-weighted average of displaced inputs.

  The P function is evaluated on a Gauss-Hermite grid mapped onto its
  support, and the weights are used to integrate the first and second moments
  of the displacement.

  Args:
    input_state: Physical one-mode Gaussian state.
    resource: Two-mode resource with a strictly classical distorting field.
    n_quadrature_nodes: Nodes per axis.

  Returns:
    The averaged output state.

  Raises:
    DistributionalLimitError: If the field's P function is singular; use
      teleport() there, the average then has delta weight.
  """
  _check_input(input_state)
  n_quadrature_nodes = (
      n_quadrature_nodes or config_lib.CONFIG.channel.num_quadrature_nodes)
  field = distorting_field.distorting_field(resource)
  # Raises on the delta-weight boundary before any node is mapped.
  distorting_field.p_function(field, 0.0)

  chol = np.linalg.cholesky(field.normal_cov)
  nodes, weights = np.polynomial.hermite.hermgauss(n_quadrature_nodes)
  t = np.stack(np.meshgrid(nodes, nodes, indexing='ij'), axis=-1).reshape(-1, 2)
  x = field.state.mean + np.sqrt(2.0) * t @ chol.T
  beta = (x[:, 0] + 1j * x[:, 1]) / np.sqrt(2.0)
  # d^2 beta = det(L) d^2 t.
  w = (np.outer(weights, weights).reshape(-1) * np.exp(np.sum(t**2, axis=-1)) *
       distorting_field.p_function(field, beta) * np.prod(np.diag(chol)))
  logging.info('P weights integrate to %.15f', np.sum(w))

  shift = w @ x
  centered = x - shift
  spread = (w[:, None] * centered).T @ centered
  return gaussian.GaussianState(
      mean=input_state.mean + shift,
      cov=input_state.cov + 0.5 * (spread + spread.T))


def added_noise(resource: gaussian.GaussianState) -> float:
  """<Delta>; for undisplaced resources the field's mean photon number."""
  return epr.epr_uncertainty(resource)


def fidelity_coherent(resource: gaussian.GaussianState) -> float:
  """<alpha|rho_out|alpha> for coherent inputs, which is <exp(-Delta)>."""
  gaussian.validate_physical(resource, 'resource')
  return epr.exp_neg_delta(resource)


def state_overlap(a: gaussian.GaussianState,
                  b: gaussian.GaussianState) -> float:
  """Tr[rho_a rho_b] = det(V_a + V_b)^(-1/2) exp(-delta^T (V_a + V_b)^-1 delta / 2)."""
  if a.n_modes != b.n_modes:
    raise ValueError(
        f'Mode counts differ: {a.n_modes} and {b.n_modes}.')
  gaussian.validate_physical(a)
  gaussian.validate_physical(b)
  kernel = a.cov + b.cov
  delta = a.mean - b.mean
  return float(
      np.exp(-0.5 * delta @ np.linalg.solve(kernel, delta)) /
      np.sqrt(np.linalg.det(kernel)))


def output_purity(input_state: gaussian.GaussianState,
                  resource: gaussian.GaussianState) -> float:
  return gaussian.purity(teleport(input_state, resource))


def channel_report(input_state: gaussian.GaussianState,
                   resource: gaussian.GaussianState) -> ChannelReport:
  output = teleport(input_state, resource)
  moments = epr.epr_moments(resource)
  report = ChannelReport(
      output=output,
      added_noise=moments.delta_mean,
      fidelity_coherent=fidelity_coherent(resource),
      inseparable=moments.inseparable)
  logging.info('Teleported with added noise %.6g, coherent fidelity %.6g',
               report.added_noise, report.fidelity_coherent)
  return report
