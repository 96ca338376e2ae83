import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from cvteleport.common import epr
from cvteleport.common import gaussian
from cvteleport.model import channel
from cvteleport.model import distorting_field
from services.state_service import PresetError, parse_nonnegative, split_preset

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("r", "epr_uncertainty", "added_noise", "fidelity_coherent")
SWEEP_METRICS = SWEEP_COLUMNS[1:]
GENERATING_FUNCTION_POINTS = np.linspace(0.0, 1.0, 5)


def sweep_family(spec: str):
    """Resource family swept over r: "svs" or "tmst:<nbar>".

    Returns:
        Callable mapping r to the two-mode resource.
    """
    name, params = split_preset(spec)
    if name == "svs" and not params:
        return gaussian.two_mode_squeezed_vacuum
    if name == "tmst" and len(params) == 1:
        nbar = parse_nonnegative("nbar", params[0])
        return lambda r: gaussian.two_mode_squeezed_thermal(r, nbar)
    raise PresetError(
        f"Sweep family must be 'svs' or 'tmst:<nbar>', got {spec!r}")


class AnalysisService:
    def __init__(self, max_deficit: float):
        """Initialize analysis service

        Args:
            max_deficit: Largest Fock truncation deficit a distort report accepts
        """
        self.max_deficit = max_deficit

    def epr_stats(self, resource: gaussian.GaussianState) -> Dict[str, Any]:
        """EPR moments, <Delta> and the inseparability verdict"""
        moments = epr.epr_moments(resource)
        logger.info(f"EPR uncertainty {moments.delta_mean:.6g}, "
                    f"inseparable={moments.inseparable}")
        report = dict(moments.to_dict())
        report["epr_uncertainty"] = moments.delta_mean
        report["noise_matrix"] = moments.noise_matrix()
        return report

    def distort(self, resource: gaussian.GaussianState, cutoff: int) -> Dict[str, Any]:
        """Distorting field moments, photon statistics and G(s) samples"""
        field = distorting_field.distorting_field(resource)
        fock_matrix = distorting_field.fock_matrix(
            field, cutoff, max_deficit=self.max_deficit)
        verdict = "classical" if distorting_field.is_classical(field) else "nonclassical"
        if distorting_field.is_thermal(field):
            verdict = "thermal"
        logger.info(f"Distorting field is {verdict}, truncation deficit "
                    f"{fock_matrix.truncation_deficit:.3e} at cutoff {cutoff}")
        return {
            "distorting_field": field.to_dict(),
            "normal_cov": field.normal_cov,
            "verdict": verdict,
            "cutoff": cutoff,
            "truncation_deficit": fock_matrix.truncation_deficit,
            "photon_distribution": np.clip(fock_matrix.diagonal(), 0.0, None),
            "generating_function": [
                {"s": float(s), "value": distorting_field.generating_function(field, s)}
                for s in GENERATING_FUNCTION_POINTS
            ],
        }

    def teleport(self, input_state: gaussian.GaussianState,
                 resource: gaussian.GaussianState) -> Dict[str, Any]:
        report = channel.channel_report(input_state, resource)
        result = dict(report.to_dict())
        result["output_purity"] = gaussian.purity(report.output)
        result["input_overlap"] = channel.state_overlap(input_state, report.output)
        return result

    def fidelity(self, resource: gaussian.GaussianState) -> Dict[str, Any]:
        fidelity = channel.fidelity_coherent(resource)
        logger.info(f"Coherent-state fidelity {fidelity:.6g}")
        return {
            "fidelity_coherent": fidelity,
            "added_noise": channel.added_noise(resource),
            "classical_limit": 0.5,
            "beats_classical_limit": fidelity > 0.5,
        }

    def sweep(self, family: str, r_min: float, r_max: float, steps: int,
              metrics: Optional[Sequence[str]] = None
              ) -> Tuple[Tuple[str, ...], List[List[float]]]:
        """Table of the channel figures on a uniform r grid.

        A single step gives one row at r_min. The r column always comes
        first; metrics selects and orders the others (all by default).
        """
        make_resource = sweep_family(family)
        metrics = tuple(metrics) if metrics else SWEEP_METRICS
        unknown = [name for name in metrics if name not in SWEEP_METRICS]
        if unknown:
            raise ValueError(f"Unknown sweep metric(s) {unknown}")
        grid = np.linspace(r_min, r_max, steps) if steps > 1 else np.array([r_min])
        rows = []
        for r in grid:
            resource = make_resource(float(r))
            figures = {
                "epr_uncertainty": epr.epr_uncertainty(resource),
                "added_noise": channel.added_noise(resource),
                "fidelity_coherent": channel.fidelity_coherent(resource),
            }
            rows.append([float(r)] + [figures[name] for name in metrics])
        logger.info(f"Swept {family} over {steps} point(s) in [{r_min}, {r_max}]")
        return ("r",) + metrics, rows

    @staticmethod
    def sweep_as_records(columns, rows) -> Dict[str, Any]:
        return {
            "columns": list(columns),
            "rows": [dict(zip(columns, row)) for row in rows],
        }
