import logging
from typing import Any, Dict, Optional, Tuple

from cvteleport.common import gaussian
from cvteleport.model import channel
from cvteleport.model import simulator

logger = logging.getLogger(__name__)


class SimulationService:
    def __init__(self, shard_size: int, num_workers: int = 1,
                 show_progress: bool = False):
        """Initialize simulation service

        Args:
            shard_size: Outcomes drawn per PRNG substream
            num_workers: Threads sampling shards concurrently
            show_progress: Show a progress bar over shards
        """
        self.shard_size = shard_size
        self.num_workers = num_workers
        self.show_progress = show_progress

    def simulate(
        self,
        input_state: gaussian.GaussianState,
        resource: gaussian.GaussianState,
        n_samples: int,
        seed: int,
        threshold: float,
        outcomes_path: Optional[str] = None,
    ) -> Tuple[Dict[str, Any], bool]:
        """Run the protocol and check it against the analytic channel

        Returns:
            The report and whether every z-score stayed below the threshold
        """
        config = simulator.ProtocolConfig(
            n_samples=n_samples,
            seed=seed,
            record_outcomes=outcomes_path is not None,
            shard_size=self.shard_size,
            num_workers=self.num_workers,
            show_progress=self.show_progress,
        )
        logger.info(f"Simulating {n_samples} protocol runs with seed {seed}")
        estimate = simulator.run_protocol(input_state, resource, config)
        analytic = channel.teleport(input_state, resource)
        comparison = simulator.compare_to_analytic(estimate, analytic, threshold)
        outcome_check = simulator.compare_outcomes(
            estimate, simulator.outcome_distribution(input_state, resource), threshold)

        if outcomes_path is not None:
            estimate.write_outcomes_csv(outcomes_path)
            logger.info(f"Outcomes written to {outcomes_path}")

        passed = comparison.passed and outcome_check.passed
        if passed:
            logger.info(f"Monte Carlo agrees with the analytic channel, "
                        f"max |z| = {comparison.max_abs_z:.3f}")
        else:
            logger.error(f"Monte Carlo disagrees with the analytic channel, "
                         f"max |z| = {comparison.max_abs_z:.3f}, outcome max |z| = "
                         f"{outcome_check.max_abs_z:.3f}")
        report = {
            "estimate": estimate.to_dict(),
            "analytic": gaussian.to_dict(analytic),
            "comparison": comparison.to_dict(),
            "outcome_comparison": outcome_check.to_dict(),
            "passed": passed,
        }
        return report, passed
