from pydantic_settings import BaseSettings, SettingsConfigDict

from cvteleport.model import config as config_lib


class Settings(BaseSettings):
    # Analysis Settings
    DEFAULT_CUTOFF: int = 40
    MAX_TRUNCATION_DEFICIT: float = 1e-6

    # Simulation Settings
    DEFAULT_SAMPLES: int = 100000
    DEFAULT_SEED: int = 1234
    Z_THRESHOLD: float = 4.0
    SHARD_SIZE: int = 16384
    NUM_WORKERS: int = 1
    SHOW_PROGRESS: bool = False

    # Logging Settings
    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="CVTELE_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    def apply_simulator_config(self):
        """Push the simulation settings into the numerical config"""
        simulator = config_lib.CONFIG.simulator
        simulator.shard_size = self.SHARD_SIZE
        simulator.num_workers = self.NUM_WORKERS
        simulator.z_threshold = self.Z_THRESHOLD


settings = Settings()
