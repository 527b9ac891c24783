from typing import Optional
from pydantic_settings import BaseSettings

class Settings(BaseSettings):
    # Network reference
    z0: float = 50.0
    rcond_min: float = 1e-12

    # Experiment defaults
    master_seed: Optional[int] = None  # RISNET_MASTER_SEED overrides config files
    default_seed: int = 2024
    default_trials: int = 1000
    default_ni_list: str = "4,8,16,32,64,128,256"
    workers: int = 4

    # Solver budgets
    max_outer_iterations: int = 100
    tolerance: float = 1e-8
    inner_iterations: int = 50

    # API Settings
    api_host: str = "0.0.0.0"
    api_port: int = 8000
    debug: bool = False

    class Config:
        env_file = ".env"
        env_prefix = "RISNET_"

settings = Settings()
