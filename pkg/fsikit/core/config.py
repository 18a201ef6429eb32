import os
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # core_math
    ALPHA_SMALL_P: float = Field(1e-12, description="Below this p, alpha returns alpha0")
    SERIES_DPS: int = Field(60, description="mpmath precision for series coefficients")

    # Crossover search (multiples of omega_s)
    CROSSOVER_BRACKET_LO: float = Field(1e-3)
    CROSSOVER_BRACKET_HI: float = Field(1e3)
    CROSSOVER_RTOL: float = Field(1e-10)
    CROSSOVER_SCAN_POINTS: int = Field(2000)

    # Switched simulator
    EVENT_SCAN_POINTS: int = Field(64, description="On-phase scan grid per period")
    EVENT_XTOL: float = Field(1e-12, description="Event time tolerance, fraction of T")
    OFF_SCAN_POINTS: int = Field(16, description="Inductor current checks per off phase")
    SAMPLES_PER_PERIOD: int = Field(20)
    SETTLE_PERIODS: int = Field(100)
    WINDOW_PERIODS: int = Field(50)
    CLASSIFY_EPS_ABS: float = Field(1e-6)
    CLASSIFY_EPS_REL: float = Field(1e-4)
    CLASSIFY_DECAY_RATIO: float = Field(0.7)
    CLASSIFY_MULTIPLIER_TOL: float = Field(1e-3, description="Fitted alternation multiplier must sit this far below 1")
    CLASSIFY_FIT_RMS: float = Field(0.05, description="Largest rms residual of the log-linear alternation fit")
    INITIAL_PERTURBATION: float = Field(1e-3)

    # Sampled-data analysis
    SDA_STEP: float = Field(1e-6)
    SDA_EIG_TOL: float = Field(1e-3)
    NEWTON_MAX_ITER: int = Field(50)
    NEWTON_TOL: float = Field(1e-10)

    # Sweeps and output
    GRID_RESOLUTION: int = Field(201)
    SWEEP_WORKERS: int = Field(0, description="0 means os.cpu_count()")
    CSV_SIG_DIGITS: int = Field(9)
    REPORT_PERIODS: int = Field(300)
    LOG_LEVEL: str = Field("WARNING")

    @field_validator(
        "ALPHA_SMALL_P", "CROSSOVER_RTOL", "EVENT_XTOL", "CLASSIFY_EPS_ABS",
        "CLASSIFY_EPS_REL", "CLASSIFY_MULTIPLIER_TOL", "CLASSIFY_FIT_RMS", "INITIAL_PERTURBATION",
        "SDA_STEP", "SDA_EIG_TOL", "NEWTON_TOL",
    )
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        """Tolerances must be strictly positive."""
        if v <= 0:
            raise ValueError(f"Tolerance must be positive, got {v}")
        return v

    @field_validator("GRID_RESOLUTION")
    @classmethod
    def validate_resolution(cls, v: int) -> int:
        if v < 2:
            raise ValueError("GRID_RESOLUTION must be at least 2")
        return v

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate logging level name."""
        supported = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in supported:
            raise ValueError(f"Unsupported log level: {v}. Supported: {supported}")
        return v.upper()

    @property
    def sweep_workers(self) -> int:
        """Worker count with 0 resolved to the CPU count."""
        return self.SWEEP_WORKERS or (os.cpu_count() or 1)

    model_config = SettingsConfigDict(
        env_prefix="FSI_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
