from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    SEED: int = 0  # default seed for every randomized check
    OUTPUT_DIR: str = "results"
    LOG_LEVEL: str = "WARNING"

    # knots and geometry
    QUASI_UNIFORMITY_THETA: float = 4.0
    KNOT_TOLERANCE: float = 1e-14
    GEOMETRY_TOLERANCE: float = 1e-12
    MEASURE_FLOOR: float = 1e-12
    VALIDATION_SAMPLES: int = 5

    # projectors and verification
    ANTIDERIVATIVE_POINTS: int = 16
    INTERFACE_TOLERANCE: float = 1e-11
    INTERFACE_SAMPLES: int = 50
    COMMUTING_TOLERANCE: float = 1e-10
    RATE_TOLERANCE: float = 0.15

    model_config = SettingsConfigDict(
        env_prefix="SPLINECOMPLEX_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"  # allow extra env variables without error
    )

settings = Settings()
