"""Configuration management for the toolkit."""
import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Config:
    """Toolkit configuration."""

    VERSION = "0.1.0"

    # Logging
    LOG_LEVEL = os.getenv("PLASMA_LOG_LEVEL", "INFO").upper()

    # Output
    OUTPUT_DIR = os.getenv("PLASMA_OUTPUT_DIR", "results")

    # Proof constants: C inside C_n = tau0^{2k} q0 + C n^{-1/2k}, and the neighbourhood radius M
    CN_CONSTANT = float(os.getenv("PLASMA_CN_CONSTANT", "0.0"))
    NEIGHBOURHOOD_M = float(os.getenv("PLASMA_NEIGHBOURHOOD_M", "3"))

    # Sampler
    TARGET_ACCEPTANCE = float(os.getenv("PLASMA_TARGET_ACCEPTANCE", "0.35"))

    @classmethod
    def get_output_dir(cls, override: str | None = None) -> Path:
        """Resolve the directory results are written to."""
        return Path(override or cls.OUTPUT_DIR)

    @classmethod
    def validate_output_dir(cls, override: str | None = None):
        """Validate that the output directory is usable."""
        path = cls.get_output_dir(override)
        if path.exists() and not path.is_dir():
            raise ValueError(f"PLASMA_OUTPUT_DIR points to a file, not a directory: {path}")

    @classmethod
    def validate_constants(cls):
        """Validate numeric defaults."""
        if cls.NEIGHBOURHOOD_M <= 0:
            raise ValueError("PLASMA_NEIGHBOURHOOD_M must be positive")
        if not 0.0 < cls.TARGET_ACCEPTANCE < 1.0:
            raise ValueError("PLASMA_TARGET_ACCEPTANCE must lie in (0, 1)")
