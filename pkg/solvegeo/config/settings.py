"""
Configuration settings for the solvegeo toolkit.
"""

import os
import logging
from pathlib import Path
from typing import Optional
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Get the project root directory
ROOT_DIR = Path(__file__).parent.parent.parent.absolute()


class Config:
    """Configuration class for the geodesic computations and the CLI"""

    # Integrator Configuration
    REL_TOL = 1e-12
    ABS_TOL = 1e-12
    MAX_STEP = float("inf")
    INTEGRATOR_METHOD = "DOP853"
    INTEGRATOR_RETRIES = 2

    # Quadrature Configuration
    QUAD_EPS = 1e-13
    QUAD_LIMIT = 400
    MPMATH_PRECISION = 40  # decimal digits for extended-precision checks

    # Classification Configuration
    PERFECT_TOL = 1e-9
    HALF_PERIOD_XTOL = 1e-14
    HALF_PERIOD_AGREEMENT = 1e-8

    # Grid Configuration
    GRID_INSET = 1e-6
    DEFAULT_GRID_POINTS = 10_000
    FINITE_DIFFERENCE_STEP = 1e-5

    # Sphere Configuration
    SPHERE_RADIUS = 5.0
    SPHERE_RESOLUTION = (128, 256)
    SPHERE_CHUNK_SIZE = 4096

    # Output Configuration
    OUTPUT_DIR = os.path.join(ROOT_DIR, "output")
    LOG_DIR = os.path.join(ROOT_DIR, "logs")
    LOG_FILE = os.path.join(LOG_DIR, "solvegeo.log")
    CSV_SIGNIFICANT_DIGITS = 12
    OBJ_SIGNIFICANT_DIGITS = 9
    REPORT_SCHEMA_VERSION = "1.0"

    # Verification suite
    VERIFY_CONFIG_FILE = os.path.join(ROOT_DIR, "solvegeo", "verify_config.json")

    @staticmethod
    def get_thread_count() -> int:
        """Get the parallelism cap from SOLVEGEO_THREADS (defaults to the CPU count)"""
        default = os.cpu_count() or 1
        raw = os.getenv("SOLVEGEO_THREADS")
        if not raw:
            return default
        try:
            value = int(raw)
        except ValueError:
            logging.getLogger(__name__).warning(f"Ignoring non-integer SOLVEGEO_THREADS={raw!r}")
            return default
        return max(1, value)

    @staticmethod
    def get_log_level() -> str:
        return os.getenv("SOLVEGEO_LOG_LEVEL", "INFO").upper()

    @staticmethod
    def get_output_dir() -> str:
        return os.getenv("SOLVEGEO_OUTPUT_DIR", Config.OUTPUT_DIR)

    @classmethod
    def validate_config(cls):
        """Validate that the configuration is usable"""
        if cls.REL_TOL <= 0 or cls.ABS_TOL <= 0:
            raise ValueError("Integrator tolerances must be positive")
        if cls.get_log_level() not in logging._nameToLevel:
            raise ValueError(f"SOLVEGEO_LOG_LEVEL must be a logging level name, got {cls.get_log_level()}")

        # Create output directory if it doesn't exist
        os.makedirs(cls.get_output_dir(), exist_ok=True)

        # Create logs directory if it doesn't exist
        os.makedirs(cls.LOG_DIR, exist_ok=True)

    @classmethod
    def setup_logging(cls, log_file: Optional[str] = None):
        """Set up logging to the log file and stderr"""
        os.makedirs(cls.LOG_DIR, exist_ok=True)
        logging.basicConfig(
            level=getattr(logging, cls.get_log_level(), logging.INFO),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=[
                logging.FileHandler(log_file or cls.LOG_FILE),
                logging.StreamHandler()
            ]
        )
