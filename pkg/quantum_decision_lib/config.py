"""
Run configuration for experiment commands.
"""
from dataclasses import dataclass
from typing import Optional
import os

from dotenv import load_dotenv

from .exceptions import OutOfRange

FORMATS = ("json", "csv", "md")

DEFAULT_SEED = 0
DEFAULT_TOL = 1e-6
DEFAULT_FORMAT = "json"


@dataclass
class RunConfig:
    """
    Settings shared by every command: master seed, fit tolerance, report
    format and destination.
    """
    seed: int = DEFAULT_SEED
    tol: float = DEFAULT_TOL
    format: str = DEFAULT_FORMAT
    out: Optional[str] = None
    verbose: bool = False

    def __post_init__(self):
        if self.format not in FORMATS:
            raise OutOfRange(
                f"report format '{self.format}' not one of {FORMATS}"
            )
        if not self.tol > 0:
            raise OutOfRange(f"tolerance must be positive, got {self.tol}")
        if self.seed < 0:
            raise OutOfRange(f"seed must be non-negative, got {self.seed}")

    @classmethod
    def from_dict(cls, data: dict) -> 'RunConfig':
        """
        Create a RunConfig from a dictionary.

        Args:
            data: Dictionary containing run settings

        Returns:
            RunConfig: New RunConfig instance
        """
        return cls(
            seed=int(data.get('seed', DEFAULT_SEED)),
            tol=float(data.get('tol', DEFAULT_TOL)),
            format=data.get('format', DEFAULT_FORMAT),
            out=data.get('out'),
            verbose=bool(data.get('verbose', False)),
        )

    @classmethod
    def from_env(cls, **overrides) -> 'RunConfig':
        """
        Build a RunConfig from QDU_* environment variables (a .env file is
        loaded first), then apply non-None overrides such as CLI flags.

        Args:
            overrides: values that win over the environment

        Returns:
            RunConfig: New RunConfig instance
        """
        load_dotenv()
        data = {}
        for key in ('seed', 'tol', 'format'):
            value = os.getenv(f"QDU_{key.upper()}")
            if value:
                data[key] = value
        try:
            if 'seed' in data:
                data['seed'] = int(data['seed'])
            if 'tol' in data:
                data['tol'] = float(data['tol'])
        except ValueError as e:
            raise OutOfRange(f"bad QDU_* environment value: {e}") from None
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)
