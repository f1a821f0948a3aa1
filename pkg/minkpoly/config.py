import os
import toml
import logging
from dataclasses import dataclass, field
from typing import Optional, Any, List

import psutil
from dotenv import load_dotenv

from .errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_DIR = os.path.expanduser("~/.config/minkpoly")
FORMATS = ("json", "csv")


def _as_bool(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return bool(value)


def _default_threads() -> int:
    return max(1, psutil.cpu_count(logical=False) or psutil.cpu_count() or 1)


@dataclass
class Config:
    """Toolkit-wide defaults: environment > config file > built-in values."""

    config_dir: str = field(default_factory=lambda: os.environ.get("MINKPOLY_CONFIG_DIR", DEFAULT_CONFIG_DIR))
    _file_config: dict = field(init=False, repr=False)

    prop_tol: float = field(init=False)
    kn_tol: float = field(init=False)
    level_tol: float = field(init=False)
    max_iters: int = field(init=False)
    seed: int = field(init=False)
    output_format: str = field(init=False)
    genericity_margin: float = field(init=False)
    threads: int = field(init=False)
    log_dir: str = field(init=False)
    verbose: bool = field(init=False)

    @property
    def config_file(self) -> str:
        return os.path.join(self.config_dir, "config.toml")

    def __post_init__(self):
        self._file_config = self._load_config_from_file()
        self.prop_tol = float(self._get_config("MINKPOLY_PROP_TOL", 1e-9))
        self.kn_tol = float(self._get_config("MINKPOLY_KN_TOL", 1e-8))
        self.level_tol = float(self._get_config("MINKPOLY_LEVEL_TOL", 1e-8))
        self.max_iters = int(self._get_config("MINKPOLY_MAX_ITERS", 500))
        self.seed = int(self._get_config("MINKPOLY_SEED", 0))
        self.output_format = str(self._get_config("MINKPOLY_FORMAT", "json"))
        self.genericity_margin = float(self._get_config("MINKPOLY_GENERICITY_MARGIN", 1e-8))
        self.threads = max(1, int(self._get_config("MINKPOLY_THREADS", _default_threads())))
        self.log_dir = self._get_config("MINKPOLY_LOG_DIR", os.path.join(self.config_dir, "logs"))
        self.verbose = _as_bool(self._get_config("MINKPOLY_VERBOSE", False))

    def _load_config_from_file(self) -> dict:
        if not os.path.exists(self.config_file):
            self._create_default_config()
        try:
            with open(self.config_file, "r") as f:
                return toml.load(f)
        except (toml.TomlDecodeError, IOError) as e:
            logger.warning(f"Could not read config file at {self.config_file}: {e}")
            return {}

    def _create_default_config(self):
        default_config = {
            "tolerances": {
                "MINKPOLY_PROP_TOL": 1e-9,
                "MINKPOLY_KN_TOL": 1e-8,
                "MINKPOLY_LEVEL_TOL": 1e-8,
                "MINKPOLY_GENERICITY_MARGIN": 1e-8,
            },
            "solver": {
                "MINKPOLY_MAX_ITERS": 500,
                "MINKPOLY_SEED": 0,
            },
            "application": {
                "MINKPOLY_FORMAT": "json",
                "MINKPOLY_LOG_DIR": os.path.join(self.config_dir, "logs"),
                "MINKPOLY_VERBOSE": False,
            },
        }
        try:
            os.makedirs(self.config_dir, exist_ok=True)
            with open(self.config_file, "w") as f:
                toml.dump(default_config, f)
            logger.info(f"Created default config file at: {self.config_file}")
        except IOError as e:
            logger.warning(f"Error creating default config file: {e}")

    def _get_config(self, key: str, default: Optional[Any] = None) -> Any:
        value = os.environ.get(key)
        if value is not None:
            return value

        for section in self._file_config.values():
            if isinstance(section, dict) and key in section:
                return section[key]

        return default

    def problems(self) -> List[str]:
        found = []
        for name in ("prop_tol", "kn_tol", "level_tol", "genericity_margin"):
            if getattr(self, name) <= 0:
                found.append(f"{name} must be positive")
        if self.max_iters <= 0:
            found.append("max_iters must be positive")
        if self.output_format not in FORMATS:
            found.append(f"format must be one of {', '.join(FORMATS)}")
        return found

    def validate(self) -> bool:
        problems = self.problems()
        for problem in problems:
            logger.error(problem)
        return not problems

    def __str__(self) -> str:
        config_dict = self.__dict__.copy()
        del config_dict["_file_config"]
        return str(config_dict)


@dataclass
class RunConfig:
    """One CLI invocation: the command, its paths and its numeric options."""

    command: str
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    prop_tol: float = 1e-9
    kn_tol: float = 1e-8
    level_tol: float = 1e-8
    genericity_margin: float = 1e-8
    seed: int = 0
    max_iters: int = 500
    output_format: str = "json"
    threads: int = 1
    to: Optional[str] = None
    sweep: Optional[int] = None
    k1: Optional[int] = None
    m_max: Optional[int] = None
    subset: Optional[List[int]] = None

    @classmethod
    def from_args(cls, args: Any, config: Optional[Config] = None) -> "RunConfig":
        """Parsed flags over the Config defaults; flags left as None fall back."""
        config = config or get_config()

        def pick(name: str, default: Any) -> Any:
            value = getattr(args, name, None)
            return default if value is None else value

        return cls(
            command=args.command,
            input_path=getattr(args, "input", None),
            output_path=getattr(args, "output", None),
            prop_tol=pick("tol", config.prop_tol),
            kn_tol=pick("kn_tol", config.kn_tol),
            level_tol=config.level_tol,
            genericity_margin=config.genericity_margin,
            seed=pick("seed", config.seed),
            max_iters=pick("max_iters", config.max_iters),
            output_format=pick("format", config.output_format),
            threads=config.threads,
            to=getattr(args, "to", None),
            sweep=getattr(args, "sweep", None),
            k1=getattr(args, "k1", None),
            m_max=getattr(args, "m_max", None),
            subset=getattr(args, "subset", None),
        )

    def validate(self) -> None:
        for name in ("prop_tol", "kn_tol", "level_tol", "genericity_margin"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_iters <= 0:
            raise ConfigError(f"max_iters must be positive, got {self.max_iters}")
        if self.sweep is not None and self.sweep <= 0:
            raise ConfigError(f"sweep must be positive, got {self.sweep}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"unknown format {self.output_format!r}")


# Singleton instance holder
_config_instance: Optional[Config] = None


def get_config() -> Config:
    """Returns the singleton Config instance."""
    global _config_instance
    if _config_instance is None:
        _config_instance = Config()
    return _config_instance
