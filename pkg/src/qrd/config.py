"""Experiment configuration: TOML or JSON files, validated with field paths."""
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channel import GammaGammaParams
from .specfun import DomainError

SCHEMES = ("qrd", "baseline", "both")
ANALYSES = ("mc", "exact", "asymptotic", "all")
SQUEEZING_MODES = ("optimal", "none")


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def _default_n_grid():
    return [1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0]


def _default_theta_grid():
    return [0.5 * k for k in range(91)]


def _default_beta_grid():
    return [round(0.01 * k, 2) for k in range(101)]


@dataclass
class ExperimentConfig:
    eta: float = 0.8
    epsilon: float = 0.5
    zeta: float = 1.2
    n_grid: list = field(default_factory=_default_n_grid)
    theta_grid_deg: list = field(default_factory=_default_theta_grid)
    beta_grid: list = field(default_factory=_default_beta_grid)
    surface_n: float = 80.0
    squeezing: list = field(default_factory=lambda: list(SQUEEZING_MODES))
    trials: int = 1_000_000
    min_errors: int = 200
    block_size: int = 1 << 16
    seed: int = 0
    threads: int = 1
    scheme: str = "both"
    analysis: str = "all"

    @property
    def channel(self):
        return GammaGammaParams(self.epsilon, self.zeta)

    @property
    def theta_grid(self):
        """Rotation angles in radians."""
        return [math.radians(t) for t in self.theta_grid_deg]

    def to_dict(self):
        return asdict(self)

    def validate(self):
        def number(name, lo=None, hi=None, integer=False):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(name, f"expected a number, got {value!r}")
            if integer and int(value) != value:
                raise ConfigError(name, f"expected an integer, got {value!r}")
            if not math.isfinite(value):
                raise ConfigError(name, "must be finite")
            if lo is not None and value < lo:
                raise ConfigError(name, f"must be >= {lo}, got {value}")
            if hi is not None and value > hi:
                raise ConfigError(name, f"must be <= {hi}, got {value}")

        def grid(name, lo, hi):
            values = getattr(self, name)
            if not isinstance(values, (list, tuple)) or len(values) == 0:
                raise ConfigError(name, "must be a non-empty list")
            for i, v in enumerate(values):
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ConfigError(f"{name}[{i}]", f"expected a number, got {v!r}")
                if v < lo or v > hi:
                    raise ConfigError(f"{name}[{i}]", f"must lie in [{lo}, {hi}], got {v}")

        number("eta", 0.0, 1.0)
        number("epsilon", 0.0)
        number("zeta", 0.0)
        try:
            self.channel
        except DomainError as exc:
            raise ConfigError("epsilon/zeta", str(exc)) from None
        grid("n_grid", 0.0, 1e12)
        grid("theta_grid_deg", 0.0, 45.0)
        grid("beta_grid", 0.0, 1.0)
        number("surface_n", 0.0)
        number("trials", 0, integer=True)
        number("min_errors", 0, integer=True)
        number("block_size", 1, integer=True)
        number("seed", 0, 2**64 - 1, integer=True)
        number("threads", 1, integer=True)
        if self.scheme not in SCHEMES:
            raise ConfigError("scheme", f"must be one of {SCHEMES}, got {self.scheme!r}")
        if self.analysis not in ANALYSES:
            raise ConfigError("analysis", f"must be one of {ANALYSES}, got {self.analysis!r}")
        if not isinstance(self.squeezing, (list, tuple)) or not self.squeezing:
            raise ConfigError("squeezing", "must be a non-empty list")
        for i, mode in enumerate(self.squeezing):
            if mode not in SQUEEZING_MODES:
                raise ConfigError(f"squeezing[{i}]", f"must be one of {SQUEEZING_MODES}, got {mode!r}")
        return self

    def wants(self, method):
        return self.analysis in (method, "all")

    def schemes(self):
        return ("qrd", "baseline") if self.scheme == "both" else (self.scheme,)


_FIELDS = set(ExperimentConfig.__dataclass_fields__)


def config_from_mapping(data):
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a table/object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    return ExperimentConfig(**data).validate()


def load_config(path=None):
    """Read a ``.toml`` or ``.json`` experiment file; ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig().validate()
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config ({exc.strerror})") from None
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw.decode("utf-8"))
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(str(path), f"parse error: {exc}") from None
    return config_from_mapping(data)
