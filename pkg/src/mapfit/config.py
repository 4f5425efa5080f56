"""Flat key=value experiment configuration with section prefixes.

A config file is plain text: one `key=value` per line, `#` comments and
blank lines ignored.  Dotted prefixes namespace solver parameters
(`solver.sa.t0=100`).  Command-line flags override file values.
"""

from dataclasses import dataclass, fields, replace

from mapfit.solvers import METHODS, SAParams


def parse_config_text(text, source="<config>"):
    """Parse key=value lines into a string-to-string dict."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(
                f"{source}:{lineno}: expected key=value, got {raw!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValueError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def read_config(path):
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config_text(handle.read(), source=str(path))


def _split_list(value):
    return tuple(item.strip() for item in value.split(",") if item.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a pipeline run needs; see README for the key list."""

    structure: str = None
    placements: str = None
    map_path: str = None
    complexes: tuple = ()
    voxel_size: float = 1.0
    resolution: float = 10.0
    n_positions: int = 4
    max_rotation: float = 60.0
    max_translation: float = 6.0
    scores: tuple = ("contact",)
    solvers: tuple = ("linear", "shift", "sdp", "sqp", "sa", "brute")
    threshold: float = 10.0
    seed: int = 0
    out_dir: str = "."
    sa_t0: float = 100.0
    sa_penalty_weight: float = 1.0
    sa_cooling: float = 0.95
    sa_iters: int = 5000
    sa_seed: int = None

    def __post_init__(self):
        if self.resolution <= 0.0:
            raise ValueError(f"resolution must be > 0, got {self.resolution}")
        if self.voxel_size <= 0.0:
            raise ValueError(f"voxel_size must be > 0, got {self.voxel_size}")
        if self.n_positions < 1:
            raise ValueError(f"N must be >= 1, got {self.n_positions}")
        if self.threshold <= 0.0:
            raise ValueError(f"threshold must be > 0, got {self.threshold}")
        for name in self.solvers:
            if name not in METHODS:
                raise ValueError(
                    f"unknown solver {name!r}; expected one of "
                    f"{'|'.join(METHODS)}"
                )

    def sa_params(self):
        seed = self.seed if self.sa_seed is None else self.sa_seed
        return SAParams(t0=self.sa_t0, penalty_weight=self.sa_penalty_weight,
                        cooling_factor=self.sa_cooling,
                        max_iterations=self.sa_iters, seed=seed)


# config-file key -> (attribute, parser)
_KEYS = {
    "structure": ("structure", str),
    "placements": ("placements", str),
    "map": ("map_path", str),
    "complexes": ("complexes", _split_list),
    "voxel_size": ("voxel_size", float),
    "resolution": ("resolution", float),
    "n": ("n_positions", int),
    "max_rotation": ("max_rotation", float),
    "max_translation": ("max_translation", float),
    "scores": ("scores", _split_list),
    "solvers": ("solvers", _split_list),
    "threshold": ("threshold", float),
    "seed": ("seed", int),
    "out_dir": ("out_dir", str),
    "solver.sa.t0": ("sa_t0", float),
    "solver.sa.penalty_weight": ("sa_penalty_weight", float),
    "solver.sa.cooling": ("sa_cooling", float),
    "solver.sa.iters": ("sa_iters", int),
    "solver.sa.seed": ("sa_seed", int),
}


def config_from_values(values, source="<config>"):
    """Typed ExperimentConfig from a parsed key=value dict."""
    kwargs = {}
    for key, text in values.items():
        if key not in _KEYS:
            raise ValueError(f"{source}: unknown config key {key!r}")
        attribute, parse = _KEYS[key]
        try:
            kwargs[attribute] = parse(text)
        except ValueError as exc:
            raise ValueError(
                f"{source}: bad value for {key!r}: {text!r} ({exc})"
            ) from None
    return ExperimentConfig(**kwargs)


def load_config(path=None):
    if path is None:
        return ExperimentConfig()
    return config_from_values(read_config(path), source=str(path))


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def apply_overrides(config, **overrides):
    """Overlay non-None attribute overrides (CLI flags) onto a config."""
    updates = {}
    for name, value in overrides.items():
        if name not in _FIELD_NAMES:
            raise ValueError(f"unknown config attribute {name!r}")
        if value is not None:
            updates[name] = value
    return replace(config, **updates) if updates else config
