"""Experiment configuration: flat key/value text files.

Format: one ``key: value`` pair per line, ``#`` comments, lists in
brackets (``snr_db: [0, 5, 10, 15, 20]``). Unknown keys are rejected;
every field is validated before a run starts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from . import convcode, models, schemes


class ConfigError(ValueError):
    """Bad experiment configuration; message names the offending field/line."""


@dataclass
class ExperimentConfig:
    """A full sweep specification: scheme x snr x budget x seed."""

    schemes: list[str] = field(default_factory=lambda: ["hybrid", "digital", "analog"])
    snr_db: list[float] = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0])
    symbol_budgets: list[int] = field(default_factory=lambda: [9438])
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    n_learners: int = 10
    rounds: int = 10
    local_epochs: int = 10
    arch: list[int] = field(default_factory=lambda: [16, 36, 36, 36, 36, 3])
    n_train: int = 4000
    n_test: int = 2000
    n_features: int = 16
    n_classes: int = 3
    blob_spread: float = 0.45
    clusters_per_class: int = 4
    data_seed: int = 99
    train_csv: str = ""
    test_csv: str = ""
    lr: float = 0.02
    momentum: float = 0.9
    weight_decay: float = 5e-4
    batch_size: int = 0
    agg_lr: float = 1.0
    p_total: float = 1.0
    noise_power: float = 0.1
    gamma_0_db: float = 5.0
    modulation_order: int = 4
    conv_constraint_length: int = 8
    conv_generators: list[int] = field(default_factory=lambda: [0o247, 0o371])
    analog_iq: bool = False
    track_channel: bool = False
    fading_std_db: float = 0.0
    out_dir: str = "out"

    def validate(self) -> None:
        for name in ("schemes", "snr_db", "symbol_budgets", "seeds", "arch"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be a non-empty list")
        for s in self.schemes:
            if s not in schemes.SCHEME_KINDS:
                raise ConfigError(f"schemes: unknown scheme {s!r}")
        if any(b <= 0 for b in self.symbol_budgets):
            raise ConfigError("symbol_budgets: entries must be positive")
        if any(w <= 0 for w in self.arch):
            raise ConfigError("arch: zero-width layer")
        if len(self.arch) < 2:
            raise ConfigError("arch: needs at least input and output widths")
        if not self.train_csv and self.arch[0] != self.n_features:
            raise ConfigError(
                f"arch: input width {self.arch[0]} != n_features {self.n_features}"
            )
        if not self.train_csv and self.arch[-1] != self.n_classes:
            raise ConfigError(
                f"arch: output width {self.arch[-1]} != n_classes {self.n_classes}"
            )
        for name in ("n_learners", "rounds", "local_epochs", "n_train", "n_test"):
            if getattr(self, name) < 0 or (name in ("n_learners", "n_train", "n_test") and getattr(self, name) == 0):
                raise ConfigError(f"{name}: must be positive")
        if not 0.0 < self.agg_lr <= 1.0:
            raise ConfigError("agg_lr: must be in (0, 1]")
        if self.p_total <= 0 or self.noise_power <= 0:
            raise ConfigError("p_total and noise_power must be positive")
        if self.modulation_order not in (2, 4):
            raise ConfigError("modulation_order: must be 2 or 4")
        if len(self.conv_generators) != 2:
            raise ConfigError("conv_generators: exactly two octal generators")

    def model_arch(self) -> models.ModelArch:
        return models.ModelArch(tuple(self.arch))

    def code_spec(self) -> convcode.ConvCodeSpec:
        return convcode.ConvCodeSpec(
            constraint_length=self.conv_constraint_length,
            generators=tuple(self.conv_generators),
        )

    def scheme_config(self, kind: str, symbol_budget: int) -> schemes.SchemeConfig:
        return schemes.SchemeConfig(
            kind=kind,
            symbol_budget=symbol_budget,
            p_total=self.p_total,
            noise_power=self.noise_power,
            gamma_0_db=self.gamma_0_db,
            modulation_order=self.modulation_order,
            code=self.code_spec(),
            analog_iq=self.analog_iq,
            track_channel=self.track_channel,
        )

    def train_config(self) -> models.TrainConfig:
        return models.TrainConfig(
            lr=self.lr,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            batch_size=self.batch_size,
        )

    def datasets(self) -> tuple[models.DataShard, models.DataShard]:
        if self.train_csv or self.test_csv:
            if not (self.train_csv and self.test_csv):
                raise ConfigError("train_csv and test_csv must be given together")
            return models.load_csv(self.train_csv), models.load_csv(self.test_csv)
        return models.make_train_test(
            self.n_train,
            self.n_test,
            self.n_features,
            self.n_classes,
            self.data_seed,
            self.blob_spread,
            self.clusters_per_class,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_scalar(text: str, kind: str, key: str, lineno: int):
    text = text.strip()
    try:
        if kind == "int":
            return int(text, 0)  # accepts 0o247-style octal
        if kind == "float":
            return float(text)
        if kind == "bool":
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(text)
        return text
    except ValueError:
        raise ConfigError(f"line {lineno}: {key}: cannot parse {text!r} as {kind}")


def parse_config_text(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"line {lineno}: expected 'key: value', got {raw!r}")
        key, _, value = line.partition(":")
        key = key.strip()
        value = value.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        ftype = str(_FIELD_TYPES[key])
        if ftype.startswith("list["):
            inner = ftype[5:-1]
            if not (value.startswith("[") and value.endswith("]")):
                raise ConfigError(f"line {lineno}: {key}: expected a [..] list")
            body = value[1:-1].strip()
            items = [v for v in (s.strip() for s in body.split(",")) if v] if body else []
            setattr(cfg, key, [_parse_scalar(v, inner, key, lineno) for v in items])
        else:
            setattr(cfg, key, _parse_scalar(value, ftype, key, lineno))
    cfg.validate()
    return cfg


def parse_config(path: str) -> ExperimentConfig:
    """Load and validate an experiment config file."""
    with open(path) as fh:
        return parse_config_text(fh.read())
