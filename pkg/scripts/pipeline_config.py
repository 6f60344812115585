#!/usr/bin/env python3
"""
Pipeline Configuration Module
Detects the machine and layers user settings on top of built-in defaults.

Precedence (lowest to highest):
1. Built-in defaults (worker count and hardware note derived from the machine)
2. YAML file (--config)
3. Environment: .env file, then process environment (SLPT_* variables)
4. Explicit CLI flags
"""

import os
import platform
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import psutil
import yaml
from dotenv import dotenv_values

from sentiment.polarity_engine import AGGREGATIONS


PROJECT_ROOT = Path(__file__).parent.parent
LEXICON_DIR = PROJECT_ROOT / 'data' / 'lexicons'
LANGUAGES = ('en', 'es')

ENV_VARIABLES = {
    'SLPT_THREADS': 'threads',
    'SLPT_LANGUAGE': 'language',
    'SLPT_HARDWARE_NOTE': 'hardware_note',
    'SLPT_INTENSIFIER_FACTOR': 'intensifier_factor',
    'SLPT_WEAKENER_FACTOR': 'weakener_factor',
    'SLPT_AGGREGATION': 'aggregation',
}


class HardwareProfile:
    """Machine facts behind the default thread count and the benchmark note."""

    def __init__(self):
        self.machine = platform.machine().lower()
        self.system = platform.system().lower()
        self.cpu_count = os.cpu_count() or 1
        self.total_ram_gb = psutil.virtual_memory().total / (1024**3)

    def default_threads(self) -> int:
        """One worker per core."""
        return self.cpu_count

    def description(self) -> str:
        return (f"{self.system} {self.machine}, "
                f"{self.cpu_count} cores, {self.total_ram_gb:.1f}GB RAM")


@dataclass(frozen=True)
class PipelineConfig:
    threads: int = 1
    language: str = 'en'
    modifiers_path: Optional[str] = None
    negations_path: Optional[str] = None
    aggregation: str = 'sum'
    intensifier_factor: float = 1.25
    weakener_factor: float = 0.75
    sdv_threshold: float = 0.6
    min_count: int = 5
    repetitions: int = 5
    hardware_note: str = ''

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.language not in LANGUAGES:
            raise ValueError(f"language must be one of {LANGUAGES}, got {self.language!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {self.aggregation!r}")
        for name in ('intensifier_factor', 'weakener_factor', 'sdv_threshold'):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")

    @classmethod
    def defaults(cls, hardware: Optional[HardwareProfile] = None) -> 'PipelineConfig':
        hardware = hardware or HardwareProfile()
        return cls(threads=hardware.default_threads(), hardware_note=hardware.description())

    @classmethod
    def load(cls, config_path=None, env_file=None, environ: Optional[Mapping[str, str]] = None,
             overrides: Optional[Dict[str, Any]] = None,
             hardware: Optional[HardwareProfile] = None) -> 'PipelineConfig':
        """
        Build the effective configuration.

        Args:
            config_path: Optional YAML file
            env_file: .env file (default: ./.env when present)
            environ: Process environment (default: os.environ)
            overrides: CLI values; None entries are ignored

        Returns:
            Validated PipelineConfig
        """
        config = cls.defaults(hardware)

        if config_path:
            config = config.merged(read_yaml_settings(config_path))

        env = {}
        env_path = Path(env_file) if env_file else Path.cwd() / '.env'
        if env_path.exists():
            env.update({k: v for k, v in dotenv_values(env_path).items() if v is not None})
        env.update(os.environ if environ is None else environ)
        config = config.merged({key: env[var] for var, key in ENV_VARIABLES.items() if var in env})

        if overrides:
            config = config.merged({k: v for k, v in overrides.items() if v is not None})
        return config

    def merged(self, settings: Mapping[str, Any]) -> 'PipelineConfig':
        """Copy with settings applied; values are coerced to the field types."""
        known = {f.name for f in fields(self)}
        updates = {}
        for key, value in settings.items():
            if key not in known:
                raise ValueError(f"unknown configuration key {key!r}")
            updates[key] = _coerce(key, value, getattr(self, key))
        return replace(self, **updates)

    def modifiers_file(self) -> Path:
        return Path(self.modifiers_path) if self.modifiers_path else LEXICON_DIR / f"modifiers_{self.language}.tsv"

    def negations_file(self) -> Path:
        return Path(self.negations_path) if self.negations_path else LEXICON_DIR / f"negations_{self.language}.txt"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def print_info(self):
        print("=" * 70)
        print("PIPELINE CONFIGURATION")
        print("=" * 70)
        for key, value in self.to_dict().items():
            print(f"{key:<20} {value}")
        print("=" * 70 + "\n")


_FLOAT_KEYS = {'intensifier_factor', 'weakener_factor', 'sdv_threshold'}
_INT_KEYS = {'threads', 'min_count', 'repetitions'}


def _coerce(key: str, value: Any, current: Any) -> Any:
    try:
        if key in _INT_KEYS:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError):
        raise ValueError(f"configuration key {key!r}: invalid value {value!r}")
    if value is None:
        return current
    return str(value)


def read_yaml_settings(path) -> Dict[str, Any]:
    """Read a flat YAML mapping of configuration keys."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping of configuration keys")
    return data
