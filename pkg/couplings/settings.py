"""
Numeric policy and search budgets shared by every analysis.

A single Settings object is active per process. Library calls that take an
optional tolerance or budget fall back to ``current()``.
"""

import configparser
import os

from dataclasses import dataclass, fields, replace
from logging import debug, info

from couplings.errors import ConfigurationError


ENVIRONMENT_VARIABLE = 'COALESCE_NUMERIC_POLICY'

# config file section each field is read from
SECTIONS = {
    'stochastic_tol': 'numeric',
    'residual_tol': 'numeric',
    'state_budget': 'budgets',
    'support_cap': 'budgets',
    'lp_variable_cap': 'budgets',
    'partition_cap': 'budgets',
    'explore_support_cap': 'budgets',
}


@dataclass(frozen=True)
class Settings:
    stochastic_tol: float = 1e-12
    residual_tol: float = 1e-10
    state_budget: int = 10 ** 7
    support_cap: int = 10 ** 6
    lp_variable_cap: int = 10 ** 5
    partition_cap: int = 10
    explore_support_cap: int = 30

    def updated(self, values):
        """
        Return a copy with string values coerced to each field's type
        :param values: Mapping of field name to value (strings allowed)
        :return: New Settings
        """
        known = {f.name: f.type for f in fields(self)}
        changes = {}
        for key, value in values.items():
            key = key.strip()
            if key not in known:
                raise ConfigurationError(f"Unknown numeric policy key: {key}")
            cast = float if known[key] in (float, 'float') else int
            try:
                changes[key] = cast(float(value)) if cast is int else cast(value)
            except (TypeError, ValueError):
                raise ConfigurationError(f"Invalid value for {key}: {value!r}")
            if changes[key] <= 0:
                raise ConfigurationError(f"{key} must be positive, got {value!r}")

        return replace(self, **changes)


def read_config(config_file, base=None):
    config = configparser.ConfigParser()
    config.read(config_file)

    values = {}
    for key, section in SECTIONS.items():
        if config.has_option(section, key):
            values[key] = config[section][key]

    debug(f'Read {len(values)} settings from {config_file}')
    return (base or Settings()).updated(values)


def from_environment(base=None, environ=None):
    """
    Apply COALESCE_NUMERIC_POLICY ("key=value,key=value") on top of base
    """
    environ = os.environ if environ is None else environ
    base = base or Settings()
    raw = environ.get(ENVIRONMENT_VARIABLE, '').strip()
    if not raw:
        return base

    values = {}
    for item in raw.split(','):
        if not item.strip():
            continue
        if '=' not in item:
            raise ConfigurationError(f"Expected key=value in {ENVIRONMENT_VARIABLE}, got {item!r}")
        key, value = item.split('=', 1)
        values[key] = value.strip()

    info(f'{ENVIRONMENT_VARIABLE} overrides: {values}')
    return base.updated(values)


_active = Settings()


def configure(settings):
    global _active
    _active = settings
    return _active


def current():
    return _active
