"""
Runtime settings for zkace.

Settings come from the environment and are overridden by command line
flags. ZKACE_PROFILE selects the deployment profile, ZKACE_HASH_PARAMS an
alternative sponge parameter table and ZKACE_KDF_COST the scrypt cost.
"""

import os
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping

from .common import ConfigurationError


class Profile(str, Enum):
    TEST = 'test'
    PRODUCTION = 'production'


PROFILE_ENV = 'ZKACE_PROFILE'
HASH_PARAMS_ENV = 'ZKACE_HASH_PARAMS'
KDF_COST_ENV = 'ZKACE_KDF_COST'

# scrypt log2(N) per profile: 32 MiB interactive vs 1 MiB for fast tests.
DEFAULT_KDF_COST = {
    Profile.PRODUCTION: 15,
    Profile.TEST: 10,
}
MIN_KDF_COST = 1
MAX_KDF_COST = 22


@dataclass(frozen=True)
class Settings:
    profile: Profile = Profile.PRODUCTION
    hash_params_path: str | None = None
    kdf_cost: int = DEFAULT_KDF_COST[Profile.PRODUCTION]

    @property
    def is_production(self) -> bool:
        return self.profile is Profile.PRODUCTION


def parse_profile(value: str) -> Profile:
    """Parse a profile name, raising ConfigurationError for unknown names."""
    try:
        return Profile(value.strip().lower())
    except ValueError:
        choices = ', '.join(p.value for p in Profile)
        raise ConfigurationError(
            f'Unknown profile "{value}" (expected one of: {choices})') from None


def validate_kdf_cost(cost: int) -> int:
    if not MIN_KDF_COST <= cost <= MAX_KDF_COST:
        raise ConfigurationError(
            f'kdf cost {cost} out of range [{MIN_KDF_COST}, {MAX_KDF_COST}]')
    return cost


def load_settings(environ: Mapping[str, str] | None = None) -> Settings:
    """
    Resolve settings from environment variables.

    Args:
        environ: Mapping to read from (defaults to os.environ)

    Returns:
        Settings for the current process
    """
    if environ is None:
        environ = os.environ

    profile = Profile.PRODUCTION
    if environ.get(PROFILE_ENV):
        profile = parse_profile(environ[PROFILE_ENV])

    kdf_cost = DEFAULT_KDF_COST[profile]
    if environ.get(KDF_COST_ENV):
        try:
            kdf_cost = int(environ[KDF_COST_ENV])
        except ValueError:
            raise ConfigurationError(
                f'{KDF_COST_ENV} must be an integer, got "{environ[KDF_COST_ENV]}"') from None
        validate_kdf_cost(kdf_cost)

    return Settings(
        profile=profile,
        hash_params_path=environ.get(HASH_PARAMS_ENV) or None,
        kdf_cost=kdf_cost,
    )


def apply_overrides(settings: Settings, hash_params: str | None = None,
                    kdf_cost: int | None = None) -> Settings:
    """Return settings with command line overrides applied."""
    if hash_params is not None:
        settings = replace(settings, hash_params_path=hash_params)
    if kdf_cost is not None:
        settings = replace(settings, kdf_cost=validate_kdf_cost(kdf_cost))
    return settings
