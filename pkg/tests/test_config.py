"""Tests for zkace.config module."""

import unittest

from zkace.common import ConfigurationError
from zkace.config import (
    DEFAULT_KDF_COST,
    Profile,
    Settings,
    apply_overrides,
    load_settings,
    parse_profile,
)


class TestLoadSettings(unittest.TestCase):
    def test_defaults(self):
        settings = load_settings({})
        self.assertEqual(settings, Settings())
        self.assertTrue(settings.is_production)
        self.assertEqual(settings.kdf_cost, 15)

    def test_test_profile_lowers_kdf_cost(self):
        settings = load_settings({'ZKACE_PROFILE': 'Test'})
        self.assertIs(settings.profile, Profile.TEST)
        self.assertEqual(settings.kdf_cost, DEFAULT_KDF_COST[Profile.TEST])

    def test_explicit_values(self):
        settings = load_settings({'ZKACE_KDF_COST': '12', 'ZKACE_HASH_PARAMS': '/p.txt'})
        self.assertEqual(settings.kdf_cost, 12)
        self.assertEqual(settings.hash_params_path, '/p.txt')

    def test_bad_profile(self):
        with self.assertRaises(ConfigurationError):
            load_settings({'ZKACE_PROFILE': 'staging'})

    def test_bad_kdf_cost(self):
        for value in ('fast', '0', '40'):
            with self.subTest(value=value):
                with self.assertRaises(ConfigurationError):
                    load_settings({'ZKACE_KDF_COST': value})


class TestOverrides(unittest.TestCase):
    def test_flags_win(self):
        settings = apply_overrides(load_settings({'ZKACE_KDF_COST': '12'}),
                                   hash_params='alt.txt', kdf_cost=8)
        self.assertEqual(settings.kdf_cost, 8)
        self.assertEqual(settings.hash_params_path, 'alt.txt')

    def test_none_keeps_values(self):
        settings = load_settings({})
        self.assertEqual(apply_overrides(settings), settings)

    def test_override_is_validated(self):
        with self.assertRaises(ConfigurationError):
            apply_overrides(Settings(), kdf_cost=99)

    def test_parse_profile(self):
        self.assertIs(parse_profile(' production '), Profile.PRODUCTION)
