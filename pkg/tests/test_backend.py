"""Tests for zkace.backend module."""

import os
import tempfile
import unittest
from dataclasses import replace
from unittest import mock

import pytest
from hypothesis import assume, given, settings, strategies as st

from zkace.backend import (
    AuthorizationProof,
    BackendId,
    ProofBundle,
    ProvingKey,
    VerifyingKey,
    batch_verify,
    load_bundle,
    load_proving_key,
    load_verifying_key,
    proof_size,
    prove,
    save_bundle,
    save_key,
    setup,
    verify,
)
from zkace.circuit import PUBLIC_INPUT_FIELDS, AuthorizationWitness, ReplayMode
from zkace.common import ConfigurationError, FormatError, UnsatisfiedWitnessError, VersionError
from zkace.config import Profile
from zkace.field import ONE, FieldElement, random_element

from tests.helpers import (
    REAL_STATEMENTS,
    SEED,
    field_values,
    mock_keys,
    real_keys,
    sample_statement,
    slow,
    statements,
)


class TestSetup(unittest.TestCase):
    def test_test_profile_requires_seed(self):
        with self.assertRaises(ConfigurationError):
            setup(ReplayMode.NONCE, BackendId.MOCK, None, Profile.TEST)

    def test_seed_length(self):
        with self.assertRaises(ConfigurationError):
            setup(ReplayMode.NONCE, BackendId.MOCK, b'short', Profile.TEST)

    @mock.patch('zkace.backend.log')
    def test_production_seed_warns(self, mock_log):
        setup(ReplayMode.NONCE, BackendId.MOCK, SEED, Profile.PRODUCTION)
        mock_log.warning.assert_called_once()
        self.assertIn('INSECURE-FOR-PRODUCTION', mock_log.warning.call_args[0][0])

    def test_seeded_keys_are_deterministic(self):
        pk, vk = setup(ReplayMode.NONCE, BackendId.MOCK, SEED, Profile.TEST)
        self.assertEqual(pk, mock_keys(ReplayMode.NONCE)[0])
        self.assertEqual(vk.circuit_id, pk.circuit_id)

    def test_unseeded_keys_differ(self):
        first, _ = setup(ReplayMode.NONCE, BackendId.MOCK)
        second, _ = setup(ReplayMode.NONCE, BackendId.MOCK)
        self.assertNotEqual(first.payload, second.payload)

    def test_proof_sizes(self):
        self.assertEqual(proof_size(BackendId.REAL), 256)
        self.assertEqual(proof_size(BackendId.MOCK), 32)


class TestMockBackend(unittest.TestCase):
    def setUp(self):
        self.pk, self.vk = mock_keys(ReplayMode.NONCE)
        self.witness, self.pub = sample_statement(ReplayMode.NONCE)
        self.proof = prove(self.pk, self.witness, self.pub)

    def test_honest_proof_verifies(self):
        self.assertTrue(verify(self.vk, self.proof, self.pub))
        self.assertEqual(self.proof.size_bytes, 32)

    def test_prover_checks_witness(self):
        bad = AuthorizationWitness(random_element(), self.witness.salt, self.witness.ctx,
                                   self.witness.nonce)
        with self.assertRaises(UnsatisfiedWitnessError) as ctx:
            prove(self.pk, bad, self.pub)
        self.assertIn('C1', ctx.exception.groups)
        forced = prove(self.pk, bad, self.pub, allow_unsatisfied=True)
        self.assertFalse(verify(self.vk, forced, self.pub))

    def test_every_public_input_is_bound(self):
        for name in ('id_com', 'tx_hash', 'domain', 'target', 'rp_com'):
            with self.subTest(name=name):
                mutated = self.pub.mutate(name, getattr(self.pub, name) + ONE)
                self.assertFalse(verify(self.vk, self.proof, mutated))

    def test_other_mode_key_rejects(self):
        _, nullifier_vk = mock_keys(ReplayMode.NULLIFIER)
        self.assertFalse(verify(nullifier_vk, self.proof, self.pub))

    def test_wrong_size_rejects(self):
        truncated = replace(self.proof, proof_bytes=self.proof.proof_bytes[:-1])
        self.assertFalse(verify(self.vk, truncated, self.pub))

    def test_wrong_backend_rejects(self):
        relabeled = replace(self.proof, backend=BackendId.REAL)
        self.assertFalse(verify(self.vk, relabeled, self.pub))

    def test_foreign_circuit_key(self):
        other_pk = replace(self.pk, circuit_id=bytes(32))
        with self.assertRaises(ConfigurationError):
            prove(other_pk, self.witness, self.pub)

    def test_batch(self):
        witness, pub = sample_statement(ReplayMode.NONCE, nonce=1)
        second = prove(self.pk, witness, pub)
        self.assertTrue(batch_verify(self.vk, [(self.proof, self.pub), (second, pub)]).accepted)
        result = batch_verify(self.vk, [(self.proof, self.pub), (second, self.pub)])
        self.assertFalse(result.accepted)
        self.assertEqual(result.failing, (1,))

    def test_empty_batch(self):
        with self.assertRaises(ValueError):
            batch_verify(self.vk, [])


class TestRandomMockProofs:
    @pytest.mark.parametrize('mode', list(ReplayMode))
    @settings(max_examples=200, deadline=None)
    @given(data=st.data())
    def test_honest_statements_verify(self, mode, data):
        pk, vk = mock_keys(mode)
        witness, pub = data.draw(statements(mode))
        assert verify(vk, prove(pk, witness, pub), pub)

    @pytest.mark.parametrize('mode', list(ReplayMode))
    @pytest.mark.parametrize('name', PUBLIC_INPUT_FIELDS)
    @settings(max_examples=100, deadline=None)
    @given(replacement=field_values)
    def test_any_changed_input_rejects(self, mode, name, replacement):
        pk, vk = mock_keys(mode)
        witness, pub = sample_statement(mode)
        assume(replacement != getattr(pub, name).value)
        proof = prove(pk, witness, pub)
        assert not verify(vk, proof, pub.mutate(name, FieldElement(replacement)))


class TestKeyFiles(unittest.TestCase):
    def setUp(self):
        self.pk, self.vk = mock_keys(ReplayMode.NULLIFIER)
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_round_trip(self):
        save_key(self._path('k.pk'), self.pk)
        save_key(self._path('k.vk'), self.vk)
        self.assertEqual(load_proving_key(self._path('k.pk')), self.pk)
        vk = load_verifying_key(self._path('k.vk'))
        self.assertEqual(vk, self.vk)
        self.assertIs(vk.mode, ReplayMode.NULLIFIER)

    def test_kind_is_checked(self):
        with self.assertRaises(FormatError):
            VerifyingKey.from_bytes(self.pk.to_bytes())

    def test_bad_magic(self):
        with self.assertRaises(FormatError):
            ProvingKey.from_bytes(b'NOTAKEY!' + self.pk.to_bytes()[8:])

    def test_version_is_checked(self):
        data = bytearray(self.pk.to_bytes())
        data[9] = 7
        with self.assertRaises(VersionError):
            ProvingKey.from_bytes(bytes(data))

    def test_truncated(self):
        with self.assertRaises(FormatError):
            ProvingKey.from_bytes(b'ZKACEKEY')

    def test_missing_file(self):
        with self.assertRaises(FormatError):
            load_proving_key(self._path('absent.pk'))


class TestProofBundle(unittest.TestCase):
    def setUp(self):
        pk, _ = mock_keys(ReplayMode.NONCE)
        witness, self.pub = sample_statement(ReplayMode.NONCE)
        self.bundle = ProofBundle(prove(pk, witness, self.pub), self.pub, ReplayMode.NONCE,
                                  b'payload')

    def test_file_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'tx.json')
            save_bundle(path, self.bundle)
            self.assertEqual(load_bundle(path), self.bundle)

    def test_document_fields(self):
        document = self.bundle.to_json()
        self.assertEqual(document['backend_id'], 'mock')
        self.assertEqual(document['public_inputs']['mode'], 'nonce')
        self.assertIn('payload_b64', document)

    def test_bad_base64(self):
        document = self.bundle.to_json()
        document['proof_b64'] = '***'
        with self.assertRaises(FormatError):
            ProofBundle.from_json(document)

    def test_missing_field(self):
        document = self.bundle.to_json()
        del document['circuit_id']
        with self.assertRaises(FormatError):
            ProofBundle.from_json(document)

    def test_unknown_backend(self):
        document = self.bundle.to_json()
        document['backend_id'] = 'plonk'
        with self.assertRaises(FormatError):
            ProofBundle.from_json(document)


@slow
class TestRealBackend(unittest.TestCase):
    mode = ReplayMode.NONCE

    @classmethod
    def setUpClass(cls):
        cls.pk, cls.vk = real_keys(cls.mode)
        cls.witness, cls.pub = sample_statement(cls.mode)
        cls.proof = prove(cls.pk, cls.witness, cls.pub)

    def test_honest_proof_verifies(self):
        self.assertEqual(self.proof.size_bytes, 256)
        self.assertTrue(verify(self.vk, self.proof, self.pub))

    def test_every_public_input_is_bound(self):
        for name in PUBLIC_INPUT_FIELDS:
            with self.subTest(name=name):
                mutated = self.pub.mutate(name, random_element())
                self.assertFalse(verify(self.vk, self.proof, mutated))

    def test_random_bytes_reject(self):
        blob = AuthorizationProof(os.urandom(256), BackendId.REAL, self.vk.circuit_id)
        self.assertFalse(verify(self.vk, blob, self.pub))

    def test_key_file_round_trip(self):
        vk = VerifyingKey.from_bytes(self.vk.to_bytes())
        self.assertTrue(verify(vk, self.proof, self.pub))

    def test_batch_reports_failing_index(self):
        witness, pub = sample_statement(self.mode, nonce=1)
        second = prove(self.pk, witness, pub)
        self.assertTrue(batch_verify(self.vk, [(self.proof, self.pub), (second, pub)]).accepted)
        result = batch_verify(self.vk, [(self.proof, self.pub), (second, self.pub)])
        self.assertEqual(result.failing, (1,))


@slow
class TestRealBackendNullifier(TestRealBackend):
    mode = ReplayMode.NULLIFIER


@slow
class TestRealRandomStatements:
    @pytest.mark.parametrize('mode', list(ReplayMode))
    @settings(max_examples=REAL_STATEMENTS, deadline=None)
    @given(data=st.data())
    def test_honest_statements_verify(self, mode, data):
        pk, vk = real_keys(mode)
        witness, pub = data.draw(statements(mode))
        proof = prove(pk, witness, pub)
        assert verify(vk, proof, pub)
        assert not verify(vk, proof, pub.mutate('tx_hash', pub.tx_hash + ONE))
