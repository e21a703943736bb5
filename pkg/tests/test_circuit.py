"""Tests for zkace.r1cs and zkace.circuit modules."""

import functools
import unittest

import pytest
from hypothesis import assume, given, settings, strategies as st

from zkace.circuit import (
    GROUPS,
    PUBLIC_INPUT_FIELDS,
    REFERENCE_TOTAL,
    AuthorizationWitness,
    PublicInputs,
    ReplayMode,
    auth_token,
    build_circuit,
    count_constraints,
    failing_relations,
    identity_commitment,
    parse_mode,
)
from zkace.common import FormatError, VersionError
from zkace.didp import DerivationContext
from zkace.field import ONE, FieldElement
from zkace.r1cs import ConstraintSystem, Lc
from zkace.sponge import tx_hash

from tests.helpers import (
    DOMAIN,
    PAYLOAD,
    SALT,
    field_values,
    sample_rev,
    sample_statement,
    statements,
)

EXPECTED_COUNTS = {'C1': 811, 'C2': 1216, 'C3': 1620, 'C4': 406, 'C5': 1}


class TestConstraintSystem(unittest.TestCase):
    def test_mul_and_equality(self):
        cs = ConstraintSystem(num_public=1)
        out = cs.public('out', 12)
        x = cs.private(3)
        y = cs.private(4)
        cs.enforce_equal(cs.mul(x, y), out)
        self.assertTrue(cs.is_satisfied())
        self.assertEqual(cs.num_wires, 5)
        self.assertEqual(cs.unsatisfied(cs.with_public([13])), [1])

    def test_groups(self):
        cs = ConstraintSystem(num_public=0)
        cs.group('A')
        cs.mul(cs.private(2), cs.private(2))
        cs.group('B')
        cs.enforce_equal(cs.private(1), Lc.constant(2))
        self.assertEqual(cs.counts(), {'A': 1, 'B': 1})
        self.assertEqual(cs.unsatisfied_groups(), ['B'])

    def test_too_many_public_inputs(self):
        cs = ConstraintSystem(num_public=1)
        cs.public('a', 1)
        with self.assertRaises(ValueError):
            cs.public('b', 1)

    def test_with_public_length(self):
        with self.assertRaises(ValueError):
            ConstraintSystem(num_public=2).with_public([1])

    def test_digest_depends_on_shape_only(self):
        def build(value):
            cs = ConstraintSystem(num_public=0)
            cs.mul(cs.private(value), cs.private(value))
            return cs
        self.assertEqual(build(2).digest(), build(9).digest())


class TestConstraintCounts(unittest.TestCase):
    def test_breakdown_per_mode(self):
        for mode in ReplayMode:
            with self.subTest(mode=mode):
                report = count_constraints(mode)
                self.assertEqual(report.counts, EXPECTED_COUNTS)
                self.assertEqual(report.total, 4054)
                self.assertEqual(report.hash_invocations, 5)
                self.assertEqual(report.public_inputs, 5)

    def test_modes_have_identical_totals(self):
        nonce = count_constraints(ReplayMode.NONCE)
        nullifier = count_constraints(ReplayMode.NULLIFIER)
        self.assertEqual(nonce.total, nullifier.total)

    def test_close_to_reference(self):
        report = count_constraints(ReplayMode.NONCE)
        self.assertTrue(report.within_tolerance)
        self.assertAlmostEqual(report.deviation, (4054 - REFERENCE_TOTAL) / REFERENCE_TOTAL)

    def test_report_json(self):
        document = count_constraints(ReplayMode.NULLIFIER).to_json()
        self.assertEqual(document['mode'], 'nullifier')
        self.assertEqual(list(document['constraints']), list(GROUPS))
        self.assertEqual(document['arities']['C3'], '7')

    def test_circuit_ids_differ_per_mode(self):
        self.assertNotEqual(build_circuit(ReplayMode.NONCE).circuit_id,
                            build_circuit(ReplayMode.NULLIFIER).circuit_id)


class TestStatement(unittest.TestCase):
    def test_frozen_public_inputs(self):
        _, pub = sample_statement(ReplayMode.NONCE)
        self.assertEqual(pub.id_com.hex(),
                         '2e20624ef5da94196f2ef4ffb7d51743385a08e688c435518b55973440239f06')
        self.assertEqual(pub.rp_com.hex(),
                         '190b5c2feecb43d76e737f185c13c3d18aa58e2640cddc9d8ca37df3119b1188')
        self.assertEqual(pub.tx_hash, tx_hash(PAYLOAD))
        _, pub = sample_statement(ReplayMode.NULLIFIER)
        self.assertEqual(pub.rp_com.hex(),
                         '0e1a2c0c9372939db65689296ce98822e13ac32cc95cbb17f79f9e4042d3b26c')

    def test_auth_vector(self):
        ctx = DerivationContext.for_domain(DOMAIN)
        auth = auth_token(sample_rev(), ctx, tx_hash(PAYLOAD), DOMAIN, FieldElement(0))
        self.assertEqual(auth.hex(),
                         '1fdd0640ee3265999ec600edd9d263a0b2a55eea8912c348349401726ce18a34')

    def test_honest_witness_satisfies(self):
        for mode in ReplayMode:
            with self.subTest(mode=mode):
                witness, pub = sample_statement(mode)
                cs = build_circuit(mode).synthesize(witness, pub)
                self.assertTrue(cs.is_satisfied())
                self.assertEqual(failing_relations(witness, pub, mode), [])

    def test_in_circuit_hashes_match_native(self):
        witness, pub = sample_statement(ReplayMode.NONCE)
        cs = build_circuit(ReplayMode.NONCE).synthesize(witness, pub)
        self.assertEqual(cs.trace['C1'], pub.id_com.value)
        self.assertEqual(cs.trace['C2-outer'], pub.target.value)
        self.assertEqual(cs.trace['C4'], pub.rp_com.value)

    def test_wrong_salt_fails_commitment(self):
        witness, pub = sample_statement()
        bad = AuthorizationWitness(witness.rev_field, SALT + ONE, witness.ctx, witness.nonce)
        self.assertEqual(failing_relations(bad, pub, ReplayMode.NONCE), ['C1'])
        cs = build_circuit(ReplayMode.NONCE).synthesize(bad, pub)
        self.assertEqual(cs.unsatisfied_groups(), ['C1'])

    def test_context_domain_must_match(self):
        witness, pub = sample_statement()
        ctx = DerivationContext.for_domain(FieldElement(6))
        bad = AuthorizationWitness(witness.rev_field, witness.salt, ctx, witness.nonce)
        failed = failing_relations(bad, pub, ReplayMode.NONCE)
        self.assertIn('C5', failed)
        self.assertIn('C2', failed)

    def test_wrong_nonce_fails_replay_relation(self):
        for mode in ReplayMode:
            with self.subTest(mode=mode):
                witness, pub = sample_statement(mode)
                bad = AuthorizationWitness(witness.rev_field, witness.salt, witness.ctx, ONE)
                self.assertEqual(failing_relations(bad, pub, mode), ['C4'])

    def test_commitment_salt_hides_across_salts(self):
        self.assertNotEqual(identity_commitment(sample_rev(), SALT, DOMAIN),
                            identity_commitment(sample_rev(), SALT + ONE, DOMAIN))

    def test_witness_repr_is_redacted(self):
        witness, _ = sample_statement()
        self.assertNotIn(witness.rev_field.hex(), repr(witness))


@functools.lru_cache(maxsize=None)
def honest_system(mode):
    witness, pub = sample_statement(mode)
    return build_circuit(mode).synthesize(witness, pub), pub


class TestRandomStatements:
    @pytest.mark.parametrize('mode', list(ReplayMode))
    @settings(max_examples=200, deadline=None)
    @given(data=st.data())
    def test_honest_statements_satisfy(self, mode, data):
        witness, pub = data.draw(statements(mode))
        assert failing_relations(witness, pub, mode) == []
        cs = build_circuit(mode).synthesize(witness, pub)
        assert cs.is_satisfied()
        assert cs.trace['C1'] == pub.id_com.value
        assert cs.trace['C2-outer'] == pub.target.value
        assert cs.trace['C3'] == auth_token(witness.rev_field, witness.ctx, pub.tx_hash,
                                            pub.domain, witness.nonce).value
        assert cs.trace['C4'] == pub.rp_com.value


class TestSingleFieldMutation:
    @pytest.mark.parametrize('mode', list(ReplayMode))
    @pytest.mark.parametrize('name', PUBLIC_INPUT_FIELDS)
    @settings(max_examples=100, deadline=None)
    @given(replacement=field_values)
    def test_mutation_breaks_the_circuit(self, mode, name, replacement):
        cs, pub = honest_system(mode)
        assume(replacement != getattr(pub, name).value)
        mutated = pub.mutate(name, FieldElement(replacement))
        assert not cs.is_satisfied(cs.with_public(mutated.values()))


class TestPublicInputsJson(unittest.TestCase):
    def setUp(self):
        _, self.pub = sample_statement(ReplayMode.NULLIFIER)

    def test_round_trip_keeps_mode(self):
        pub, mode = PublicInputs.from_json(self.pub.to_json(ReplayMode.NULLIFIER))
        self.assertEqual(pub, self.pub)
        self.assertIs(mode, ReplayMode.NULLIFIER)

    def test_fixed_order(self):
        self.assertEqual(self.pub.elements()[0], self.pub.id_com)
        self.assertEqual(self.pub.elements()[4], self.pub.rp_com)
        self.assertEqual(len(self.pub.to_bytes()), 160)

    def test_missing_field(self):
        document = self.pub.to_json(ReplayMode.NONCE)
        del document['target']
        with self.assertRaises(FormatError):
            PublicInputs.from_json(document)

    def test_version(self):
        document = self.pub.to_json(ReplayMode.NONCE)
        document['format_version'] = 99
        with self.assertRaises(VersionError):
            PublicInputs.from_json(document)

    def test_unknown_mode(self):
        with self.assertRaises(FormatError):
            parse_mode('sequence')
