"""Tests for zkace.cli module."""

import io
import json
import os
import tempfile
import unittest
from unittest import mock

from zkace import __version__
from zkace.chain import DEFAULT_STATE_PATH
from zkace.cli import create_parser, main, run_command
from zkace.common import UsageError
from zkace.sponge import active_params, default_params

from tests.helpers import SEED, TEST_ENV

SALT_HEX = '00' * 31 + '2a'
DOMAIN = 'zkace-devnet:payments'


class TestCreateParser(unittest.TestCase):
    def setUp(self):
        self.parser = create_parser()

    def test_identity_new(self):
        args = self.parser.parse_args(['identity', 'new', '--credential-stdin', '--out', 'a.id'])
        self.assertEqual(args.command, 'identity')
        self.assertEqual(args.identity_action, 'new')
        self.assertTrue(args.credential_stdin)
        self.assertEqual(args.out, 'a.id')

    def test_setup_defaults(self):
        args = self.parser.parse_args(['setup', '--mode', 'nullifier', '--out', 'keys/k'])
        self.assertEqual(args.mode, 'nullifier')
        self.assertEqual(args.backend, 'real')
        self.assertIsNone(args.seed)

    def test_prove_options(self):
        args = self.parser.parse_args([
            'prove', '--pk', 'k.pk', '--identity', 'a.id', '--commitment', 'a.com',
            '--payload', 'tx.bin', '--nonce', '3', '--out', 'tx.json',
            '--dump-witness-INSECURE', 'w.json'])
        self.assertEqual(args.nonce, 3)
        self.assertEqual(args.alg_id, 1)
        self.assertEqual(args.index, 0)
        self.assertFalse(args.credential_stdin)
        self.assertEqual(args.dump_witness_insecure, 'w.json')

    def test_chain_state_default(self):
        args = self.parser.parse_args(['chain', 'status'])
        self.assertEqual(args.chain_action, 'status')
        self.assertEqual(args.state, DEFAULT_STATE_PATH)

    def test_chain_init(self):
        args = self.parser.parse_args([
            'chain', 'init', '--mode', 'nonce', '--domain', DOMAIN, '--vk', 'k.vk',
            '--nonce-window', '4', '-f'])
        self.assertEqual(args.nonce_window, 4)
        self.assertTrue(args.force)

    def test_games_defaults(self):
        args = self.parser.parse_args(['games', 'run'])
        self.assertEqual(args.game, 'all')
        self.assertEqual(args.trials, 100)
        self.assertEqual(args.backend, 'real')

    def test_accounting_defaults(self):
        args = self.parser.parse_args(['accounting'])
        self.assertEqual((args.pqc, args.zk, args.format), ('ml-dsa-44', 'measured', 'table'))
        self.assertFalse(args.repeat_sender)

    def test_bench_defaults(self):
        args = self.parser.parse_args(['bench'])
        self.assertEqual((args.suite, args.iterations, args.parallel), ('quick', 20, 0))

    def test_global_flags(self):
        args = self.parser.parse_args(['-v', '--kdf-cost', '8', '--hash-params', 'p.txt',
                                       'constraints'])
        self.assertTrue(args.verbose)
        self.assertEqual(args.kdf_cost, 8)
        self.assertEqual(args.hash_params, 'p.txt')
        self.assertEqual(args.mode, 'all')

    def test_unknown_flag_is_usage_error(self):
        with self.assertRaises(UsageError):
            self.parser.parse_args(['verify', '--bogus'])

    def test_bad_choice_is_usage_error(self):
        with self.assertRaises(UsageError):
            self.parser.parse_args(['setup', '--mode', 'sequence', '--out', 'k'])

    def test_version(self):
        with mock.patch('sys.stdout', new_callable=io.StringIO) as out:
            with self.assertRaises(SystemExit):
                self.parser.parse_args(['--version'])
        self.assertIn(__version__, out.getvalue())


class TestRunCommand(unittest.TestCase):
    @mock.patch('zkace.cli.verify_command', return_value=0)
    def test_dispatch(self, mock_verify):
        args = create_parser().parse_args(['verify', '--vk', 'k.vk', 'tx.json'])
        self.assertEqual(run_command(args), 0)
        mock_verify.assert_called_once_with(args)

    def test_games_without_action(self):
        args = create_parser().parse_args(['games'])
        with self.assertRaises(UsageError):
            run_command(args)


class TestMainErrors:
    def test_usage_error_exit_code(self, capsys):
        assert main(['setup', '--out', 'k']) == 2
        assert json.loads(capsys.readouterr().err)['error'] == 'usage'

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 1
        assert 'usage:' in capsys.readouterr().err

    @mock.patch('zkace.cli.run_command', side_effect=KeyboardInterrupt)
    def test_keyboard_interrupt(self, _, capsys):
        assert main(['constraints']) == 1
        assert 'Operation cancelled by user' in capsys.readouterr().err

    @mock.patch('zkace.cli.run_command', side_effect=RuntimeError('boom'))
    def test_unexpected_error(self, _, capsys):
        assert main(['constraints']) == 1
        assert json.loads(capsys.readouterr().err) == {'error': 'error', 'message': 'boom'}

    def test_bad_kdf_cost(self, capsys):
        assert main(['--kdf-cost', '99', 'constraints']) == 8


class TestConstraintsCommand:
    def test_single_mode(self, capsys):
        assert main(['constraints', '--mode', 'nonce']) == 0
        document = json.loads(capsys.readouterr().out)
        assert document['total'] == 4054
        assert document['hash_invocations'] == 5

    def test_all_modes(self, capsys):
        assert main(['constraints']) == 0
        document = json.loads(capsys.readouterr().out)
        assert document['identical_totals'] is True
        assert [m['mode'] for m in document['modes']] == ['nonce', 'nullifier']

    def test_alternative_hash_params(self, capsys):
        from importlib.resources import files
        text = (files('zkace') / 'params' / 'sponge_bn254_t3_a17_v1.txt').read_text()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'params.txt')
            with open(path, 'w') as f:
                f.write(text.replace('seed zkace/poseidon/bn254/t3/a17/v1', 'seed copy'))
            assert main(['--hash-params', path, 'constraints', '--mode', 'nonce']) == 0
        assert json.loads(capsys.readouterr().out)['total'] == 4054
        assert active_params() is default_params()


class TestAccountingAndGames:
    def test_accounting_json(self, capsys):
        assert main(['accounting', '--pqc', 'ml-dsa-87', '--zk', 'groth16-class',
                     '--format', 'json']) == 0
        document = json.loads(capsys.readouterr().out)
        assert document['pqc']['total_bytes'] == 7219
        assert document['ratio'] == 22.56

    def test_games_run_on_mock(self, capsys):
        assert main(['games', 'run', '--game', 'replay', '--trials', '1', '--backend', 'mock',
                     '--seed', SEED.hex()]) == 0
        captured = capsys.readouterr()
        document = json.loads(captured.out)
        assert document['backend'] == 'mock'
        assert document['soundness_evidence'] is False
        assert 'not soundness evidence' in captured.err
        assert document['games'][0]['adversary_wins'] == 0

    def test_games_bad_seed(self, capsys):
        assert main(['games', 'run', '--seed', 'abc']) == 2


@mock.patch.dict(os.environ, TEST_ENV)
class TestEndToEnd:
    """identity -> setup -> prove -> verify -> chain, on the mock backend."""

    def setup_method(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name
        self.state = self.path('state', 'chain.json')

    def teardown_method(self):
        self._tmp.cleanup()

    def path(self, *parts):
        return os.path.join(self.tmp, *parts)

    def run(self, capsys, *argv, credential=None):
        stdin = io.TextIOWrapper(io.BytesIO(credential or b''))
        with mock.patch('sys.stdin', stdin):
            code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    def identity(self, capsys, name='alice'):
        code, _, _ = self.run(capsys, 'identity', 'new', '--credential-stdin',
                              '--out', self.path(f'{name}.id'), credential=b'hunter2\n')
        assert code == 0
        code, out, _ = self.run(capsys, 'identity', 'commit', '--identity',
                                self.path(f'{name}.id'), '--domain', DOMAIN, '--salt', SALT_HEX,
                                '--credential-stdin', '--out', self.path(f'{name}.com'),
                                credential=b'hunter2\n')
        assert code == 0
        return json.loads(out)

    def keys(self, capsys, mode='nonce'):
        code, out, _ = self.run(capsys, 'setup', '--mode', mode, '--backend', 'mock',
                                '--seed', SEED.hex(), '--out', self.path('keys', mode))
        assert code == 0
        return json.loads(out)

    def prove(self, capsys, nonce, out, payload=b'pay bob 5', name='alice'):
        with open(self.path('tx.bin'), 'wb') as f:
            f.write(payload)
        return self.run(capsys, 'prove', '--pk', self.path('keys', 'nonce.pk'),
                        '--identity', self.path(f'{name}.id'),
                        '--commitment', self.path(f'{name}.com'),
                        '--payload', self.path('tx.bin'), '--nonce', str(nonce),
                        '--credential-stdin', '--out', out, credential=b'hunter2\n')

    def chain(self, capsys, *argv):
        return self.run(capsys, 'chain', *argv, '--state', self.state)

    def failure(self, err):
        return json.loads(err.strip().splitlines()[-1])

    def test_full_flow(self, capsys):
        commitment = self.identity(capsys)
        assert commitment['domain_descriptor'] == DOMAIN
        assert commitment['salt'] == SALT_HEX
        setup = self.keys(capsys)
        assert setup['backend'] == 'mock'

        bundle = self.path('tx.json')
        code, out, _ = self.prove(capsys, 0, bundle)
        assert code == 0
        assert json.loads(out)['proof_size'] == 32
        code, out, _ = self.run(capsys, 'verify', '--vk', self.path('keys', 'nonce.vk'), bundle)
        assert code == 0
        assert json.loads(out)['accepted'] is True

        code, _, _ = self.chain(capsys, 'init', '--mode', 'nonce', '--domain', DOMAIN,
                                '--vk', self.path('keys', 'nonce.vk'))
        assert code == 0

        code, _, err = self.chain(capsys, 'submit', bundle)
        assert code == 6
        assert self.failure(err)['reason'] == 'unregistered-identity'
        assert self.failure(err)['step'] == 7

        assert self.chain(capsys, 'register', self.path('alice.com'))[0] == 0
        assert self.chain(capsys, 'register', self.path('alice.com'))[0] == 10

        code, out, _ = self.chain(capsys, 'submit', bundle)
        assert code == 0
        assert json.loads(out)['height'] == 1

        code, _, err = self.chain(capsys, 'submit', bundle)
        assert code == 6
        assert self.failure(err) == {'error': 'rejected', 'reason': 'replay', 'step': 9,
                                     'message': 'transaction rejected: replay'}

        os.makedirs(self.path('batch'))
        assert self.prove(capsys, 1, self.path('batch', '01.json'))[0] == 0
        assert self.prove(capsys, 2, self.path('batch', '02.json'), payload=b'pay carol')[0] == 0
        code, out, _ = self.chain(capsys, 'batch', self.path('batch'))
        assert code == 0
        assert json.loads(out)['accepted'] == 2

        code, out, _ = self.chain(capsys, 'status')
        status = json.loads(out)
        assert status['height'] == 3
        assert status['nonce_counters'] == 1

    def test_wrong_credential(self, capsys):
        self.identity(capsys)
        code, _, err = self.run(capsys, 'identity', 'commit', '--identity',
                                self.path('alice.id'), '--domain', DOMAIN, '--credential-stdin',
                                '--out', self.path('x.com'), credential=b'wrong\n')
        assert code == 7
        assert self.failure(err)['error'] == 'authentication'

    def test_credential_must_come_from_stdin(self, capsys):
        code, _, _ = self.run(capsys, 'identity', 'new', '--out', self.path('a.id'))
        assert code == 2
        assert not os.path.exists(self.path('a.id'))

    def test_tampered_bundle_is_rejected(self, capsys):
        self.identity(capsys)
        self.keys(capsys)
        bundle = self.path('tx.json')
        assert self.prove(capsys, 0, bundle)[0] == 0
        with open(bundle) as f:
            document = json.load(f)
        document['public_inputs']['target'] = '00' * 32
        with open(bundle, 'w') as f:
            json.dump(document, f)
        code, _, err = self.run(capsys, 'verify', '--vk', self.path('keys', 'nonce.vk'), bundle)
        assert code == 6
        assert self.failure(err)['reason'] == 'proof'

    def test_commitment_for_other_domain_is_refused(self, capsys):
        self.identity(capsys)
        self.keys(capsys)
        assert self.chain(capsys, 'init', '--mode', 'nonce', '--domain', 'other:chain',
                          '--vk', self.path('keys', 'nonce.vk'))[0] == 0
        code, _, err = self.chain(capsys, 'register', self.path('alice.com'))
        assert code == 6
        assert self.failure(err)['reason'] == 'domain-mismatch'

    def test_init_refuses_overwrite(self, capsys):
        self.keys(capsys)
        argv = ['init', '--mode', 'nonce', '--domain', DOMAIN,
                '--vk', self.path('keys', 'nonce.vk')]
        assert self.chain(capsys, *argv)[0] == 0
        assert self.chain(capsys, *argv)[0] == 1
        assert self.chain(capsys, *argv, '--force')[0] == 0

    def test_mock_keys_refused_in_production(self, capsys):
        self.keys(capsys)
        with mock.patch.dict(os.environ, {'ZKACE_PROFILE': 'production'}):
            code, _, err = self.chain(capsys, 'init', '--mode', 'nonce', '--domain', DOMAIN,
                                      '--vk', self.path('keys', 'nonce.vk'))
        assert code == 8
        assert self.failure(err)['error'] == 'configuration'

    def test_test_profile_requires_seed(self, capsys):
        code, _, _ = self.run(capsys, 'setup', '--mode', 'nonce', '--backend', 'mock',
                              '--out', self.path('k'))
        assert code == 8

    def test_corrupt_state_file(self, capsys):
        self.keys(capsys)
        assert self.chain(capsys, 'init', '--mode', 'nonce', '--domain', DOMAIN,
                          '--vk', self.path('keys', 'nonce.vk'))[0] == 0
        with open(self.state) as f:
            document = json.load(f)
        document['body']['height'] = 99
        with open(self.state, 'w') as f:
            json.dump(document, f)
        assert self.chain(capsys, 'status')[0] == 5
