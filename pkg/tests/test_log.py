"""Tests for zkace.log module."""

import json
from datetime import timedelta
from unittest.mock import patch

from zkace.log import Color, Log


class TestHeading:
    def test_first_heading_no_blank_line(self, capsys):
        log = Log()
        log.heading('First')
        assert capsys.readouterr().err == '# First\n'

    def test_second_heading_has_blank_line(self, capsys):
        log = Log()
        log.heading('First')
        log.heading('Second')
        assert capsys.readouterr().err == '# First\n\n# Second\n'


class TestDetail:
    def test_detail(self, capsys):
        log = Log()
        log.detail('height', 12)
        captured = capsys.readouterr()
        assert captured.err == 'height: 12\n'
        assert captured.out == ''


class TestVerbose:
    def test_suppressed_by_default(self, capsys):
        log = Log()
        log.verbose('hidden')
        log.elapsed(timedelta(seconds=1))
        assert capsys.readouterr().err == ''

    def test_shown_in_verbose_mode(self, capsys):
        log = Log()
        log.verbose_mode = True
        log.elapsed(timedelta(seconds=2))
        assert capsys.readouterr().err == 'elapsed: 0:00:02\n'


class TestWarningAndError:
    def test_warning(self, capsys):
        Log().warning('careful')
        assert capsys.readouterr().err == 'Warning: careful\n'

    def test_error(self, capsys):
        Log().error('broken')
        assert capsys.readouterr().err == 'Error: broken\n'

    def test_warning_colored_on_tty(self, capsys):
        with patch('zkace.log._use_color', return_value=True):
            Log().warning('careful')
        assert Color.WARNING in capsys.readouterr().err


class TestMachineReadable:
    def test_failure_is_one_json_line(self, capsys):
        Log().failure('rejected', 'transaction rejected: replay', reason='replay', step=9)
        err = capsys.readouterr().err
        assert err.count('\n') == 1
        assert json.loads(err) == {'error': 'rejected', 'message': 'transaction rejected: replay',
                                   'reason': 'replay', 'step': 9}

    def test_result_goes_to_stdout(self, capsys):
        Log().result({'b': 1, 'a': 2})
        captured = capsys.readouterr()
        assert json.loads(captured.out) == {'a': 2, 'b': 1}
        assert captured.err == ''

    def test_table(self, capsys):
        Log().table('a  b')
        assert capsys.readouterr().out == 'a  b\n'


class TestWorking:
    def test_plain_phase_line_without_tty(self, capsys):
        log = Log()
        with log.working('Proving'):
            pass
        assert capsys.readouterr().err == '> Proving\n'

    def test_newline_even_on_exception(self, capsys):
        log = Log()
        try:
            with log.working('Proving'):
                raise RuntimeError('boom')
        except RuntimeError:
            pass
        assert capsys.readouterr().err == '> Proving\n'

    def test_spinner_on_tty(self, capsys):
        log = Log()
        with patch('zkace.log._use_color', return_value=True):
            with log.working('Proving'):
                pass
        err = capsys.readouterr().err
        assert 'Proving' in err
        assert err.endswith('\n')
        assert log._spinner is None


class TestDocumentation:
    def test_public_methods_have_docstrings(self):
        methods = [name for name in vars(Log) if not name.startswith('_')]
        assert 'heading' in methods
        assert [name for name in methods if not getattr(Log, name).__doc__] == []
