"""
Output for the zkace command line.

Progress and diagnostics are written to stderr. Results, meaning JSON
documents and rendered tables, are written to stdout so they can be piped
into other tools. Library code never prints directly; it goes through the
`log` instance at the bottom of this module.
"""

import json
import sys
import threading
from contextlib import contextmanager
from datetime import timedelta
from typing import Any, Iterator, TextIO

HEADING_PREFIX = '#'
PHASE_PREFIX = '>'

_CLEAR_TO_EOL = '\033[K'
_RESET = '\033[0m'


class Color:
    """ANSI codes per kind of output line."""

    HEADING = '\033[33m'
    PHASE = '\033[36m'
    WARNING = '\033[35m'
    ERROR = '\033[31m'
    RESET = _RESET


def _use_color(stream: TextIO) -> bool:
    """True if stream is a terminal."""
    isatty = getattr(stream, 'isatty', None)
    return bool(isatty and isatty())


def _paint(text: str, color: str, stream: TextIO) -> str:
    """Color text for stream, or leave it plain off a terminal."""
    return f'{color}{text}{_RESET}' if _use_color(stream) else text


class _Spinner:
    """Animates a rotating character after a phase line until stopped."""

    FRAMES = '|/-\\'
    INTERVAL = 0.1

    def __init__(self, stream: TextIO, line: str) -> None:
        self.stream = stream
        self.line = line
        self._done = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def start(self) -> None:
        """Begin animating in a daemon thread."""
        self._thread.start()

    def stop(self, final_line: str) -> None:
        """Stop the animation and overwrite the line with final_line."""
        self._done.set()
        self._thread.join()
        self.stream.write(f'\r{final_line}{_CLEAR_TO_EOL}\n')
        self.stream.flush()

    def _run(self) -> None:
        """Background thread: redraw until stopped."""
        frame = 0
        while not self._done.wait(self.INTERVAL):
            self.stream.write(f'\r{self.line} {self.FRAMES[frame % len(self.FRAMES)]}')
            self.stream.flush()
            frame += 1


class Log:
    """Structured output for zkace commands."""

    def __init__(self) -> None:
        self.verbose_mode: bool = False
        self._headings = 0
        self._spinner: _Spinner | None = None

    def _err(self, text: str = '', end: str = '\n') -> None:
        print(text, end=end, file=sys.stderr, flush=True)

    def heading(self, text: str) -> None:
        """Print a section heading, separated from the previous section by a blank line."""
        if self._headings:
            self._err()
        self._headings += 1
        self._err(_paint(f'{HEADING_PREFIX} {text}', Color.HEADING, sys.stderr))

    def detail(self, key: str, value: object) -> None:
        """Print a key-value detail line."""
        self._err(f'{key}: {value}')

    def info(self, text: str) -> None:
        """Print an informational status line."""
        self._err(text)

    def verbose(self, text: str) -> None:
        """Print verbose-only text (shown with -v/--verbose)."""
        if self.verbose_mode:
            self._err(text)

    def elapsed(self, duration: timedelta) -> None:
        """Print elapsed time (verbose only)."""
        self.verbose(f'elapsed: {duration}')

    def warning(self, text: str) -> None:
        """Print a warning to stderr."""
        self._err(f'{_paint("Warning:", Color.WARNING, sys.stderr)} {text}')

    def error(self, text: str) -> None:
        """Print an error message to stderr."""
        self._err(f'{_paint("Error:", Color.ERROR, sys.stderr)} {text}')

    def failure(self, kind: str, message: str, **fields: Any) -> None:
        """
        Report a failed command as a single JSON line on stderr.

        Args:
            kind: Error kind, e.g. 'rejected' or 'usage'
            message: Human readable description
            **fields: Extra machine-readable fields such as reason and step
        """
        self._err(json.dumps({'error': kind, 'message': message, **fields}, sort_keys=True))

    def result(self, document: Any) -> None:
        """Print a JSON result document to stdout."""
        print(json.dumps(document, indent=2, sort_keys=True))

    def table(self, text: str) -> None:
        """Print a rendered table to stdout."""
        print(text)

    @contextmanager
    def working(self, text: str) -> Iterator[None]:
        """
        Show a phase line while the block runs.

        On a terminal the line carries a spinner which is replaced by the
        plain line when the block finishes, also on exceptions. Elsewhere
        the line is printed once.
        """
        plain = f'{PHASE_PREFIX} {text}'
        if not _use_color(sys.stderr):
            self._err(plain)
            yield
            return
        painted = f'{_paint(PHASE_PREFIX, Color.PHASE, sys.stderr)} {text}'
        self._err(painted, end='')
        self._spinner = _Spinner(sys.stderr, plain)
        self._spinner.start()
        try:
            yield
        finally:
            self._spinner.stop(painted)
            self._spinner = None


log = Log()
