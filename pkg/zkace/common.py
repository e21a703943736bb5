"""
Common utilities shared between the zkace commands.
"""

import json
import os
import os.path
from timeit import default_timer as timer
from datetime import timedelta
from typing import Any, Callable, TypeVar

# Version carried by every JSON artifact and key file written by zkace.
FORMAT_VERSION = 1

T = TypeVar('T')


class CommandError(Exception):
    """Raised for logic/validation errors in commands."""

    kind = 'error'
    default_returncode = 1

    def __init__(self, message: str, returncode: int | None = None) -> None:
        super().__init__(message)
        if returncode is None:
            returncode = self.default_returncode
        self.returncode = returncode

    def details(self) -> dict[str, Any]:
        """Extra machine-readable fields for the stderr error document."""
        return {}


class UsageError(CommandError):
    """Raised for unknown flags and invalid argument combinations."""
    kind = 'usage'
    default_returncode = 2


class FormatError(CommandError):
    """Raised when a file or encoded value cannot be parsed."""
    kind = 'malformed'
    default_returncode = 3


class FieldEncodingError(FormatError):
    """Raised for values outside the scalar field or non-canonical bytes."""


class VersionError(FormatError):
    """Raised when an artifact carries an unsupported format_version."""
    kind = 'version'
    default_returncode = 4


class ChecksumError(FormatError):
    """Raised when a persisted file fails its content checksum."""
    kind = 'checksum'
    default_returncode = 5


class RejectedError(CommandError):
    """Raised when a proof or transaction is rejected."""
    kind = 'rejected'
    default_returncode = 6

    def __init__(self, message: str, reason: str, step: int | None = None) -> None:
        super().__init__(message)
        self.reason = reason
        self.step = step

    def details(self) -> dict[str, Any]:
        fields: dict[str, Any] = {'reason': self.reason}
        if self.step is not None:
            fields['step'] = self.step
        return fields


class AuthenticationError(CommandError):
    """Raised when a sealed identity cannot be opened with a credential."""
    kind = 'authentication'
    default_returncode = 7


class ConfigurationError(CommandError):
    """Raised for profile, backend or seed misuse."""
    kind = 'configuration'
    default_returncode = 8


class UnsatisfiedWitnessError(CommandError):
    """Raised when a witness does not satisfy the circuit it is proven against."""
    kind = 'unsatisfied'
    default_returncode = 9

    def __init__(self, message: str, groups: list[str] | None = None) -> None:
        super().__init__(message)
        self.groups = groups or []

    def details(self) -> dict[str, Any]:
        return {'groups': self.groups}


class DuplicateIdentityError(CommandError):
    """Raised when an identity commitment is registered twice."""
    kind = 'duplicate-identity'
    default_returncode = 10


class Timed:
    """Result of a timed call."""

    def __init__(self, value: Any, elapsed: timedelta) -> None:
        self.value = value
        self.elapsed: timedelta = elapsed


def timed(func: Callable[..., T], *args: Any, **kwargs: Any) -> Timed:
    """Call func and return its result together with the wall time taken."""
    start_timestamp = timer()
    value = func(*args, **kwargs)
    end_timestamp = timer()
    return Timed(value, timedelta(seconds=end_timestamp - start_timestamp))


def check_format_version(document: dict[str, Any], what: str) -> None:
    """Raise VersionError unless the document carries FORMAT_VERSION."""
    if 'format_version' not in document:
        raise FormatError(f'{what}: missing format_version')
    version = document['format_version']
    if version != FORMAT_VERSION:
        raise VersionError(
            f'{what}: unsupported format_version {version} (expected {FORMAT_VERSION})')


def canonical_json(document: Any) -> bytes:
    """Serialize to the canonical byte form used for checksums."""
    return json.dumps(document, sort_keys=True, separators=(',', ':')).encode('utf-8')


def read_json(path: str, what: str) -> dict[str, Any]:
    """
    Load a JSON object from a file.

    Args:
        path: File to read
        what: Human readable artifact name used in error messages

    Returns:
        The decoded JSON object

    Raises:
        FormatError: If the file is missing, not JSON, or not an object
    """
    if not os.path.isfile(path):
        raise FormatError(f'{what} not found: {path}')
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FormatError(f'{what} is not valid JSON: {path} ({e})') from e
    if not isinstance(document, dict):
        raise FormatError(f'{what} must be a JSON object: {path}')
    return document


def write_json(path: str, document: Any) -> None:
    """Write a JSON document, creating parent directories as needed."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    tmp_path = path + '.tmp'
    with open(tmp_path, 'w', encoding='utf-8') as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write('\n')
    os.replace(tmp_path, path)


def read_bytes(path: str, what: str) -> bytes:
    """Read a binary file, raising FormatError if it does not exist."""
    if not os.path.isfile(path):
        raise FormatError(f'{what} not found: {path}')
    with open(path, 'rb') as f:
        return f.read()


def write_bytes(path: str, data: bytes) -> None:
    """Write a binary file, creating parent directories as needed."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(data)
