""" Independently-importable utilities: exceptions, bit strings, configuration. """

import logging
import os
from typing import Iterator, Optional

from hamred.const import DEFAULT_DIM_CAP, DIM_CAP_ENV

_LOGGER = logging.getLogger(__name__)


class HamredException(Exception):
    """Base for every exceptional condition raised by hamred."""

    def __init__(self, reason: str = ""):
        """
        Optionally provide explanation for exceptional condition.

        :param str reason: some context about what went wrong
        """
        super(HamredException, self).__init__(reason)


class HermitianityError(HamredException):
    """A matrix or local block is not Hermitian within tolerance."""


class DimensionCapError(HamredException):
    """A dense operation would exceed the configured dimension cap."""


class SupportError(HamredException):
    """Support indices of a local term are out of range, duplicated or mis-sized."""


class RegisterLayoutError(HamredException):
    """Register widths or positions are inconsistent."""


class GateArityError(HamredException):
    """A gate acts on more qubits than the consumer allows."""


class NullSpaceOverlapError(HamredException):
    """Two null spaces intersect non-trivially."""


class ZeroOperatorError(HamredException):
    """An operator has no eigenvalue above the null tolerance."""


class EnumerationCapError(HamredException):
    """A brute-force enumeration would exceed its cap."""


class QubitBudgetError(HamredException):
    """A composed circuit would exceed the simulation qubit budget."""


class ProjectorError(HamredException):
    """A term expected to be a scaled projector is not one."""


class UndeterminedStatusError(HamredException):
    """A cQMA input is neither accepted nor rejected."""

    def __init__(self, reason: str = "", witness: Optional[str] = None):
        """
        :param str reason: explanation
        :param str witness: the offending input bit string
        """
        super(UndeterminedStatusError, self).__init__(reason)
        self.witness = witness


class DisperserSearchError(HamredException):
    """Random disperser search failed."""

    def __init__(self, reason: str = "", attempts: int = 0):
        """
        :param str reason: explanation
        :param int attempts: number of candidate graphs drawn before giving up
        """
        super(DisperserSearchError, self).__init__(reason)
        self.attempts = attempts


class DeltaTooSmallError(HamredException):
    """The penalty weight is too small to certify the cover property."""

    def __init__(self, reason: str = "", margin: Optional[float] = None):
        """
        :param str reason: explanation
        :param float margin: measured lambda_min minus the required threshold
        """
        super(DeltaTooSmallError, self).__init__(reason)
        self.margin = margin


class SchemaError(HamredException):
    """An artifact does not match the expected format."""

    def __init__(self, reason: str = "", path: str = ""):
        """
        :param str reason: explanation
        :param str path: location of the offending value, e.g. gates[3].targets
        """
        super(SchemaError, self).__init__(f"{path}: {reason}" if path else reason)
        self.path = path


def _safe_echo(var: str) -> str:
    """Returns an environment variable if it exists, or an empty string if not"""
    return os.getenv(var, "")


def dimension_cap(override: Optional[int] = None) -> int:
    """
    Resolve the dense dimension cap.

    :param int override: explicit cap, wins over the environment
    :return int: cap taken from the override, $HAMRED_DIM_CAP or the default
    """
    if override is not None:
        return int(override)
    raw = _safe_echo(DIM_CAP_ENV)
    if raw:
        try:
            cap = int(raw)
            if cap > 0:
                return cap
        except ValueError:
            pass
        _LOGGER.warning(f"Ignoring malformed {DIM_CAP_ENV}={raw!r}")
    return DEFAULT_DIM_CAP


def check_dimension(dim: int, dim_cap: Optional[int] = None, what: str = "operator"):
    """
    :param int dim: dimension about to be materialized
    :param int dim_cap: explicit cap
    :param str what: name used in the error message
    :raise DimensionCapError: if dim exceeds the cap
    """
    cap = dimension_cap(dim_cap)
    if dim > cap:
        raise DimensionCapError(f"{what} dimension {dim} exceeds cap {cap}")


def validate_bits(bits: str, width: int, name: str = "bit string") -> str:
    """
    :param str bits: string over {0,1}
    :param int width: required length
    :param str name: name used in the error message
    :return str: the same string
    :raise RegisterLayoutError: on a wrong length or alphabet
    """
    if len(bits) != width or any(b not in "01" for b in bits):
        raise RegisterLayoutError(f"{name} {bits!r} is not a {width}-bit string")
    return bits


def bits_to_int(bits: str) -> int:
    """Big-endian: the first character is the most significant bit."""
    return int(bits, 2) if bits else 0


def int_to_bits(value: int, width: int) -> str:
    return format(value, "b").zfill(width) if width else ""


def all_bitstrings(width: int) -> Iterator[str]:
    for value in range(2**width):
        yield int_to_bits(value, width)


def hamming_weight(bits: str) -> int:
    return bits.count("1")


def is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


def next_power_of_two(value: int) -> int:
    power = 1
    while power < value:
        power *= 2
    return power
