"""Exception hierarchy shared by all ciphersim modules.

The CLI maps these onto process exit codes: parameter/usage problems exit
with 2, data/content problems with 3.
"""

EXIT_PARAM = 2
EXIT_DATA = 3


class CipherSimError(Exception):
    """Base class for all toolkit errors."""

    exit_code = EXIT_DATA


class ParamError(CipherSimError):
    """Invalid parameter value (bad k, even window, out_dim too large...)."""

    exit_code = EXIT_PARAM


class DimError(ParamError):
    """Feature dimensionality mismatch between inputs."""


class SizeError(ParamError):
    """Requested sample size exceeds what a document provides."""


class InputError(ParamError):
    """Structurally invalid input to an operation (empty crop, all-zero counts)."""


class RankError(ParamError):
    """Requested more principal components than the data's numerical rank."""


class FormatError(CipherSimError):
    """File does not match the CFEA format (bad magic or version)."""


class TruncationError(FormatError):
    """CFEA payload shorter or longer than its header declares."""


class DataError(CipherSimError):
    """Content violates a data invariant (non-finite values, missing files)."""


class IoError(CipherSimError):
    """Filesystem operation failed (unwritable path, unreadable file)."""


class FeasibilityError(CipherSimError):
    """Synthetic prototype sampling could not satisfy the separation constraint."""


class DegenerateError(CipherSimError):
    """Statistic undefined on this input (zero variance across pairs)."""


class AlignError(CipherSimError):
    """Similarity matrices cover different document sets."""
