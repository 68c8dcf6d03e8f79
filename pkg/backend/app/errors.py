"""
Exception hierarchy shared by the library and the command line.

Every error carries the process exit code the CLI reports for it.
"""


class RamseyToolError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 70


class UsageError(RamseyToolError):
    """Unknown subcommand or malformed flags"""

    exit_code = 64


class InputError(RamseyToolError):
    """Invalid parameters, indices or documents"""

    exit_code = 65


class PreconditionError(RamseyToolError):
    """A mathematical hypothesis required by an operation does not hold"""

    exit_code = 65


class BudgetError(RamseyToolError):
    """A search or verification budget ran out before an answer was known"""

    exit_code = 69


class ResourceError(RamseyToolError):
    """A memory guard refused to materialize an object"""

    exit_code = 69
