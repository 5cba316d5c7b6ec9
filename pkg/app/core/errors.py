class AsymCalcError(Exception):
    """Root of every error raised by the calculus."""


class PreconditionError(AsymCalcError, ValueError):
    """An operation was called outside its domain (CLI exit code 2)."""


class CertificationError(AsymCalcError, RuntimeError):
    """A numerical certificate could not be established (CLI exit code 3)."""
