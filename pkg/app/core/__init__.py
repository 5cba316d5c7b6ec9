from .errors import AsymCalcError, CertificationError, PreconditionError
from .logger import (
    get_logger,
    get_seqcore_logger,
    get_dists_logger,
    get_amajor_logger,
    get_qfi_logger,
    get_channels_logger,
    get_spectra_logger,
    get_bridge_logger,
    get_cli_logger,
)

__all__ = [
    "AsymCalcError",
    "CertificationError",
    "PreconditionError",
    "get_logger",
    "get_seqcore_logger",
    "get_dists_logger",
    "get_amajor_logger",
    "get_qfi_logger",
    "get_channels_logger",
    "get_spectra_logger",
    "get_bridge_logger",
    "get_cli_logger",
]
