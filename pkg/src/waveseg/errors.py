"""Exception hierarchy shared by every module.

Each class carries a short ``category`` string that the CLI reports and maps
to a process exit code.
"""


class WavesegError(Exception):
    category = "error"
    exit_code = 1


class ConfigError(WavesegError, ValueError):
    category = "config"
    exit_code = 2


class UnknownFilterError(ConfigError, KeyError):
    category = "unknown_filter"
    exit_code = 2

    def __str__(self):
        return Exception.__str__(self)


class FormatError(WavesegError, ValueError):
    category = "format"
    exit_code = 3

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DimensionError(WavesegError, ValueError):
    category = "dimension"
    exit_code = 4


class DegenerateRegionError(WavesegError, ArithmeticError):
    category = "degenerate_region"
    exit_code = 5


class PlacementError(WavesegError, RuntimeError):
    category = "placement"
    exit_code = 6


class ConstantImageError(WavesegError, ValueError):
    category = "constant_image"
    exit_code = 7


class IoError(WavesegError, OSError):
    category = "io"
    exit_code = 8
