"""Exception taxonomy for the package.

Every error raised by library code derives from QbilError. The CLI maps the
four branches onto distinct process exit codes, so keep new exceptions inside
one of these families.
"""


class QbilError(Exception):
    """Base class for all package errors."""


class ConfigError(QbilError):
    """Bad user input: config files, parameter values, CLI arguments.

    Carries an optional line number when the problem is tied to a config
    file location.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GeometryError(ConfigError):
    """Apparatus geometry that cannot be built or rasterized."""


class NumericsError(QbilError):
    """Numerical failure at run time: NaN/Inf fields, eigensolver residuals,
    formulas evaluated outside their validity region, corner-singular rays.
    """


class CornerHitError(NumericsError):
    """A classical ray landed within the corner tolerance of a vertex."""

    def __init__(self, position, bounce_index):
        super().__init__(
            f"corner singularity: ray hit vertex region at "
            f"({position[0]:.15g}, {position[1]:.15g}) on bounce {bounce_index}"
        )
        self.position = tuple(position)
        self.bounce_index = bounce_index


class IoFormatError(QbilError):
    """Malformed binary snapshots, CSV files, or run directories."""
