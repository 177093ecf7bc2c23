"""Exception hierarchy shared by the library, the CLI and the HTTP app.

Each class carries the process exit status the CLI reports for it.
"""


class XpgError(Exception):
    exit_code = 1
    http_status = 400


class DomainError(XpgError):
    """Request is well-formed but makes no sense for this model or instance."""
    exit_code = 1
    http_status = 422


class SeedError(DomainError):
    pass


class TreeRequiredError(DomainError):
    pass


class BruteForceLimitError(DomainError):
    pass


class ModelFormatError(XpgError):
    """Malformed model, decision list or instance document."""
    exit_code = 2
    http_status = 400


class InvariantViolation(XpgError):
    exit_code = 3
    http_status = 500


class ModelIOError(XpgError):
    exit_code = 4
    http_status = 400
