"""Exception types shared across the package."""


class SignforgeError(Exception):
    """Base class for all signforge errors."""


class AnnotationError(SignforgeError):
    """Malformed annotation data (bad CSV row, invalid box, duplicate id)."""


class ManifestError(SignforgeError):
    """Manifest file is unreadable, has a version mismatch, or bad records."""


class CheckpointError(SignforgeError):
    """GAN checkpoint is unreadable or its architecture does not match."""


class ConfigError(SignforgeError):
    """Pipeline configuration is missing, malformed, or has unknown keys."""


class PrerequisiteError(SignforgeError):
    """A pipeline stage was run before the stages it depends on."""


class DivergenceError(SignforgeError):
    """Training produced a non-finite loss."""
