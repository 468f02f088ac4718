class ConfigError(ValueError):
    """Invalid optimizer, schedule or harness configuration."""


class DataError(ValueError):
    """Malformed or unusable dataset input."""


class InvalidMaskError(ValueError):
    """A feature mask with no selected features reached the classifier."""
