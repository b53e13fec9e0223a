class ConfigError(ValueError):
    """A configuration value violates its documented constraint.

    ``key`` names the offending field (``section.key`` when raised from a
    config file).
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


class DegenerateGeometryError(ValueError):
    """User and satellite positions coincide."""
