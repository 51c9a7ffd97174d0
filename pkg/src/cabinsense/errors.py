"""Exception types shared across the package."""


class CabinSenseError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(CabinSenseError):
    """A record violates the dataset schema.

    Carries enough context (field, record) to locate the offending entry.
    """

    def __init__(self, message, field=None, record=None):
        ctx = []
        if field is not None:
            ctx.append(f"field={field}")
        if record is not None:
            ctx.append(f"record={record}")
        super().__init__(message if not ctx else f"{message} ({', '.join(ctx)})")
        self.field = field
        self.record = record


class DatasetLoadError(CabinSenseError):
    """A dataset file is missing or unreadable."""


class CropError(CabinSenseError):
    """A person crop cannot be constructed (e.g. bbox outside the frame)."""


class DegenerateSceneError(CabinSenseError):
    """A synthetic scene produced out-of-frame keypoints; caller should regenerate."""


class ConfigError(CabinSenseError):
    """A configuration file or override is invalid."""
