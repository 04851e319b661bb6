"""Exception types raised across the pipeline.

Every error carries a short machine-readable ``code`` (e.g. ``"empty-asset"``)
so the CLI and tests can match on it without parsing messages.
"""


class PartbenchError(Exception):
    code = "error"

    def __init__(self, message: str = "", code: str | None = None):
        if code is not None:
            self.code = code
        super().__init__(f"{self.code}: {message}" if message else self.code)


class GeometryError(PartbenchError):
    code = "geometry"


class EmptyAssetError(GeometryError):
    code = "empty-asset"


class GeneratorError(PartbenchError):
    code = "infeasible-spec"


class EmptyForegroundError(PartbenchError):
    code = "empty-foreground"


class TooManyPartsError(PartbenchError):
    code = "too-many-parts"


class NoGroundTruthError(PartbenchError):
    code = "no-ground-truth"


class ConfigError(PartbenchError):
    code = "config"


class FormatError(PartbenchError):
    code = "bad-format"


class StageError(PartbenchError):
    """A pipeline stage failed; ``stage`` names it."""

    code = "stage-failure"

    def __init__(self, stage: str, message: str = ""):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
