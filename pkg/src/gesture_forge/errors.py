"""Exception types shared across the pipeline.

Grouped by subsystem so callers can catch a whole family (e.g. every
checkpoint problem is a ``CheckpointError``) or a precise condition.
"""


class GestureForgeError(Exception):
    """Base class for all library-specific errors."""


# --- numeric kernel errors ---------------------------------------------------

class ShapeError(GestureForgeError, ValueError):
    """Operands have incompatible shapes."""


class GeometryError(GestureForgeError, ValueError):
    """A spatial configuration is invalid (non-integer output extent,
    window larger than input, box outside the image, ...)."""


class LabelError(GestureForgeError, ValueError):
    """A class label is outside the valid range."""


class DegenerateBatchError(GestureForgeError, ValueError):
    """Batch statistics were requested over fewer than two values."""


class CheckInvalidError(GestureForgeError, RuntimeError):
    """The gradient checker was asked to probe a non-deterministic forward
    configuration (e.g. batch-norm running statistics being updated)."""


class DivergenceError(GestureForgeError, RuntimeError):
    """Training produced a non-finite loss. Carries the offending epoch."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


class TransferError(GestureForgeError, ValueError):
    """A pretrained checkpoint does not match the target network topology."""


# --- checkpoint container errors ---------------------------------------------

class CheckpointError(GestureForgeError):
    """Base class for checkpoint serialization failures."""


class CheckpointFormatError(CheckpointError, ValueError):
    """File does not start with the expected magic bytes or header."""


class CheckpointVersionError(CheckpointError, ValueError):
    """Container format version is not supported."""


class CheckpointTruncatedError(CheckpointError, ValueError):
    """File ends before the declared payload and trailer."""


class CheckpointChecksumError(CheckpointError, ValueError):
    """Trailing CRC32 does not match the file contents."""


# --- image / cascade parsing errors ------------------------------------------

class ImageFormatError(GestureForgeError, ValueError):
    """Base class for image decode failures."""


class UnknownImageFormatError(ImageFormatError):
    """Magic bytes match neither binary PPM nor BMP."""


class TruncatedImageError(ImageFormatError):
    """Payload is shorter than the header promises."""


class UnsupportedImageError(ImageFormatError):
    """Recognized container but unsupported variant (bit depth, maxval,
    compression)."""


class CascadeFormatError(GestureForgeError, ValueError):
    """Cascade XML is malformed or violates the model invariants. Carries the
    element path of the offending node when known."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{message} (at {path})" if path else message)


class CascadeModelError(GestureForgeError, ValueError):
    """A parsed cascade is unusable for detection (e.g. no stages)."""


# --- dataset / annotation errors ----------------------------------------------

class ManifestError(GestureForgeError, ValueError):
    """Manifest validation failed. ``problems`` lists every offender."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(
            "invalid manifest:\n" + "\n".join(f"  - {p}" for p in self.problems)
        )


class AnnotationError(GestureForgeError, ValueError):
    """Annotation events are inconsistent (overlap, out-of-range frames,
    frame/time mismatch)."""


class SplitError(GestureForgeError, ValueError):
    """A cross-validation split cannot be built."""


class LeakageError(GestureForgeError, ValueError):
    """Test-participant samples leaked into a training or validation set."""


class DatasetError(GestureForgeError, ValueError):
    """A sample set violates a training precondition (e.g. empty class)."""


# --- evaluation errors ---------------------------------------------------------

class EmptyEvaluationError(GestureForgeError, ValueError):
    """Metrics were requested over zero samples."""
