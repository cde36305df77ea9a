"""Exception types shared across the toolkit."""


class LccAsrError(Exception):
    """Base class for all toolkit errors."""


class UnsupportedFormat(LccAsrError):
    """Audio file is not 16-bit PCM WAV."""


class CorruptHeader(LccAsrError):
    """WAV header could not be parsed."""


class EmptyAudio(LccAsrError):
    """Audio file contains no samples."""


class ClipTooShort(LccAsrError):
    """Clip is shorter than one analysis window."""


class SpecOutOfRange(LccAsrError):
    """Augmentation parameters are outside the allowed range."""


class ShapeMismatch(LccAsrError):
    """Input shape is inconsistent with the model configuration."""


class LengthViolation(LccAsrError):
    """Target transcript is too long for the available frames."""


class NonFiniteLoss(LccAsrError):
    """Training produced a non-finite loss."""


class VersionMismatch(LccAsrError):
    """Serialized model file carries an unsupported version tag."""


class CorruptCheckpoint(LccAsrError):
    """Serialized model file is truncated or inconsistent."""


class EmptyCorpus(LccAsrError):
    """No usable text lines for language-model training."""


class MalformedRow(LccAsrError):
    """CSV row could not be parsed."""


class DuplicateId(LccAsrError):
    """Duplicate utterance id in a transcript store."""


class UnknownUtterance(LccAsrError):
    """Revision targets an utterance id that does not exist."""
