"""Exception types shared across the toolkit."""


class PasaugError(Exception):
    """Base class for all toolkit errors."""


class UnsupportedFormatError(PasaugError):
    """WAV file is readable but not 16-bit mono PCM."""


class CorruptHeaderError(PasaugError):
    """File is not a parseable RIFF/WAVE container."""


class SampleRateMismatchError(PasaugError):
    """Two buffers that must share a sample rate do not."""


class OutOfRangeError(PasaugError):
    """A segment window exceeds the bounds of its parent buffer."""


class DegenerateSignalError(PasaugError):
    """Signal has zero power, so no SNR can be defined for it."""


class EmptyCatalogError(PasaugError):
    """A noise catalog or input manifest contains no entries."""


class TooShortError(PasaugError):
    """Audio is shorter than one analysis window."""


class WeightMismatchError(PasaugError):
    """Attention weights do not form a valid simplex over the frames."""


class ShapeMismatchError(PasaugError):
    """Gating weight matrices do not match the channel layout."""


class ZeroVectorError(PasaugError):
    """Cosine similarity is undefined for a zero-norm vector."""


class DimensionMismatchError(PasaugError):
    """Vectors being compared have different dimensions."""


class MissingClassError(PasaugError):
    """A trial set lacks target or nontarget entries."""


class RankDeficientError(PasaugError):
    """Fewer nonzero principal components exist than were requested."""
