"""Exception types raised across the package.

Every error that callers are expected to branch on gets its own class so
`except` clauses stay narrow. All inherit from :class:`NeardupError`.
"""


class NeardupError(Exception):
    """Base class for all package errors."""


# --- image decoding / raster ops ---

class MalformedImage(NeardupError):
    """Byte stream claims a supported container but cannot be decoded."""


class UnsupportedFormat(NeardupError):
    """Byte stream is not PNG or JPEG."""


class ZeroDimension(NeardupError):
    """A requested output dimension is < 1."""


class NonPositiveSigma(NeardupError):
    """Gaussian blur called with sigma <= 0."""


class SingularHomography(NeardupError):
    """Homography matrix is not invertible."""


class UndecodableImage(NeardupError):
    """An image file or upload could not be decoded."""


# --- histogram ---

class UnnormalizedHistogram(NeardupError):
    """Histogram bins do not sum to 1 within tolerance."""


# --- feature detection / description ---

class ImageTooSmall(NeardupError):
    """Image is below the minimum size for the requested operation."""


class PatchOutOfBounds(NeardupError):
    """Keypoint patch extends past the image border."""


class MissingOrientation(NeardupError):
    """Descriptor requested for a keypoint without an assigned angle."""


# --- matching ---

class EmptyDescriptorSet(NeardupError):
    """Matcher called with an empty descriptor list."""


class NoMatches(NeardupError):
    """A match statistic was requested over an empty match list."""


# --- geometry ---

class InsufficientPoints(NeardupError):
    """Fewer than 4 correspondences supplied to the homography solver."""


class DegenerateConfiguration(NeardupError):
    """Correspondences are collinear/coincident; homography undefined."""


class InsufficientMatches(NeardupError):
    """Fewer than 4 matches supplied to RANSAC."""


class NoConsensus(NeardupError):
    """RANSAC found no model with at least 4 inliers."""


class EmptyMask(NeardupError):
    """Inlier mask of length zero."""


# --- augmentation ---

class InvalidSpec(NeardupError):
    """Modification parameters are invalid for the image they apply to."""


class EmptySourceDir(NeardupError):
    """Pair generation source directory holds fewer than 2 usable images."""


# --- cnn ---

class ShapeMismatch(NeardupError):
    """Tensor shape incompatible with the model configuration."""


class LengthMismatch(NeardupError):
    """Prediction and label counts differ."""


class EmptyDataset(NeardupError):
    """Training requested on an empty pair manifest."""


# --- retrieval / evaluation ---

class CorpusNotFound(NeardupError):
    """Named corpus directory does not exist or is not a corpus."""


class UndecodableQuery(NeardupError):
    """Query image cannot be decoded."""


class EmptySet(NeardupError):
    """Annotated evaluation set has no entries."""


class MissingPoint(NeardupError):
    """A sweep curve does not cover a requested variance point."""


class InvalidCounts(NeardupError):
    """Search-space-reduction counts out of range."""


# --- ingestion ---

class SourceUnreachable(NeardupError):
    """Feed source cannot be opened or fetched."""


class StoreWriteError(NeardupError):
    """Corpus store is not writable."""


class MissingMetadata(NeardupError):
    """Corpus directory lacks meta.json."""


class HashMismatch(NeardupError):
    """Stored image bytes do not match their content-address record."""


class OrphanImage(NeardupError):
    """Image file present on disk but absent from the corpus index."""


# --- analytics ---

class EmptyPostSet(NeardupError):
    """Summary statistics requested over zero posts."""
