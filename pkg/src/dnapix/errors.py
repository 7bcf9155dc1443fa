"""Exception hierarchy shared across the toolkit."""


class DnapixError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(DnapixError):
    """Image too small for the requested decomposition, or shape mismatch."""


class StructureError(DnapixError):
    """Inconsistent subband shapes or malformed container/pyramid structure."""


class ParseError(DnapixError):
    """A serialized artifact (container, FASTA, sidecar) could not be parsed."""


class PaddingContractError(DnapixError):
    """Byte input whose length violates the caller-side padding contract."""


class CorruptionError(DnapixError):
    """A trit group or nucleotide sequence is not a valid codeword."""


class GapError(DnapixError):
    """A block index is missing from a stream."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"missing block index {index}")


class IntegrityError(DnapixError):
    """A block failed its CRC check."""


class CapacityError(DnapixError):
    """Primer rejection sampling exhausted its candidate budget."""


class UnidentifiedPrimerError(DnapixError):
    """No registry primer within the edit-distance tolerance."""


class ConsensusFailure(DnapixError):
    """No CRC-valid block could be produced for a cluster."""

    def __init__(self, key, message=None):
        self.key = key
        super().__init__(message or f"consensus failed for cluster {key}")


class ContractError(DnapixError):
    """An argument violates a documented precondition."""


class LayerRecoveryError(DnapixError):
    """A layer required for the requested resolution could not be recovered.

    ``partial`` carries the best decodable image (or None) and ``best_level``
    the deepest level that decoded, so callers can fall back gracefully.
    """

    def __init__(self, layer, message=None, partial=None, best_level=None):
        self.layer = layer
        self.partial = partial
        self.best_level = best_level
        super().__init__(message or f"layer {layer} could not be recovered")
