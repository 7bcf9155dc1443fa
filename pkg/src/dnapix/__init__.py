"""Progressive image storage on synthetic DNA.

Images are encoded into resolution-layer containers, transcoded into
primer-tagged oligos, pushed through a noisy sequencing channel and decoded
progressively with per-layer random access.
"""

from .channel import ErrorRates, ReadSet, ZERO_RATES, corrupt, sequence
from .codec import LayerContainer, LayeredStream, decode_layers, encode_layers
from .costs import CostInputs, CostReport
from .errors import DnapixError
from .image import Image, psnr, read_pnm, upsample_bicubic, write_bmp, write_pnm
from .pipeline import ProgressiveDecoder, coverage_sweep, decode_image
from .pool import (
    OligoPool,
    assemble_oligo,
    build_pool,
    load_pool,
    pcr_select,
    pcr_select_all,
    save_pool,
)
from .primers import PrimerPair, PrimerRegistry, generate_registry
from .reconstruct import cluster_reads, consensus, extract_thumbnails, trim_and_identify
from .transcode import DataBlock, blocks_from_stream, stream_from_blocks
from .wavelet import dwt_forward, dwt_inverse

__all__ = [
    "DataBlock",
    "DnapixError",
    "ErrorRates",
    "Image",
    "LayerContainer",
    "LayeredStream",
    "OligoPool",
    "PrimerPair",
    "PrimerRegistry",
    "ProgressiveDecoder",
    "ReadSet",
    "ZERO_RATES",
    "assemble_oligo",
    "blocks_from_stream",
    "build_pool",
    "cluster_reads",
    "consensus",
    "corrupt",
    "coverage_sweep",
    "decode_image",
    "decode_layers",
    "dwt_forward",
    "dwt_inverse",
    "encode_layers",
    "extract_thumbnails",
    "generate_registry",
    "load_pool",
    "pcr_select",
    "pcr_select_all",
    "psnr",
    "read_pnm",
    "save_pool",
    "sequence",
    "stream_from_blocks",
    "trim_and_identify",
    "upsample_bicubic",
    "write_bmp",
    "write_pnm",
]
