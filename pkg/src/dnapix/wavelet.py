"""Reversible LeGall 5/3 integer lifting transform with dyadic recursion.

Low-pass bands take ceil(n/2) samples per split; boundary handling is
whole-sample symmetric extension, which keeps the lifting steps exactly
invertible on integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, StructureError
from .image import Image


@dataclass
class SubbandPyramid:
    """D-level decomposition of one channel plane.

    ``details[d]`` holds the (HL, LH, HH) bands of level d+1 (finest first
    index 0 = level 1); ``ll`` is the deepest low-pass band LL_D.
    """

    decompositions: int
    ll: np.ndarray
    details: list[tuple[np.ndarray, np.ndarray, np.ndarray]]


def _fwd_lift(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One 5/3 lifting split along the last axis."""
    n = x.shape[-1]
    x = x.astype(np.int64)
    if n == 1:
        return x.copy(), x[..., :0]
    even = x[..., 0::2]
    odd = x[..., 1::2]
    m = odd.shape[-1]
    left = even[..., :m]
    if n % 2 == 0:
        # right neighbor of the last odd sample mirrors back onto even[-1]
        right = np.concatenate([even[..., 1:], even[..., -1:]], axis=-1)
    else:
        right = even[..., 1:]
    d = odd - ((left + right) >> 1)
    dprev, dcur = _update_neighbors(d, n)
    s = even + ((dprev + dcur + 2) >> 2)
    return s, d


def _update_neighbors(d: np.ndarray, n: int):
    """(d[i-1], d[i]) aligned with the even samples, symmetric at both ends."""
    if n % 2 == 0:
        dprev = np.concatenate([d[..., :1], d[..., :-1]], axis=-1)
        dcur = d
    else:
        dprev = np.concatenate([d[..., :1], d], axis=-1)
        dcur = np.concatenate([d, d[..., -1:]], axis=-1)
    return dprev, dcur


def _inv_lift(s: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Exact inverse of :func:`_fwd_lift`."""
    s = s.astype(np.int64)
    d = d.astype(np.int64)
    n = s.shape[-1] + d.shape[-1]
    if n == 1:
        return s.copy()
    dprev, dcur = _update_neighbors(d, n)
    even = s - ((dprev + dcur + 2) >> 2)
    m = d.shape[-1]
    left = even[..., :m]
    if n % 2 == 0:
        right = np.concatenate([even[..., 1:], even[..., -1:]], axis=-1)
    else:
        right = even[..., 1:]
    odd = d + ((left + right) >> 1)
    out = np.empty(s.shape[:-1] + (n,), dtype=np.int64)
    out[..., 0::2] = even
    out[..., 1::2] = odd
    return out


def _fwd2d(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    lo, hi = _fwd_lift(plane)  # along width
    ll, lh = _fwd_lift(lo.swapaxes(-1, -2))  # along height
    hl, hh = _fwd_lift(hi.swapaxes(-1, -2))
    return (
        ll.swapaxes(-1, -2),
        hl.swapaxes(-1, -2),
        lh.swapaxes(-1, -2),
        hh.swapaxes(-1, -2),
    )


def _inv2d(ll, hl, lh, hh) -> np.ndarray:
    lo = _inv_lift(ll.swapaxes(-1, -2), lh.swapaxes(-1, -2)).swapaxes(-1, -2)
    hi = _inv_lift(hl.swapaxes(-1, -2), hh.swapaxes(-1, -2)).swapaxes(-1, -2)
    return _inv_lift(lo, hi)


def subband_shapes(width: int, height: int, levels: int):
    """Shapes of (LL, HL, LH, HH) per level, finest (level 1) first."""
    shapes = []
    w, h = width, height
    for _ in range(levels):
        lw, hw = (w + 1) // 2, w // 2
        lh_, hh_ = (h + 1) // 2, h // 2
        shapes.append(
            {
                "LL": (lh_, lw),
                "HL": (lh_, hw),
                "LH": (hh_, lw),
                "HH": (hh_, hw),
            }
        )
        w, h = lw, lh_
    return shapes


def dwt_forward_plane(plane: np.ndarray, levels: int) -> SubbandPyramid:
    if levels < 1:
        raise DimensionError("need at least one decomposition level")
    h, w = plane.shape
    if min(w, h) < 2**levels:
        raise DimensionError(
            f"image {w}x{h} too small for {levels} decomposition levels"
        )
    ll = plane.astype(np.int64)
    details = []
    for _ in range(levels):
        ll, hl, lh, hh = _fwd2d(ll)
        details.append((hl, lh, hh))
    return SubbandPyramid(decompositions=levels, ll=ll, details=details)


def dwt_inverse_plane(pyr: SubbandPyramid) -> np.ndarray:
    ll = pyr.ll
    for hl, lh, hh in reversed(pyr.details):
        if hl.shape[0] != ll.shape[0] or lh.shape[1] != ll.shape[1]:
            raise StructureError(
                f"subband shapes inconsistent: LL {ll.shape}, HL {hl.shape}, LH {lh.shape}"
            )
        ll = _inv2d(ll, hl, lh, hh)
    return ll


def dwt_forward(img: Image, levels: int) -> list[SubbandPyramid]:
    """Per-channel pyramids; channels are transformed independently."""
    return [dwt_forward_plane(img.planes[c], levels) for c in range(img.channels)]


def dwt_inverse(pyramids: list[SubbandPyramid]) -> Image:
    planes = [
        np.clip(dwt_inverse_plane(p), 0, 255).astype(np.uint8) for p in pyramids
    ]
    return Image(np.stack(planes))
