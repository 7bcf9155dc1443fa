"""Decoding subprocesses: primer trimming, clustering, consensus.

This module deliberately has no access to oligo provenance: every function
consumes plain read strings plus the primer registry, so the decode path
cannot cheat. (Do not import the pool module here.)
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .codec import LayerContainer
from .distance import banded_align_votes, decode_seq, encode_seq, levenshtein, prefix_distances
from .errors import ConsensusFailure, DnapixError, GapError, ParseError
from .primers import (
    DEFAULT_TAU,
    NUCLEOTIDE_ALPHABET,
    PRIMER_LENGTH,
    PrimerPair,
    PrimerRegistry,
)
from .transcode import (
    BLOCK_NT,
    DataBlock,
    nucleotides_to_block,
    nucleotides_to_trits,
    trits_to_bytes,
)


@dataclass(frozen=True)
class TrimmedRead:
    layer_id: int
    inner_left: str
    inner_right: str
    block_nts: str


@dataclass
class Cluster:
    key: tuple  # (image_id, layer_id, block_index); index None for the rescue pool
    image_pair: PrimerPair
    members: list[str] = field(default_factory=list)


class _RegistryIndex:
    """Precomputed lookup structures for fast read classification."""

    def __init__(self, registry: PrimerRegistry):
        self.registry = registry
        self.layer_left = [p.left for p in registry.layer_pairs]
        self.layer_right = [p.right for p in registry.layer_pairs]
        self.image_left = [p.left for p in registry.image_pairs]
        self.image_right = [p.right for p in registry.image_pairs]
        self.layer_left_exact = {p: i for i, p in enumerate(self.layer_left)}
        self.layer_right_exact = {p: i for i, p in enumerate(self.layer_right)}
        self.image_left_exact = {p: i for i, p in enumerate(self.image_left)}
        self.image_right_exact = {p: i for i, p in enumerate(self.image_right)}
        self.layer_left_codes = [encode_seq(p) for p in self.layer_left]
        self.layer_right_rev = [encode_seq(p[::-1]) for p in self.layer_right]
        self.image_left_codes = [encode_seq(p) for p in self.image_left]
        self.image_right_codes = [encode_seq(p) for p in self.image_right]


_INDEX_CACHE: dict[int, _RegistryIndex] = {}


def _index_for(registry: PrimerRegistry) -> _RegistryIndex:
    idx = _INDEX_CACHE.get(id(registry))
    if idx is None or idx.registry is not registry:
        idx = _RegistryIndex(registry)
        _INDEX_CACHE[id(registry)] = idx
    return idx


def _best_prefix_match(codes_list, exact_map, window_exact: str, read_codes, tau: int):
    """(primer id, distance, matched length) for the best 20 +/- tau prefix."""
    hit = exact_map.get(window_exact)
    if hit is not None:
        return hit, 0, PRIMER_LENGTH
    limit = min(PRIMER_LENGTH + tau, read_codes.shape[0])
    prefix = read_codes[:limit]
    best = None
    for pid, pcodes in enumerate(codes_list):
        row = prefix_distances(pcodes, prefix)
        for length in range(max(PRIMER_LENGTH - tau, 0), limit + 1):
            d = int(row[length])
            if best is None or d < best[1]:
                best = (pid, d, length)
    if best is None or best[1] > tau:
        return None
    return best


def trim_and_identify(read: str, registry: PrimerRegistry, tau: int = DEFAULT_TAU):
    """Locate the outer layer primers and cut out the inner fields.

    Returns a TrimmedRead, or a reject reason string when either end fails
    to snap or the two ends disagree on the layer.
    """
    idx = _index_for(registry)
    if len(read) < 4 * PRIMER_LENGTH + 1:
        return "too-short"
    codes = encode_seq(read)
    left = _best_prefix_match(
        idx.layer_left_codes, idx.layer_left_exact, read[:PRIMER_LENGTH], codes, tau
    )
    if left is None:
        return "no-left-layer-primer"
    right = _best_prefix_match(
        idx.layer_right_rev,
        idx.layer_right_exact,
        read[-PRIMER_LENGTH:],
        codes[::-1].copy(),
        tau,
    )
    if right is None:
        return "no-right-layer-primer"
    if left[0] != right[0]:
        return "layer-end-disagreement"
    l_end = left[2]
    r_start = len(read) - right[2]
    if r_start - l_end < 2 * PRIMER_LENGTH:
        return "too-short"
    return TrimmedRead(
        layer_id=left[0],
        inner_left=read[l_end : l_end + PRIMER_LENGTH],
        inner_right=read[r_start - PRIMER_LENGTH : r_start],
        block_nts=read[l_end + PRIMER_LENGTH : r_start - PRIMER_LENGTH],
    )


def _snap(codes_list, exact_map, window: str, tau: int):
    hit = exact_map.get(window)
    if hit is not None:
        return hit, 0
    w = encode_seq(window)
    best_id, best_d = None, None
    for pid, pcodes in enumerate(codes_list):
        d = levenshtein(w, pcodes)
        if best_d is None or d < best_d:
            best_id, best_d = pid, d
    if best_d is None or best_d > tau:
        return None
    return best_id, best_d


def _decode_candidate(nts: str, prev: str):
    if len(nts) != BLOCK_NT:
        return None
    try:
        return nucleotides_to_block(nts, prev, verify=True)
    except DnapixError:
        return None


def cluster_reads(trimmed, registry: PrimerRegistry, tau: int = DEFAULT_TAU):
    """Partition trimmed reads into keyed clusters plus per-(image, layer)
    rescue pools for reads whose block failed its CRC.

    Returns (clusters, rescue, stats): ``clusters`` maps
    (image_id, layer_id, index) to Cluster; ``rescue`` maps
    (image_id, layer_id) to a Cluster with index None.
    """
    idx = _index_for(registry)
    clusters: dict[tuple, Cluster] = {}
    rescue: dict[tuple, Cluster] = {}
    stats = Counter()
    for t in trimmed:
        left = _snap(idx.image_left_codes, idx.image_left_exact, t.inner_left, tau)
        right = _snap(idx.image_right_codes, idx.image_right_exact, t.inner_right, tau)
        if left is None or right is None or left[0] != right[0]:
            stats["image-snap-reject"] += 1
            continue
        image_id = left[0]
        pair = registry.image_pairs[image_id]
        block = _decode_candidate(t.block_nts, pair.left[-1])
        if block is not None:
            key = (image_id, t.layer_id, block.index)
            cluster = clusters.get(key)
            if cluster is None:
                cluster = clusters[key] = Cluster(key, pair)
            cluster.members.append(t.block_nts)
            stats["keyed"] += 1
        else:
            key = (image_id, t.layer_id)
            cluster = rescue.get(key)
            if cluster is None:
                cluster = rescue[key] = Cluster(key + (None,), pair)
            cluster.members.append(t.block_nts)
            stats["rescued"] += 1
    return clusters, rescue, stats


def _plurality_vote(members) -> str:
    length = len(members[0])
    cols = [Counter() for _ in range(length)]
    for m in members:
        for i, c in enumerate(m):
            cols[i][c] += 1
    out = []
    for col in cols:
        top = max(col.values())
        out.append(min(c for c, n in col.items() if n == top))
    return "".join(out)


def _medoid(members, cap: int = 12):
    """Member with the smallest total edit distance to the others.

    Reads of one block are a few edits from the truth, so the medoid is a
    reliable alignment seed even when positional votes are scrambled by
    mutually shifted reads.
    """
    pool = members[:cap]
    codes = [encode_seq(m) for m in pool]
    best_i, best_total = 0, None
    for i in range(len(pool)):
        total = 0
        for j in range(len(pool)):
            if i != j:
                total += levenshtein(codes[i], codes[j])
        if best_total is None or total < best_total:
            best_i, best_total = i, total
    return pool[best_i]


def _alignment_refine(seed: str, members, rounds: int = 3):
    """Repeatedly realign every member to the current candidate and vote.

    Votes cover substitutions, deletions and insertions, so a seed of the
    wrong length converges to the majority-supported 192 nt sequence.
    """
    member_codes = [encode_seq(m) for m in members if abs(len(m) - BLOCK_NT) <= 40]
    if not member_codes:
        return
    quorum = len(member_codes)
    candidate = encode_seq(seed)
    for _ in range(rounds):
        n = candidate.shape[0]
        counts = np.zeros((n, 5), dtype=np.int32)
        ins_counts = np.zeros((n + 1, 4), dtype=np.int32)
        for codes in member_codes:
            banded_align_votes(candidate, codes, 5, counts, ins_counts)
        out = []
        for i in range(n):
            if 2 * int(ins_counts[i].sum()) > quorum:
                out.append(int(np.argmax(ins_counts[i])))  # ties pick A<C<G<T
            col = counts[i]
            sym_total = int(col[:4].sum())
            if int(col[4]) > sym_total:
                continue
            out.append(int(np.argmax(col[:4])) if sym_total else int(candidate[i]))
        if 2 * int(ins_counts[n].sum()) > quorum:
            out.append(int(np.argmax(ins_counts[n])))
        refined = np.array(out, dtype=np.uint8)
        yield decode_seq(refined)
        if np.array_equal(refined, candidate):
            return
        candidate = refined


def _indel_repairs(cand: str):
    """Single-indel variants of an off-by-one candidate.

    Terminal bases are systematically undercovered because primer trimming
    can clip them, so a length-191 consensus is often one insertion away
    from the true block. The ternary rotation never repeats a base, which
    prunes the insertion alphabet at every slot.
    """
    if len(cand) == BLOCK_NT - 1:
        for i in range(len(cand) + 1):
            for b in NUCLEOTIDE_ALPHABET:
                if i > 0 and cand[i - 1] == b:
                    continue
                if i < len(cand) and cand[i] == b:
                    continue
                yield cand[:i] + b + cand[i:]
    elif len(cand) == BLOCK_NT + 1:
        for i in range(len(cand)):
            yield cand[:i] + cand[i + 1:]


def consensus(cluster: Cluster) -> DataBlock:
    """Plurality vote on the modal read length, then alignment-refined
    voting, then each member alone; the first CRC-valid decode wins."""
    if not cluster.members:
        raise ConsensusFailure(cluster.key, "empty cluster")
    prev = cluster.image_pair.left[-1]
    members = cluster.members
    lengths = Counter(len(m) for m in members)
    top = max(lengths.values())
    modal_len = min(n for n, c in lengths.items() if c == top)

    def candidates():
        modal_vote = _plurality_vote([m for m in members if len(m) == modal_len])
        yield modal_vote
        vote_full = None
        if modal_len != BLOCK_NT and lengths.get(BLOCK_NT):
            vote_full = _plurality_vote([m for m in members if len(m) == BLOCK_NT])
            yield vote_full
        near_misses = []
        if len(members) > 1:
            seeds = [_medoid(members)]
            if vote_full is not None:
                seeds.append(vote_full)
            elif modal_len == BLOCK_NT:
                seeds.append(modal_vote)
            for seed in seeds:
                last = None
                for cand in _alignment_refine(seed, members):
                    if len(cand) == BLOCK_NT:
                        yield cand
                    last = cand
                if last is not None and len(last) != BLOCK_NT:
                    near_misses.append(last)
        yield from members
        for cand in near_misses:
            yield from _indel_repairs(cand)

    for cand in candidates():
        if cand is None:
            continue
        block = _decode_candidate(cand, prev)
        if block is not None:
            return block
    raise ConsensusFailure(cluster.key)


def _tentative_index(nts: str, prev: str):
    """Block index decoded from the first two trit groups, ignoring the CRC."""
    if len(nts) < 32:
        return None
    try:
        head = trits_to_bytes(nucleotides_to_trits(nts[:32], prev))
    except DnapixError:
        return None
    return int.from_bytes(head[:4], "big")


def recover_layer_blocks(keyed_clusters, rescue_cluster, stats=None):
    """Consensus over every keyed cluster, then a second attempt that groups
    rescue-pool reads by their tentatively decoded index."""
    stats = stats if stats is not None else Counter()
    blocks: dict[int, DataBlock] = {}
    for key in sorted(keyed_clusters):
        cluster = keyed_clusters[key]
        try:
            block = consensus(cluster)
        except ConsensusFailure:
            stats["consensusFailures"] += 1
            continue
        blocks.setdefault(block.index, block)
    if rescue_cluster is not None and rescue_cluster.members:
        prev = rescue_cluster.image_pair.left[-1]
        groups = defaultdict(list)
        for m in rescue_cluster.members:
            tentative = _tentative_index(m, prev)
            if tentative is not None:
                groups[tentative].append(m)
        for index in sorted(groups):
            if index in blocks:
                continue
            sub = Cluster(rescue_cluster.key[:2] + (index,), rescue_cluster.image_pair,
                          groups[index])
            try:
                block = consensus(sub)
            except ConsensusFailure:
                stats["consensusFailures"] += 1
                continue
            blocks.setdefault(block.index, block)
        _rescue_shifted(blocks, rescue_cluster, groups, stats)
    return blocks


def _rescue_shifted(blocks, rescue_cluster, groups, stats):
    """Last-resort pass for indices still missing below the contiguous top.

    A left trim that cut too little leaves primer residue in front of the
    block, scattering the read's tentative index; stripping one or two
    leading symbols recovers it. Small indices share long runs of zero
    trits, so a shifted read from another block can decode to a valid
    index; an edit-distance gate against the group medoid screens those
    impostors out before the CRC gets a say.
    """
    top = max(blocks) if blocks else -1
    wanted = {i for i in range(top + 1) if i not in blocks}
    if not wanted:
        return
    extra = defaultdict(list)
    for m in rescue_cluster.members:
        for shift in (1, 2):
            if len(m) > shift:
                shifted = m[shift:]
                tentative = _tentative_index(shifted, m[shift - 1])
                if tentative in wanted:
                    extra[tentative].append(shifted)
    for index in sorted(wanted):
        members = groups.get(index, []) + extra.get(index, [])
        if len(members) < 2:
            continue
        anchor = encode_seq(_medoid(members))
        kept = [m for m in members if levenshtein(encode_seq(m), anchor) <= 20]
        sub = Cluster(rescue_cluster.key[:2] + (index,), rescue_cluster.image_pair,
                      kept)
        try:
            block = consensus(sub)
        except ConsensusFailure:
            stats["consensusFailures"] += 1
            continue
        blocks.setdefault(block.index, block)


def assemble_layer_container(blocks: dict[int, DataBlock]) -> LayerContainer:
    """Concatenate the contiguous payload prefix and parse the container.

    Indices past the first gap are ignored when the prefix already parses;
    a CRC collision in the rescue pass can fabricate an absurd index and
    must not masquerade as a gap.
    """
    if not blocks:
        raise GapError(0, "no blocks recovered")
    payload = bytearray()
    end = 0
    while end in blocks:
        payload += blocks[end].payload
        end += 1
    try:
        return LayerContainer.parse(bytes(payload))
    except ParseError:
        if any(i > end for i in blocks):
            raise GapError(end) from None
        raise


@dataclass
class ThumbnailResult:
    image_id: int
    image: "object"
    image_pair: PrimerPair


def extract_thumbnails(readset, registry: PrimerRegistry, tau: int = DEFAULT_TAU):
    """Recover every thumbnail (and its image primer pair) from layer-0 reads.

    Returns (results, undecodable) where ``undecodable`` maps image ids to a
    reason string; images absent from the reads are simply not reported.
    """
    from .codec import decode_layers  # deferred: avoids cycle at import time

    trimmed = []
    for read in readset.reads:
        t = trim_and_identify(read, registry, tau)
        if isinstance(t, TrimmedRead) and t.layer_id == 0:
            trimmed.append(t)
    clusters, rescue, _ = cluster_reads(trimmed, registry, tau)
    per_image_keys = defaultdict(dict)
    for key, cluster in clusters.items():
        per_image_keys[key[0]][key] = cluster
    results = []
    undecodable = {}
    image_ids = sorted(set(per_image_keys) | {k[0] for k in rescue})
    for image_id in image_ids:
        blocks = recover_layer_blocks(
            per_image_keys.get(image_id, {}), rescue.get((image_id, 0))
        )
        try:
            container = assemble_layer_container(blocks)
            if container.layer_index != 0:
                raise ParseError("recovered container is not a thumbnail layer")
            thumb = decode_layers([container], 0)
        except DnapixError as exc:
            undecodable[image_id] = str(exc)
            continue
        results.append(ThumbnailResult(image_id, thumb, registry.image_pairs[image_id]))
    return results, undecodable
