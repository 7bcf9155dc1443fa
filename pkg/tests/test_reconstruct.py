"""Read trimming, clustering and consensus on synthetic noisy clusters."""

import numpy as np
import pytest

from dnapix.channel import ErrorRates, corrupt, sequence
from dnapix.errors import ConsensusFailure, GapError
from dnapix.pool import assemble_oligo, Provenance, pcr_select_all
from dnapix.primers import PRIMER_LENGTH
from dnapix.reconstruct import (
    Cluster,
    TrimmedRead,
    _indel_repairs,
    _medoid,
    _plurality_vote,
    assemble_layer_container,
    cluster_reads,
    consensus,
    extract_thumbnails,
    recover_layer_blocks,
    trim_and_identify,
)
from dnapix.transcode import BLOCK_NT, DataBlock, block_to_nucleotides


def make_oligo(registry, image_id=0, layer=1, index=0, payload=None):
    payload = bytes(30) if payload is None else payload
    block = DataBlock.create(index, payload)
    return (
        assemble_oligo(
            registry.layer_pairs[layer],
            registry.image_pairs[image_id],
            block,
            Provenance(image_id, layer, index),
        ),
        block,
    )


def test_trim_exact_read(registry):
    oligo, block = make_oligo(registry, image_id=2, layer=3, index=5)
    t = trim_and_identify(oligo.sequence, registry)
    assert isinstance(t, TrimmedRead)
    assert t.layer_id == 3
    assert t.inner_left == registry.image_pairs[2].left
    assert t.inner_right == registry.image_pairs[2].right
    assert t.block_nts == block_to_nucleotides(block, registry.image_pairs[2].left[-1])


def test_trim_tolerates_end_errors(registry):
    oligo, _ = make_oligo(registry, layer=2)
    seq = oligo.sequence
    mutated = ("T" if seq[3] != "T" else "G") + seq[1:3] + seq[4:]  # sub + shorten
    t = trim_and_identify(mutated, registry)
    assert isinstance(t, TrimmedRead)
    assert t.layer_id == 2


def test_trim_reject_reasons(registry):
    oligo, _ = make_oligo(registry)
    assert trim_and_identify("ACGT" * 5, registry) == "too-short"
    junk = "ACGT" * (len(oligo.sequence) // 4)
    assert trim_and_identify(junk, registry) == "no-left-layer-primer"
    left_ok = oligo.sequence[:PRIMER_LENGTH] + junk[PRIMER_LENGTH:]
    assert trim_and_identify(left_ok, registry) == "no-right-layer-primer"
    crossed = (
        oligo.sequence[: -2 * PRIMER_LENGTH]
        + oligo.sequence[-2 * PRIMER_LENGTH : -PRIMER_LENGTH]
        + registry.layer_pairs[3].right
    )
    assert trim_and_identify(crossed, registry) == "layer-end-disagreement"


def test_cluster_reads_keys_by_block(registry):
    trimmed = []
    for index in (0, 0, 1):
        oligo, _ = make_oligo(registry, image_id=1, layer=0, index=index)
        trimmed.append(trim_and_identify(oligo.sequence, registry))
    clusters, rescue, stats = cluster_reads(trimmed, registry)
    assert set(clusters) == {(1, 0, 0), (1, 0, 1)}
    assert len(clusters[(1, 0, 0)].members) == 2
    assert stats["keyed"] == 3 and not rescue


def test_cluster_reads_routes_bad_crc_to_rescue(registry):
    oligo, _ = make_oligo(registry, image_id=0, layer=1, index=7)
    t = trim_and_identify(oligo.sequence, registry)
    broken = TrimmedRead(t.layer_id, t.inner_left, t.inner_right, t.block_nts[:-3])
    clusters, rescue, stats = cluster_reads([t, broken], registry)
    assert set(clusters) == {(0, 1, 7)}
    assert list(rescue) == [(0, 1)]
    assert stats["rescued"] == 1


def test_cluster_reads_rejects_mismatched_image_primers(registry):
    oligo, _ = make_oligo(registry, image_id=0)
    t = trim_and_identify(oligo.sequence, registry)
    crossed = TrimmedRead(
        t.layer_id, t.inner_left, registry.image_pairs[1].right, t.block_nts
    )
    clusters, rescue, stats = cluster_reads([crossed], registry)
    assert not clusters and not rescue
    assert stats["image-snap-reject"] == 1


def test_plurality_vote_prefers_majority_then_alphabet():
    assert _plurality_vote(["ACG", "ACG", "ATG"]) == "ACG"
    assert _plurality_vote(["AC", "AG"]) == "AC"  # tie breaks alphabetically


def test_medoid_picks_central_member():
    members = ["ACGTACGTAC", "ACGTACGTAC", "ACGAACGTAC", "TTTTTTTTTT"]
    assert _medoid(members) == "ACGTACGTAC"


def test_indel_repairs_respects_rotation():
    # rotation code never repeats a base, so no inserted duplicate neighbors
    short = "ACG" * 63 + "AC"  # 191 nt
    repairs = list(_indel_repairs(short))
    assert all(len(r) == BLOCK_NT for r in repairs)
    for r in repairs:
        assert all(a != b for a, b in zip(r, r[1:]))
    long = "ACG" * 64 + "A"  # 193 nt
    assert all(len(r) == BLOCK_NT for r in _indel_repairs(long))
    assert list(_indel_repairs("ACG")) == []


def rates_cluster(registry, rng, n_members, rates, index=4):
    oligo, block = make_oligo(registry, image_id=0, layer=1, index=index)
    pair = registry.image_pairs[0]
    truth = block_to_nucleotides(block, pair.left[-1])
    members = [corrupt(truth, rates, rng) for _ in range(n_members)]
    return Cluster((0, 1, index), pair, members), block


def test_consensus_exact_members(registry):
    cluster, block = rates_cluster(registry, np.random.default_rng(0), 3, ErrorRates(0, 0, 0))
    assert consensus(cluster) == block


def test_consensus_outvotes_substitutions(registry):
    rng = np.random.default_rng(1)
    cluster, block = rates_cluster(registry, rng, 9, ErrorRates(sub=0.03, ins=0, dele=0))
    assert consensus(cluster) == block


def test_consensus_realigns_indels(registry):
    rng = np.random.default_rng(2)
    cluster, block = rates_cluster(registry, rng, 11, ErrorRates(0.004, 0.002, 0.006))
    assert consensus(cluster) == block


def test_consensus_empty_cluster(registry):
    with pytest.raises(ConsensusFailure):
        consensus(Cluster((0, 0, 0), registry.image_pairs[0], []))


def test_consensus_hopeless_cluster(registry):
    junk = ["ACGT" * 48, "CAGT" * 48]
    with pytest.raises(ConsensusFailure) as err:
        consensus(Cluster((0, 0, 3), registry.image_pairs[0], junk))
    assert err.value.key == (0, 0, 3)


def test_recover_layer_blocks_uses_rescue_pool(registry):
    # keyed cluster for block 0, CRC-broken reads of block 1 in the rescue pool
    rng = np.random.default_rng(3)
    pair = registry.image_pairs[0]
    keyed, block0 = rates_cluster(registry, rng, 3, ErrorRates(0, 0, 0), index=0)
    _, block1 = make_oligo(registry, index=1)
    truth1 = block_to_nucleotides(block1, pair.left[-1])
    damaged = [corrupt(truth1, ErrorRates(sub=0.02, ins=0, dele=0), rng) for _ in range(7)]
    rescue = Cluster((0, 1, None), pair, damaged)
    blocks = recover_layer_blocks({(0, 1, 0): keyed}, rescue)
    assert blocks[0] == block0
    assert blocks[1] == block1


def test_assemble_layer_container_round_trip(tiny_pool):
    reg = tiny_pool.registry
    hit = pcr_select_all(tiny_pool, [reg.image_pairs[0], reg.layer_pairs[1]])
    rs = sequence(hit, 1, ErrorRates(0, 0, 0), seed=0, mode="exact")
    trimmed = [trim_and_identify(r, reg) for r in rs.reads]
    clusters, rescue, _ = cluster_reads(trimmed, reg)
    blocks = recover_layer_blocks(clusters, rescue.get((0, 1)))
    container = assemble_layer_container(blocks)
    assert container.layer_index == 1


def test_assemble_layer_container_reports_gap(registry):
    _, b0 = make_oligo(registry, index=0)
    _, b2 = make_oligo(registry, index=2)
    with pytest.raises(GapError) as err:
        assemble_layer_container({0: b0, 2: b2})
    assert err.value.index == 1
    with pytest.raises(GapError):
        assemble_layer_container({})


def test_extract_thumbnails(tiny_pool, tiny_images):
    from dnapix.codec import decode_layers, encode_layers
    from dnapix.pool import pcr_select

    reg = tiny_pool.registry
    hit = pcr_select(tiny_pool, [reg.layer_pairs[0]], amplification=6)
    rs = sequence(hit, 3.0, ErrorRates(), seed=11)
    results, undecodable = extract_thumbnails(rs, reg)
    assert not undecodable
    assert [r.image_id for r in results] == [0, 1, 2, 3]
    for r in results:
        expected = decode_layers(encode_layers(tiny_images[r.image_id], 5, 1).layers[:1], 0)
        assert r.image == expected
        assert r.image_pair == reg.image_pairs[r.image_id]


def test_reconstruct_never_touches_provenance():
    import inspect

    import dnapix.reconstruct as mod

    source = inspect.getsource(mod)
    assert "provenance" not in source.lower() or "no access to oligo provenance" in source
    assert "from .pool" not in source
    assert "import pool" not in source
