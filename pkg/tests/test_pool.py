"""Pool assembly, PCR selection semantics, and FASTA persistence."""

import pytest

from dnapix.codec import LayerContainer, decode_layers
from dnapix.errors import ContractError, ParseError
from dnapix.pool import (
    OLIGO_LENGTH,
    Provenance,
    assemble_oligo,
    build_pool,
    disassemble_block,
    load_pool,
    pcr_select,
    pcr_select_all,
    save_pool,
)
from dnapix.primers import PRIMER_LENGTH, max_homopolymer
from dnapix.transcode import BLOCK_NT, DataBlock, stream_from_blocks


def test_oligo_layout(registry):
    layer_pair = registry.layer_pairs[0]
    image_pair = registry.image_pairs[0]
    block = DataBlock.create(3, bytes(range(30)))
    oligo = assemble_oligo(layer_pair, image_pair, block, Provenance(0, 0, 3))
    seq = oligo.sequence
    assert len(seq) == OLIGO_LENGTH == 272
    assert seq.startswith(layer_pair.left + image_pair.left)
    assert seq.endswith(image_pair.right + layer_pair.right)
    assert disassemble_block(oligo, image_pair) == block


def test_payload_region_never_extends_runs(registry):
    # rotation seeded on the inner-left primer's last base: the junction and
    # the whole 192 nt body are homopolymer free
    image_pair = registry.image_pairs[1]
    block = DataBlock.create(0, bytes(30))
    oligo = assemble_oligo(registry.layer_pairs[1], image_pair, block, Provenance(1, 1, 0))
    region = oligo.sequence[2 * PRIMER_LENGTH - 1 : 2 * PRIMER_LENGTH + BLOCK_NT]
    assert len(region) == BLOCK_NT + 1
    assert max_homopolymer(region) == 1


def test_build_pool_manifest(tiny_pool, tiny_images):
    assert tiny_pool.image_ids == [0, 1, 2, 3]
    assert len(tiny_pool.manifest) == 4 * 5
    assert len(tiny_pool.oligos) == sum(e.oligos for e in tiny_pool.manifest)
    assert all(len(o.sequence) == OLIGO_LENGTH for o in tiny_pool.oligos)
    assert tiny_pool.image_dims[2] == (96, 96, 1)
    assert tiny_pool.manifest_count(0, 0) > 0
    assert tiny_pool.manifest_count(0, 99) == 0


def test_build_pool_requires_image_primer(tiny_images, registry):
    with pytest.raises(ContractError):
        build_pool([(9, tiny_images[0])], num_levels=3, q=1, registry=registry)


def test_pcr_select_is_a_union(tiny_pool):
    reg = tiny_pool.registry
    img1 = pcr_select(tiny_pool, [reg.image_pairs[1]])
    assert {o.provenance.image_id for o in img1} == {1}
    assert len(img1) == sum(e.oligos for e in tiny_pool.manifest if e.image_id == 1)
    both = pcr_select(tiny_pool, [reg.image_pairs[1], reg.image_pairs[2]])
    assert {o.provenance.image_id for o in both} == {1, 2}
    layer0 = pcr_select(tiny_pool, [reg.layer_pairs[0]])
    assert {o.provenance.layer for o in layer0} == {0}
    assert {o.provenance.image_id for o in layer0} == {0, 1, 2, 3}


def test_pcr_select_all_is_an_intersection(tiny_pool):
    reg = tiny_pool.registry
    hit = pcr_select_all(tiny_pool, [reg.image_pairs[0], reg.layer_pairs[2]])
    assert {(o.provenance.image_id, o.provenance.layer) for o in hit} == {(0, 2)}
    assert len(hit) == tiny_pool.manifest_count(0, 2)


def test_pcr_amplification_copies(tiny_pool):
    reg = tiny_pool.registry
    single = pcr_select_all(tiny_pool, [reg.image_pairs[0], reg.layer_pairs[0]])
    triple = pcr_select_all(
        tiny_pool, [reg.image_pairs[0], reg.layer_pairs[0]], amplification=3
    )
    assert len(triple) == 3 * len(single)
    with pytest.raises(ContractError):
        pcr_select(tiny_pool, [reg.image_pairs[0]], amplification=0)
    with pytest.raises(ContractError):
        pcr_select(tiny_pool, [reg.image_pairs[0]], tau=-1)


def test_selected_layer_decodes_exactly(tiny_pool, tiny_images):
    reg = tiny_pool.registry
    containers = []
    for layer in range(tiny_pool.num_levels):
        hit = pcr_select_all(tiny_pool, [reg.image_pairs[3], reg.layer_pairs[layer]])
        blocks = [disassemble_block(o, reg.image_pairs[3]) for o in hit]
        containers.append(LayerContainer.parse(stream_from_blocks(blocks)))
    assert decode_layers(containers, tiny_pool.num_levels - 1) == tiny_images[3]


def test_save_load_round_trip(tiny_pool, tmp_path):
    path = tmp_path / "pool.fasta"
    save_pool(tiny_pool, path)
    assert (tmp_path / "pool.fasta.meta.json").exists()
    loaded = load_pool(path)
    assert loaded == tiny_pool


def test_load_rejects_malformed_fasta(tmp_path, tiny_pool):
    bad = tmp_path / "bad.fasta"
    save_pool(tiny_pool, tmp_path / "ok.fasta", tmp_path / "ok.meta.json")

    bad.write_text(">nonsense_header\nACGT\n")
    with pytest.raises(ParseError):
        load_pool(bad, tmp_path / "ok.meta.json")

    bad.write_text(">img0_L0_b00000\nACGU\n")
    with pytest.raises(ParseError):
        load_pool(bad, tmp_path / "ok.meta.json")

    bad.write_text("ACGT\n")
    with pytest.raises(ParseError):
        load_pool(bad, tmp_path / "ok.meta.json")


def test_load_rejects_malformed_sidecar(tmp_path, tiny_pool):
    save_pool(tiny_pool, tmp_path / "p.fasta")
    (tmp_path / "p.fasta.meta.json").write_text('{"registry": {}}')
    with pytest.raises(ParseError):
        load_pool(tmp_path / "p.fasta")
