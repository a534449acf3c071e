"""
Storage Unit Tests
==================

测试二进制容器、检查点、索引与语料库目录的读写
"""

import struct

import numpy as np
import pytest

from config import constants
from core.errors import DataError, FormatError
from corpus import stratified_split
from retrieval import index_corpus
from storage import ContainerHeader, read_container, read_corpus, read_split, write_container, write_corpus, write_split
from storage.checkpoint import load_checkpoint, save_checkpoint
from storage.container import HEADER_SIZE
from storage.index import load_index, save_index
from trainer import ModelCheckpoint, TrainConfig, checkpoint_compatible


def make_header(magic=constants.CHECKPOINT_MAGIC, version=constants.CONTAINER_VERSION):
    return ContainerHeader(magic, version, embed_dim=8, image_side=16, sh_degree=2)


@pytest.fixture
def checkpoint(small_model, small_train_overrides):
    return ModelCheckpoint.from_model(small_model, TrainConfig(**small_train_overrides), step=3)


# ============================================================================
# 容器测试
# ============================================================================

class TestContainer:
    """测试容器格式"""

    def test_header_layout(self):
        raw = make_header().pack()
        assert len(raw) == HEADER_SIZE == 18
        assert raw[:4] == b"CLSP"
        assert struct.unpack("<H", raw[4:6]) == (constants.CONTAINER_VERSION,)

    def test_blocks_restored_exactly(self, tmp_path, rng):
        array = rng.normal(size=(3, 4))
        path = write_container(tmp_path / "c.bin", make_header(),
                               {"a": array, "meta": {"step": 5, "name": "x"}, "ids": [1, 2]})
        header, blocks = read_container(path, constants.CHECKPOINT_MAGIC)
        assert header == make_header()
        assert np.array_equal(blocks["a"], array)
        assert blocks["a"].dtype == np.float64
        assert blocks["meta"] == {"step": 5, "name": "x"}
        assert blocks["ids"] == [1, 2]

    def test_wrong_magic(self, tmp_path):
        path = write_container(tmp_path / "c.bin", make_header(magic=constants.INDEX_MAGIC), {})
        with pytest.raises(FormatError) as exc_info:
            read_container(path, constants.CHECKPOINT_MAGIC)
        assert "CLSP" in exc_info.value.expected
        assert "CLSI" in exc_info.value.found

    def test_wrong_version(self, tmp_path):
        path = write_container(tmp_path / "c.bin", make_header(version=99), {})
        with pytest.raises(FormatError):
            read_container(path, constants.CHECKPOINT_MAGIC)

    def test_truncated_body(self, tmp_path, rng):
        path = write_container(tmp_path / "c.bin", make_header(), {"a": rng.normal(size=10)})
        path.write_bytes(path.read_bytes()[:-7])
        with pytest.raises(FormatError):
            read_container(path, constants.CHECKPOINT_MAGIC)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "c.bin"
        path.write_bytes(b"CLSP\x01")
        with pytest.raises(FormatError):
            read_container(path, constants.CHECKPOINT_MAGIC)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_container(tmp_path / "absent.bin", constants.CHECKPOINT_MAGIC)


# ============================================================================
# 检查点测试
# ============================================================================

class TestCheckpoint:
    """测试检查点读写"""

    def test_round_trip_bit_exact(self, tmp_path, checkpoint):
        path = save_checkpoint(tmp_path / "model.ckpt", checkpoint)
        loaded = load_checkpoint(path)
        assert loaded.step == 3
        assert loaded.train_config == checkpoint.train_config
        assert loaded.vocabulary == checkpoint.vocabulary
        assert set(loaded.state) == set(checkpoint.state)
        assert all(np.array_equal(loaded.state[n], checkpoint.state[n]) for n in checkpoint.state)

    def test_rewrite_is_byte_identical(self, tmp_path, checkpoint):
        first = save_checkpoint(tmp_path / "a.ckpt", checkpoint)
        second = save_checkpoint(tmp_path / "b.ckpt", load_checkpoint(first))
        assert first.read_bytes() == second.read_bytes()

    def test_rebuilt_model_matches(self, tmp_path, checkpoint, small_model):
        loaded = load_checkpoint(save_checkpoint(tmp_path / "model.ckpt", checkpoint))
        model = loaded.build_model()
        assert np.array_equal(model.embed_texts([["water", "trees"]]), small_model.embed_texts([["water", "trees"]]))
        assert loaded.tau == pytest.approx(0.07)

    def test_index_file_is_not_a_checkpoint(self, tmp_path, checkpoint, small_corpus):
        path = save_index(tmp_path / "x.idx", index_corpus(checkpoint, small_corpus.items[:4]))
        with pytest.raises(FormatError):
            load_checkpoint(path)

    def test_compatible(self, checkpoint):
        checkpoint_compatible(checkpoint, image_side=16)
        checkpoint_compatible(checkpoint, image_side=16, embed_dim=8)

    @pytest.mark.parametrize("kwargs", [
        {"image_side": 32},
        {"image_side": 16, "embed_dim": 4},
        {"image_side": 16, "vocabulary": "0000"},
    ])
    def test_incompatible(self, checkpoint, kwargs):
        with pytest.raises(FormatError) as exc_info:
            checkpoint_compatible(checkpoint, **kwargs)
        assert "D=8" in exc_info.value.expected


# ============================================================================
# 索引测试
# ============================================================================

class TestIndexFile:
    """测试索引读写"""

    def test_round_trip(self, tmp_path, checkpoint, small_corpus):
        index = index_corpus(checkpoint, small_corpus.items[:10])
        loaded = load_index(save_index(tmp_path / "x.idx", index))
        assert loaded.ids.tolist() == index.ids.tolist()
        assert loaded.modalities == index.modalities
        assert np.array_equal(loaded.vectors, index.vectors)
        assert np.array_equal(loaded.lon, index.lon)
        assert loaded.labels == index.labels
        assert loaded.provenance == index.provenance

    def test_rewrite_is_byte_identical(self, tmp_path, checkpoint, small_corpus):
        first = save_index(tmp_path / "a.idx", index_corpus(checkpoint, small_corpus.items[:6]))
        second = save_index(tmp_path / "b.idx", load_index(first))
        assert first.read_bytes() == second.read_bytes()

    def test_checkpoint_is_not_an_index(self, tmp_path, checkpoint):
        path = save_checkpoint(tmp_path / "model.ckpt", checkpoint)
        with pytest.raises(FormatError):
            load_index(path)


# ============================================================================
# 语料库目录测试
# ============================================================================

class TestCorpusDirectory:
    """测试语料库目录读写"""

    def test_round_trip(self, tmp_path, small_corpus):
        loaded = read_corpus(write_corpus(small_corpus, tmp_path / "corpus"))
        assert loaded.ids == small_corpus.ids
        for original, restored in zip(small_corpus, loaded):
            assert restored.modality is original.modality
            assert restored.labels == original.labels
            assert (restored.lon, restored.lat) == (original.lon, original.lat)
            assert restored.crisis == original.crisis
            assert np.array_equal(restored.image, original.image)
        assert loaded.metadata == small_corpus.metadata

    def test_rewrite_is_byte_identical(self, tmp_path, small_corpus):
        first = write_corpus(small_corpus, tmp_path / "a")
        second = write_corpus(read_corpus(first), tmp_path / "b")
        for name in [constants.CORPUS_METADATA_FILE, *constants.CORPUS_IMAGE_FILES.values()]:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_split_round_trip(self, tmp_path, small_corpus):
        split = stratified_split(small_corpus, 0.2, seed=0)
        write_split(split, tmp_path)
        assert read_split(tmp_path) == split

    def test_missing_metadata(self, tmp_path):
        with pytest.raises(DataError):
            read_corpus(tmp_path)

    def test_image_count_mismatch(self, tmp_path, small_corpus):
        out = write_corpus(small_corpus, tmp_path / "corpus")
        metadata = out / constants.CORPUS_METADATA_FILE
        lines = metadata.read_text(encoding="utf-8").splitlines()
        metadata.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
        with pytest.raises(DataError):
            read_corpus(out)

    def test_bad_image_magic(self, tmp_path, small_corpus):
        out = write_corpus(small_corpus, tmp_path / "corpus")
        image_file = out / constants.CORPUS_IMAGE_FILES["SAR"]
        raw = image_file.read_bytes()
        image_file.write_bytes(b"XXXX" + raw[4:])
        with pytest.raises(FormatError):
            read_corpus(out)
