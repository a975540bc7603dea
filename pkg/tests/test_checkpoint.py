import json
import struct

import numpy as np
import pytest

from aegan_omics import checkpoint as ck
from aegan_omics import nn
from aegan_omics.errors import ArtifactError
from aegan_omics.rng import RngHandle


def arrays():
    return {"w": np.arange(6, dtype=float).reshape(2, 3), "i": np.array([1, 2, 3]),
            "flags": np.array([True, False]), "empty": np.zeros((0, 4))}


def test_roundtrip(tmp_path):
    path = tmp_path / "a.ckpt"
    ck.save_checkpoint(path, "thing", {"k": [1, "x"]}, arrays())
    meta, back = ck.load_checkpoint(path, "thing")
    assert meta == {"k": [1, "x"]}
    for name, arr in arrays().items():
        np.testing.assert_array_equal(back[name], arr)
        assert back[name].shape == arr.shape


def test_bytes_deterministic(tmp_path):
    ck.save_checkpoint(tmp_path / "a", "t", {"b": 1, "a": 2}, arrays())
    ck.save_checkpoint(tmp_path / "b", "t", {"a": 2, "b": 1}, dict(reversed(list(arrays().items()))))
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_missing(tmp_path):
    with pytest.raises(ArtifactError):
        ck.load_checkpoint(tmp_path / "nope")


def test_bad_magic(tmp_path):
    (tmp_path / "x").write_bytes(b"garbage!" + bytes(16))
    with pytest.raises(ArtifactError):
        ck.load_checkpoint(tmp_path / "x")


def rewrite_header(path, **changes):
    raw = path.read_bytes()
    (hlen,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16:16 + hlen])
    header.update(changes)
    hb = json.dumps(header).encode()
    path.write_bytes(raw[:8] + struct.pack("<Q", len(hb)) + hb + raw[16 + hlen:])


def test_version_mismatch(tmp_path):
    path = tmp_path / "a.ckpt"
    ck.save_checkpoint(path, "t", {}, arrays())
    rewrite_header(path, version=99)
    with pytest.raises(ArtifactError, match="version"):
        ck.load_checkpoint(path)


def test_kind_mismatch(tmp_path):
    path = tmp_path / "a.ckpt"
    ck.save_checkpoint(path, "gan", {}, {})
    with pytest.raises(ArtifactError):
        ck.load_checkpoint(path, "classifier")


def test_truncated(tmp_path):
    path = tmp_path / "a.ckpt"
    ck.save_checkpoint(path, "t", {}, arrays())
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(ArtifactError):
        ck.load_checkpoint(path)


def test_network_roundtrip(tmp_path):
    h = RngHandle(0)
    net = [nn.init_dense(3, 4, nn.RELU, h), nn.init_dense(4, 1, nn.SIGMOID, h)]
    path = tmp_path / "n.ckpt"
    ck.save_checkpoint(path, "net", {"acts": ck.activations_of(net)}, ck.network_arrays("n", net))
    meta, arr = ck.load_checkpoint(path)
    back = ck.network_from_arrays("n", meta["acts"], arr)
    x = np.random.default_rng(0).normal(size=(5, 3))
    np.testing.assert_array_equal(nn.predict(back, x), nn.predict(net, x))
