import numpy as np
import pytest

from isomedian import read_image, write_image


@pytest.mark.parametrize("dtype,shape", [
    (np.uint8, (13, 17)),
    (np.uint8, (13, 17, 3)),
    (np.uint16, (9, 5)),
    (np.uint16, (9, 5, 3)),
    (np.float32, (11, 7)),
    (np.float32, (11, 7, 3)),
])
def test_round_trip(tmp_path, rng, dtype, shape):
    if dtype == np.float32:
        img = rng.standard_normal(shape).astype(np.float32)
        ext = "pfm"
    else:
        img = rng.integers(0, np.iinfo(dtype).max + 1, shape).astype(dtype)
        ext = "ppm" if len(shape) == 3 else "pgm"
    path = tmp_path / f"img.{ext}"
    write_image(path, img)
    again = read_image(path)
    assert again.dtype == img.dtype and np.array_equal(again, img)
    # write -> read -> write is byte-identical
    path2 = tmp_path / f"img2.{ext}"
    write_image(path2, again)
    assert path.read_bytes() == path2.read_bytes()


def test_pgm16_is_big_endian(tmp_path):
    img = np.array([[0x0102]], np.uint16)
    path = tmp_path / "x.pgm"
    write_image(path, img)
    assert path.read_bytes().endswith(b"\x01\x02")


def test_pfm_rows_bottom_up_little_endian(tmp_path):
    img = np.array([[1.0, 2.0], [3.0, 4.0]], np.float32)
    path = tmp_path / "x.pfm"
    write_image(path, img)
    data = path.read_bytes()
    assert data.startswith(b"Pf\n2 2\n-1.0\n")
    # last image row is written first
    assert np.frombuffer(data[-16:], "<f4").tolist() == [3.0, 4.0, 1.0, 2.0]


def test_header_comments(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# a comment\n2 1\n# another\n255\n\x07\x09")
    assert read_image(path).tolist() == [[7, 9]]


def test_bad_files(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P4\n1 1\n255\n\x00")
    with pytest.raises(ValueError, match="magic"):
        read_image(p)
    p.write_bytes(b"P5\n1 1\n100\n\x00")
    with pytest.raises(ValueError, match="maxval"):
        read_image(p)
    with pytest.raises(ValueError, match="dtype"):
        write_image(tmp_path / "x.pgm", np.zeros((3, 3), np.int64))
