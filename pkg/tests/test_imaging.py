import numpy as np
import pytest
from hypothesis import given, strategies as st

from psishift.imaging import (ChannelError, ChannelId, Image, ImageFormatError,
                              channel_samples, decode_pnm, encode_pnm, list_corpus,
                              load_image, save_pnm)


def test_gray_endpoints(tmp_path):
    p = tmp_path / "g.pgm"
    p.write_bytes(b"P5\n2 1\n255\n" + bytes([0, 255]))
    img = load_image(p)
    assert (img.width, img.height, img.n_channels) == (2, 1, 1)
    assert channel_samples(img, ChannelId.GRAY).tolist() == [0.0, 1.0]


def test_rgb_pixel(tmp_path):
    p = tmp_path / "c.ppm"
    p.write_bytes(b"P6 1 1 255\n" + bytes([255, 0, 128]))
    img = load_image(p)
    assert channel_samples(img, "R").tolist() == [1.0]
    assert channel_samples(img, "G").tolist() == [0.0]
    assert channel_samples(img, "B").tolist() == [128 / 255]


def test_ascii_formats_with_comments(tmp_path):
    p = tmp_path / "a.ppm"
    p.write_text("P3\n# a comment\n2 1\n# another\n15\n15 0 3  7 # trailing\n8 1\n")
    img = load_image(p)
    assert channel_samples(img, "R").tolist() == [1.0, 7 / 15]
    assert channel_samples(img, "B").tolist() == [3 / 15, 1 / 15]
    p2 = tmp_path / "a.pgm"
    p2.write_text("P2 3 1 4 0 2 4")
    assert channel_samples(load_image(p2), "gray").tolist() == [0.0, 0.5, 1.0]


def test_sixteen_bit(tmp_path):
    p = tmp_path / "w.pgm"
    p.write_bytes(b"P5 2 1 65535\n" + (1000).to_bytes(2, "big") + (65535).to_bytes(2, "big"))
    img = load_image(p)
    assert img.maxval == 65535
    assert channel_samples(img, "gray").tolist() == [1000 / 65535, 1.0]


@pytest.mark.parametrize("content", [b"", b"P", b"GIF89a", b"P7 1 1 255\n\x00",
                                     b"P5 1 1 255\n", b"P6 2 2 255\n\x00\x00"])
def test_bad_files_rejected(tmp_path, content):
    p = tmp_path / "bad.ppm"
    p.write_bytes(content)
    with pytest.raises(ImageFormatError):
        load_image(p)


def test_empty_file_message(tmp_path):
    p = tmp_path / "empty.ppm"
    p.write_bytes(b"")
    with pytest.raises(ImageFormatError, match="unsupported format"):
        load_image(p)


def test_zero_dimension(tmp_path):
    p = tmp_path / "z.pgm"
    p.write_bytes(b"P5 0 4 255\n")
    with pytest.raises(ImageFormatError, match="zero-dimension"):
        load_image(p)


def test_png_via_pillow(tmp_path):
    PIL = pytest.importorskip("PIL.Image")
    arr = np.array([[[255, 0, 128], [1, 2, 3]]], dtype=np.uint8)
    PIL.fromarray(arr, "RGB").save(tmp_path / "x.png")
    img = load_image(tmp_path / "x.png")
    assert channel_samples(img, "B").tolist() == [128 / 255, 3 / 255]


def test_channel_projection_order():
    data = np.arange(12, dtype=float).reshape(3, 2, 2) / 11
    img = Image(data)
    # G plane laid out by hand: rows (4, 5), (6, 7)
    assert channel_samples(img, "G").tolist() == [4 / 11, 5 / 11, 6 / 11, 7 / 11]
    one_by_two = Image(np.array([[[0.2, 0.4]], [[0, 0]], [[0, 0]]]))
    assert channel_samples(one_by_two, ChannelId.R).tolist() == [0.2, 0.4]


def test_channel_mismatch(gray, rgb):
    with pytest.raises(ChannelError):
        channel_samples(gray, ChannelId.B)
    with pytest.raises(ChannelError):
        channel_samples(rgb, ChannelId.GRAY)


def test_image_is_immutable(rgb):
    with pytest.raises(ValueError):
        rgb.data[0, 0, 0] = 0.5


def test_rejects_out_of_range():
    with pytest.raises(ValueError):
        Image(np.array([[1.5]]))


@given(st.sampled_from([1, 3]), st.integers(1, 6), st.integers(1, 6),
       st.sampled_from([1, 7, 255, 4095, 65535]), st.booleans(), st.data())
def test_round_trip_requantization(channels, h, w, maxval, binary, data):
    raw = np.array(data.draw(st.lists(st.integers(0, maxval), min_size=h * w * channels,
                                      max_size=h * w * channels)))
    planes = raw.reshape(h, w, channels).transpose(2, 0, 1)
    img = Image(planes / maxval, maxval=maxval)
    decoded = decode_pnm(encode_pnm(img, binary=binary))
    assert np.array_equal(decoded.to_raw(), planes)
    assert decoded.width * decoded.height == channel_samples(decoded, decoded.channel_ids[0]).size


def test_list_corpus(tmp_path):
    (tmp_path / "b.ppm").write_bytes(b"x")
    (tmp_path / "a.ppm").write_bytes(b"x")
    (tmp_path / "notes.txt").write_text("x")
    assert [p.name for p in list_corpus(tmp_path, "*.ppm")] == ["a.ppm", "b.ppm"]
    assert list_corpus(tmp_path, "*.ppm") == list_corpus(tmp_path, "*.ppm")
    empty = tmp_path / "empty"
    empty.mkdir()
    assert list_corpus(empty) == []
    with pytest.raises(FileNotFoundError):
        list_corpus(tmp_path / "missing")


def test_corrupt_file_listed(tmp_path, rgb):
    save_pnm(rgb, tmp_path / "good.ppm")
    (tmp_path / "zbroken.ppm").write_bytes(b"P6 4 4 255\n\x01")
    paths = list_corpus(tmp_path)
    assert [p.name for p in paths] == ["good.ppm", "zbroken.ppm"]
    load_image(paths[0])
    with pytest.raises(ImageFormatError):
        load_image(paths[1])
