"""End-to-end checks of the python bindings.

Numerics are cross-checked against numpy (SVD) and Pillow (PNG decode)
rather than against the library's own C++ routines. Heavy property testing
lives in the C++ unit suite; everything here runs in seconds.
"""

import numpy as np
import pytest
from PIL import Image

import fractalgen as fg

RENDER_KW = dict(side=64, iterations=4000)


def svd_pairs(params):
    return np.linalg.svd(params[:, :4].reshape(-1, 2, 2), compute_uv=False)


def test_sample_system_contractive():
    for seed in range(40):
        params, probs = fg.sample_system(3, seed=seed)
        assert params.shape == (3, 6)
        assert svd_pairs(params).max() <= 1 + 1e-9
        assert fg.is_contractive(params)
        assert probs.shape == (3,) and probs.min() >= 0
        assert probs.sum() == pytest.approx(1, abs=1e-9)


def test_sigma_factor_band_and_oracle():
    for seed in range(40):
        params, _ = fg.sample_system(4, seed=seed)
        f = fg.sigma_factor(params)
        assert 4.5 - 1e-9 <= f <= 5.0 + 1e-9
        svs = svd_pairs(params)
        assert f == pytest.approx((svs[:, 0] + 2 * svs[:, 1]).sum(), abs=1e-9)


def test_sample_svs_hits_target_sum():
    for seed in range(40):
        svs = fg.sample_svs(5, 6.25, seed=seed)
        assert svs.shape == (5, 2)
        assert np.all(svs[:, 1] <= svs[:, 0]) and np.all(svs >= 0) and np.all(svs <= 1)
        assert (svs[:, 0] + 2 * svs[:, 1]).sum() == pytest.approx(6.25, abs=1e-9)


def test_render_color_deterministic():
    params, _ = fg.sample_system(3, seed=7)
    a = fg.render_image(params, seed=11, **RENDER_KW)
    b = fg.render_image(params, seed=11, **RENDER_KW)
    c = fg.render_image(params, seed=12, **RENDER_KW)
    assert a.dtype == np.uint8 and a.shape == (64, 64, 3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_render_grayscale_normalized():
    params, _ = fg.sample_system(3, seed=7)
    g = fg.render_image(params, seed=11, grayscale=True, **RENDER_KW)
    assert g.dtype == np.float32 and g.shape == (64, 64)
    assert g.min() >= 0 and g.max() == pytest.approx(1.0)
    assert 0 < np.count_nonzero(g) < g.size


def test_codes_file_roundtrip(tmp_path):
    classes = [
        [fg.sample_system(2, seed=1)[0], fg.sample_system(4, seed=2)[0]],
        [fg.sample_system(3, seed=3)[0]],
    ]
    path = str(tmp_path / "codes.fifs")
    n_bytes = fg.write_codes(path, classes, master_seed=99)
    assert n_bytes == (tmp_path / "codes.fifs").stat().st_size

    back, violations = fg.read_codes(path)
    assert violations == []
    assert len(back) == 2 and len(back[0]) == 2 and len(back[1]) == 1
    for orig, got in zip(classes[0] + classes[1], back[0] + back[1]):
        np.testing.assert_array_equal(got, orig.astype(np.float32).astype(np.float64))


def test_codes_file_flags_non_contractive(tmp_path):
    bad = np.array([[1.2, 0, 0, 1.2, 0, 0], [0.5, 0, 0, 0.5, 0.1, 0.1]])
    path = str(tmp_path / "bad.fifs")
    fg.write_codes(path, [[bad]])
    _, violations = fg.read_codes(path)
    assert [(c, i) for c, i, _ in violations] == [(0, 0)]
    assert violations[0][2] == pytest.approx(1.2, abs=1e-6)


def test_corrupt_codes_file_rejected(tmp_path):
    path = tmp_path / "codes.fifs"
    fg.write_codes(str(path), [[fg.sample_system(2, seed=5)[0]]])
    blob = bytearray(path.read_bytes())
    blob[-1] ^= 0x01
    path.write_bytes(bytes(blob))
    with pytest.raises(fg.CorruptFileError):
        fg.read_codes(str(path))


def test_png_pillow_oracle(tmp_path):
    params, _ = fg.sample_system(3, seed=21)
    img = fg.render_image(params, seed=4, **RENDER_KW)
    path = str(tmp_path / "img.png")
    fg.write_png(path, img)
    with Image.open(path) as decoded:
        assert decoded.mode == "RGB"
        np.testing.assert_array_equal(np.asarray(decoded), img)
    np.testing.assert_array_equal(fg.read_png(path), img)


def test_invalid_arguments_raise():
    with pytest.raises(fg.DomainError):
        fg.sample_svs(1, 1.0)
    with pytest.raises(fg.DomainError):
        fg.sample_svs(4, -0.5)
    with pytest.raises(fg.DomainError):
        fg.render_image(np.zeros((3, 5)), seed=0)
    assert issubclass(fg.DomainError, fg.Error)


def test_derive_seed_keys_are_distinct():
    keys = [fg.SAMPLE_SYSTEM, fg.RENDER_IMAGE, fg.WARM_SPRITE, fg.WARM_BACKGROUND,
            fg.REFRESH, fg.STREAM_IMAGE, fg.AUGMENT]
    children = {fg.derive_seed(1234, k) for k in keys}
    assert len(children) == len(keys)
    assert fg.derive_seed(1234, fg.RENDER_IMAGE) == fg.derive_seed(1234, fg.RENDER_IMAGE)


STREAM_KW = dict(side=64, sprite_side=32, iterations=4000,
                 cache_capacity=6, background_capacity=4)


def make_classes(n_classes, seed0=100):
    return [[fg.sample_system(3, seed=seed0 + c)[0]] for c in range(n_classes)]


def test_streamer_multiclass():
    classes = make_classes(3)
    s = fg.Streamer(classes, master_seed=5, mode="multiclass", batch_size=8, **STREAM_KW)
    images, labels = s.next()
    assert images.shape == (8, 64, 64, 3) and images.dtype == np.uint8
    assert labels.shape == (8,) and labels.dtype == np.uint32
    assert labels.max() < 3
    assert s.cursor == 8 and s.num_classes == 3
    stats = s.stats()
    assert stats["images_emitted"] == 8
    assert stats["fresh_renders"] == 4 and stats["cache_draws"] == 4

    second, _ = s.next()
    assert not np.array_equal(images, second)


def test_streamer_multi_instance():
    classes = make_classes(4)
    s = fg.Streamer(classes, master_seed=5, mode="multi-instance", batch_size=6,
                    refresh_period=2, max_instances=3, **STREAM_KW)
    images, labels = s.next()
    assert images.shape == (6, 64, 64, 3)
    assert labels.shape == (6, 4) and labels.dtype == np.uint8
    per_image = labels.sum(axis=1)
    assert np.all(per_image >= 1) and np.all(per_image <= 3)
    assert s.stats()["cache_refreshes"] == 3


def test_streamer_batches_do_not_depend_on_worker_count():
    classes = make_classes(3)
    kw = dict(master_seed=77, mode="multiclass", batch_size=8, **STREAM_KW)
    a = fg.Streamer(classes, workers=1, **kw)
    b = fg.Streamer(classes, workers=4, **kw)
    for _ in range(3):
        ia, la = a.next()
        ib, lb = b.next()
        np.testing.assert_array_equal(ia, ib)
        np.testing.assert_array_equal(la, lb)


def test_streamer_rejects_bad_mode():
    with pytest.raises(fg.DomainError):
        fg.Streamer(make_classes(2), mode="pairs")
    with pytest.raises(fg.DomainError):
        fg.Streamer([], mode="multiclass")
