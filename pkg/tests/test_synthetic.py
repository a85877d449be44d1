import numpy as np
import pytest

from shearmark import synthetic


@pytest.mark.parametrize("name", synthetic.HOST_NAMES)
def test_hosts_are_deterministic_8bit(name):
    a = synthetic.host(name, 128)
    assert a.shape == (128, 128)
    np.testing.assert_array_equal(a, synthetic.host(name, 128))
    assert a.min() >= 0 and a.max() <= 255
    np.testing.assert_array_equal(a, np.rint(a))
    assert a.std() > 20


def test_hosts_differ():
    imgs = [synthetic.host(n, 64) for n in synthetic.HOST_NAMES]
    assert not np.array_equal(imgs[0], imgs[1]) and not np.array_equal(imgs[1], imgs[2])


def test_logo():
    w = synthetic.logo(64)
    assert w.shape == (64, 64) and 0 <= w.min() and w.max() <= 255
    np.testing.assert_array_equal(w, synthetic.logo(64))
    assert np.ptp(w) > 50


def test_unknown_host():
    with pytest.raises(ValueError):
        synthetic.host("lena", 64)
