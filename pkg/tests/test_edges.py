import numpy as np

from sketchmesh.edges import canny, dilate


def step_image(size=64, col=32, amplitude=1.0):
    img = np.zeros((size, size))
    img[:, col:] = amplitude
    return img


def test_step_edge_detected_as_thin_line():
    edges = canny(step_image())
    assert edges.any()
    rows, cols = np.where(edges)
    # a vertical step yields one response column away from the border
    assert len(set(cols)) == 1
    assert abs(int(cols[0]) - 32) <= 2


def test_flat_image_has_no_edges():
    assert not canny(np.zeros((32, 32))).any()
    assert not canny(np.full((32, 32), 0.7)).any()


def test_thresholds_scale_with_gradient_range():
    """Edges depend on contrast relative to the image, not absolute values.

    Power-of-two amplitudes keep the arithmetic exact, so the edge
    maps agree pixel for pixel.
    """
    strong = canny(step_image(amplitude=0.25))
    faint = canny(step_image(amplitude=2.0**-7))
    assert np.array_equal(strong, faint)


def test_weak_edge_kept_only_when_connected_to_strong():
    img = np.zeros((64, 64))
    # one vertical edge whose contrast fades from strong to weak
    ramp = np.linspace(1.0, 0.15, 64)
    img[:, 16:] = ramp[:, None]
    img[44:, 48:] += 0.15  # isolated weak step
    edges = canny(img)
    rows, cols = np.where(edges)
    near_main = np.abs(cols - 16) <= 2
    assert near_main.any()
    # the faded stretch survives because it joins the strong stretch
    assert rows[near_main].max() > 55
    # the isolated weak step does not respond
    assert not ((cols > 40) & (rows > 40)).any()


def test_horizontal_edges_detected_too():
    edges = canny(step_image().T)
    rows, cols = np.where(edges)
    assert len(set(rows)) == 1


def test_dilate_zero_is_identity():
    mask = np.zeros((16, 16), dtype=bool)
    mask[8, 8] = True
    assert np.array_equal(dilate(mask, 0), mask)


def test_dilate_grows_chebyshev_ball():
    mask = np.zeros((16, 16), dtype=bool)
    mask[8, 8] = True
    for k in (1, 2, 3):
        grown = dilate(mask, k)
        assert grown.sum() == (2 * k + 1) ** 2
        rows, cols = np.where(grown)
        assert rows.min() == 8 - k and rows.max() == 8 + k


def test_dilate_clips_at_border():
    mask = np.zeros((8, 8), dtype=bool)
    mask[0, 0] = True
    grown = dilate(mask, 2)
    assert grown.sum() == 9  # quarter of the 5x5 ball
