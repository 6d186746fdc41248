import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from nightfuse.detector import Classification, Region
from nightfuse.errors import RegionOutOfBounds
from nightfuse.frame_io import RgbFrame
from nightfuse.fusion import FusionConfig, boost_object_pixels, compose_fused_frame, draw_bbox


def make_region(pixels, label=1, cls=Classification.OBJECT):
    pixels = np.array(sorted(pixels, key=lambda p: (p[1], p[0])), dtype=np.intp).reshape(-1, 2)
    x0, y0, w, h = oracles.bbox_of(pixels.tolist())
    return Region(label, x0, y0, w, h, len(pixels), pixels, cls)


def box_region(x, y, w, h, label=1):
    return make_region([(xx, yy) for xx in range(x, x + w) for yy in range(y, y + h)], label)


def rgb(arr):
    return RgbFrame(np.asarray(arr, dtype=np.uint8))


def saturating_oracle(frame, regions, boost):
    out = frame.data.astype(int).tolist()
    for r in sorted(regions, key=lambda r: r.label):
        if r.classification is not Classification.OBJECT:
            continue
        for x, y in r.pixels.tolist():
            out[y][x] = [min(255, c + boost) for c in out[y][x]]
    return out


class TestBoost:
    def test_no_objects_identity(self):
        f = rgb(np.random.default_rng(0).integers(0, 256, (5, 5, 3)))
        noise = make_region([(1, 1), (1, 2)], cls=Classification.NOISE)
        assert boost_object_pixels(f, [], FusionConfig()) == f
        assert boost_object_pixels(f, [noise], FusionConfig()) == f

    def test_additive(self):
        f = rgb([[[10, 20, 30]]])
        out = boost_object_pixels(f, [make_region([(0, 0)])], FusionConfig(boost=60))
        assert out.data[0, 0].tolist() == [70, 80, 90]

    def test_saturates(self):
        f = rgb([[[250, 10, 200]]])
        out = boost_object_pixels(f, [make_region([(0, 0)])], FusionConfig(boost=60))
        assert out.data[0, 0].tolist() == [255, 70, 255]

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_oracle(self, seed):
        rng = np.random.default_rng(seed)
        h, w = 12, 15
        f = rgb(rng.integers(0, 256, (h, w, 3)))
        regions = []
        for label in range(1, 4):
            n = int(rng.integers(1, 20))
            px = {(int(rng.integers(0, w)), int(rng.integers(0, h))) for _ in range(n)}
            cls = Classification.OBJECT if rng.random() < 0.7 else Classification.NOISE
            regions.append(make_region(px, label, cls))
        boost = int(rng.integers(0, 256))
        assert boost_object_pixels(f, regions, FusionConfig(boost=boost)).data.tolist() == saturating_oracle(f, regions, boost)

    def test_out_of_bounds(self):
        with pytest.raises(RegionOutOfBounds):
            boost_object_pixels(rgb(np.zeros((3, 3, 3))), [make_region([(3, 0)])], FusionConfig())

    def test_input_not_modified(self):
        f = rgb(np.zeros((3, 3, 3)))
        boost_object_pixels(f, [make_region([(1, 1)])], FusionConfig())
        assert f.data.sum() == 0


class TestDrawBox:
    def colored(self, out, color=(0, 255, 0)):
        hits = np.all(out.data == np.array(color, dtype=np.uint8), axis=2)
        return {(int(x), int(y)) for y, x in zip(*np.nonzero(hits))}

    def test_perimeter_count(self):
        out = draw_bbox(rgb(np.zeros((10, 10, 3))), box_region(2, 2, 4, 4), FusionConfig())
        assert len(self.colored(out)) == 12
        assert self.colored(out) == oracles.ring_pixels((2, 2, 4, 4), 1, 10, 10)

    def test_full_frame(self):
        f = rgb(np.full((6, 8, 3), 7))
        out = draw_bbox(f, box_region(0, 0, 8, 6), FusionConfig())
        border = oracles.ring_pixels((0, 0, 8, 6), 1, 8, 6)
        assert self.colored(out) == border
        inner = out.data[1:-1, 1:-1]
        assert np.all(inner == 7)

    @pytest.mark.parametrize("bbox,thick", [((6, 1, 5, 4), 1), ((7, -2, 6, 6), 2), ((-3, 3, 5, 3), 1), ((1, 1, 5, 5), 3)])
    def test_clipped_ring(self, bbox, thick):
        x, y, w, h = bbox
        r = Region(1, x, y, w, h, 1, np.array([[max(x, 0), max(y, 0)]]), Classification.OBJECT)
        out = draw_bbox(rgb(np.zeros((6, 9, 3))), r, FusionConfig(box_thickness=thick))
        assert self.colored(out) == oracles.ring_pixels(bbox, thick, 9, 6)

    def test_off_frame_noop(self):
        f = rgb(np.zeros((4, 4, 3)))
        r = Region(1, 10, 10, 3, 3, 1, np.array([[10, 10]]), Classification.OBJECT)
        assert draw_bbox(f, r, FusionConfig()) == f


class TestCompose:
    def test_empty_identity(self):
        f = rgb(np.random.default_rng(1).integers(0, 256, (5, 6, 3)))
        assert compose_fused_frame(f, [], FusionConfig()) == f

    def test_manual_composition(self):
        f = rgb(np.random.default_rng(2).integers(0, 200, (20, 20, 3)))
        r = box_region(4, 3, 6, 10)
        cfg = FusionConfig(boost=60)
        assert compose_fused_frame(f, [r], cfg) == draw_bbox(boost_object_pixels(f, [r], cfg), r, cfg)

    def test_overlapping_regions(self):
        f = rgb(np.full((10, 10, 3), 100))
        a = box_region(0, 0, 5, 5, label=1)
        b = box_region(3, 3, 5, 5, label=2)
        cfg = FusionConfig(boost=60, draw_boxes=False)
        out = compose_fused_frame(f, [b, a], cfg)
        assert out.data.astype(int).tolist() == saturating_oracle(f, [a, b], 60)
        assert out.data[4, 4].tolist() == [220, 220, 220]
        assert out.data[0, 0].tolist() == [160, 160, 160]

    def test_boxes_drawn_after_boost(self):
        f = rgb(np.zeros((10, 10, 3)))
        out = compose_fused_frame(f, [box_region(2, 2, 4, 4)], FusionConfig(boost=60, box_color=(0, 200, 0)))
        assert out.data[2, 2].tolist() == [0, 200, 0]
        assert out.data[3, 3].tolist() == [60, 60, 60]

    def test_identity_config(self):
        f = rgb(np.random.default_rng(3).integers(0, 256, (8, 8, 3)))
        assert compose_fused_frame(f, [box_region(1, 1, 3, 6)], FusionConfig(boost=0, draw_boxes=False)) == f

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), boost=st.integers(0, 255), thick=st.integers(1, 3))
    def test_locality_and_saturation(self, seed, boost, thick):
        rng = np.random.default_rng(seed)
        h, w = 16, 16
        f = rgb(rng.integers(0, 256, (h, w, 3)))
        regions = [
            box_region(int(rng.integers(0, 10)), int(rng.integers(0, 10)), int(rng.integers(1, 6)), int(rng.integers(1, 6)), label=i)
            for i in (1, 2)
        ]
        cfg = FusionConfig(boost=boost, box_thickness=thick)
        out = compose_fused_frame(f, regions, cfg)
        touched = set()
        for r in regions:
            touched |= set(map(tuple, r.pixels.tolist())) | oracles.ring_pixels(r.bbox, thick, w, h)
        rings = set().union(*(oracles.ring_pixels(r.bbox, thick, w, h) for r in regions))
        for y in range(h):
            for x in range(w):
                if (x, y) not in touched:
                    assert out.data[y, x].tolist() == f.data[y, x].tolist()
                elif (x, y) not in rings:
                    assert np.all(out.data[y, x] >= f.data[y, x])
        assert compose_fused_frame(f, regions, cfg) == out


class TestConfig:
    @pytest.mark.parametrize("kwargs", [dict(boost=-1), dict(boost=256), dict(box_thickness=0), dict(box_color=(0, 300, 0))])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            FusionConfig(**kwargs)
