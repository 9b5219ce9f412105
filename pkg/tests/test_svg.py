import xml.etree.ElementTree as ET

import numpy as np

from bldc_ann.svg import MAX_POINTS, Panel, line_chart, render

NS = "{http://www.w3.org/2000/svg}"


def _chart(n=10_000):
    t = np.linspace(0, 1, n)
    return render([Panel("speed", "rpm").add(t, np.sin(40 * t), "a").add(t, t, "b"),
                   Panel("bits", step=True).add(t, t > 0.5)], title="demo")


def test_output_is_deterministic_xml():
    text = _chart()
    assert text == _chart()
    root = ET.fromstring(text.split("\n", 1)[1])
    assert root.tag == NS + "svg"
    assert len(root.findall(f"{NS}polyline")) == 3


def test_long_series_are_decimated_but_keep_extremes():
    root = ET.fromstring(_chart().split("\n", 1)[1])
    first = root.findall(f"{NS}polyline")[0]
    pts = first.get("points").split()
    assert len(pts) <= MAX_POINTS
    ys = [float(p.split(",")[1]) for p in pts]
    # the sine reaches both extremes, so the pixel range must span the panel
    assert max(ys) - min(ys) > 100


def test_line_chart_handles_constant_series():
    text = line_chart([([0, 1, 2], [3, 3, 3], "flat")], title="c")
    assert "<polyline" in text and "nan" not in text
