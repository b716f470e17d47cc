import hashlib
import math
import xml.etree.ElementTree as ET

import pytest

from hunt.bundles import compose_bundle, render_factor_text
from hunt.errors import PlotRenderError
from hunt.lime import LimeConfig
from hunt.svgplots import OPPOSE_COLOR, SUPPORT_COLOR, render_bar_plot

FAST = LimeConfig(n_samples=300, top_k=4, seed=2)


def test_render_bar_plot_is_valid_svg():
    spec = render_bar_plot("demo", [("a", 1.5, "supports"),
                                    ("b", -0.5, "opposes")])
    root = ET.fromstring(spec.svg)
    assert root.tag.endswith("svg")
    assert root.attrib["viewBox"] == "0 0 640 360"
    body = spec.svg.decode()
    assert SUPPORT_COLOR in body and OPPOSE_COLOR in body
    assert "demo" in body


def test_plot_digest_matches_bytes_and_is_stable():
    a = render_bar_plot("t", [("x", 1.0, "supports")])
    b = render_bar_plot("t", [("x", 1.0, "supports")])
    assert a.svg == b.svg
    assert a.digest == b.digest == hashlib.sha256(a.svg).hexdigest()
    c = render_bar_plot("t", [("x", 2.0, "supports")])
    assert c.digest != a.digest


def test_non_finite_values_rejected():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(PlotRenderError):
            render_bar_plot("t", [("x", bad, "supports")])


def test_labels_are_escaped():
    spec = render_bar_plot('<&"title', [('a<b>"c', 1.0, "supports")])
    ET.fromstring(spec.svg)  # must stay well-formed
    assert b"<b>" not in spec.svg


def test_empty_bars_still_render():
    spec = render_bar_plot("empty", [])
    ET.fromstring(spec.svg)


@pytest.fixture(scope="module")
def bundle(model, anomalous_flow):
    pred = model.predict(anomalous_flow)
    return compose_bundle(model, anomalous_flow, pred, FAST), pred


def test_bundle_contains_both_explainers(bundle, model, anomalous_flow):
    b, pred = bundle
    assert b.shap.predicted_class == pred.class_label
    assert b.lime.predicted_class == pred.class_label
    assert len(b.shap.top_features) == 8
    assert 0 < len(b.lime.factors) <= 4


def test_factor_text_matches_lime_factors(bundle):
    b, pred = bundle
    assert len(b.factor_text) == len(b.lime.factors)
    for sentence, factor in zip(b.factor_text, b.lime.factors):
        assert sentence.startswith(factor.feature)
        assert factor.direction in sentence
        assert pred.class_label in sentence
        assert f"{factor.weight:+.4f}" in sentence


def test_factor_text_renderer_format():
    from hunt.lime import LimeExplanation, LimeFactor
    exp = LimeExplanation(0.0, (LimeFactor("count", "count > 3", 0.1234,
                                           "supports"),), 1.0, FAST, "dos")
    (line,) = render_factor_text(exp, "dos")
    assert line == "count count > 3 (weight +0.1234) supports dos"


def test_bundle_plots_are_deterministic(bundle, model, anomalous_flow):
    b, pred = bundle
    again = compose_bundle(model, anomalous_flow, pred, FAST)
    assert again.shap_plot.digest == b.shap_plot.digest
    assert again.lime_plot.digest == b.lime_plot.digest
    assert pred.class_label in b.shap_plot.title
    assert pred.class_label in b.lime_plot.title


def test_bundle_json_is_serializable(bundle):
    import json
    b, _ = bundle
    payload = json.dumps(b.to_json())
    assert "shap" in payload and "lime" in payload
