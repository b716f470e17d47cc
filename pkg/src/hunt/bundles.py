"""Compose the full per-detection explanation bundle (SHAP + LIME + plots)."""

from __future__ import annotations

from dataclasses import dataclass

from .dataset import NetworkFlow
from .forest import Prediction, RandomForestModel
from .lime import LimeConfig, LimeExplanation, lime_tabular
from .svgplots import PlotSpec, render_bar_plot
from .treeshap import ShapExplanation, tree_shap


@dataclass(frozen=True)
class ExplanationBundle:
    shap: ShapExplanation
    lime: LimeExplanation
    factor_text: tuple  # human-readable factor sentences
    shap_plot: PlotSpec
    lime_plot: PlotSpec

    def to_json(self):
        return {
            "shap": self.shap.to_json(),
            "lime": self.lime.to_json(),
            "factor_text": list(self.factor_text),
            "shap_plot": self.shap_plot.to_json(),
            "lime_plot": self.lime_plot.to_json(),
        }


def render_factor_text(lime_exp: LimeExplanation, class_label: str) -> tuple:
    return tuple(
        f"{f.feature} {f.condition} (weight {f.weight:+.4f}) {f.direction} {class_label}"
        for f in lime_exp.factors)


def compose_bundle(model: RandomForestModel, flow: NetworkFlow,
                   prediction: Prediction,
                   lime_config: LimeConfig = LimeConfig(),
                   top_k: int = 8) -> ExplanationBundle:
    shap_exp = tree_shap(model, flow, top_k=top_k)
    lime_exp = lime_tabular(model, flow, lime_config)

    factor_text = render_factor_text(lime_exp, prediction.class_label)

    shap_bars = [(name, value, "supports" if value >= 0 else "opposes")
                 for name, value in shap_exp.top_features[:top_k]]
    lime_bars = [(f"{f.feature}: {f.condition}", f.weight, f.direction)
                 for f in lime_exp.factors[:top_k]]

    shap_plot = render_bar_plot(
        f"Top SHAP features for class '{prediction.class_label}'", shap_bars)
    lime_plot = render_bar_plot(
        f"LIME local factors for class '{prediction.class_label}'", lime_bars)
    return ExplanationBundle(shap_exp, lime_exp, factor_text, shap_plot, lime_plot)
