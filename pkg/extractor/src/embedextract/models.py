"""Pretrained model loading.

Text models load through the transformers hub (or a local directory);
the vision model is the torchvision 50-layer residual network, cut
after its last convolutional stage so the 7x7 spatial map survives.
A "-untrained" suffix on the vision name skips pretrained weights and
seeds the architecture instead, for environments without hub access.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .config import ExtractionConfig, UNTRAINED_SEED
from .errors import ModelLoadError


@dataclass
class TextBundle:
    tokenizer: object
    model: nn.Module


def load_text_model(config: ExtractionConfig) -> TextBundle:
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.text_model)
        model = AutoModel.from_pretrained(config.text_model)
    except Exception as exc:
        raise ModelLoadError(
            f"cannot load text model {config.text_model!r}: {exc}"
        ) from exc
    model.eval()
    return TextBundle(tokenizer=tokenizer, model=model)


def load_vision_trunk(config: ExtractionConfig) -> nn.Module:
    import torchvision.models

    name = config.vision_model
    untrained = name.endswith("-untrained")
    base = name[: -len("-untrained")] if untrained else name
    if base != "resnet50":
        raise ModelLoadError(f"unknown vision model {name!r}")

    try:
        if untrained:
            torch.manual_seed(UNTRAINED_SEED)
            net = torchvision.models.resnet50(weights=None)
        else:
            net = torchvision.models.resnet50(
                weights=torchvision.models.ResNet50_Weights.IMAGENET1K_V2
            )
    except ModelLoadError:
        raise
    except Exception as exc:
        raise ModelLoadError(f"cannot load vision model {name!r}: {exc}") from exc

    trunk = nn.Sequential(
        net.conv1, net.bn1, net.relu, net.maxpool,
        net.layer1, net.layer2, net.layer3, net.layer4,
    )
    trunk.eval()
    return trunk
