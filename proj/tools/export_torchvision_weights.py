#!/usr/bin/env python3
"""Export torchvision ImageNet backbone weights into the porcelain weight cache.

Each architecture is written as <out>/<arch>.pt: a pickled plain dict of
tensors (no classifier keys), which the C++ loader reads directly.

    python3 tools/export_torchvision_weights.py --out ~/.cache/porcelain/weights
"""
import argparse
import pathlib

import torch
import torchvision.models as tvm

ARCHS = {
    "resnet50": (tvm.resnet50, "ResNet50_Weights", ("fc.",)),
    "mobilenetv2": (tvm.mobilenet_v2, "MobileNet_V2_Weights", ("classifier.",)),
    "vgg16": (tvm.vgg16, "VGG16_Weights", ("classifier.",)),
    "inceptionv3": (tvm.inception_v3, "Inception_V3_Weights", ("fc.", "AuxLogits.")),
}


def export(arch: str, out_dir: pathlib.Path, random_init: bool) -> pathlib.Path:
    ctor, weights_enum, drop = ARCHS[arch]
    if random_init:
        kwargs = {"weights": None}
        if arch == "inceptionv3":
            kwargs.update(aux_logits=False, init_weights=True)
    else:
        kwargs = {"weights": getattr(tvm, weights_enum).IMAGENET1K_V1}
    model = ctor(**kwargs).eval()
    state = {k: v.detach().clone() for k, v in model.state_dict().items() if not k.startswith(drop)}
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{arch}.pt"
    torch.save(state, path)  # plain dict; the C++ side cannot read OrderedDict
    return path


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path.home() / ".cache/porcelain/weights")
    parser.add_argument("--arch", choices=sorted(ARCHS), action="append", help="repeatable; default: all")
    parser.add_argument("--random-init", action="store_true",
                        help="export untrained weights (layout testing without network access)")
    args = parser.parse_args()
    for arch in args.arch or sorted(ARCHS):
        print(export(arch, args.out, args.random_init))


if __name__ == "__main__":
    main()
