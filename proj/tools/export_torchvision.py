#!/usr/bin/env python3
"""Convert torchvision AlexNet / VGG-16 weights to a .vsw backbone file.

The backbone keeps the convolutional trunk and the first two fully connected
layers (fc6, fc7 with ReLU), so features are 4096 wide. Dropout is dropped.

    python3 tools/export_torchvision.py --arch vggnet --pretraining object_centric \
        --out weights/
    python3 tools/export_torchvision.py --arch vggnet --pretraining scene_centric \
        --state-dict vgg16_places365.pth --caffe-bgr-mean 104.006,116.669,122.679 \
        --out weights/

Without --state-dict the torchvision ImageNet weights are downloaded.
Scene-centric weights must be supplied as a torchvision-compatible state dict.
--caffe-bgr-mean marks weights trained on BGR 0-255 inputs with mean
subtraction; the first convolution's input channels are reversed and the
preprocessing header is written so the loader feeds the same values.
"""

import argparse
import json
import struct
import sys
import zlib
from pathlib import Path

import numpy as np
import torch
import torchvision

MAGIC = b"VSAWGT\0\0"
VERSION = 1
FEATURE_DIM = 4096
IMAGENET_MEAN = [0.485, 0.456, 0.406]
IMAGENET_STD = [0.229, 0.224, 0.225]


def build_model(arch, state_dict):
    if arch == "alexnet":
        ctor, default = torchvision.models.alexnet, torchvision.models.AlexNet_Weights.IMAGENET1K_V1
    else:
        ctor, default = torchvision.models.vgg16, torchvision.models.VGG16_Weights.IMAGENET1K_V1
    if state_dict is None:
        return ctor(weights=default).eval()
    model = ctor(weights=None)
    sd = torch.load(state_dict, map_location="cpu")
    if isinstance(sd, dict) and "state_dict" in sd:
        sd = sd["state_dict"]
    sd = {k.removeprefix("module."): v for k, v in sd.items()}
    # The classifier's last layer depends on the label set and is not exported.
    sd = {k: v for k, v in sd.items() if not k.startswith("classifier.6.")}
    missing, unexpected = model.load_state_dict(sd, strict=False)
    missing = [k for k in missing if not k.startswith("classifier.6.")]
    if missing or unexpected:
        sys.exit(f"state dict mismatch: missing={missing} unexpected={unexpected}")
    return model.eval()


def trace_layers(model, size):
    """Returns (layer json list, parameter arrays) for the trunk plus fc6/fc7."""
    layers, params = [], []
    x = torch.zeros(1, 3, size, size)
    for m in model.features:
        if isinstance(m, torch.nn.Conv2d):
            if m.kernel_size[0] != m.kernel_size[1] or m.stride[0] != m.stride[1] or m.padding[0] != m.padding[1]:
                sys.exit(f"unsupported convolution {m}")
            layers.append({"type": "conv2d", "in_channels": m.in_channels, "out_channels": m.out_channels,
                           "kernel": m.kernel_size[0], "stride": m.stride[0], "pad": m.padding[0]})
            params += [m.weight, m.bias]
        elif isinstance(m, torch.nn.ReLU):
            layers.append({"type": "relu"})
        elif isinstance(m, torch.nn.MaxPool2d):
            if m.padding != 0 or m.ceil_mode:
                sys.exit(f"unsupported pooling {m}")
            layers.append({"type": "maxpool2d", "kernel": m.kernel_size, "stride": m.stride})
        else:
            sys.exit(f"unsupported layer {m}")
        x = m(x)
    # Adaptive average pooling is the identity at the canonical input size.
    if tuple(x.shape[2:]) != tuple(model.avgpool.output_size):
        sys.exit(f"trunk output {tuple(x.shape)} does not match the classifier input")
    layers.append({"type": "flatten"})
    for m in list(model.classifier)[:6]:
        if isinstance(m, torch.nn.Linear):
            layers.append({"type": "dense", "in_features": m.in_features, "out_features": m.out_features})
            params += [m.weight, m.bias]
        elif isinstance(m, torch.nn.ReLU):
            layers.append({"type": "relu"})
    return layers, params


def write_vsw(path, header, params):
    text = json.dumps(header, separators=(",", ":")).encode()
    blob = b"".join(np.ascontiguousarray(p.detach().double().numpy()).astype("<f8").tobytes() for p in params)
    count = sum(p.numel() for p in params)
    body = MAGIC + struct.pack("<IQ", VERSION, len(text)) + text + struct.pack("<Q", count) + blob
    body += struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(body)
    tmp.replace(path)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--arch", choices=["alexnet", "vggnet"], required=True)
    ap.add_argument("--pretraining", choices=["object_centric", "scene_centric"], required=True)
    ap.add_argument("--state-dict", type=Path)
    ap.add_argument("--caffe-bgr-mean", help="B,G,R means on the 0-255 scale")
    ap.add_argument("--size", type=int, default=224)
    ap.add_argument("--out", type=Path, required=True, help="weights directory")
    args = ap.parse_args()

    if args.pretraining == "scene_centric" and args.state_dict is None:
        sys.exit("scene-centric weights need --state-dict")

    model = build_model(args.arch, args.state_dict)
    with torch.no_grad():
        layers, params = trace_layers(model, args.size)
        mean, std = IMAGENET_MEAN, IMAGENET_STD
        if args.caffe_bgr_mean:
            bgr = [float(v) for v in args.caffe_bgr_mean.split(",")]
            if len(bgr) != 3:
                sys.exit("--caffe-bgr-mean takes three values")
            params[0] = params[0].flip(1)
            mean = [v / 255.0 for v in reversed(bgr)]
            std = [1.0 / 255.0] * 3

    if layers[-2]["type"] != "dense" or layers[-2]["out_features"] != FEATURE_DIM:
        sys.exit("unexpected feature width")
    header = {
        "architecture": args.arch,
        "pretraining": args.pretraining,
        "feature_dim": FEATURE_DIM,
        "preprocessing": {"channels": 3, "height": args.size, "width": args.size, "mean": mean, "std": std},
        "layers": layers,
    }
    path = args.out / f"{args.arch}_{args.pretraining}.vsw"
    write_vsw(path, header, params)
    print(f"wrote {path} ({sum(p.numel() for p in params)} parameters)")


if __name__ == "__main__":
    main()
