"""Command-line surface: convert a MATLAB-container scene/ground-truth
pair to HSIC/HSIL, or generate a synthetic fixture scene."""

import argparse
import sys

from .core import convert, make_synthetic
from .errors import MatConvError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matconv", description="MATLAB-container to HSIC/HSIL converter"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_convert = commands.add_parser("convert", help="convert a scene + ground truth pair")
    p_convert.add_argument("scene", help=".mat file holding the hyperspectral cube")
    p_convert.add_argument("gt", help=".mat file holding the ground-truth labels")
    p_convert.add_argument("-o", "--out-prefix", required=True)
    p_convert.add_argument("--scene-var", help="variable name override for the cube")
    p_convert.add_argument("--gt-var", help="variable name override for the labels")

    p_synth = commands.add_parser("synth", help="generate a synthetic fixture scene")
    p_synth.add_argument("-H", "--height", type=int, required=True)
    p_synth.add_argument("-W", "--width", type=int, required=True)
    p_synth.add_argument("-C", "--bands", type=int, required=True)
    p_synth.add_argument("-K", "--classes", type=int, required=True)
    p_synth.add_argument("--texture", type=float, default=1.0)
    p_synth.add_argument("--noise", type=float, default=0.25)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("-o", "--out-prefix", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "convert":
            manifest = convert(
                args.scene,
                args.gt,
                args.out_prefix,
                scene_var=args.scene_var,
                gt_var=args.gt_var,
            )
        else:
            manifest = make_synthetic(
                args.height,
                args.width,
                args.bands,
                args.classes,
                args.texture,
                args.seed,
                args.out_prefix,
                noise=args.noise,
            )
    except (MatConvError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(manifest.to_json())
    return 0


if __name__ == "__main__":
    sys.exit(main())
