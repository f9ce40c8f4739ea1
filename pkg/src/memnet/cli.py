import argparse
import logging
import sys
from collections import Counter

from memnet.config import settings
from memnet.construct.criteria import build_from_certificate, max_memorizable
from memnet.construct.pipeline import BuildReport, build_theorem1, build_width3, parse_w, verify
from memnet.construct.separateness import gaussian_check, image_bound, measure
from memnet.core.dataset import load_csv, random_separated_dataset
from memnet.core.report_file import stderr_report, write_json
from memnet.core.scalar import format_exact, parse_exact
from memnet.core.serialize import load, network_to_json, save
from memnet.errors import BuildError, InvalidArgument, MemnetError
from memnet.sigmoid.approx import exact_hardtanh, transform
from memnet.version import VERSION

__doc__ = """memnet command line

    memnet separate data.csv
    memnet build data.csv --mode theorem1 --w 2/3 --sigma tanh --eps 0.01 -o net.json
    memnet verify net.json data.csv --eps 0.01
    memnet capacity --arch 3,3,3,... --delta 4 --dx 2 --classes 2 --with-build
    memnet gaussian --n 100 --dx 16 --delta 0.1 --trials 200
    memnet inspect net.json

JSON goes to stdout (or -o), summaries and logs to stderr.
Exit codes: 0 pass, 1 verification failed, 2 input error, 3 data contract error,
4 build failure.
"""

__all__ = ["main", "build_parser"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1

SIGMA_CHOICES = ["exact", "hardtanh-exact", "tanh", "logistic"]


def _emit(data, output):
    if output:
        with open(output, "w") as f:
            write_json(data, f)
        logger.info("wrote %s", output)
    else:
        write_json(data)


def _summary(args, item):
    if not args.quiet:
        item.render_summary(stderr_report())


def _parse_arch(text):
    try:
        widths = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidArgument(f"architecture must be comma separated integers, got {text!r}")
    if not widths:
        raise InvalidArgument("architecture is empty")
    return widths


def cmd_separate(args):
    ds = load_csv(args.data, args.classes)
    report = measure(ds)
    data = {"version": VERSION, **report.to_json()}
    if args.delta is not None:
        delta = parse_exact(args.delta)
        data["delta"] = format_exact(delta)
        data["separated"] = report.is_separated(delta)
    if args.image is not None:
        shape = _parse_arch(args.image)
        if len(shape) != 3:
            raise InvalidArgument(f"--image takes A,B,CHANNELS, got {args.image!r}")
        a, b, channels = shape
        data["image_bound"] = image_bound(a, b, channels, args.levels)
    _summary(args, report)
    _emit(data, args.output)
    return EXIT_OK


def _sigmoid(net, ds, sigma, eps):
    """Network actually emitted for the --sigma choice, and the tolerance it is verified at."""
    if sigma == "exact":
        return net, 0
    if sigma == "hardtanh-exact":
        return exact_hardtanh(net, ds), 0
    eps = parse_exact(eps)
    if eps <= 0:
        raise InvalidArgument(f"--eps must be positive for --sigma {sigma}, got {eps}")
    return transform(net, ds, float(eps), sigma), eps


def cmd_build(args):
    w = parse_w(parse_exact(args.w)) if args.mode == "theorem1" else None
    ds = load_csv(args.data, args.classes)
    if args.mode == "theorem1":
        sink = BuildReport("theorem1", seed=args.seed, w=format_exact(w), sigma=args.sigma)
        net = build_theorem1(ds, w, args.seed, args.max_attempts, sink)
    else:
        sink = BuildReport("width3", seed=args.seed, sigma=args.sigma)
        net = build_width3(ds, args.seed, args.max_attempts, sink)
    result, eps = _sigmoid(net, ds, args.sigma, args.eps)
    if result is not net:
        sink.add_stage("sigmoid", result, sigma=args.sigma, eps=format_exact(eps))
    sink.verification = verify(result, ds, eps)
    sink.finish(result)

    if args.output:
        save(result, args.output)
    else:
        write_json(network_to_json(result))
    if args.report:
        _emit(sink.to_json(), args.report)
    _summary(args, sink)
    return EXIT_OK if sink.verification.passed else EXIT_VERIFY_FAILED


def cmd_verify(args):
    net = load(args.network)
    ds = load_csv(args.data, args.classes)
    result = verify(net, ds, parse_exact(args.eps))
    _summary(args, result)
    _emit({"version": VERSION, **result.to_json()}, args.output)
    return EXIT_OK if result.passed else EXIT_VERIFY_FAILED


def cmd_capacity(args):
    arch = _parse_arch(args.arch)
    delta = parse_exact(args.delta)
    if delta < 1:
        raise InvalidArgument(f"--delta must be at least 1, got {delta}")
    n_max, cert = max_memorizable(arch, delta * delta, args.dx, args.classes)
    data = {
        "version": VERSION,
        "layers": len(arch),
        "delta": format_exact(delta),
        "d_x": args.dx,
        "classes": args.classes,
        "n_max": n_max,
        "certificate": cert.to_json() if cert else None,
    }
    code = EXIT_OK
    if cert is not None:
        _summary(args, cert)
    if args.with_build and cert is not None:
        ds = random_separated_dataset(n_max, args.dx, args.classes, delta * delta, args.seed)
        if ds is None:
            raise InvalidArgument(f"no random {n_max}-point set below delta {delta} in dimension {args.dx}")
        net = build_from_certificate(arch, cert, ds, args.seed, delta * delta)
        result = verify(net, ds)
        data["build"] = {
            "seed": args.seed,
            "layer_widths_match": net.layer_widths() == arch,
            "pass": result.passed,
            "max_error": format_exact(result.max_error),
        }
        _summary(args, result)
        code = EXIT_OK if result.passed else EXIT_VERIFY_FAILED
    _emit(data, args.output)
    return code


def cmd_gaussian(args):
    data = gaussian_check(args.n, args.dx, args.delta, args.trials, args.seed)
    _emit({"version": VERSION, "n": args.n, "d_x": args.dx, "delta": args.delta, **data}, args.output)
    return EXIT_OK


def cmd_inspect(args):
    net = load(args.network)
    stats = net.stats()
    histogram = Counter(str(tag) for layer in net.layers[:-1] for tag in layer.activations)
    data = {
        "version": VERSION,
        "type": type(net).__name__,
        **stats.to_json(),
        "layer_widths": net.layer_widths(),
        "activations": dict(sorted(histogram.items())),
        "meta": net.meta,
    }
    _summary(args, stats)
    _emit(data, args.output)
    return EXIT_OK


def _add_common(parser, data=False):
    parser.add_argument("-o", "--output", help="write JSON here instead of stdout")
    parser.add_argument("-q", "--quiet", action="store_true", help="no summary on stderr")
    if data:
        parser.add_argument("--classes", type=int, help="class count C, defaults to max label + 1")


def build_parser():
    parser = argparse.ArgumentParser(prog="memnet", description="Constructive memorization networks")
    parser.add_argument("--version", action="version", version=f"memnet {VERSION}")
    parser.add_argument("--log-level", help="logging level, defaults to MEMNET_LOG_LEVEL or WARNING")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    commands = parser.add_subparsers(dest="command", metavar="command", required=True)

    separate = commands.add_parser("separate", help="exact pairwise distance ratio of a dataset")
    separate.add_argument("data", help="CSV file, one point per row, label last")
    separate.add_argument("--delta", help="report whether the dataset is delta-separated")
    separate.add_argument("--image", metavar="A,B,CHANNELS", help="add the bound for AxB images")
    separate.add_argument("--levels", type=int, default=256, help="intensity levels for --image")
    _add_common(separate, data=True)
    separate.set_defaults(handler=cmd_separate)

    build = commands.add_parser("build", help="construct a memorizing network")
    build.add_argument("data", help="CSV file, one point per row, label last")
    build.add_argument("--mode", choices=["theorem1", "width3"], default="theorem1")
    build.add_argument("--w", default="2/3", help="parameter exponent in [2/3, 1] (theorem1)")
    build.add_argument("--sigma", choices=SIGMA_CHOICES, default="exact", help="activation of the emitted network")
    build.add_argument("--eps", default="0.01", help="tolerance of the sigmoidal conversion")
    build.add_argument("--seed", type=int, default=0, help="direction sampling seed")
    build.add_argument("--max-attempts", type=int, default=64, help="direction draws before giving up")
    build.add_argument("--report", help="write the build report JSON here")
    _add_common(build, data=True)
    build.set_defaults(handler=cmd_build)

    verify_cmd = commands.add_parser("verify", help="check a network on a dataset")
    verify_cmd.add_argument("network", help="network JSON")
    verify_cmd.add_argument("data", help="CSV file, one point per row, label last")
    verify_cmd.add_argument("--eps", default="0", help="tolerance, 0 for exact memorization")
    _add_common(verify_cmd, data=True)
    verify_cmd.set_defaults(handler=cmd_verify)

    capacity = commands.add_parser("capacity", help="largest N certified for an architecture")
    capacity.add_argument("--arch", required=True, help="comma separated hidden widths, all >= 3")
    capacity.add_argument("--delta", required=True, help="separateness delta of the datasets")
    capacity.add_argument("--dx", type=int, required=True, help="input dimension")
    capacity.add_argument("--classes", type=int, required=True, help="class count C")
    capacity.add_argument("--with-build", action="store_true", help="build and verify on a random dataset")
    capacity.add_argument("--seed", type=int, default=0)
    _add_common(capacity)
    capacity.set_defaults(handler=cmd_capacity)

    gaussian = commands.add_parser("gaussian", help="separateness of Gaussian samples")
    gaussian.add_argument("--n", type=int, required=True)
    gaussian.add_argument("--dx", type=int, required=True)
    gaussian.add_argument("--delta", type=float, required=True, help="failure probability in (0, 1)")
    gaussian.add_argument("--trials", type=int, default=200)
    gaussian.add_argument("--seed", type=int, default=0)
    _add_common(gaussian)
    gaussian.set_defaults(handler=cmd_gaussian)

    inspect = commands.add_parser("inspect", help="size, activations and meta of a network")
    inspect.add_argument("network", help="network JSON")
    _add_common(inspect)
    inspect.set_defaults(handler=cmd_inspect)
    return parser


def _configure_logging(args):
    if args.log_level:
        level = args.log_level.upper()
    elif args.verbose:
        level = "DEBUG" if args.verbose > 1 else "INFO"
    else:
        level = settings().log_level
    if not isinstance(logging.getLevelName(level), int):
        raise InvalidArgument(f"unknown log level {args.log_level!r}")
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv=None):
    """
    Run one command
    :return: process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_logging(args)
        return args.handler(args)
    except BuildError as e:
        print(f"memnet: {e.stage} stage failed: {e}", file=sys.stderr)
        return e.exit_code
    except MemnetError as e:
        print(f"memnet: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"memnet: {e}", file=sys.stderr)
        return InvalidArgument.exit_code
