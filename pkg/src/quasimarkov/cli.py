"""``quasimarkov`` command line.

Exit codes: 0 success / in-domain / pass, 1 out-of-domain / failed check,
2 usage error or malformed input, 3 inconclusive classification.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cumulants import EnumerationTooLarge
from .distributions import CATALOGUE, NAMED_SEQUENCES, GeneratorSpec, InputError, make_distribution, named_sequence, read_csv
from .empirical import (
    INCONCLUSIVE,
    HorizonSchedule,
    SequencePrefix,
    classify,
    empirical_measure,
)
from .kernel import compose, kernel_from_json, kernel_to_json, tensor
from .laws import LAWS, run_law_suite
from .sequences import MixtureModel, resample_truncated, two_stage_resample
from . import verify as V

SCHEMA = "quasimarkov.cli/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

SUITES = ("gc", "slln", "maximal-ergodic", "concentration", "ecdf-concentration", "adequacy", "invariance",
          "idempotence", "sixth-moment")


class UsageError(Exception):
    pass


# argument types --------------------------------------------------------------------


def _uint64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("must be a uint64")
    return v


def _positive_int(text: str) -> int:
    v = int(float(text)) if "e" in text.lower() else int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(_positive_int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(b <= a for a, b in zip(vals, vals[1:])):
        raise argparse.ArgumentTypeError("expected strictly increasing positive integers")
    return vals


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(_positive_float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated positive numbers, got {text!r}") from None


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None


# parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--seed", type=_uint64, default=0)
    g.add_argument("--trials", type=_positive_int, default=100)
    g.add_argument("--tol", type=_positive_float, default=0.01)
    g.add_argument("--horizon", type=_int_list, help="comma-separated checkpoints, e.g. 1000,10000,100000")
    g.add_argument("--json", action="store_true", help="emit versioned JSON")
    g.add_argument("--out", type=Path, help="write the report to this path")

    source = argparse.ArgumentParser(add_help=False)
    s = source.add_argument_group("sequence source")
    s.add_argument("--file", help="CSV with one value per line; '-' reads stdin")
    s.add_argument("--gen", type=_json_arg, help='generator spec, e.g. {"dist":"uniform01","seed":7,"n":100000}')
    s.add_argument("--named", choices=sorted(NAMED_SEQUENCES), help="built-in deterministic sequence")
    s.add_argument("--n", type=_positive_int, help="length for --named")
    s.add_argument("--alphabet", type=_positive_int, help="alphabet size for finite input")

    p = argparse.ArgumentParser(prog="quasimarkov", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common, source], help="classify a sequence prefix")
    c.add_argument("--kind", required=True, choices=("finite", "nat", "real", "real-avg"))
    c.add_argument("--eps", type=_positive_float, help="tolerance (default max(0.01, 4/sqrt(N)))")

    m = sub.add_parser("measure", parents=[common, source], help="empirical measure of an in-domain sequence")
    m.add_argument("--kind", required=True, choices=("finite", "nat", "real"))
    m.add_argument("--eps", type=_positive_float)

    r = sub.add_parser("resample", parents=[common, source], help="exact resampled cylinder law")
    r.add_argument("--m", type=_positive_int, required=True)
    r.add_argument("--upto", type=_positive_int, help="horizon n (default: whole prefix)")
    mode = r.add_mutually_exclusive_group()
    mode.add_argument("--with-replacement", action="store_true")
    mode.add_argument("--two-stage", action="store_true")

    k = sub.add_parser("kernel", help="partial kernel algebra")
    ksub = k.add_subparsers(dest="op", required=True)
    for op in ("compose", "tensor"):
        kp = ksub.add_parser(op, parents=[common])
        kp.add_argument("f", type=Path, help="kernel JSON file")
        kp.add_argument("g", type=Path, help="kernel JSON file")
    kl = ksub.add_parser("laws", parents=[common], help="randomised law suite")
    kl.add_argument("--instances", type=_positive_int, default=1000)
    kl.add_argument("--law", action="append", choices=sorted(LAWS))

    v = sub.add_parser("verify", parents=[common], help="verification suites")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--dist", choices=sorted(CATALOGUE))
    v.add_argument("--params", type=_json_arg, default=None)
    v.add_argument("--mixture", type=_json_arg, help="mixture model JSON (adequacy, invariance, idempotence)")
    v.add_argument("--N", type=_positive_int, help="sequence length")
    v.add_argument("--m", type=_positive_int, default=2)
    v.add_argument("--eps", type=_float_list, help="comma-separated tolerances")
    v.add_argument("--grid", help="n:m pairs, e.g. 10:20,20:40 (concentration, sixth-moment)")
    v.add_argument("--r", type=_positive_float, default=2.0, help="threshold for maximal-ergodic")
    v.add_argument("--slack", type=_positive_float, default=4.0)
    v.add_argument("--workers", type=_positive_int, default=1)
    v.add_argument("--csv", type=Path, help="write per-trial statistics as CSV")
    return p


# sources ------------------------------------------------------------------------------


def _load_sequence(args, kind: str) -> SequencePrefix:
    chosen = [x for x in (args.file, args.gen, args.named) if x is not None]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --file, --gen, --named")
    base = "real" if kind == "real-avg" else kind
    if args.named:
        x = named_sequence(args.named, args.n or 100_000)
    elif args.gen is not None:
        x = GeneratorSpec.from_json(args.gen).generate(base if base != "finite" else None)
    elif args.file == "-":
        x = read_csv(sys.stdin, base, args.alphabet, "<stdin>")
    else:
        path = Path(args.file)
        if not path.is_file():
            raise InputError(f"{path}: no such file")
        with path.open() as fh:
            x = read_csv(fh, base, args.alphabet, str(path))
    if base == "real" and x.kind == "nat":
        x = x.as_real()
    if x.kind != base:
        raise InputError(f"sequence is {x.kind}, but --kind {kind} was requested")
    if base == "finite" and args.alphabet and x.alphabet_size != args.alphabet:
        x = SequencePrefix("finite", x.values, args.alphabet, x.provenance)
    if base == "finite" and x.alphabet_size is None:
        x = SequencePrefix("finite", x.values, int(x.values.max()) + 1, x.provenance)
    return x


def _schedule(args, x: SequencePrefix) -> HorizonSchedule:
    if args.horizon:
        if args.horizon[-1] > len(x):
            raise UsageError(f"last checkpoint {args.horizon[-1]} exceeds the {len(x)} values available")
        eps = args.eps if args.eps else HorizonSchedule.default(args.horizon[-1]).eps
        return HorizonSchedule(args.horizon, eps)
    return HorizonSchedule.default(len(x), args.eps)


def _distribution(args, default: str | None = None):
    name = args.dist or default
    if name is None:
        raise UsageError(f"verify {args.suite} needs --dist")
    return make_distribution(name, args.params)


def _grid(text: str | None):
    if not text:
        return None
    try:
        pairs = [tuple(int(v) for v in item.split(":")) for item in text.split(",")]
    except ValueError:
        raise UsageError(f"--grid expects n:m pairs, got {text!r}") from None
    if any(len(p) != 2 or not 1 <= p[0] <= p[1] for p in pairs):
        raise UsageError("--grid pairs need 1 <= n <= m")
    return pairs


# commands ---------------------------------------------------------------------------------


def _cmd_classify(args):
    x = _load_sequence(args, args.kind)
    v = classify(x, _schedule(args, x), averaged=args.kind == "real-avg")
    code = EXIT_OK if v.in_domain else EXIT_INCONCLUSIVE if v.status == INCONCLUSIVE else EXIT_FAIL
    result = v.to_json()
    result["source"] = x.provenance
    text = f"{v.status} ({v.kind}, N={v.horizon}, eps={v.schedule.eps:g})"
    if v.witness:
        text += f"\nwitness: {json.dumps(v.witness, sort_keys=True, default=V._json_default)}"
    return code, result, text


def _cmd_measure(args):
    x = _load_sequence(args, args.kind)
    v = classify(x, _schedule(args, x))
    if not v.in_domain:
        code = EXIT_INCONCLUSIVE if v.status == INCONCLUSIVE else EXIT_FAIL
        return code, {"status": v.status, "measure": None}, f"no empirical measure: {v.status}"
    mu = empirical_measure(x, v).to_json()
    return EXIT_OK, {"status": v.status, "measure": mu}, json.dumps(mu, sort_keys=True, indent=2)


def _cmd_resample(args):
    x = _load_sequence(args, "finite")
    n = args.upto or len(x)
    if n > len(x):
        raise UsageError(f"--upto {n} exceeds the {len(x)} values available")
    if args.m > n:
        raise UsageError(f"--m {args.m} exceeds horizon {n}")
    if args.two_stage:
        s = two_stage_resample(x, args.m, n)
    else:
        s = resample_truncated(x, args.m, n, with_replacement=args.with_replacement)
    result = s.to_json()
    text = "\n".join(f"{','.join(map(str, w))}\t{p}" for w, p in s.pmf.items())
    return EXIT_OK, result, text


def _read_kernel(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}, line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return kernel_from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: invalid kernel: {exc}") from None


def _cmd_kernel(args):
    if args.op == "laws":
        results = run_law_suite(args.instances, args.seed, args.law)
        ok = all(r.passed for r in results)
        result = {"instances": args.instances, "laws": {r.name: {"failures": r.failures} for r in results},
                  "passed": ok}
        text = "\n".join(f"{r.name:<26} {r.failures:>5} failures / {r.instances}  {r.seconds:6.2f}s" for r in results)
        return (EXIT_OK if ok else EXIT_FAIL), result, text
    f, g = _read_kernel(args.f), _read_kernel(args.g)
    try:
        h = compose(f, g) if args.op == "compose" else tensor(f, g)
    except TypeError as exc:
        raise InputError(str(exc)) from None
    out = kernel_to_json(h)
    return EXIT_OK, out, json.dumps(out, sort_keys=True, indent=2)


def _cmd_verify(args):
    suite = args.suite
    eps = args.eps or (0.1,)
    plan = lambda N=10_000, **kw: V.TrialPlan(  # noqa: E731
        trials=args.trials, seed=args.seed, N=args.N or N, m=args.m, eps=kw.get("eps", eps),
        slack=args.slack, workers=args.workers)
    mixture = MixtureModel.from_json(args.mixture) if args.mixture else None

    if suite == "gc":
        d = _distribution(args)
        cps = args.horizon
        report = V.verify_glivenko_cantelli(d, plan(cps[-1] if cps else 100_000), args.tol, cps)
    elif suite == "slln":
        report = V.verify_slln(_distribution(args), plan(1_000_000), args.tol)
    elif suite == "maximal-ergodic":
        report = V.verify_maximal_ergodic(_distribution(args), args.r, args.N or 10_000, plan())
    elif suite == "concentration":
        d = _distribution(args)
        report = V.verify_concentration(d, plan(eps=args.eps or (0.2 if d.name == "bernoulli" else 0.1,)),
                                        _grid(args.grid))
    elif suite == "ecdf-concentration":
        report = V.verify_ecdf_concentration(_distribution(args), plan(), args.horizon or (100, 1000))
    elif suite == "adequacy":
        if mixture is None:
            d = _distribution(args, "bernoulli")
            q = Fraction(str(d.params.get("p", 0.5)))
            mixture = MixtureModel(2, (Fraction(1),), ((1 - q, q),))
        report = V.verify_empirical_adequacy(mixture, args.m, plan())
    elif suite == "invariance":
        report = V.verify_permutation_invariance(mixture or _distribution(args), plan())
    elif suite == "idempotence":
        src = mixture or _distribution(args, "bernoulli")
        report = V.verify_resampling_idempotence(src, plan(), args.m, args.horizon or (100, 1000, 10_000))
    else:  # sixth-moment
        d = _distribution(args, "bernoulli")
        law = V.rational_law(d)
        if law is None:
            raise UsageError(f"sixth-moment needs a finite rational law, {d.name} is not")
        grid = _grid(args.grid) or [(1, 2), (2, 3), (3, 6), (5, 8)]
        report = V.check_sixth_moment([(law, n, m) for n, m in grid])
    if args.csv:
        args.csv.write_text(report.to_csv())
    return (EXIT_OK if report.passed else EXIT_FAIL), report.to_json(), report.to_table()


COMMANDS = {"classify": _cmd_classify, "measure": _cmd_measure, "resample": _cmd_resample,
            "kernel": _cmd_kernel, "verify": _cmd_verify}


def run(argv: list[str] | None = None) -> tuple[int, str]:
    """Parse and execute; returns ``(exit code, rendered output)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), ""
    try:
        code, result, text = COMMANDS[args.command](args)
    except (UsageError, InputError, EnumerationTooLarge) as exc:
        return EXIT_USAGE, f"error: {exc}"
    except ValueError as exc:
        return EXIT_USAGE, f"error: {exc}"
    if args.json:
        payload = {"schema": SCHEMA, "command": args.command, "exit_code": code, "result": result}
        text = json.dumps(payload, sort_keys=True, indent=2, default=V._json_default)
    if args.out:
        args.out.write_text(text + "\n")
    return code, text


def main(argv: list[str] | None = None) -> int:
    code, text = run(argv)
    if text:
        stream = sys.stderr if code == EXIT_USAGE else sys.stdout
        print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
