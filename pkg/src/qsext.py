import argparse
import hashlib
import json
import logging
import os
import secrets
import string
import sys
import tempfile
import time
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Any, Callable, Optional

import numpy as np
from rich.logging import RichHandler

from config import (
    BIT_ORDER,
    DEFAULT_BENCH_BYTES,
    DEFAULT_BENCH_K,
    DEFAULT_BENCH_M,
    DEFAULT_WORKERS,
    ENV_BENCH_K,
    ENV_CONFIG,
    ENV_ENUMERATION_BUDGET,
    ENV_WORKERS,
)
from error import (
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFY_FAILED,
    UsageError,
    error_dict,
    exit_code,
    log_error,
)
from load_env import load_env
from qsextlib.bits import CountingSource, bits_to_bytes, bytes_to_bits, int_to_bits
from qsextlib.codes import CodeKind, CodeSpec, code_bit, encode_full, position_bias
from qsextlib.designs import DESIGN_KINDS, build_design, verify_design
from qsextlib.errors import ConfigurationError
from qsextlib.extract import (
    ExtractorInstance,
    build_instance,
    constant_extractor,
    extract_with_counters,
    identity_extractor,
)
from qsextlib.params import ExtractorParams, ParamKnobs, Variant, compute_params
from qsextlib.quantum import constant_adversary, embed_classical_adversary, random_adversary
from qsextlib.settings import DEFAULT_BUDGETS, Budgets, Constants, load_constants
from qsextlib.sources import SourceDistribution, random_flat
from qsextlib.verify import classical_distance_report, one_bit_security_scan, quantum_distance_report

logger = logging.getLogger("qsext")

SUITES = ("design", "codes", "classical", "quantum", "one-bit")


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError as e:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}") from e


@dataclass(frozen=True)
class RunConfig:
    """
    Settings shared by every subcommand, merged from flags, the environment and the constants file.

    Attributes:
        constants: hidden constants of the bound
        budgets: enumeration caps
        workers: thread count for extraction
        bench_k: XOR locality used by the benchmark
    """

    constants: Constants
    budgets: Budgets
    workers: int
    bench_k: int

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        constants = load_constants(args.config or os.getenv(ENV_CONFIG) or None)
        workers = args.workers if args.workers is not None else env_int(ENV_WORKERS, DEFAULT_WORKERS)
        budget = args.budget if args.budget is not None else env_int(ENV_ENUMERATION_BUDGET, DEFAULT_BUDGETS.enumeration)
        bench_k = env_int(ENV_BENCH_K, DEFAULT_BENCH_K)
        if workers < 1:
            raise UsageError(f"workers must be at least 1, got {workers}")
        if budget < 1:
            raise UsageError(f"budget must be positive, got {budget}")
        if bench_k < 1:
            raise ConfigurationError(f"{ENV_BENCH_K} must be at least 1, got {bench_k}")
        return cls(
            constants=constants,
            budgets=replace(DEFAULT_BUDGETS, enumeration=budget),
            workers=workers,
            bench_k=bench_k,
        )


def emit(report: Any):
    print(json.dumps(report, indent=2))


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def current_umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def write_atomic(path: str, data: bytes):
    """
    Write through a temporary file in the same directory, then rename over the target.
    The result gets the mode a plain open() would give it, not mkstemp's 0600.
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix=".qsext-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.chmod(temp_path, 0o666 & ~current_umask())
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise


def seed_digits(t: int) -> int:
    return -(-t // 4)


def parse_seed(text: str, t: int) -> int:
    digits = text.strip().lower()
    if digits.startswith("0x"):
        digits = digits[2:]
    if len(digits) != seed_digits(t) or any(c not in string.hexdigits for c in digits):
        raise UsageError(f"Seed must be exactly {seed_digits(t)} hex digits for t={t}")
    value = int(digits, 16) if digits else 0
    if value >> t:
        raise UsageError(f"Seed sets bits above position {t - 1}")
    return value


def format_seed(value: int, t: int) -> str:
    return format(value, f"0{seed_digits(t)}x") if t else ""


def knobs_from_args(args: argparse.Namespace, config: RunConfig) -> ParamKnobs:
    return ParamKnobs(
        gamma=args.gamma,
        alpha=args.alpha,
        delta=args.delta,
        c=args.c,
        design=args.design,
        constants=config.constants,
        budgets=config.budgets,
        diagnostic_zero_slack=getattr(args, "diagnostic_zero_slack", False),
    )


def solve_from_args(args: argparse.Namespace, config: RunConfig, N: int) -> ExtractorParams:
    return compute_params(N, args.K, args.b, args.epsilon, Variant(args.variant), knobs_from_args(args, config))


def cmd_params(args: argparse.Namespace, config: RunConfig) -> int:
    if args.N is None:
        raise UsageError("params needs -N")
    params = solve_from_args(args, config, args.N)
    emit(params.to_json())
    return EXIT_OK


def cmd_design(args: argparse.Namespace, config: RunConfig) -> int:
    design = build_design(args.kind, args.n, args.m)
    text = design.dumps()
    if args.output:
        write_atomic(args.output, text.encode("utf-8"))
    print(text)
    return EXIT_OK


def explicit_instance(args: argparse.Namespace, N: int) -> ExtractorInstance:
    kind = CodeKind(args.code)
    if kind == CodeKind.XOR_K:
        code = CodeSpec.xor(N, args.k)
    elif kind == CodeKind.RS_HADAMARD:
        code = CodeSpec.rs_hadamard(N, epsilon=args.epsilon, width=args.width)
    else:
        code = CodeSpec.hadamard(N)
    return ExtractorInstance(design=build_design(args.design, code.index_bits, args.m), code=code)


def run_extraction(
    inst: ExtractorInstance,
    design_kind: str,
    params: Optional[ExtractorParams],
    source_path: str,
    data: bytes,
    seed: int,
    output_path: str,
    workers: int,
) -> dict[str, Any]:
    x = bytes_to_bits(data, inst.N)
    bits, counters = extract_with_counters(inst, x, int_to_bits(seed, inst.t), workers)
    output = bits_to_bytes(bits)
    write_atomic(output_path, output)
    manifest: dict[str, Any] = {
        "command": "extract",
        "bit_order": BIT_ORDER,
        "source": {"path": source_path, "sha256": sha256(data), "N": inst.N},
        "seed": format_seed(seed, inst.t),
        "instance": {
            "code": inst.code.to_json(),
            "design": {"kind": design_kind, "n": inst.design.n, "m": inst.m, "t": inst.t},
            "rho_achieved": str(inst.design.rho_achieved),
        },
        "params": params.to_json() if params is not None else None,
        "output": {"path": output_path, "sha256": sha256(output), "bits": inst.m},
        "workers": workers,
    }
    if inst.code.kind == CodeKind.XOR_K:
        manifest["locality"] = counters.to_json()
    return manifest


def read_source(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def cmd_extract(args: argparse.Namespace, config: RunConfig) -> int:
    if args.from_manifest:
        return extract_from_manifest(args, config)
    if not args.source or not args.output:
        raise UsageError("extract needs --source and --output (or --from-manifest)")
    data = read_source(args.source)
    N = args.N if args.N is not None else len(data) * 8
    if len(data) * 8 < N:
        raise UsageError(f"Source holds {len(data)} bytes, need at least {-(-N // 8)} for N={N}")

    params: Optional[ExtractorParams] = None
    if args.m is not None:
        inst = explicit_instance(args, N)
        design_kind = args.design
    else:
        params = solve_from_args(args, config, N)
        inst = build_instance(params)
        design_kind = params.design

    if args.seed is not None:
        seed = parse_seed(args.seed, inst.t)
    elif args.fresh_seed:
        seed = secrets.randbits(inst.t) if inst.t else 0
        logger.info("Drew a fresh %d-bit seed from the OS", inst.t)
    else:
        raise UsageError("Refusing to extract without a seed: pass --seed HEX or --fresh-seed")

    manifest = run_extraction(inst, design_kind, params, args.source, data, seed, args.output, config.workers)
    if args.manifest:
        write_atomic(args.manifest, json.dumps(manifest, indent=2).encode("utf-8"))
    emit(manifest)
    return EXIT_OK


def extract_from_manifest(args: argparse.Namespace, config: RunConfig) -> int:
    with open(args.from_manifest, encoding="utf-8") as f:
        previous = json.load(f)
    code = CodeSpec.from_json(previous["instance"]["code"])
    design_info = previous["instance"]["design"]
    inst = ExtractorInstance(design=build_design(design_info["kind"], design_info["n"], design_info["m"]), code=code)
    source_path = args.source or previous["source"]["path"]
    output_path = args.output or previous["output"]["path"]
    data = read_source(source_path)
    if sha256(data) != previous["source"]["sha256"]:
        logger.warning("Source %s differs from the one recorded in the manifest", source_path)
    seed = parse_seed(previous["seed"], inst.t)
    manifest = run_extraction(
        inst, design_info["kind"], None, source_path, data, seed, output_path, config.workers
    )
    manifest["params"] = previous.get("params")
    manifest["reproduced"] = manifest["output"]["sha256"] == previous["output"]["sha256"]
    emit(manifest)
    return EXIT_OK if manifest["reproduced"] else EXIT_VERIFY_FAILED


def design_suite(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    design = build_design("poly", args.n, args.m)
    recomputed = verify_design(design)
    # the weak-design inequality, set by set, with integers only
    inequality = all(
        sum(1 << len(set(design.sets[i]) & set(design.sets[j])) for i in range(j))
        <= design.rho_achieved * (design.m - 1)
        for j in range(design.m)
    )
    return {
        "passed": recomputed == design.rho_achieved and inequality,
        "t": design.t,
        "n": design.n,
        "m": design.m,
        "rho_achieved": str(design.rho_achieved),
        "recomputed": str(recomputed),
    }


def codes_suite(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    rng = np.random.default_rng(args.rng_seed)
    specs = [CodeSpec.hadamard(8), CodeSpec.rs_hadamard(8, width=3), CodeSpec.xor(8, 3)]
    results = []
    for spec in specs:
        consistent = True
        linear = True
        locality = True
        for _ in range(args.trials):
            x = rng.integers(0, 2, size=spec.N, dtype=np.uint8)
            x2 = rng.integers(0, 2, size=spec.N, dtype=np.uint8)
            y = int(rng.integers(0, spec.N_bar))
            word = encode_full(spec, x, config.budgets)
            consistent &= code_bit(spec, x, y) == int(word[y])
            linear &= bool(np.array_equal(word ^ encode_full(spec, x2, config.budgets), encode_full(spec, x ^ x2)))
            if spec.kind == CodeKind.XOR_K:
                counting = CountingSource(x)
                code_bit(spec, counting, y)
                locality &= counting.reads == spec.k
        results.append(
            {
                "code": spec.to_json(),
                "local_global_consistent": bool(consistent),
                "linear": bool(linear),
                "locality": bool(locality),
                "position_bias": position_bias(spec),
            }
        )
    passed = all(r["local_global_consistent"] and r["linear"] and r["locality"] for r in results)
    return {"passed": passed, "trials": args.trials, "codes": results}


def classical_suite(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    rng = np.random.default_rng(args.rng_seed)
    code = CodeSpec.xor(8, 2)
    inst = ExtractorInstance(design=build_design("disjoint", code.index_bits, 2), code=code)
    reports = {
        "constant_extractor": classical_distance_report(
            constant_extractor(4, 2, 1), SourceDistribution.uniform(4), config.budgets, config.constants
        ),
        "identity_extractor": classical_distance_report(
            identity_extractor(3, 1), SourceDistribution.uniform(3), config.budgets, config.constants
        ),
        "xor_instance": classical_distance_report(inst, random_flat(8, 6, rng), config.budgets, config.constants),
    }
    constant = reports["constant_extractor"]
    identity = reports["identity_extractor"]
    return {
        "passed": abs(constant["distance"] - 0.5) <= constant["tolerance"]
        and abs(identity["distance"]) <= identity["tolerance"],
        "reports": reports,
    }


def quantum_suite(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    inst = ExtractorInstance(design=build_design("disjoint", 2, 2), code=CodeSpec.hadamard(2))
    src = SourceDistribution.uniform(2)
    classical = classical_distance_report(inst, src, config.budgets, config.constants)
    reports = {
        "constant_adversary": quantum_distance_report(
            inst, src, constant_adversary(1), config.budgets, config.constants
        ),
        "copy_one_bit": quantum_distance_report(
            identity_extractor(1),
            SourceDistribution.uniform(1),
            embed_classical_adversary(lambda x: x & 1, 1, name="copy_one_bit"),
            config.budgets,
            config.constants,
        ),
        "random_adversary": quantum_distance_report(
            inst, src, random_adversary(1, args.rng_seed), config.budgets, config.constants
        ),
    }
    constant = reports["constant_adversary"]
    copy = reports["copy_one_bit"]
    return {
        "passed": abs(constant["distance"] - classical["distance"]) <= constant["tolerance"]
        and abs(copy["distance"] - 0.5) <= copy["tolerance"],
        "classical": classical,
        "reports": reports,
    }


def one_bit_suite(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    report = one_bit_security_scan(
        CodeSpec.hadamard(8),
        K=6,
        epsilon=0.25,
        trials=args.trials,
        seed=args.rng_seed,
        budgets=config.budgets,
        progress=args.verbose,
    )
    return report.to_json()


SUITE_RUNNERS: dict[str, Callable[[argparse.Namespace, RunConfig], dict[str, Any]]] = {
    "design": design_suite,
    "codes": codes_suite,
    "classical": classical_suite,
    "quantum": quantum_suite,
    "one-bit": one_bit_suite,
}


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> int:
    details = SUITE_RUNNERS[args.suite](args, config)
    passed = bool(details.pop("passed"))
    emit({"suite": args.suite, "passed": passed, "details": details})
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def cmd_bench(args: argparse.Namespace, config: RunConfig) -> int:
    k = args.k if args.k is not None else config.bench_k
    rng = np.random.default_rng(args.rng_seed)
    data = rng.integers(0, 256, size=args.size_bytes, dtype=np.uint8).tobytes()
    N = len(data) * 8
    code = CodeSpec.xor(N, k)
    inst = ExtractorInstance(design=build_design(args.design, code.index_bits, args.m), code=code)
    x = bytes_to_bits(data, N)
    seed = rng.integers(0, 2, size=inst.t, dtype=np.uint8)
    runs = []
    outputs = []
    counters = None
    for _ in range(2):
        start = time.perf_counter()
        bits, counters = extract_with_counters(inst, x, seed, config.workers)
        elapsed = time.perf_counter() - start
        runs.append({"seconds": elapsed, "bits_per_second": inst.m / elapsed if elapsed > 0 else None})
        outputs.append(bits_to_bytes(bits))
    assert counters is not None
    emit(
        {
            "N": N,
            "k": k,
            "m": inst.m,
            "t": inst.t,
            "n": inst.design.n,
            "workers": config.workers,
            "runs": runs,
            "reads_per_output_bit": counters.reads_per_output_bit,
            "distinct_reads": counters.distinct,
            "identical": outputs[0] == outputs[1],
            "output_sha256": sha256(outputs[0]),
        }
    )
    return EXIT_OK


def add_param_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("-N", type=int, help="Source length in bits")
    parser.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.XOR.value)
    parser.add_argument("-K", type=int, help="Min-entropy requirement in bits (default floor(alpha N))")
    parser.add_argument("-b", type=int, default=0, help="Adversary storage in qubits")
    parser.add_argument("--epsilon", type=float, help="Target error (default N^-c)")
    parser.add_argument("--alpha", type=float, help="Entropy rate, K = floor(alpha N)")
    parser.add_argument("--gamma", type=float, help="rs_hadamard design ratio target K^(gamma/2)")
    parser.add_argument("--delta", type=float, default=0.1, help="xor approximation knob")
    parser.add_argument("--c", type=float, default=1, help="Error exponent, epsilon = N^-c")
    parser.add_argument("--design", choices=DESIGN_KINDS, default="poly")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        description="Build, run and check strong extractors secure against bounded quantum storage.",
        epilog="Example: qsext.py params --variant xor --alpha 0.5 --delta 0.1 -N 1000 -b 100",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Verbose output")
    parser.add_argument("--config", help="JSON file overriding the constants c_log, c_k, c_L")
    parser.add_argument("--workers", type=int, help="Extraction threads (default $QSEXT_WORKERS or 1)")
    parser.add_argument("--budget", type=int, help="Enumeration budget for exact verification")
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    params = subparsers.add_parser("params", help="Solve the security inequality for the output length")
    add_param_arguments(params)
    params.add_argument("--diagnostic-zero-slack", action="store_true", help="Zero the lower-order terms")
    params.set_defaults(handler=cmd_params)

    design = subparsers.add_parser("design", help="Build a weak design and print it as JSON")
    design.add_argument("-n", type=int, required=True, help="Set size")
    design.add_argument("-m", type=int, required=True, help="Number of sets")
    design.add_argument("--kind", choices=DESIGN_KINDS, default="poly")
    design.add_argument("--output", help="Also write the design to this file")
    design.set_defaults(handler=cmd_design)

    extract = subparsers.add_parser("extract", help="Extract randomness from a source file")
    add_param_arguments(extract)
    extract.add_argument("--source", help="Raw binary source file, read LSB-first")
    extract.add_argument("--output", help="Output file, m bits packed LSB-first")
    extract.add_argument("--seed", help="Seed as exactly ceil(t/4) hex digits")
    extract.add_argument("--fresh-seed", action="store_true", help="Draw a seed from the OS and print it")
    extract.add_argument("--manifest", help="Also write the run manifest to this file")
    extract.add_argument("--from-manifest", help="Re-run the extraction recorded in a manifest")
    extract.add_argument("-m", type=int, help="Explicit output length; skips parameter solving")
    extract.add_argument("--code", choices=[k.value for k in CodeKind], default=CodeKind.XOR_K.value)
    extract.add_argument("-k", type=int, default=DEFAULT_BENCH_K, help="XOR locality for an explicit instance")
    extract.add_argument("--width", type=int, help="Field width for an explicit rs_hadamard instance")
    extract.set_defaults(handler=cmd_extract)

    verify = subparsers.add_parser("verify", help="Run a verification suite")
    verify.add_argument("--suite", choices=SUITES, required=True)
    verify.add_argument("-n", type=int, default=4, help="Design suite set size")
    verify.add_argument("-m", type=int, default=16, help="Design suite set count")
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--rng-seed", type=int, default=0)
    verify.set_defaults(handler=cmd_verify)

    bench = subparsers.add_parser("bench", help="Measure extraction throughput and locality")
    bench.add_argument("--size-bytes", type=int, default=DEFAULT_BENCH_BYTES)
    bench.add_argument("-k", type=int, help=f"XOR locality (default ${ENV_BENCH_K} or {DEFAULT_BENCH_K})")
    bench.add_argument("-m", type=int, default=DEFAULT_BENCH_M)
    bench.add_argument("--design", choices=DESIGN_KINDS, default="poly")
    bench.add_argument("--rng-seed", type=int, default=0)
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        emit(error_dict(e))
        return EXIT_USAGE

    if args.verbose:
        logging.basicConfig(format="%(message)s", datefmt="[%X]", handlers=[RichHandler(rich_tracebacks=True)])
        logger.setLevel(logging.DEBUG)

    load_env()
    try:
        config = RunConfig.from_args(args)
        return args.handler(args, config)
    except Exception as e:
        log_error(e, args.command)
        emit(error_dict(e))
        return exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
