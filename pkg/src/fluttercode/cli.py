"""Command-line front end: optimize, sample, spectrum, simulate.

Every run resolves its parameters from hard defaults, then an optional
flat key=value config file, then explicit flags (strongest). The
resolved config, including the master seed, is embedded in every
machine-readable output so a run can be reproduced bit-identically.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or validation
error. Progress and diagnostics go to stderr, data to stdout or files.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from pathlib import Path

from . import reference_codes
from .optimize import (GaConfig, MeritKind, ga_run, random_search,
                       sequence_min_dbs)
from .raster import read_image
from .sequences import (ExposureSequence, InterleavedCode, parse_code_text)
from .simulate import (MotionPsf, SimCondition, default_conditions,
                       run_experiment_matrix, sequence_to_psf, write_report)
from .spectrum import (combined_response, complement_spectrum_check,
                       power_spectrum, spectrum_csv)

MERIT_CHOICES = tuple(k.value for k in MeritKind)


class UsageError(ValueError):
    pass


def _load_config(path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args: argparse.Namespace, defaults: dict, converters: dict) -> dict:
    """defaults < config file < explicit flags."""
    config = _load_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(config) - set(defaults)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    resolved = dict(defaults)
    for key, text in config.items():
        conv = converters.get(key, str)
        try:
            resolved[key] = conv(text)
        except ValueError as exc:
            raise UsageError(f"bad config value for {key}: {text!r}") from exc
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            resolved[key] = value
    return resolved


def _pick_seed(resolved: dict) -> int:
    if resolved.get("seed") is None:
        resolved["seed"] = secrets.randbits(32)
    seed = int(resolved["seed"])
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _emit_result(payload: dict, out_dir: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if out_dir:
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "result.json").write_text(text + "\n")


def _code_summary(code: InterleavedCode, kind: MeritKind, score: float,
                  n_fft: int, resolved: dict) -> dict:
    return {
        "word": code.to_word(),
        "arity": code.arity,
        "merit_kind": kind.value,
        "score_db": score,
        "per_sequence_min_db": sequence_min_dbs(code, n_fft),
        "duty_cycles": [float(d) for d in code.duty_cycles()],
        "config": {k: v for k, v in sorted(resolved.items())},
    }


# ---------------------------------------------------------------------------
# optimize / sample

_GA_DEFAULTS = {
    "arity": 3, "length": 52, "merit": "avg-pairs", "generations": 2000,
    "population": 1000, "elite": 3, "crossover_prob": 0.95,
    "mutation_prob": 0.015, "selection_offset": 1000.0, "n_fft": 64,
    "seed": None, "out_dir": None, "format": "csv", "quiet": False,
}

_GA_CONVERTERS = {
    "arity": int, "length": int, "merit": str, "generations": int,
    "population": int, "elite": int, "crossover_prob": float,
    "mutation_prob": float, "selection_offset": float, "n_fft": int,
    "seed": int, "out_dir": str, "format": str, "quiet": _bool,
}


def _add_ga_options(parser: argparse.ArgumentParser, with_ga: bool):
    parser.add_argument("--arity", type=int, help="number of interleaved sequences")
    parser.add_argument("--length", type=int, help="chips per word")
    parser.add_argument("--merit", choices=MERIT_CHOICES)
    parser.add_argument("--n-fft", type=int, dest="n_fft")
    if with_ga:
        parser.add_argument("--generations", type=int)
        parser.add_argument("--population", type=int)
        parser.add_argument("--elite", type=int)
        parser.add_argument("--crossover-prob", type=float, dest="crossover_prob")
        parser.add_argument("--mutation-prob", type=float, dest="mutation_prob")
        parser.add_argument("--selection-offset", type=float,
                            dest="selection_offset")
        parser.add_argument("--quiet", action="store_true",
                            help="suppress per-generation progress")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--format", choices=("csv", "json"),
                        help="progress record format")
    parser.add_argument("--config", help="key = value file with these options")


def _progress_writer(fmt: str):
    def write(record):
        if fmt == "json":
            line = json.dumps({"generation": record.generation,
                               "score_db": record.best_score,
                               "word": record.best_word})
        else:
            line = f"{record.generation},{record.best_score:.6f},{record.best_word}"
        print(line, file=sys.stderr)
    return write


def cmd_optimize(args) -> int:
    resolved = _resolve(args, _GA_DEFAULTS, _GA_CONVERTERS)
    seed = _pick_seed(resolved)
    kind = MeritKind(resolved["merit"])
    population = int(resolved["population"])
    elite = min(int(resolved["elite"]), population - 1)
    cfg = GaConfig(
        population_size=population,
        elite_count=elite,
        crossover_prob=float(resolved["crossover_prob"]),
        mutation_prob_per_gene=float(resolved["mutation_prob"]),
        selection_offset=float(resolved["selection_offset"]),
        arity=int(resolved["arity"]),
        length=int(resolved["length"]),
        n_fft=int(resolved["n_fft"]),
        merit=kind,
        generations=int(resolved["generations"]),
        rng_seed=seed,
    )
    resolved["elite"] = elite
    progress = None if resolved["quiet"] else _progress_writer(resolved["format"])
    result = ga_run(cfg, progress)
    _emit_result(
        _code_summary(result.best_code, kind, result.best_score,
                      cfg.n_fft, resolved),
        resolved["out_dir"],
    )
    return 0


_SAMPLE_DEFAULTS = dict(_GA_DEFAULTS, count=100, merit="avg-min")
for key in ("generations", "population", "elite", "crossover_prob",
            "mutation_prob", "selection_offset", "quiet"):
    _SAMPLE_DEFAULTS.pop(key)
_SAMPLE_CONVERTERS = dict(_GA_CONVERTERS, count=int)


def cmd_sample(args) -> int:
    resolved = _resolve(args, _SAMPLE_DEFAULTS, _SAMPLE_CONVERTERS)
    count = int(resolved["count"])
    if count < 1:
        raise UsageError("count must be >= 1")
    seed = _pick_seed(resolved)
    kind = MeritKind(resolved["merit"])
    code, score = random_search(count, arity=int(resolved["arity"]),
                                length=int(resolved["length"]), kind=kind,
                                seed=seed, n_fft=int(resolved["n_fft"]))
    _emit_result(
        _code_summary(code, kind, score, int(resolved["n_fft"]), resolved),
        resolved["out_dir"],
    )
    return 0


# ---------------------------------------------------------------------------
# spectrum

_SPECTRUM_DEFAULTS = {
    "word": None, "word_file": None, "sequence_file": None, "arity": None,
    "n_fft": 64, "out_dir": ".",
}
_SPECTRUM_CONVERTERS = {
    "word": str, "word_file": str, "sequence_file": str, "arity": int,
    "n_fft": int, "out_dir": str,
}


def _write_csv(directory: Path, name: str, spec) -> str:
    path = directory / name
    path.write_text(spectrum_csv(spec))
    return str(path)


def cmd_spectrum(args) -> int:
    resolved = _resolve(args, _SPECTRUM_DEFAULTS, _SPECTRUM_CONVERTERS)
    sources = [k for k in ("word", "word_file", "sequence_file") if resolved[k]]
    if len(sources) != 1:
        raise UsageError("give exactly one of --word, --word-file, --sequence-file")
    n_fft = int(resolved["n_fft"])
    directory = Path(resolved["out_dir"])
    directory.mkdir(parents=True, exist_ok=True)

    if resolved["sequence_file"]:
        seq = ExposureSequence.from_text(Path(resolved["sequence_file"]).read_text())
        spec = power_spectrum(seq, n_fft)
        check = complement_spectrum_check(seq)
        summary = {
            "sequence": seq.to_text(),
            "n_fft": n_fft,
            "min_db": spec.min_db,
            "duty_cycle": float(seq.duty_cycle()),
            "complement_check": {
                "ok": check.ok,
                "max_deviation": check.max_deviation,
                "dc_difference": check.dc_difference,
            },
            "csv": _write_csv(directory, "spectrum.csv", spec),
        }
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 0

    if resolved["word"]:
        code = InterleavedCode.from_word(resolved["word"], resolved["arity"])
    else:
        code = parse_code_text(Path(resolved["word_file"]).read_text())
    seqs = code.decode()
    specs = [power_spectrum(s, n_fft) for s in seqs]
    per_sequence = []
    for bit, (seq, spec) in enumerate(zip(seqs, specs)):
        check = complement_spectrum_check(seq)
        per_sequence.append({
            "bit": bit,
            "min_db": spec.min_db,
            "duty_cycle": float(seq.duty_cycle()),
            "complement_ok": check.ok,
            "csv": _write_csv(directory, f"spectrum-bit{bit}.csv", spec),
        })
    combined = combined_response(specs)
    summary = {
        "word": code.to_word(),
        "arity": code.arity,
        "n_fft": n_fft,
        "per_sequence": per_sequence,
        "combined_min_db": combined.min_db,
        "combined_csv": _write_csv(directory, "spectrum-combined.csv", combined),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# simulate

_SIM_DEFAULTS = {
    "truth": None, "seed": None, "nf": 0.01, "iterations": 20,
    "pair_sequence": reference_codes.BROADBAND_PAIR_SEQUENCE,
    "triplet_word": reference_codes.TRIPLET_AVG_MIN,
    "conditions": None, "psf": None, "dc": 1.0, "out_dir": ".",
}
_SIM_CONVERTERS = {
    "truth": str, "seed": int, "nf": float, "iterations": int,
    "pair_sequence": str, "triplet_word": str, "conditions": str,
    "psf": str, "dc": float, "out_dir": str,
}


def _load_psf(spec_text: str) -> MotionPsf:
    if spec_text == "delta":
        return MotionPsf([1.0])
    path = Path(spec_text)
    data = path.read_bytes()
    if data[:2] in (b"P2", b"P5"):
        from .raster import decode_pgm

        row = decode_pgm(data)
        if row.shape[0] != 1:
            raise UsageError("psf image must be a single row")
        return MotionPsf.normalized(row[0])
    return sequence_to_psf(ExposureSequence.from_text(data.decode()))


def cmd_simulate(args) -> int:
    resolved = _resolve(args, _SIM_DEFAULTS, _SIM_CONVERTERS)
    if not resolved["truth"]:
        raise UsageError("--truth is required")
    seed = _pick_seed(resolved)
    truth = read_image(resolved["truth"])
    nf = float(resolved["nf"])
    iterations = int(resolved["iterations"])

    if resolved["psf"]:
        psf = _load_psf(resolved["psf"])
        conditions = [SimCondition("custom", psf, float(resolved["dc"]),
                                   noise_factor=nf, rl_iterations=iterations)]
        groups: list[tuple[str, list[str]]] = []
    else:
        pair = ExposureSequence.from_text(resolved["pair_sequence"])
        triplet = InterleavedCode.from_word(resolved["triplet_word"])
        conditions, groups = default_conditions(nf, iterations, pair, triplet)
        if resolved["conditions"]:
            wanted = [n.strip() for n in resolved["conditions"].split(",") if n.strip()]
            known = {c.name for c in conditions}
            unknown = [n for n in wanted if n not in known]
            if unknown:
                raise UsageError(f"unknown condition names: {unknown}")
            conditions = [c for c in conditions if c.name in wanted]
            groups = [(g, m) for g, m in groups if all(n in wanted for n in m)]

    report = run_experiment_matrix(truth, seed, conditions=conditions,
                                   groups=groups)
    payload = report.metrics_dict()
    payload["invocation"] = {k: v for k, v in sorted(resolved.items())}
    write_report(report, resolved["out_dir"], metrics=payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluttercode",
        description="Design, optimize, and evaluate flutter-shutter exposure codes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="genetic-algorithm code search")
    _add_ga_options(p_opt, with_ga=True)
    p_opt.set_defaults(func=cmd_optimize)

    p_sample = sub.add_parser("sample", help="best-of-M random code search")
    p_sample.add_argument("--count", type=int, help="number of random draws")
    _add_ga_options(p_sample, with_ga=False)
    p_sample.set_defaults(func=cmd_sample)

    p_spec = sub.add_parser("spectrum", help="export power spectra as CSV")
    p_spec.add_argument("--word", help="interleaved code word")
    p_spec.add_argument("--word-file", dest="word_file")
    p_spec.add_argument("--sequence-file", dest="sequence_file")
    p_spec.add_argument("--arity", type=int)
    p_spec.add_argument("--n-fft", type=int, dest="n_fft")
    p_spec.add_argument("--out-dir", dest="out_dir")
    p_spec.add_argument("--config")
    p_spec.set_defaults(func=cmd_spectrum)

    p_sim = sub.add_parser("simulate", help="blur/deconvolve experiment matrix")
    p_sim.add_argument("--truth", help="ground-truth image (PNG/PGM/JPEG)")
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--nf", type=float, help="noise factor")
    p_sim.add_argument("--iterations", type=int, help="deconvolution iterations")
    p_sim.add_argument("--pair-sequence", dest="pair_sequence",
                       help="bits of the complement-pair code")
    p_sim.add_argument("--triplet-word", dest="triplet_word",
                       help="interleaved triplet code word")
    p_sim.add_argument("--conditions", help="comma-separated subset of conditions")
    p_sim.add_argument("--psf", help="'delta', a 1xL PGM, or a sequence file; "
                                     "runs a single custom condition")
    p_sim.add_argument("--dc", type=float, help="duty cycle for --psf")
    p_sim.add_argument("--out-dir", dest="out_dir")
    p_sim.add_argument("--config")
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
