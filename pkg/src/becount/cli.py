"""Command-line front end: parameter reduction, tables and oracle runs.

Subcommands
-----------
params      physical inputs -> detector parameters (JSON)
efficiency  eta_D over a log-spaced q grid (CSV)
counts      conditional count distribution, optionally with Monte Carlo
            and exact-solver columns (CSV)
mix         count statistics of a photon mixture vs the conventional
            Binomial-thinning result (CSV)
exact       sector-basis exact solver (CSV)
mc          Monte Carlo sampler (CSV)

Every run writes a manifest JSON next to its output recording the
subcommand, all resolved parameters, the seed, the package version and
the SHA-256 of each output file. `becount --replay MANIFEST` re-runs the
recorded computation and verifies the outputs are byte-identical.

Exit codes: 0 success; 2 usage error; 3 regime error (parameters outside
the supported over-damped domain); 4 oracle disagreement (a requested
cross-check exceeded its tolerance, or a replay failed to reproduce).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .counting import count_distribution, efficiency
from .params import (
    PhysicalConfig,
    RegimeError,
    derive_trap_scales,
    reduced_params,
    resonance_wavenumber,
    saturation,
)
from .sector_oracle import exact_count_statistics
from .statistics import (
    PhotonStatistics,
    binomial_reference,
    detector_response,
    mandel_counts,
    mix,
)
from .stochastic import simulate_counts

OUT_DIR_ENV = "BECOUNT_OUT"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_REGIME = 3
EXIT_DISAGREEMENT = 4


def _parse_q(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid q: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"q must be positive or 'inf', got {text}")
    return value


def _parse_probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid probability: {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must be in [0, 1], got {text}")
    return value


def _parse_positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"value must be positive, got {text}")
    return value


def _parse_nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"value must be >= 0, got {text}")
    return value


def _parse_nonneg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"value must be >= 0, got {text}")
    return value


def _parse_positive_int(text: str) -> int:
    value = _parse_nonneg_int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"value must be >= 1, got {text}")
    return value


def _sig(x) -> str:
    """12-significant-digit decimal rendering for CSV cells."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _resolve_out(out: str | None, default_name: str) -> Path:
    if out:
        return Path(out)
    base = os.environ.get(OUT_DIR_ENV, ".")
    return Path(base) / default_name


def _write_csv(path: Path, schema: str, header: list, rows: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# schema: {schema} v1", ",".join(header)]
    for row in rows:
        lines.append(",".join(_sig(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(
    subcommand: str, params: dict, seed: int | None, outputs: list[Path]
) -> Path:
    manifest = {
        "schema": "becount-manifest-1",
        "version": __version__,
        "subcommand": subcommand,
        "params": params,
        "seed": seed,
        "outputs": [
            {"path": str(p), "sha256": _sha256(p)} for p in outputs
        ],
    }
    path = outputs[0].with_name(outputs[0].name + ".manifest.json")
    _write_json(path, manifest)
    return path


def _mc_tolerance(closed: np.ndarray, shots: int) -> np.ndarray:
    """Per-bin comparison scale for a Monte Carlo histogram of given size."""
    return np.sqrt(closed * (1.0 - closed) / shots) + 1.0 / shots


# ----------------------------------------------------------------- params

def run_params(args: dict) -> int:
    cfg_fields = {
        "atom_mass",
        "trap_frequency",
        "photon_wavenumber",
        "rabi_frequency",
        "detuning",
        "atom_number",
        "transition_frequency",
    }
    values = {}
    if args.get("config"):
        loaded = json.loads(Path(args["config"]).read_text())
        unknown = set(loaded) - cfg_fields - {"tau"}
        if unknown:
            print(f"error: unknown config fields {sorted(unknown)}", file=sys.stderr)
            return EXIT_USAGE
        values.update(loaded)
    for key in cfg_fields | {"tau"}:
        if args.get(key) is not None:
            values[key] = args[key]
    missing = (cfg_fields - {"transition_frequency"} | {"tau"}) - set(values)
    if missing:
        print(f"error: missing parameters {sorted(missing)}", file=sys.stderr)
        return EXIT_USAGE

    tau = values.pop("tau")
    try:
        cfg = PhysicalConfig(**values)
        scales = derive_trap_scales(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    S = saturation(
        cfg.atom_number, 1, cfg.rabi_frequency, scales.escape_rate, cfg.detuning
    )
    doc = {
        "schema": "becount.params v1",
        "inputs": {**values, "tau": tau},
        "ground_spread": scales.ground_spread,
        "lamb_dicke": scales.lamb_dicke,
        "group_velocity": scales.group_velocity,
        "escape_rate": scales.escape_rate,
        "saturation": S,
    }
    if cfg.transition_frequency is not None:
        doc["resonance_wavenumber"] = resonance_wavenumber(cfg)

    regime_violation = S >= 1.0
    if regime_violation:
        doc.update({"q": None, "tau0": None, "escape_probability": None})
        print(
            f"warning: saturation S = {S:.6g} >= 1 leaves the over-damped "
            "regime; q, tau0 and escape_probability are undefined",
            file=sys.stderr,
        )
    else:
        red = reduced_params(S, scales.escape_rate, tau)
        doc.update(
            {"q": red.q, "tau0": red.tau0, "escape_probability": red.p}
        )

    out = _resolve_out(args.get("out"), "params.json")
    _write_json(out, doc)
    _write_manifest("params", {**values, "tau": tau, "out": str(out)}, None, [out])
    print(out)
    return EXIT_REGIME if regime_violation else EXIT_OK


# ------------------------------------------------------------- efficiency

def run_efficiency(args: dict) -> int:
    q_grid = np.geomspace(args["q_min"], args["q_max"], args["grid"])
    rows = []
    for q in q_grid:
        for n in args["n"]:
            eta = efficiency(q, args["p"], n)
            rows.append((q, n, eta, eta / args["p"] if args["p"] > 0 else math.nan))
    out = _resolve_out(args.get("out"), "efficiency.csv")
    _write_csv(out, "becount.efficiency", ["q", "n", "eta_D", "eta_D_over_p"], rows)
    _write_manifest("efficiency", {**args, "out": str(out)}, None, [out])
    print(out)
    return EXIT_OK


# ----------------------------------------------------------------- counts

def run_counts(args: dict) -> int:
    q, p, n = args["q"], args["p"], args["n"]
    closed = count_distribution(q, p, n)
    a = np.arange(n + 1)
    eta = float(a @ closed.probabilities) / n if n >= 1 else 0.0
    reference = binomial_reference(eta, n)

    header = ["a", "P_closed"]
    columns = [a, closed.probabilities]
    disagreement = []

    mc = None
    if args.get("shots"):
        mc = simulate_counts(n, q, p, args["shots"], args["seed"])
        header += ["P_mc", "mc_stderr"]
        columns += [mc.probabilities, mc.stderr]
        scale = _mc_tolerance(closed.probabilities, args["shots"])
        worst = np.max(
            np.abs(mc.probabilities - closed.probabilities) / scale
        )
        if worst > args["sigma"]:
            disagreement.append(
                f"Monte Carlo deviates {worst:.2f} standard errors "
                f"(> {args['sigma']:g}) from the closed form"
            )

    if args.get("exact_A"):
        code = _append_exact_column(args, q, p, n, closed, header, columns,
                                    disagreement)
        if code:
            return code

    header += ["P_binomial", "deviation"]
    columns += [
        reference.probabilities,
        closed.probabilities - reference.probabilities,
    ]

    out = _resolve_out(args.get("out"), "counts.csv")
    rows = list(zip(*columns))
    _write_csv(out, "becount.counts", header, rows)
    _write_manifest("counts", {**args, "out": str(out)}, args.get("seed"), [out])
    print(out)
    for message in disagreement:
        print(f"cross-check failed: {message}", file=sys.stderr)
    return EXIT_DISAGREEMENT if disagreement else EXIT_OK


def _append_exact_column(
    args, q, p, n, closed, header, columns, disagreement
) -> int:
    """Add the sector-solver column to a counts table; 0 on success."""
    A = args["exact_A"]
    omega, gamma, delta = args["omega"], args["gamma"], args.get("delta", 0.0)
    if omega is None or gamma is None:
        print("error: --exact-A requires --omega and --gamma", file=sys.stderr)
        return EXIT_USAGE
    if n > A:
        print(f"error: n = {n} exceeds --exact-A = {A}", file=sys.stderr)
        return EXIT_USAGE
    S = saturation(A, 1, omega, gamma, delta)
    try:
        red = reduced_params(S, gamma, 0.0)
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    if math.isinf(red.q):
        print("error: zero saturation cannot be compared exactly", file=sys.stderr)
        return EXIT_REGIME
    if abs(red.q - q) > 1e-6 * q:
        print(
            f"note: the supplied physical parameters imply q = {red.q:.6g}, "
            f"compared against the closed form at q = {q:.6g}",
            file=sys.stderr,
        )
    tau = -red.tau0 * math.log1p(-p)
    exact = exact_count_statistics(
        A, n, tau, omega, delta, gamma, solver_tol=args["solver_tol"]
    )
    header.append("P_exact")
    columns.append(exact.probabilities)
    tol = args.get("exact_tol")
    if tol is None:
        tol = 0.01 + n / A
    tv = 0.5 * float(np.abs(exact.probabilities - closed.probabilities).sum())
    if tv > tol:
        disagreement.append(
            f"sector solver differs from the closed form by total variation "
            f"{tv:.4g} (> {tol:.4g})"
        )
    return 0


# -------------------------------------------------------------------- mix

def run_mix(args: dict) -> int:
    source = args["source"]
    if source == "fock":
        if args.get("photon_n") is None:
            print("error: --source fock requires --photon-n", file=sys.stderr)
            return EXIT_USAGE
        photons = PhotonStatistics.fock(args["photon_n"])
    else:
        if args.get("mean") is None:
            print(f"error: --source {source} requires --mean", file=sys.stderr)
            return EXIT_USAGE
        maker = (
            PhotonStatistics.coherent if source == "coherent" else PhotonStatistics.thermal
        )
        photons = maker(args["mean"], tail_bound=args["tail_bound"])

    response = detector_response(args["q"], args["p"], photons.n_max)
    mixed = mix(photons, response)
    photon_mean = photons.mean()
    if photon_mean > 0:
        eta = float(np.arange(len(mixed)) @ mixed) / photon_mean
    else:
        eta = args["p"]
    mandel = mandel_counts(photons, eta)
    rows = list(
        zip(np.arange(len(mixed)), mixed, mandel, mixed - mandel)
    )
    out = _resolve_out(args.get("out"), "mix.csv")
    _write_csv(out, "becount.mix", ["a", "P_a", "P_a_mandel", "deviation"], rows)
    _write_manifest("mix", {**args, "out": str(out)}, None, [out])
    print(out)
    return EXIT_OK


# ------------------------------------------------------------------ exact

def run_exact(args: dict) -> int:
    A, n = args["A"], args["n"]
    if n > A:
        print(f"error: n = {n} exceeds A = {A}", file=sys.stderr)
        return EXIT_USAGE
    exact = exact_count_statistics(
        A,
        n,
        args["tau"],
        args["omega"],
        args["delta"],
        args["gamma"],
        solver_tol=args["solver_tol"],
        zero_order=args["zero_order"],
    )
    a = np.arange(n + 1)
    header = ["a", "P_exact"]
    columns = [a, exact.probabilities]
    disagreement = []

    if args["compare_closed"]:
        if args["delta"] != 0.0:
            print(
                "error: the closed form is resonant only; --compare-closed "
                "requires --delta 0",
                file=sys.stderr,
            )
            return EXIT_REGIME
        S = saturation(A, 1, args["omega"], args["gamma"], 0.0)
        try:
            red = reduced_params(S, args["gamma"], args["tau"])
        except RegimeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_REGIME
        closed = count_distribution(red.q, red.p, n)
        header += ["P_closed", "deviation"]
        columns += [closed.probabilities, exact.probabilities - closed.probabilities]
        tol = args.get("tol")
        if tol is None:
            tol = 0.01 + n / A
        tv = 0.5 * float(np.abs(exact.probabilities - closed.probabilities).sum())
        if tv > tol:
            disagreement.append(
                f"sector solver differs from the closed form by total "
                f"variation {tv:.4g} (> {tol:.4g})"
            )

    out = _resolve_out(args.get("out"), "exact.csv")
    _write_csv(out, "becount.exact", header, list(zip(*columns)))
    _write_manifest("exact", {**args, "out": str(out)}, None, [out])
    print(out)
    for message in disagreement:
        print(f"cross-check failed: {message}", file=sys.stderr)
    return EXIT_DISAGREEMENT if disagreement else EXIT_OK


# --------------------------------------------------------------------- mc

def run_mc(args: dict) -> int:
    n, q, p = args["n"], args["q"], args["p"]
    mc = simulate_counts(n, q, p, args["shots"], args["seed"])
    a = np.arange(n + 1)
    header = ["a", "P_mc", "mc_stderr"]
    columns = [a, mc.probabilities, mc.stderr]
    disagreement = []

    if args["compare_closed"]:
        closed = count_distribution(q, p, n)
        header += ["P_closed", "deviation"]
        columns += [closed.probabilities, mc.probabilities - closed.probabilities]
        scale = _mc_tolerance(closed.probabilities, args["shots"])
        worst = np.max(np.abs(mc.probabilities - closed.probabilities) / scale)
        if worst > args["sigma"]:
            disagreement.append(
                f"Monte Carlo deviates {worst:.2f} standard errors "
                f"(> {args['sigma']:g}) from the closed form"
            )

    out = _resolve_out(args.get("out"), "mc.csv")
    _write_csv(out, "becount.mc", header, list(zip(*columns)))
    _write_manifest("mc", {**args, "out": str(out)}, args["seed"], [out])
    print(out)
    for message in disagreement:
        print(f"cross-check failed: {message}", file=sys.stderr)
    return EXIT_DISAGREEMENT if disagreement else EXIT_OK


# ------------------------------------------------------------------ replay

_RUNNERS = {
    "params": run_params,
    "efficiency": run_efficiency,
    "counts": run_counts,
    "mix": run_mix,
    "exact": run_exact,
    "mc": run_mc,
}


def run_replay(manifest_path: str) -> int:
    manifest = json.loads(Path(manifest_path).read_text())
    if manifest.get("schema") != "becount-manifest-1":
        print(f"error: not a manifest: {manifest_path}", file=sys.stderr)
        return EXIT_USAGE
    subcommand = manifest["subcommand"]
    code = _RUNNERS[subcommand](dict(manifest["params"]))
    if code not in (EXIT_OK, EXIT_DISAGREEMENT, EXIT_REGIME):
        return code
    mismatched = []
    for entry in manifest["outputs"]:
        path = Path(entry["path"])
        if not path.exists() or _sha256(path) != entry["sha256"]:
            mismatched.append(str(path))
    if mismatched:
        print(
            f"replay failed to reproduce: {', '.join(mismatched)}", file=sys.stderr
        )
        return EXIT_DISAGREEMENT
    print(f"replay reproduced {len(manifest['outputs'])} output(s) byte-identically")
    return code


# ------------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="becount",
        description="Atom-count statistics of a Bose-condensate photodetector.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--replay",
        metavar="MANIFEST",
        help="re-run a recorded computation and verify byte-identical outputs",
    )
    sub = parser.add_subparsers(dest="subcommand")

    sp = sub.add_parser("params", help="derive detector parameters (JSON)")
    sp.add_argument("--config", help="JSON file with PhysicalConfig fields and tau")
    sp.add_argument("--atom-mass", dest="atom_mass", type=_parse_positive)
    sp.add_argument("--trap-frequency", dest="trap_frequency", type=_parse_positive)
    sp.add_argument(
        "--photon-wavenumber", dest="photon_wavenumber", type=_parse_positive
    )
    sp.add_argument("--rabi-frequency", dest="rabi_frequency", type=float)
    sp.add_argument("--detuning", dest="detuning", type=float)
    sp.add_argument("--atom-number", dest="atom_number", type=_parse_positive_int)
    sp.add_argument(
        "--transition-frequency", dest="transition_frequency", type=_parse_positive
    )
    sp.add_argument("--tau", type=_parse_positive)
    sp.add_argument("--out")

    sp = sub.add_parser("efficiency", help="eta_D over a log-spaced q grid (CSV)")
    sp.add_argument("--q-min", dest="q_min", type=_parse_positive, required=True)
    sp.add_argument("--q-max", dest="q_max", type=_parse_positive, required=True)
    sp.add_argument("--grid", type=_parse_positive_int, default=40)
    sp.add_argument("--p", type=_parse_probability, required=True)
    sp.add_argument(
        "--n", type=_parse_positive_int, action="append", required=True,
        help="conditioning photon number; repeatable",
    )
    sp.add_argument("--out")

    sp = sub.add_parser("counts", help="conditional count distribution (CSV)")
    sp.add_argument("--q", type=_parse_q, required=True)
    sp.add_argument("--p", type=_parse_probability, required=True)
    sp.add_argument("--n", type=_parse_positive_int, required=True)
    sp.add_argument("--shots", type=_parse_positive_int,
                    help="add a Monte Carlo column with this many shots")
    sp.add_argument("--seed", type=_parse_nonneg_int, default=0)
    sp.add_argument("--sigma", type=_parse_positive, default=4.0,
                    help="allowed Monte Carlo deviation in standard errors")
    sp.add_argument("--exact-A", dest="exact_A", type=_parse_positive_int,
                    help="add an exact-solver column computed at this atom number")
    sp.add_argument("--omega", type=_parse_positive)
    sp.add_argument("--gamma", type=_parse_positive)
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--solver-tol", dest="solver_tol", type=_parse_positive,
                    default=1e-10)
    sp.add_argument("--exact-tol", dest="exact_tol", type=_parse_positive,
                    help="total-variation tolerance (default 0.01 + n/A)")
    sp.add_argument("--out")

    sp = sub.add_parser("mix", help="count statistics of a photon mixture (CSV)")
    sp.add_argument("--source", choices=["fock", "coherent", "thermal"],
                    required=True)
    sp.add_argument("--photon-n", dest="photon_n", type=_parse_nonneg_int)
    sp.add_argument("--mean", type=_parse_positive)
    sp.add_argument("--tail-bound", dest="tail_bound", type=_parse_positive,
                    default=1e-12)
    sp.add_argument("--q", type=_parse_q, required=True)
    sp.add_argument("--p", type=_parse_probability, required=True)
    sp.add_argument("--out")

    sp = sub.add_parser("exact", help="sector-basis exact solver (CSV)")
    sp.add_argument("--A", type=_parse_positive_int, required=True)
    sp.add_argument("--n", type=_parse_nonneg_int, required=True)
    sp.add_argument("--tau", type=_parse_nonneg, required=True)
    sp.add_argument("--omega", type=_parse_positive, required=True)
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--gamma", type=_parse_positive, required=True)
    sp.add_argument("--solver-tol", dest="solver_tol", type=_parse_positive,
                    default=1e-10)
    sp.add_argument("--zero-order", dest="zero_order", action="store_true",
                    help="use the leading large-A Hamiltonian")
    sp.add_argument("--compare-closed", dest="compare_closed", action="store_true")
    sp.add_argument("--tol", type=_parse_positive,
                    help="total-variation tolerance (default 0.01 + n/A)")
    sp.add_argument("--out")

    sp = sub.add_parser("mc", help="Monte Carlo sampler (CSV)")
    sp.add_argument("--n", type=_parse_nonneg_int, required=True)
    sp.add_argument("--q", type=_parse_q, required=True)
    sp.add_argument("--p", type=_parse_probability, required=True)
    sp.add_argument("--shots", type=_parse_positive_int, required=True)
    sp.add_argument("--seed", type=_parse_nonneg_int, default=0)
    sp.add_argument("--compare-closed", dest="compare_closed", action="store_true")
    sp.add_argument("--sigma", type=_parse_positive, default=4.0)
    sp.add_argument("--out")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.replay:
        if args.subcommand:
            parser.error("--replay cannot be combined with a subcommand")
        return run_replay(args.replay)
    if not args.subcommand:
        parser.error("a subcommand is required (or --replay)")
    params = {
        key: value
        for key, value in vars(args).items()
        if key not in ("subcommand", "replay")
    }
    try:
        return _RUNNERS[args.subcommand](params)
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME


if __name__ == "__main__":
    sys.exit(main())
