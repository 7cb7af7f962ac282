"""
Command-line entry point: every experiment is one subcommand, fully
determined by its flags and the master seed.

Exit codes: 0 on a completed run (scientific negatives included), 2 for bad
input, 3 when a size guard refuses the run, 4 for file errors.
"""

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from games.observer_game import ObserverGame
from games.xor_ir_game import XorIrGame
from settings.tolerances import Defaults
from src import constructions, discrepancy, dynamics, grid_search, reports, sampling, verify
from src.strategies import GuardError, MixedProfile, SpecError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GUARD = 3
EXIT_IO = 4


@dataclass
class ExperimentSpec:
    """Everything a run depends on."""

    command: str
    params: Dict = field(default_factory=dict)
    seed: int = 0
    out: Optional[str] = None
    threads: int = 1
    json: bool = False
    timing: bool = False

    @classmethod
    def from_namespace(cls, namespace: argparse.Namespace) -> "ExperimentSpec":
        values = dict(vars(namespace))
        common = {key: values.pop(key) for key in ("command", "seed", "out", "threads", "json", "timing")}
        values.pop("log_level", None)
        return cls(params=values, **common)


@dataclass
class RunOutput:
    report: Dict
    csv: Optional[str] = None
    extra_files: List[Tuple[str, str]] = field(default_factory=list)


# Helpers


def _profile_or_equilibrium(game, path: Optional[str]) -> MixedProfile:
    if path:
        return reports.load_profile(path)
    profile = game.exact_equilibrium()
    if profile is None:
        raise SpecError(f"The {game.family} family declares no exact equilibrium; pass --profile")
    return profile


def _audited(game, spec: ExperimentSpec) -> Optional[List[int]]:
    if isinstance(game, ObserverGame):
        return game.audit_players(spec.params.get("observers") or Defaults.OBSERVER_AUDIT_SAMPLES, spec.seed)
    return None


# Commands


def run_gen(spec: ExperimentSpec) -> RunOutput:
    p = spec.params
    family = p["family"]
    if family == "matrix":
        matrix = constructions.random_regular_matrix(p["rows"], p["cols"] or p["rows"], p["t"], spec.seed)
        report = {"anchor": "balanced-matrix", "matrix": matrix.tolist(),
                  "alpha": constructions.balance_ratio(matrix)}
        return RunOutput(report, extra_files=[("matrix", reports.format_matrix(matrix))])
    if family == "random_explicit":
        descriptor = {"family": family, "n": p["n"], "m": p["m"], "seed": spec.seed}
    elif family == "observer":
        descriptor = {"family": family, "b": p["b"], "w": p["w"]}
    elif family == "majority_mp":
        descriptor = {"family": family, "rows": p["rows"], "cols": p["cols"] or p["rows"], "t": p["t"],
                      "seed": spec.seed}
    elif family == "xor":
        descriptor = {"family": family, "kappa": p["kappa"]}
    else:
        descriptor = {"family": family}
    game = constructions.game_from_descriptor(descriptor)
    return RunOutput({"anchor": "game-construction", "descriptor": descriptor, "n": game.n, "m": game.m})


def run_verify(spec: ExperimentSpec) -> RunOutput:
    p = spec.params
    game = reports.load_game(p["game"], spec.seed)
    concept = p["concept"]
    players = _audited(game, spec)
    if concept in ("ce", "cce") or (concept == "ir" and p.get("dist")):
        if not p.get("dist"):
            raise SpecError(f"--dist is required for {concept}")
        dist = reports.load_distribution(p["dist"])
        if concept == "ir":
            return RunOutput({"anchor": "individual-rationality", **verify.check_ir(game, dist, p["epsilon"]).to_dict()})
        check = verify.check_weak_ce if concept == "ce" else verify.check_cce
        ok, report = check(game, dist, p["epsilon"], p["delta"], players)
        return RunOutput({"anchor": f"weak-{concept}", "satisfied": ok, **report.to_dict()}, report.to_csv())
    profile = _profile_or_equilibrium(game, p.get("profile"))
    if concept == "ir":
        return RunOutput({"anchor": "individual-rationality",
                          **verify.check_ir(game, profile, p["epsilon"], players).to_dict()})
    if concept == "well_supported":
        ok, report = verify.check_well_supported_nash(game, profile, p["epsilon"], players)
    else:
        ok, report = verify.check_weak_nash(game, profile, p["epsilon"], p["delta"], players,
                                            p["evaluator"], p["samples"], spec.seed)
    return RunOutput({"anchor": f"weak-{concept}", "satisfied": ok, **report.to_dict()}, report.to_csv())


def run_sample(spec: ExperimentSpec) -> RunOutput:
    p = spec.params
    game = reports.load_game(p["game"], spec.seed)
    if p["correlated"]:
        dist = reports.load_distribution(p["dist"]) if p.get("dist") else sampling.product_distribution(
            _profile_or_equilibrium(game, p.get("profile")))
        outcome = sampling.weak_ce_by_sampling(game, dist, p["epsilon"], p["delta"], spec.seed, p["attempts"], p["k"])
        anchor = "weak-ce-sampling"
    else:
        profile = _profile_or_equilibrium(game, p.get("profile"))
        outcome = sampling.weak_nash_by_sampling(game, profile, p["epsilon"], p["delta"], spec.seed, p["attempts"],
                                                 _audited(game, spec), p["k"])
        anchor = "weak-nash-sampling"
    return RunOutput({"anchor": anchor, **outcome.to_dict()}, outcome.to_csv())


def run_gridsearch(spec: ExperimentSpec) -> RunOutput:
    p = spec.params
    game = reports.load_game(p["game"], spec.seed)
    result = grid_search.exhaustive_weak_nash(game, p["k"], p["epsilon"], p["delta"], p["budget"], spec.threads)
    report = result.to_dict()
    report["bound"] = grid_search.polynomial_grid_bound(game.n, game.m, p["k"]).to_dict()
    return RunOutput(report)


def run_cube(spec: ExperimentSpec) -> RunOutput:
    p = spec.params
    game = reports.load_game(p["game"], spec.seed)
    x = _profile_or_equilibrium(game, p.get("profile"))
    result = grid_search.cube_search(game, x, p["k"], p["epsilon"], p["mode"], p["samples"], spec.seed, spec.threads)
    return RunOutput(result.to_dict())


def run_disc(spec: ExperimentSpec) -> RunOutput:
    p = spec.params
    matrix = reports.read_matrix(p["matrix"])
    if p["method"] == "exact":
        result = discrepancy.disc_exact(matrix, spec.threads)
    else:
        result = discrepancy.beck_fiala_color(matrix)
    return RunOutput({"anchor": "discrepancy", **result.to_dict()})


def run_equiv(spec: ExperimentSpec) -> RunOutput:
    p = spec.params
    matrix = reports.read_matrix(p["matrix"])
    direction = {"fwd": "forward", "rev": "reverse"}[p["direction"]]
    result = discrepancy.equivalence_report(matrix, p["alpha"], p["k"], direction, p["budget"], p["samples"],
                                            spec.seed, spec.threads)
    return RunOutput(result.to_dict())


def _audit_traces(game: XorIrGame, traces) -> List[Dict]:
    audits = []
    for trace in traces:
        audit = dynamics.support_lower_bound_audit(game, trace)
        audits.append({"seed": trace.seed, **audit.to_dict()})
    return audits


def run_dynamics(spec: ExperimentSpec) -> RunOutput:
    p = spec.params
    game = reports.load_game(p["game"], spec.seed)
    seeds = dynamics.trial_seeds(spec.seed, p["trials"])
    traces = dynamics.run_trials(game, p["T"], seeds, spec.threads)
    times = [dynamics.HittingTime(i, s, trace.hitting_time(p["epsilon"]), p["T"])
             for i, (s, trace) in enumerate(zip(seeds, traces))]
    report = {
        "anchor": "regret-matching-dynamics",
        "epsilon": p["epsilon"],
        "T": p["T"],
        "hitting_times": [h.t_hit for h in times],
        "final_regrets": [float(trace.max_internal_regret[-1]) for trace in traces],
    }
    if isinstance(game, XorIrGame):
        report["audits"] = _audit_traces(game, traces)
    return RunOutput(report, dynamics.hitting_times_csv(times))


def run_audit(spec: ExperimentSpec) -> RunOutput:
    p = spec.params
    game = reports.load_game(p["game"], spec.seed)
    if not isinstance(game, XorIrGame):
        raise SpecError("audit runs on XOR games")
    traces = dynamics.run_trials(game, p["T"], dynamics.trial_seeds(spec.seed, p["trials"]), spec.threads)
    return RunOutput({
        "anchor": "support-lower-bound-audit",
        "flip_invariant": game.check_flip_invariant(p["flips"], spec.seed),
        "audits": _audit_traces(game, traces),
    })


COMMANDS: Dict[str, Callable[[ExperimentSpec], RunOutput]] = {
    "gen": run_gen,
    "verify": run_verify,
    "sample": run_sample,
    "gridsearch": run_gridsearch,
    "cube": run_cube,
    "disc": run_disc,
    "equiv": run_equiv,
    "dynamics": run_dynamics,
    "audit": run_audit,
}


# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out", help="report path; CSV and extra files are written next to it")
    common.add_argument("--threads", type=int, default=1, help="worker processes for parallel scans")
    common.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    common.add_argument("--timing", action="store_true", help="add the elapsed time to the report")
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = argparse.ArgumentParser(prog="kgrid", description="k-uniform equilibrium experiments")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[common], help="write a game descriptor or a balanced matrix")
    gen.add_argument("family", choices=["random_explicit", "matching_pennies", "observer", "majority_mp", "xor",
                                        "matrix"])
    gen.add_argument("--n", type=int, default=3)
    gen.add_argument("--m", type=int, default=2)
    gen.add_argument("--b", type=int, default=16)
    gen.add_argument("--w", type=float, default=Defaults.OBSERVER_WIDTH)
    gen.add_argument("--rows", type=int, default=8)
    gen.add_argument("--cols", type=int)
    gen.add_argument("--t", type=int, default=4)
    gen.add_argument("--kappa", type=int, default=3)

    check = commands.add_parser("verify", parents=[common], help="check a solution concept")
    check.add_argument("--game", required=True)
    check.add_argument("--profile")
    check.add_argument("--dist")
    check.add_argument("--concept", default="nash", choices=["nash", "well_supported", "ce", "cce", "ir"])
    check.add_argument("--epsilon", type=float, required=True)
    check.add_argument("--delta", type=float, default=0.0)
    check.add_argument("--evaluator", default="exact", choices=["exact", "mc"])
    check.add_argument("--samples", type=int, default=10 ** 4)
    check.add_argument("--observers", type=int)

    sample = commands.add_parser("sample", parents=[common], help="sample k-uniform equilibria")
    sample.add_argument("--game", required=True)
    sample.add_argument("--profile")
    sample.add_argument("--dist")
    sample.add_argument("--correlated", action="store_true")
    sample.add_argument("--epsilon", type=float, required=True)
    sample.add_argument("--delta", type=float, required=True)
    sample.add_argument("--attempts", type=int, default=Defaults.MAX_ATTEMPTS)
    sample.add_argument("--k", type=int)
    sample.add_argument("--observers", type=int)

    grid = commands.add_parser("gridsearch", parents=[common], help="exhaustive k-uniform search")
    grid.add_argument("--game", required=True)
    grid.add_argument("--k", type=int, required=True)
    grid.add_argument("--epsilon", type=float, required=True)
    grid.add_argument("--delta", type=float, default=0.0)
    grid.add_argument("--budget", type=int, default=Defaults.SEARCH_BUDGET)

    cube = commands.add_parser("cube", parents=[common], help="search the 1/k cube around a profile")
    cube.add_argument("--game", required=True)
    cube.add_argument("--profile")
    cube.add_argument("--k", type=int, required=True)
    cube.add_argument("--epsilon", type=float, required=True)
    cube.add_argument("--mode", default="exhaustive", choices=["exhaustive", "sampled"])
    cube.add_argument("--samples", type=int, default=100)

    disc = commands.add_parser("disc", parents=[common], help="discrepancy of a 0/1 matrix")
    disc.add_argument("--matrix", required=True)
    disc.add_argument("--method", default="exact", choices=["exact", "bf"])

    equiv = commands.add_parser("equiv", parents=[common], help="coloring / equilibrium correspondence")
    equiv.add_argument("--matrix", required=True)
    equiv.add_argument("--direction", required=True, choices=["fwd", "rev"])
    equiv.add_argument("--alpha", type=float)
    equiv.add_argument("--k", type=int)
    equiv.add_argument("--budget", type=int, default=2 ** 16)
    equiv.add_argument("--samples", type=int, default=Defaults.REVERSE_SAMPLES)

    dyn = commands.add_parser("dynamics", parents=[common], help="regret matching and hitting times")
    dyn.add_argument("--game", required=True)
    dyn.add_argument("--T", type=int, required=True)
    dyn.add_argument("--epsilon", type=float, required=True)
    dyn.add_argument("--trials", type=int, default=1)

    audit = commands.add_parser("audit", parents=[common], help="support audit on the XOR game")
    audit.add_argument("--game", required=True)
    audit.add_argument("--T", type=int, default=100)
    audit.add_argument("--trials", type=int, default=1)
    audit.add_argument("--flips", type=int, default=Defaults.FLIP_CHECKS)
    return parser


# Dispatch


def _write_outputs(spec: ExperimentSpec, output: RunOutput):
    text = reports.dumps(output.report)
    if spec.out:
        out = Path(spec.out)
        if spec.command == "gen" and not output.extra_files:
            reports.write_json(out, output.report["descriptor"])
        else:
            reports.write_text(out, text)
        if output.csv is not None:
            reports.write_text(out.with_suffix(".csv"), output.csv)
        for suffix, content in output.extra_files:
            reports.write_text(out.with_suffix(f".{suffix}"), content)
    if spec.json or not spec.out:
        sys.stdout.write(text)


def dispatch(spec: ExperimentSpec) -> int:
    started = time.perf_counter()
    try:
        output = COMMANDS[spec.command](spec)
        elapsed = time.perf_counter() - started
        logger.info("%s finished in %.3fs", spec.command, elapsed)
        output.report.setdefault("seed", spec.seed)
        if spec.timing:
            output.report["elapsed"] = elapsed
        _write_outputs(spec, output)
        return EXIT_OK
    except GuardError as error:
        logger.error("Guard: %s", error)
        return EXIT_GUARD
    except OSError as error:
        logger.error("I/O: %s", error)
        return EXIT_IO
    except ValueError as error:
        logger.error("Input: %s", error)
        return EXIT_INPUT


def main(argv: Optional[Sequence[str]] = None) -> int:
    namespace = build_parser().parse_args(argv)
    logging.basicConfig(level=namespace.log_level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    return dispatch(ExperimentSpec.from_namespace(namespace))
