import sys
from pathlib import Path

import pandas as pd
from dotenv import load_dotenv

import src.logger as Logger
from src.config import load_settings
from src.errors import GoalRecognitionError
from src.evaluation import load_dataset, parse_hypotheses, parse_observations, run_experiment, write_table
from src.grounder import dump_problem, ground
from src.gridworld import HOUSE, generate_gridworld
from src.inference import SCORE_COLUMNS, run_online, snapshots_frame, start_session
from src.landmarks import dump_landmarks
from src.models import DEFAULT_LAMBDA_GRID, ExperimentConfig, HybridConfig
from src.nbm import load_model, save_model, train
from src.parser import parse_domain_and_problem
from src.planning import Plan, validate_plan
from src.recognizer import build_landmark_model
from src.relaxed_graph import build_rpg, dump_rpg
import src.synthetic as Synthetic

load_dotenv()

SUITES = {
    "junction": Synthetic.junction_suite,
    "init-bias": lambda per_goal, seed: Synthetic.init_bias_suite(per_goal),
    "habit": Synthetic.habit_suite,
}


def _read(path):
    return Path(path).read_text(encoding="utf-8")


def _load_problem(args):
    return ground(parse_domain_and_problem(_read(args.domain), _read(args.problem)))


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
        Logger.log(f"Wrote {out}")
    else:
        print(text, end="")


def _hybrid_config(args, n=None):
    return HybridConfig(
        method=args.method,
        heuristic=args.heuristic,
        a=args.a, b=args.b, c=args.c,
        n=n if n is not None else args.n,
        use_init_landmarks=args.use_init_landmarks,
    )


def cmd_extract(args):
    problem = _load_problem(args)
    goals = parse_hypotheses(_read(args.hypotheses), args.hypotheses)
    model = build_landmark_model(problem, goals, use_init_landmarks=True)
    for name, reason in model.dropped.items():
        Logger.log(f"[!] {name} has no landmarks: {reason}", Logger.WARNING)
    _emit(dump_landmarks(model.landmarks), args.out)


def cmd_recognize(args):
    problem = _load_problem(args)
    goals = parse_hypotheses(_read(args.hypotheses), args.hypotheses)
    observations = parse_observations(problem, _read(args.observations), args.observations)
    nbm = load_model(args.nbm) if args.nbm else None
    config = _hybrid_config(args)
    session = start_session(problem, goals, nbm, config)
    Logger.log(f"Landmarks extracted once in {session.extraction_seconds:.3f}s")

    score_rows = session.score_rows()
    snapshots = [session.snapshot()]
    for snap in run_online(session, observations):
        snapshots.append(snap)
        score_rows += session.score_rows()
        Logger.log(f"t={snap.t}: most probable {' '.join(sorted(snap.most_probable))}", Logger.DEBUG)

    frame = snapshots_frame(snapshots)
    frame.to_csv(args.out or sys.stdout, index=False)
    if args.out:
        Logger.log(f"Wrote {args.out}")
    if args.scores_out:
        pd.DataFrame(score_rows, columns=SCORE_COLUMNS).to_csv(args.scores_out, index=False)
        Logger.log(f"Wrote {args.scores_out}")
    last = snapshots[-1]
    Logger.log(f"Most probable after {last.t} observations: {' '.join(sorted(last.most_probable))}")


def cmd_train_nbm(args):
    dataset = load_dataset(args.manifest, strict=not args.lenient)
    sequences = [(p.observations, p.true_goal) for p in dataset]
    model = train(sequences, dataset.goal_names, args.alpha)
    save_model(model, args.out)
    Logger.log(f"Trained NBM on {len(sequences)} sequences over {len(model.vocabulary)} facts -> {args.out}")


def cmd_evaluate(args):
    dataset = load_dataset(args.manifest, strict=not args.lenient)
    grid = [float(v) for v in args.lambda_grid.split(",")] if args.lambda_grid else list(DEFAULT_LAMBDA_GRID)
    results = []
    for n in args.n_values:
        config = ExperimentConfig(hybrid=_hybrid_config(args, n), alpha=args.alpha, lambda_grid=grid)
        result = run_experiment(dataset, args.method, n, args.seed, config)
        results.append(result)
        Logger.log(f"{args.method} n={n}: accuracy at lambda={grid[-1]} is {result.table[-1].accuracy:.3f}")
    write_table(results, args.out or sys.stdout)
    if args.out:
        Logger.log(f"Wrote {args.out}")


def cmd_gen_grid(args):
    if args.suite == "house":
        world = generate_gridworld(HOUSE, name="house")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "domain.pddl").write_text(world.domain_text, encoding="utf-8")
        (out / "problem.pddl").write_text(world.problem_text, encoding="utf-8")
        (out / "goals.hyps").write_text("".join(f"{g} (is-at {g})\n" for g in world.spec.goals), encoding="utf-8")
        for goal, landmarks in world.oracle.items():
            Logger.log(f"Oracle landmarks for {goal}: {' '.join(str(f) for f in sorted(landmarks))}")
        return
    entries = SUITES[args.suite](args.per_goal, args.seed)
    manifest = Synthetic.write_suite(entries, args.out)
    Logger.log(f"Wrote {len(entries)} sequences, manifest {manifest}")


def cmd_validate(args):
    problem = _load_problem(args)
    plan = Plan(parse_observations(problem, _read(args.plan), args.plan))
    result = validate_plan(problem, plan)
    if result.valid:
        Logger.log(f"Plan is valid, cost {result.cost}")
        return 0
    if result.failed_index < len(plan):
        Logger.log(f"[!] Step {result.failed_index + 1} {plan.steps[result.failed_index]} is not applicable",
                   Logger.ERROR)
    else:
        Logger.log("[!] Plan executes but does not reach the goal", Logger.ERROR)
    return 1


def cmd_dump(args):
    problem = _load_problem(args)
    text = dump_problem(problem)
    if args.rpg:
        text += dump_rpg(build_rpg(problem))
    _emit(text, args.out)


def build_parser():
    import argparse

    settings = load_settings()
    parser = argparse.ArgumentParser(description="Landmark-based hybrid goal recognition")
    parser.add_argument("--verbosity", type=int, default=settings.verbosity,
                        help="Verbosity level (0=errors, 1=normal, 2=warnings, 3=debug)")
    commands = parser.add_subparsers(dest="command", required=True)

    def problem_args(p):
        p.add_argument("--domain", required=True, help="PDDL domain file")
        p.add_argument("--problem", required=True, help="PDDL problem file")

    def method_args(p):
        p.add_argument("--method", choices=["plr", "nbm", "hybrid"], default="hybrid")
        p.add_argument("--heuristic", choices=["completion", "completion-subgoal", "uniqueness"],
                       default="completion")
        p.add_argument("--use-init-landmarks", action="store_true",
                       help="Count initial-state landmarks (off by default)")
        p.add_argument("--a", type=float, default=0.7, help="Asymptote of the NBM weight")
        p.add_argument("--b", type=float, default=0.45, help="Steepness of the NBM weight")
        p.add_argument("--c", type=float, default=11.5, help="Midpoint of the NBM weight")

    p = commands.add_parser("extract", help="Dump the landmarks of every goal hypothesis")
    problem_args(p)
    p.add_argument("--hypotheses", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = commands.add_parser("recognize", help="Run one online recognition session")
    problem_args(p)
    method_args(p)
    p.add_argument("--hypotheses", required=True)
    p.add_argument("--observations", required=True)
    p.add_argument("--nbm", help="Model file written by train-nbm")
    p.add_argument("--n", type=int, default=0, help="Training-set size of the NBM")
    p.add_argument("--out", help="Snapshot CSV")
    p.add_argument("--scores-out", help="Per-step landmark score CSV")
    p.set_defaults(func=cmd_recognize)

    p = commands.add_parser("train-nbm", help="Train an NBM on every sequence of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--alpha", type=float, default=settings.alpha)
    p.add_argument("--lenient", action="store_true", help="Skip bad manifest entries instead of failing")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_nbm)

    p = commands.add_parser("evaluate", help="Cross-validated accuracy over the lambda grid")
    method_args(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--n", dest="n_values", type=int, nargs="+", default=[1], help="Training-set sizes")
    p.add_argument("--seed", type=int, default=settings.seed)
    p.add_argument("--lambda-grid", help="Comma-separated fractions, e.g. 0.05,0.5,0.95")
    p.add_argument("--alpha", type=float, default=settings.alpha)
    p.add_argument("--lenient", action="store_true", help="Skip bad manifest entries instead of failing")
    p.add_argument("--out", help="Accuracy CSV")
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser("gen-grid", help="Write a grid-world fixture or synthetic suite")
    p.add_argument("--suite", choices=["house", *SUITES], default="house")
    p.add_argument("--per-goal", type=int, default=4)
    p.add_argument("--seed", type=int, default=settings.seed)
    p.add_argument("--out", required=True, help="Output directory")
    p.set_defaults(func=cmd_gen_grid)

    p = commands.add_parser("validate", help="Validate a plan file against a problem")
    problem_args(p)
    p.add_argument("--plan", required=True, help="One action per line")
    p.set_defaults(func=cmd_validate)

    p = commands.add_parser("dump", help="Canonical grounded-problem dump")
    problem_args(p)
    p.add_argument("--rpg", action="store_true", help="Append the relaxed planning graph layers")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    Logger.setup(args.verbosity)
    try:
        return args.func(args) or 0
    except GoalRecognitionError as e:
        Logger.log(f"[!] Error: {e}", Logger.ERROR)
        return 1


if __name__ == "__main__":
    sys.exit(main())
