"""Command-line interface: load game files, run checks and analyses, and
emit machine-readable reports.

Exit codes: 0 when every requested check/verification passes, 1 on a
principled failure (a condition check fails or sharing is not a best
response), 2 on usage, input, or capacity errors.

Game files are JSON; see the README for the schema.  Numeric report fields
are rendered with 17 significant digits and stable key order, and every
report embeds the tool version, the input digest, and the seed (when
stochastic), so any value in a report can be reproduced from the report
alone.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import __version__, analysis, model, presets
from .errors import ParseError, PPSGameError, ValidationError
from .model import AptitudeMatrix, GameSpec, RewardVector, SAProfile
from .network import build_network, is_linear
from .sim import engine as sim_engine
from .sim.rng import stream_key
from .sim.strategies import DelayDeviation, PPSHerding, PPSSplit, WithholdAll

CHECK_NAMES = (
    "line-ne",
    "line-core",
    "line-stackelberg",
    "dag-ne",
    "dag-sa",
    "dag-stackelberg",
    "dag-core",
)

EXAMPLE_NAMES = ("1.1", "1.2", "4.1")


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"{name} must be an integer, got {raw!r}") from exc


def _state_cap() -> int:
    return _env_int("PPSGAME_STATE_CAP", 1_000_000)


def _assignment_cap() -> int:
    return _env_int("PPSGAME_ASSIGNMENT_CAP", 1_000_000)


def _coalition_limit() -> int:
    return _env_int("PPSGAME_COALITION_LIMIT", 16)


# ---------------------------------------------------------------------------
# game-spec files


def game_spec_from_dict(data: dict, where: str = "<memory>") -> GameSpec:
    if not isinstance(data, dict):
        raise ValidationError(f"{where}: top level must be an object")
    tasks = data.get("tasks")
    if not isinstance(tasks, list) or not tasks:
        raise ValidationError(f"{where}: 'tasks' must be a non-empty list")
    agents = data.get("agents")
    if not isinstance(agents, list) or not agents:
        raise ValidationError(f"{where}: 'agents' must be a non-empty list")

    edges = []
    rewards = {}
    simplicities = {}
    endpoints = set()
    for row in tasks:
        if not isinstance(row, dict) or "id" not in row:
            raise ValidationError(f"{where}: every task needs an 'id'")
        tid = str(row["id"])
        for field in ("from", "to"):
            if field not in row:
                raise ValidationError(f"{where}: task {tid!r} is missing '{field}'")
        if "reward" not in row:
            raise ValidationError(f"{where}: task {tid!r} is missing 'reward'")
        edges.append((tid, str(row["from"]), str(row["to"])))
        endpoints.update((str(row["from"]), str(row["to"])))
        rewards[tid] = float(row["reward"])
        if "simplicity" in row:
            simplicities[tid] = float(row["simplicity"])

    if simplicities and len(simplicities) != len(edges):
        missing = sorted(set(rewards) - set(simplicities))
        raise ValidationError(
            f"{where}: simplicity given for some tasks but missing on {missing}"
        )

    nodes = data.get("nodes")
    if nodes is None:
        nodes = sorted(endpoints)
    else:
        nodes = [str(x) for x in nodes]
        undeclared = endpoints - set(nodes)
        if undeclared:
            raise ValidationError(
                f"{where}: tasks reference undeclared nodes {sorted(undeclared)}"
            )

    abilities = {}
    aptitude_rows = {}
    for row in agents:
        if not isinstance(row, dict) or "id" not in row:
            raise ValidationError(f"{where}: every agent needs an 'id'")
        aid = str(row["id"])
        if aid in abilities or aid in aptitude_rows:
            raise ValidationError(f"{where}: duplicate agent id {aid!r}")
        has_ability = "ability" in row
        has_aptitudes = "aptitudes" in row
        if has_ability and has_aptitudes:
            raise ValidationError(
                f"{where}: agent {aid!r} has both 'ability' and 'aptitudes'"
            )
        if has_ability:
            abilities[aid] = float(row["ability"])
        elif has_aptitudes:
            if not isinstance(row["aptitudes"], dict):
                raise ValidationError(
                    f"{where}: agent {aid!r} 'aptitudes' must map task -> rate"
                )
            aptitude_rows[aid] = {
                str(u): float(x) for u, x in row["aptitudes"].items()
            }
        else:
            raise ValidationError(
                f"{where}: agent {aid!r} needs 'ability' or 'aptitudes'"
            )

    if abilities and aptitude_rows:
        raise ValidationError(
            f"{where}: mix of separable agents {sorted(abilities)} and "
            f"general-aptitude agents {sorted(aptitude_rows)}"
        )
    sa_mode = bool(abilities)
    if sa_mode and not simplicities:
        raise ValidationError(
            f"{where}: agents give abilities but tasks have no simplicities"
        )
    if not sa_mode and simplicities:
        raise ValidationError(
            f"{where}: tasks give simplicities but agents have no abilities"
        )

    net = build_network(nodes, edges)
    if sa_mode:
        aptitudes: SAProfile | AptitudeMatrix = SAProfile(
            abilities=abilities, simplicities=simplicities
        )
    else:
        aptitudes = AptitudeMatrix(rates=aptitude_rows)

    stackelberg = data.get("stackelberg")
    if stackelberg is not None:
        stackelberg = frozenset(str(a) for a in stackelberg)

    return GameSpec(
        network=net,
        aptitudes=aptitudes,
        rewards=RewardVector(rewards),
        stackelberg=stackelberg,
    )


def load_game_spec(path: str) -> GameSpec:
    """Parse and validate a JSON game file."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    return game_spec_from_dict(data, where=path)


def game_spec_to_dict(g: GameSpec) -> dict:
    """Serializable form of a game, loadable by :func:`game_spec_from_dict`."""
    tasks = []
    for u in g.network.tasks:
        src, dst = g.network.endpoints[u]
        row = {"id": u, "from": src, "to": dst}
        if g.is_sa:
            row["simplicity"] = g.aptitudes.simplicities[u]
        row["reward"] = g.rewards[u]
        tasks.append(row)
    if g.is_sa:
        agents = [{"id": a, "ability": g.aptitudes.abilities[a]} for a in g.agents]
    else:
        agents = [
            {"id": a, "aptitudes": {u: g.rate(a, u) for u in g.network.tasks}}
            for a in g.agents
        ]
    out = {"nodes": list(g.network.nodes), "tasks": tasks, "agents": agents}
    if g.stackelberg:
        out["stackelberg"] = sorted(g.stackelberg)
    return out


# ---------------------------------------------------------------------------
# deterministic JSON rendering (floats at 17 significant digits)


def render_json(value, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        rows = [
            f'{pad}  {json.dumps(str(key))}: {render_json(item, indent + 1)}'
            for key, item in value.items()
        ]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        rows = [f"{pad}  {render_json(item, indent + 1)}" for item in value]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    return json.dumps(value)


def _digest_bytes(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def _report_envelope(source: str, digest: str, seed: int | None = None) -> dict:
    out = {
        "tool": {"name": "ppsgame", "version": __version__},
        "input": {"source": source, "digest": digest},
    }
    if seed is not None:
        out["seed"] = seed
    return out


def _emit(report: dict, out_path: str | None) -> None:
    text = render_json(report) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------------------
# shared input handling


def _load_input(args) -> tuple[GameSpec, str, str]:
    """Returns (game, source label, digest)."""
    if args.example is not None and args.game is not None:
        raise ValidationError("give either a game file or --example, not both")
    if args.example is None and args.game is None:
        raise ValidationError("a game file or --example is required")
    if args.example is not None:
        g = _build_example(args)
        blob = render_json(game_spec_to_dict(g)).encode("utf-8")
        source = f"example:{args.example}"
        digest = _digest_bytes(blob)
    else:
        g = load_game_spec(args.game)
        with open(args.game, "rb") as fh:
            digest = _digest_bytes(fh.read())
        source = args.game
    overrides = getattr(args, "reward", None) or []
    if overrides:
        rewards = dict(g.rewards.rewards)
        for token in overrides:
            task, sep, raw = token.partition("=")
            if not sep or task not in rewards:
                raise ValidationError(f"bad reward override {token!r}")
            rewards[task] = float(raw)
        g = GameSpec(
            network=g.network,
            aptitudes=g.aptitudes,
            rewards=RewardVector(rewards),
            stackelberg=g.stackelberg,
        )
    return g, source, digest


def _build_example(args) -> GameSpec:
    name = args.example
    m = getattr(args, "m", None)
    n = getattr(args, "n", None)
    if name == "1.1":
        return presets.two_task_line()
    if name == "1.2":
        return presets.uniform_line(m=m or 6, n=n or 3)
    if name == "4.1":
        return presets.own_task_parallel(m=m or 4)
    raise ValidationError(f"unknown example {name!r}; choose from {EXAMPLE_NAMES}")


def _witness_dict(w: model.Witness) -> dict:
    out = {"kind": w.kind, "tasks": list(w.tasks)}
    if w.agent is not None:
        out["agent"] = w.agent
    if w.coalition is not None:
        out["coalition"] = list(w.coalition)
    if w.lhs is not None:
        out["lhs"] = w.lhs
    if w.rhs is not None:
        out["rhs"] = w.rhs
    if w.note:
        out["note"] = w.note
    return out


def _report_dict(report: model.ConditionReport) -> dict:
    out = {
        "check": report.check,
        "passed": report.passed,
        "witnesses": [_witness_dict(w) for w in report.witnesses],
    }
    if report.thresholds:
        out["thresholds"] = dict(report.thresholds)
    if report.notes:
        out["notes"] = list(report.notes)
    return out


# ---------------------------------------------------------------------------
# subcommands


def _run_single_check(g: GameSpec, which: str) -> model.ConditionReport:
    if which == "line-ne":
        return model.check_line_ne(g)
    if which == "line-core":
        return model.check_line_core(g, coalition_limit=_coalition_limit())
    if which == "line-stackelberg":
        return model.check_line_stackelberg(g)
    if which == "dag-ne":
        return model.check_dag_ne(g)
    if which == "dag-sa":
        profile = model.require_sa(g)
        return model.check_dag_sa(profile, g.network, g.rewards)
    if which == "dag-stackelberg":
        profile = model.require_sa(g)
        if not g.stackelberg:
            raise PPSGameError("dag-stackelberg needs a 'stackelberg' agent set")
        return model.check_dag_stackelberg(profile, g.network, g.rewards, g.stackelberg)
    if which == "dag-core":
        return model.check_dag_core(g)
    raise ValidationError(f"unknown check {which!r}")


def _applicable_checks(g: GameSpec) -> list[str]:
    names = []
    linear = is_linear(g.network)
    if linear:
        names.append("line-ne")
        names.append("line-core")
        if g.stackelberg:
            names.append("line-stackelberg")
    if g.n >= 2:
        names.append("dag-ne")
    if g.is_sa:
        names.append("dag-sa")
        if g.stackelberg:
            names.append("dag-stackelberg")
    if g.n >= 2:
        names.append("dag-core")
    return names


def cmd_check(args) -> int:
    g, source, digest = _load_input(args)
    if args.which == "all":
        names = _applicable_checks(g)
    else:
        names = [args.which]
    results = [_run_single_check(g, name) for name in names]
    report = _report_envelope(source, digest)
    report["results"] = [_report_dict(r) for r in results]
    passed = all(r.passed for r in results)
    report["passed"] = passed
    _emit(report, args.out)
    return 0 if passed else 1


def cmd_analyze(args) -> int:
    g, source, digest = _load_input(args)
    state_cap = args.opt_cap or _state_cap()
    makespans = analysis.opt_makespan(
        g, state_cap=state_cap, assignment_cap=_assignment_cap()
    )
    profile = analysis.utility_profile(g)
    nash = analysis.verify_nash_pps(g, state_cap=state_cap)
    report = _report_envelope(source, digest)
    report["utilities"] = {a: profile.utilities[a] for a in g.agents}
    report["total_reward"] = profile.total
    report["herding_time"] = makespans.herding_time
    report["opt_time"] = makespans.opt_time
    report["poa_ratio"] = makespans.ratio
    report["best_response"] = {
        a: {
            "pps_value": r.pps_value,
            "best_deviation_value": r.best_deviation_value,
            "withhold_value": r.withhold_value,
            "is_best_response": r.is_best_response,
        }
        for a, r in nash.results.items()
    }
    report["nash_verified"] = nash.verified
    report["assumptions"] = [
        "rival choice rule: each rival works her own highest-virtual-reward "
        "available task and shares instantly"
    ]
    _emit(report, args.out)
    return 0 if nash.verified else 1


def _parse_strategies(tokens: list[str], g: GameSpec) -> dict:
    profile = {}
    for token in tokens:
        for item in token.split(","):
            item = item.strip()
            if not item:
                continue
            agent, sep, spec = item.partition("=")
            if not sep:
                raise ValidationError(
                    f"bad strategy {item!r}; use <agent>=<pps|split|delay:T|withhold>"
                )
            if agent not in g.agents:
                raise ValidationError(f"unknown agent {agent!r} in strategy flag")
            if spec == "pps":
                profile[agent] = PPSHerding()
            elif spec == "split":
                profile[agent] = PPSSplit()
            elif spec == "withhold":
                profile[agent] = WithholdAll()
            elif spec.startswith("delay:"):
                profile[agent] = DelayDeviation(delay=float(spec[len("delay:"):]))
            else:
                raise ValidationError(f"unknown strategy spec {spec!r}")
    return profile


def cmd_simulate(args) -> int:
    g, source, digest = _load_input(args)
    profile = _parse_strategies(args.strategy or [], g)
    agents, makespans, claims = sim_engine.batch_samples(
        g, profile, args.reps, args.seed, engine=args.engine
    )
    if args.out:
        header = "rep,makespan," + ",".join(f"reward_{a}" for a in agents)
        lines = [header]
        for k in range(args.reps):
            row = [str(k), format(float(makespans[k]), ".17g")]
            row.extend(format(float(claims[k, i]), ".17g") for i in range(len(agents)))
            lines.append(",".join(row))
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    if args.events:
        with open(args.events, "w", encoding="utf-8", newline="\n") as fh:
            for k in range(args.reps):
                result = sim_engine.simulate_once(
                    g, profile, stream_key(args.seed, k), engine=args.engine
                )
                for ev in result.events:
                    fh.write(
                        '{"rep": %d, "time": %s, "agent": %s, "kind": %s, "task": %s}\n'
                        % (
                            k,
                            format(ev.time, ".17g"),
                            json.dumps(ev.agent),
                            json.dumps(ev.kind),
                            json.dumps(ev.task),
                        )
                    )
    mk_mean, mk_std, mk_ci = sim_engine.mean_std_ci(makespans)
    summary = {
        "makespan_mean": mk_mean,
        "makespan_std": mk_std,
        "makespan_ci95": mk_ci,
        "reward_mean": {},
        "reward_std": {},
        "reward_ci95": {},
    }
    for i, agent in enumerate(agents):
        mean, std, ci = sim_engine.mean_std_ci(claims[:, i])
        summary["reward_mean"][agent] = mean
        summary["reward_std"][agent] = std
        summary["reward_ci95"][agent] = ci
    report = _report_envelope(source, digest, seed=args.seed)
    report["reps"] = args.reps
    report["engine"] = args.engine or sim_engine.ACTIVE_ENGINE
    report["summary"] = summary
    _emit(report, args.report)
    return 0


def cmd_design(args) -> int:
    g, source, digest = _load_input(args)
    profile = model.require_sa(g)
    mode = "proportional" if args.mode == "proportional" else "line_approx"
    rewards = model.design_rewards(
        profile, g.network, mode, scale=args.scale, alpha=args.alpha
    )
    report = _report_envelope(source, digest)
    report["mode"] = args.mode
    report["scale"] = args.scale
    if args.alpha is not None:
        report["alpha"] = args.alpha
    report["rewards"] = {u: rewards[u] for u in g.network.tasks}
    if g.n >= 2:
        th = model.sa_thresholds(profile, g.stackelberg)
        report["thresholds"] = {"alpha_ne": th.alpha_ne, "alpha_c": th.alpha_c}
        if th.alpha_s is not None:
            report["thresholds"]["alpha_s"] = th.alpha_s
    _emit(report, args.out)
    return 0


# ---------------------------------------------------------------------------


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("game", nargs="?", help="JSON game file")
    parser.add_argument(
        "--example", choices=EXAMPLE_NAMES, help="use a built-in instance instead"
    )
    parser.add_argument("--m", type=int, help="task count for built-in instances")
    parser.add_argument("--n", type=int, help="agent count for built-in instances")
    parser.add_argument(
        "--reward",
        action="append",
        metavar="TASK=VALUE",
        help="override one task's reward (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppsgame",
        description="Incentive checks, exact analysis, and simulation of "
        "progress-sharing games on acyclic task networks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run sufficient-condition checks")
    _add_input_args(p_check)
    p_check.add_argument(
        "--which", default="all", choices=CHECK_NAMES + ("all",)
    )
    p_check.add_argument("--out", help="also write the JSON report here")
    p_check.set_defaults(func=cmd_check)

    p_analyze = sub.add_parser(
        "analyze", help="utilities, makespans, and best-response verification"
    )
    _add_input_args(p_analyze)
    p_analyze.add_argument("--opt-cap", type=int, help="state-space cap")
    p_analyze.add_argument("--out", help="also write the JSON report here")
    p_analyze.set_defaults(func=cmd_analyze)

    p_sim = sub.add_parser("simulate", help="seeded Monte-Carlo simulation")
    _add_input_args(p_sim)
    p_sim.add_argument("--reps", type=int, required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument(
        "--strategy",
        action="append",
        metavar="AGENT=SPEC",
        help="per-agent strategy <pps|split|delay:T|withhold>; default pps",
    )
    p_sim.add_argument("--out", help="CSV path: rep,makespan,reward_<agent>…")
    p_sim.add_argument("--events", help="JSON-lines event log path")
    p_sim.add_argument("--report", help="also write the JSON summary here")
    p_sim.add_argument(
        "--engine", choices=("python", "compiled"), help="force a kernel"
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_design = sub.add_parser("design", help="construct incentive-safe rewards")
    _add_input_args(p_design)
    p_design.add_argument(
        "--mode", required=True, choices=("proportional", "line-approx")
    )
    p_design.add_argument("--scale", type=float, default=1.0)
    p_design.add_argument("--alpha", type=float)
    p_design.add_argument("--out", help="also write the JSON report here")
    p_design.set_defaults(func=cmd_design)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PPSGameError as exc:
        print(f"ppsgame: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"ppsgame: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
