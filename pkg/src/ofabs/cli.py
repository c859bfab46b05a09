"""Command-line driver: build models, abstract, synthesize, simulate, check relations.

Every run writes one JSON report (to --report, else stdout).  Reports carry no
wall-clock data unless --timing is given, so identical invocations produce
identical bytes.

Exit codes: 0 success, 2 unrealizable, 3 budget exhausted, 4 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import models
from .baselines import grid_abstraction, l_complete_abstraction
from .bisim import bisimulation_quotient
from .errors import BadParams, NotSupported, OfabsError, ResourceBudgetExceeded
from .ka import knowledge_abstraction
from .kam import KAM, KAMConfig, refinement_chain
from .regions import TranslationSystem
from .relations import (AbstractionMap, check_frr_variant, check_sound_abstraction,
                        check_sound_realization)
from .synth import (AbstractStrategy, Unrealizable, output_feedback_game, refine_controller,
                    simulate_closed_loop, solve)
from .systems import FiniteSystem, Specification, load_abstraction, validate

EXIT_OK, EXIT_UNREALIZABLE, EXIT_BUDGET, EXIT_INPUT = 0, 2, 3, 4
MAX_STATES_ENV = "OFABS_MAX_STATES"

ALGO_PARAMS = {
    "ka": set(),
    "bisim": set(),
    "kam": {"termcond", "emit_tree", "emit_iterations", "refine_scope"},
    "grid": {"eta"},
    "lcomplete": {"l"},
}


@dataclass
class PipelineConfig:
    command: str
    algorithm: str | None = None
    params: dict = field(default_factory=dict)   # algorithm-specific, validated
    budget: int = 20
    spec_path: str | None = None
    report: str | None = None
    dot: str | None = None
    out: str | None = None
    seed: int = 0
    timing: bool = False
    max_states: int | None = None

    @classmethod
    def from_args(cls, args) -> "PipelineConfig":
        algo = getattr(args, "algo", None)
        params = {}
        for name in ("termcond", "emit_tree", "emit_iterations", "refine_scope", "eta", "l"):
            v = getattr(args, name, None)
            if v is not None:
                params[name] = v
        if algo is not None:
            stray = set(params) - ALGO_PARAMS[algo]
            if stray:
                flags = ", ".join("--" + s.replace("_", "-") for s in sorted(stray))
                raise BadParams(f"{flags} not applicable to --algo {algo}")
            if algo == "grid" and "eta" not in params:
                raise BadParams("--algo grid needs --eta")
            if algo == "lcomplete" and "l" not in params:
                raise BadParams("--algo lcomplete needs --l")
        cap = os.environ.get(MAX_STATES_ENV)
        try:
            max_states = int(cap) if cap else None
        except ValueError:
            raise BadParams(f"{MAX_STATES_ENV} must be an integer") from None
        budget = getattr(args, "budget", None)
        if budget is not None and budget < 1:
            raise BadParams("--budget must be at least 1")
        return cls(
            command=args.command,
            algorithm=algo,
            params=params,
            budget=budget if budget is not None else 20,
            spec_path=getattr(args, "spec", None),
            report=args.report,
            dot=getattr(args, "dot", None),
            out=getattr(args, "out", None),
            seed=getattr(args, "seed", 0) or 0,
            timing=args.timing,
            max_states=max_states,
        )


# -- io helpers -------------------------------------------------------------


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise BadParams(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise BadParams(f"{path} is not valid JSON: {e}") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(path, text: str):
    Path(path).write_text(text)


def _params(pairs) -> dict:
    out = {}
    for p in pairs or []:
        if "=" not in p:
            raise BadParams(f"--param expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def symbolic_reference(name: str, params: dict, system) -> dict:
    """JSON stand-in for a model that has no finite state list."""
    d = {"model": name, "params": dict(sorted(params.items())), "symbolic": True,
         "inputs": list(system.inputs), "outputs": list(system.outputs)}
    d["output_regions"] = {y: system.output_region(y).key() for y in system.outputs}
    d["initial"] = system.initial_region().key()
    return d


def load_system(path=None, model=None, params=None, abstraction=False):
    if model is not None:
        return models.build(model, params or {})
    if path is None:
        raise BadParams("give --system or --model")
    d = _read_json(path)
    if isinstance(d, dict) and "model" in d:
        return models.build(d["model"], d.get("params", {}))
    return load_abstraction(d) if abstraction else validate(d)


def _cap(cfg: PipelineConfig, n: int):
    if cfg.max_states is not None and n > cfg.max_states:
        raise ResourceBudgetExceeded(f"{n} abstract states exceed {MAX_STATES_ENV}={cfg.max_states}")


def _summary(s: FiniteSystem) -> dict:
    return {"states": len(s.states), "initial": len(s.initial),
            "transitions": sum(len(t) for t in s.transitions.values())}


def _emit_system(cfg: PipelineConfig, s: FiniteSystem, name: str):
    if cfg.out:
        _write(cfg.out, _dump(s.to_json()))
    if cfg.dot:
        _write(cfg.dot, s.to_dot(name))


# -- subcommands ----------------------------------------------------------


def cmd_model(args, cfg: PipelineConfig):
    params = _params(args.param)
    system = models.build(args.name, params)
    if isinstance(system, FiniteSystem):
        body = system.to_json()
        report = {"command": "model", "model": args.name, "finite": True, **_summary(system)}
        if cfg.dot:
            _write(cfg.dot, system.to_dot(args.name))
    else:
        body = symbolic_reference(args.name, params, system)
        report = {"command": "model", "model": args.name, "finite": False,
                  "outputs": len(system.outputs)}
    if cfg.out:
        _write(cfg.out, _dump(body))
    return report, EXIT_OK


def cmd_abstract(args, cfg: PipelineConfig):
    system = load_system(args.system, args.model, _params(args.param))
    algo = cfg.algorithm
    report = {"command": "abstract", "algorithm": algo,
              "model": args.model or args.system, "budget": cfg.budget}
    if algo == "ka":
        res = knowledge_abstraction(system, budget=cfg.budget)
        abstraction = res.abstraction
        report.update(iterations=res.iterations, terminated=res.terminated,
                      cells={k: str(v) for k, v in res.cells.items()})
    elif algo == "bisim":
        res = bisimulation_quotient(system, budget=cfg.budget)
        abstraction = res.quotient
        report.update(iterations=res.iterations, terminated=res.terminated,
                      blocks=sorted(res.blocks))
    elif algo == "kam":
        default = "budget" if args.budget is not None else "cover-stable:2"
        conf = KAMConfig.parse(cfg.params.get("termcond", default), cfg.budget)
        if "refine_scope" in cfg.params:
            conf.refine_scope = cfg.params["refine_scope"]
        driver = KAM(system, conf)
        iter_dir = cfg.params.get("emit_iterations")
        if iter_dir:
            Path(iter_dir).mkdir(parents=True, exist_ok=True)
        while True:
            ext = driver.step()
            i = driver.state.iteration
            _cap(cfg, len(ext.system.states))
            if iter_dir:
                _write(Path(iter_dir) / f"iter{i}.json", _dump(ext.system.to_json()))
                _write(Path(iter_dir) / f"iter{i}.dot", ext.system.to_dot(f"iter{i}"))
            if driver.fired_at is not None or i >= conf.budget:
                break
        result = driver.result()
        abstraction = ext.system
        report.update(
            termcond=conf.termcond if conf.termcond != "cover-stable" else f"cover-stable:{conf.window}",
            iterations=driver.state.iteration,
            terminated=result.terminated,
            termcond_fired_at=result.termcond_fired_at,
            cover=len(driver.state.cover),
            cover_additions={str(k): [str(q) for q in result.cover_additions(k)]
                             for k in range(1, driver.state.iteration + 1)},
        )
        if "emit_tree" in cfg.params:
            _write(cfg.params["emit_tree"], _dump(driver.state.to_json()))
    elif algo == "grid":
        if not isinstance(system, TranslationSystem):
            raise NotSupported("grid abstraction needs a torus translation model")
        eta = Fraction(cfg.params["eta"])
        abstraction = grid_abstraction(system, eta)
        report.update(eta=str(eta), terminated=True)
    else:
        if not isinstance(system, FiniteSystem):
            raise NotSupported("l-complete abstraction needs a finite system")
        abstraction = l_complete_abstraction(system, cfg.params["l"])
        report.update(l=cfg.params["l"], terminated=True)
    _cap(cfg, len(abstraction.states))
    report["abstraction"] = _summary(abstraction)
    _emit_system(cfg, abstraction, algo)
    return report, EXIT_OK


def _load_spec(cfg):
    if not cfg.spec_path:
        raise BadParams("--spec is required")
    return Specification.from_json(_read_json(cfg.spec_path))


def _strategy_file(game: FiniteSystem, strat: AbstractStrategy, spec: Specification) -> dict:
    return {"abstraction": game.to_json(), "spec": spec.to_json(), "strategy": strat.to_json()}


def _verdict(strat) -> dict:
    if isinstance(strat, Unrealizable):
        return {"realizable": False, "witness": strat.witness, "winning": len(strat.winning)}
    return {"realizable": True, "winning": len(strat.winning), "memory": strat.memory}


def cmd_synthesize(args, cfg: PipelineConfig):
    system = load_system(args.system, abstraction=True)
    if not isinstance(system, FiniteSystem):
        raise NotSupported("synthesis needs a finite abstraction; run `abstract` first")
    spec = _load_spec(cfg)
    game = output_feedback_game(system) if args.output_feedback else system
    strat = solve(game, spec)
    report = {"command": "synthesize", "spec": spec.to_json(), "game": _summary(game),
              **_verdict(strat)}
    if isinstance(strat, Unrealizable):
        return report, EXIT_UNREALIZABLE
    if args.emit_strategy:
        _write(args.emit_strategy, _dump(_strategy_file(game, strat, spec)))
    return report, EXIT_OK


def _load_controller(path):
    d = _read_json(path)
    try:
        game = load_abstraction(d["abstraction"])
        strat = AbstractStrategy.from_json(game, d["strategy"])
        spec = Specification.from_json(d["spec"]) if "spec" in d else None
    except (KeyError, TypeError) as e:
        raise BadParams(f"malformed controller file: {e}") from None
    return refine_controller(game, strat), spec


def cmd_simulate(args, cfg: PipelineConfig):
    plant = load_system(args.system, args.model, _params(args.param))
    if not isinstance(plant, (FiniteSystem, TranslationSystem)):
        raise NotSupported("simulation needs a finite or torus translation model")
    ctrl, spec = _load_controller(args.controller)
    if cfg.spec_path:
        spec = _load_spec(cfg)
    if args.steps < 0:
        raise BadParams("--steps must be non-negative")
    res = simulate_closed_loop(plant, ctrl, args.steps, seed=cfg.seed, spec=spec)
    if args.trace:
        _write(args.trace, "".join(json.dumps(r) + "\n" for r in res.trace))
    report = {"command": "simulate", "seed": cfg.seed, "verdict": res.verdict,
              "desync": res.desync}
    return report, EXIT_OK


def cmd_check_relation(args, cfg: PipelineConfig):
    concrete = validate(_read_json(args.concrete))
    abstract = load_abstraction(_read_json(args.abstract))
    amap = AbstractionMap.from_json(_read_json(args.map))
    check = {"sound": check_sound_abstraction, "realization": check_sound_realization,
             "frr": check_frr_variant}[args.mode]
    rep = check(concrete, abstract, amap)
    return {"command": "check-relation", "mode": args.mode, **rep.to_json()}, EXIT_OK


def cmd_chain(args, cfg: PipelineConfig):
    system = load_system(args.system, args.model, _params(args.param))
    spec = _load_spec(cfg)
    conf = KAMConfig.parse(args.termcond or "budget", args.L)
    res = refinement_chain(system, args.L, spec, conf)
    report = {"command": "chain", "L": args.L, "found": res.found,
              "iterations_tried": len(res.chain),
              "extracted_states": [len(e.system.states) for e in res.chain]}
    if not res.found:
        return report, EXIT_BUDGET
    report.update(iteration=res.iteration, game=_summary(res.game), **_verdict(res.strategy))
    if args.emit_strategy:
        _write(args.emit_strategy, _dump(_strategy_file(res.game, res.strategy, spec)))
    _emit_system(cfg, res.game, "chain")
    return report, EXIT_OK


# -- parser ---------------------------------------------------------------


def _common(p):
    p.add_argument("--report", help="report JSON path (default: stdout)")
    p.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")


def _model_args(p, system_required=False):
    p.add_argument("--system", help="system JSON or a model reference written by `model`")
    p.add_argument("--model", help=f"built-in model: {', '.join(models.CATALOG)}")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="model parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ofabs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="write a built-in model as JSON")
    p.add_argument("--name", required=True)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--out")
    p.add_argument("--dot")
    _common(p)

    p = sub.add_parser("abstract", help="compute a finite abstraction")
    _model_args(p)
    p.add_argument("--algo", required=True, choices=sorted(ALGO_PARAMS))
    p.add_argument("--budget", type=int)
    p.add_argument("--termcond", help="exact | cover-stable:k | budget (kam); default budget when "
                        "--budget is given, else cover-stable:2")
    p.add_argument("--refine-scope", choices=["ancestors", "all"], help="kam")
    p.add_argument("--emit-tree", help="exploration tree JSON (kam)")
    p.add_argument("--emit-iterations", metavar="DIR", help="per-iteration JSON/DOT (kam)")
    p.add_argument("--eta", help="grid size, e.g. 1/5 (grid)")
    p.add_argument("--l", type=int, help="history length (lcomplete)")
    p.add_argument("--out", help="abstraction JSON")
    p.add_argument("--dot")
    _common(p)

    p = sub.add_parser("synthesize", help="solve a game on a finite abstraction")
    p.add_argument("--system", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--output-feedback", action="store_true",
                   help="determinize per output first so the strategy can be refined")
    p.add_argument("--emit-strategy")
    _common(p)

    p = sub.add_parser("simulate", help="run a refined controller against a concrete system")
    _model_args(p)
    p.add_argument("--controller", required=True)
    p.add_argument("--spec")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="JSON lines, one object per step")
    _common(p)

    p = sub.add_parser("check-relation", help="decide a sound abstraction relation")
    p.add_argument("--concrete", required=True)
    p.add_argument("--abstract", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--mode", choices=["sound", "realization", "frr"], default="sound")
    _common(p)

    p = sub.add_parser("chain", help="run KAM and try synthesis after each iteration")
    _model_args(p)
    p.add_argument("--spec", required=True)
    p.add_argument("--L", type=int, required=True, help="maximum number of iterations")
    p.add_argument("--termcond")
    p.add_argument("--emit-strategy")
    p.add_argument("--out")
    p.add_argument("--dot")
    _common(p)
    return parser


COMMANDS = {
    "model": cmd_model,
    "abstract": cmd_abstract,
    "synthesize": cmd_synthesize,
    "simulate": cmd_simulate,
    "check-relation": cmd_check_relation,
    "chain": cmd_chain,
}


def _exit_for(err: Exception) -> int:
    return EXIT_BUDGET if isinstance(err, ResourceBudgetExceeded) else EXIT_INPUT


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    report_path = args.report
    t0 = time.perf_counter()
    try:
        cfg = PipelineConfig.from_args(args)
        report, code = COMMANDS[args.command](args, cfg)
    except (OfabsError, ValueError) as e:
        report = {"command": args.command,
                  "error": {"type": type(e).__name__, "message": str(e)}}
        code = _exit_for(e)
        print(f"ofabs: {type(e).__name__}: {e}", file=sys.stderr)
    report["exit_code"] = code
    if args.timing:
        report["timing_s"] = round(time.perf_counter() - t0, 6)
    text = _dump(report)
    if report_path:
        try:
            _write(report_path, text)
        except OSError as e:
            print(f"ofabs: cannot write report: {e.strerror}", file=sys.stderr)
            return EXIT_INPUT
    else:
        stdout.write(text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
