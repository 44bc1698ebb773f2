"""Experiment runner: builds graphs, runs one mode over a seed list and folds
the results into a deterministic report."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .baselines import (BallBudgetExceeded, ball_radius, ball_simulate_answer, estimate_ball_probes,
                        rgmis_answer_all)
from .diagnostics import classify_rounds
from .graph import Graph, GraphError, Oracle, generate_graph, load_edge_list, parse_generator_spec
from .lca import (ComponentCapExceeded, QuestionContext, _answer_in, answer, default_cap, greedy_complete,
                  residual_component)
from .reference import Outcome, assert_influence_bounds, run
from .states import PASS, Status, Verdict, fail
from .tape import DEFAULT_CT, DEFAULT_DELTA, Params, Tape

MODES = ("lca", "global", "baseline-rg", "baseline-ball", "verify", "bench", "sweep")
SCHEMA = "mis-lca-report/1"
FULL_QUESTION_LIMIT = 100_000
DEFAULT_SAMPLE = 10_000


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a report.

    ``questions`` is ``"all"``, ``"none"``, ``"auto"`` (all vertices up to
    10**5, else a 10**4 sample), ``"sample:<k>"`` or ``"vertex:<v>"``.
    ``sweep_param`` names a generator parameter or ``ct``/``delta``/``k_override``; each of
    ``sweep_values`` is run over every seed; an empty sweep gives an empty report.
    """

    mode: str
    gen: str | None = None
    graph_path: str | None = None
    seeds: tuple[int, ...] = (0,)
    ct: int = DEFAULT_CT
    delta: float = DEFAULT_DELTA
    k_override: int | None = None
    questions: str = "auto"
    cap: int | None = None
    trace: bool = False
    sweep_param: str | None = None
    sweep_values: tuple = ()
    ball_budget: int = 2_000_000
    ball_questions: int = 50
    timing: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if (self.gen is None) == (self.graph_path is None):
            raise ConfigError("exactly one of gen and graph_path must be given")
        if not self.seeds:
            raise ConfigError("seed list must be non-empty")
        if self.mode == "sweep" and not self.sweep_param:
            raise ConfigError("sweep mode needs sweep_param")
        if self.gen is not None:
            parse_generator_spec(self.gen)
        _question_kind(self.questions)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        d["sweep_values"] = list(self.sweep_values)
        return d


def _question_kind(q: str):
    if q in ("all", "auto", "none"):
        return q, None
    kind, _, arg = q.partition(":")
    if kind not in ("sample", "vertex") or not arg.lstrip("-").isdigit():
        raise ConfigError(f"bad question spec {q!r}")
    if int(arg) < 0 or (kind == "sample" and int(arg) == 0):
        raise ConfigError(f"bad question spec {q!r}")
    return kind, int(arg)


def question_set(spec: str, n: int, seed: int) -> np.ndarray:
    kind, arg = _question_kind(spec)
    if kind == "auto":
        kind, arg = ("all", None) if n <= FULL_QUESTION_LIMIT else ("sample", DEFAULT_SAMPLE)
    if kind == "all":
        return np.arange(n, dtype=np.int64)
    if kind == "none":
        return np.zeros(0, dtype=np.int64)
    if kind == "vertex":
        if arg >= n:
            raise GraphError(f"vertex {arg} out of range [0, {n})")
        return np.array([arg], dtype=np.int64)
    rng = np.random.default_rng([seed, 0x51])
    k = min(arg, n)
    return np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)


# verification -------------------------------------------------------------

def verify_mis(g: Graph, membership, region=None) -> Verdict:
    """Independence and maximality of ``membership``.

    ``membership`` is a boolean array over all vertices or a dict covering at
    least ``region`` and its neighbours. With ``region`` only the edges
    touching it and the maximality of its vertices are checked.
    """
    if isinstance(membership, dict):
        get = membership.get
    else:
        arr = np.asarray(membership, dtype=bool)
        if arr.shape != (g.n,):
            return fail(f"membership has shape {arr.shape}, expected ({g.n},)")
        get = lambda v: bool(arr[v])  # noqa: E731
    verts = range(g.n) if region is None else sorted(set(int(v) for v in region))
    adj = g.adjacency
    for v in verts:
        mv = get(v)
        if mv is None:
            return fail(f"vertex {v}: membership unknown")
        covered = mv
        for u in adj[v]:
            mu = get(u)
            if mu is None:
                return fail(f"vertex {u}: membership unknown (neighbour of {v})")
            if mv and mu:
                a, b = min(u, v), max(u, v)
                return fail(f"independence violated on edge ({a},{b})")
            covered = covered or mu
        if not covered:
            return fail(f"maximality violated at vertex {v}")
    return PASS


# helpers ------------------------------------------------------------------

def probe_stats(probes) -> dict:
    if len(probes) == 0:
        return {"count": 0, "max": 0, "mean": 0.0, "p50": 0.0, "p95": 0.0, "p99": 0.0}
    a = np.asarray(probes, dtype=np.float64)
    p50, p95, p99 = np.percentile(a, [50, 95, 99])
    return {"count": int(a.size), "max": int(a.max()), "mean": float(a.mean()),
            "p50": float(p50), "p95": float(p95), "p99": float(p99)}


def component_sizes(out: Outcome) -> list[int]:
    sub, _ = out.residual_graph()
    seen = np.zeros(sub.n, dtype=bool)
    sizes = []
    adj = sub.adjacency
    for s in range(sub.n):
        if seen[s]:
            continue
        seen[s] = True
        stack, size = [s], 0
        while stack:
            x = stack.pop()
            size += 1
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(y)
        sizes.append(size)
    return sizes


def histogram(sizes) -> dict:
    return {str(k): v for k, v in sorted(Counter(sizes).items())}


def complete_from_outcome(out: Outcome) -> np.ndarray:
    """Phase-1 set plus the lexicographically-first MIS of every residual component."""
    member = np.zeros(out.n, dtype=bool)
    member[out.independent_set] = True
    res = set(out.residual.tolist())
    adj = out.graph.adjacency
    chosen = greedy_complete(res, {v: adj[v] for v in res})
    member[list(chosen)] = True
    return member


def _verdicts_ok(v: dict) -> bool:
    return all(x["verdict"] == "Pass" for x in v.values())


def build_graph(cfg: ExperimentConfig, seed: int, overrides: dict) -> Graph:
    if cfg.graph_path is not None:
        return load_edge_list(cfg.graph_path)
    kind, kw = parse_generator_spec(cfg.gen)
    kw.update(overrides)
    return generate_graph(kind, seed=seed, **kw)


def _params_for(cfg: ExperimentConfig, g: Graph, seed: int, overrides: dict) -> Params:
    return Params.build(g.max_degree, ct=int(overrides.get("ct", cfg.ct)),
                        delta=float(overrides.get("delta", cfg.delta)), seed=seed,
                        k_override=overrides.get("k_override", cfg.k_override))


# modes --------------------------------------------------------------------

def _global_metrics(out: Outcome, with_classes: bool = True) -> tuple[dict, dict]:
    sizes = component_sizes(out)
    m = {
        "independent_set_size": int(out.independent_set.size),
        "dominated": int(out.dominated.size),
        "residual": int(out.residual.size),
        "residual_fraction": out.residual_fraction(),
        "component_max": max(sizes, default=0),
        "component_histogram": histogram(sizes),
        "sleep_declarations": int(len(out.declarations)),
    }
    if with_classes:
        m["round_classes"] = classify_rounds(out).tallies()
    member = complete_from_outcome(out)
    m["mis_size"] = int(member.sum())
    verdicts = {
        "influence_bounds": assert_influence_bounds(out.ledger, out.params).to_dict(),
        "mis": verify_mis(out.graph, member).to_dict(),
    }
    return m, verdicts


def _lca_answers(g, params, qs, cap, shared):
    """Answer ``qs``; returns answers by vertex plus the number of cap aborts."""
    tape = Tape(params, g.n)
    answers, failures = {}, []
    if shared:
        ctx = QuestionContext(Oracle(g), params, tape)
        cache: dict = {}
    for v in qs.tolist():
        try:
            if shared:
                answers[v] = _answer_in(ctx, v, cap, cache)
            else:
                answers[v] = answer(g, params, v, cap=cap, tape=tape)
        except ComponentCapExceeded as exc:
            failures.append({"vertex": v, "reached": exc.size, "cap": exc.cap})
    return answers, failures, (ctx if shared else None)


def _certify(g, params, ctx, answers, cap) -> Verdict:
    """MIS check on the questioned vertices and their residual components.

    Membership of every neighbour of the region is obtained from the shared
    context, so independence and maximality are checked on full
    neighbourhoods.
    """
    region = set(answers)
    cache: dict = {}
    member = {}
    try:
        for v, a in answers.items():
            if a.phase1.kind is Status.RESIDUAL:
                region.update(residual_component(ctx, v, cap))
        need = set(region)
        for v in region:
            need.update(g.adjacency[v])
        for v in sorted(need):
            member[v] = _answer_in(ctx, v, cap, cache).in_mis
    except ComponentCapExceeded as exc:
        return fail(f"cannot certify: {exc}")
    return verify_mis(g, member, region)


def _run_lca(cfg, g, params, seed) -> tuple[dict, dict]:
    qs = question_set(cfg.questions, g.n, seed)
    cap = cfg.cap if cfg.cap is not None else default_cap(params.delta_max_degree, g.n)
    single, fails, _ = _lca_answers(g, params, qs, cap, shared=False)
    batch, fails_b, ctx = _lca_answers(g, params, qs, cap, shared=True)
    same = all(single[v].in_mis == batch[v].in_mis for v in single) and set(single) == set(batch)
    probes = [single[v].probes_used for v in sorted(single)]
    comp = [a.component_size for a in single.values() if a.component_size]
    kinds = Counter(a.phase1.kind.value for a in single.values())
    m = {
        "questions": int(qs.size),
        "probes": probe_stats(probes),
        "phase1": {k: kinds.get(k, 0) for k in ("in_mis", "dominated", "residual")},
        "in_mis": int(sum(a.in_mis for a in single.values())),
        "component_max": max(comp, default=0),
        "shattering_failures": len(fails),
        "shattering_failure_events": fails[:20],
        "cap": cap,
    }
    verdicts = {
        "batch_equals_single": (PASS if same else fail("batch and per-question answers differ")).to_dict(),
        "mis_certified_region": _certify(g, params, ctx, batch, cap).to_dict(),
    }
    return m, verdicts


def _run_verify(cfg, g, params, seed) -> tuple[dict, dict]:
    out = run(g, params)
    m, verdicts = _global_metrics(out, with_classes=False)
    qs = question_set(cfg.questions, g.n, seed)
    tape = Tape(params, g.n)
    cap = cfg.cap if cfg.cap is not None else default_cap(params.delta_max_degree, g.n)
    status_bad = state_bad = None
    ref_member = complete_from_outcome(out)
    member = np.zeros(g.n, dtype=bool)
    answer_bad = None
    for v in qs.tolist():
        ctx = QuestionContext(Oracle(g), params, tape)
        if state_bad is None and g.n <= 64:
            for t in range(params.T + 1):
                if ctx.state(v, t) != out.state(v, t):
                    state_bad = f"state of vertex {v} at round {t} differs from the global run"
                    break
        if status_bad is None and ctx.status(v) != out.status(v):
            status_bad = f"phase-1 status of {v}: {ctx.status(v)} vs {out.status(v)}"
        a = _answer_in(ctx, v, cap, None)
        member[v] = a.in_mis
        if answer_bad is None and a.in_mis != ref_member[v]:
            answer_bad = f"answer for {v} differs from the global completion"
    batch, _, _ = _lca_answers(g, params, qs, cap, shared=True)
    batch_same = all(batch[v].in_mis == member[v] for v in qs.tolist())
    verdicts["lca_states"] = (fail(state_bad) if state_bad else PASS).to_dict()
    verdicts["lca_status"] = (fail(status_bad) if status_bad else PASS).to_dict()
    verdicts["lca_answers"] = (fail(answer_bad) if answer_bad else PASS).to_dict()
    verdicts["batch_equals_single"] = (PASS if batch_same else fail("batch answers differ")).to_dict()
    if qs.size == g.n:
        verdicts["lca_mis"] = verify_mis(g, member).to_dict()
    rg = rgmis_answer_all(g, seed)
    rg_member = np.array([rg.membership[v] for v in range(g.n)], dtype=bool)
    verdicts["rgmis_mis"] = verify_mis(g, rg_member).to_dict()
    ball_bad, ball_checked, ball_skipped = None, 0, 0
    for v in qs[: cfg.ball_questions].tolist():
        try:
            st = ball_simulate_answer(Oracle(g), params, v, budget=cfg.ball_budget)
        except BallBudgetExceeded:
            ball_skipped += 1
            continue
        ball_checked += 1
        if ball_bad is None and st != out.status(v):
            ball_bad = f"ball status of {v}: {st} vs {out.status(v)}"
    verdicts["ball_status"] = (fail(ball_bad) if ball_bad else PASS).to_dict()
    m["ball_checked"] = ball_checked
    m["ball_skipped"] = ball_skipped
    m["questions"] = int(qs.size)
    return m, verdicts


def _run_rg(cfg, g, params, seed) -> tuple[dict, dict]:
    qs = question_set(cfg.questions, g.n, seed)
    rg = rgmis_answer_all(g, seed, qs.tolist())
    m = {"questions": int(qs.size), "probes": probe_stats(rg.probes),
         "in_mis": int(sum(rg.membership.values()))}
    verdicts = {}
    if qs.size == g.n:
        member = np.array([rg.membership[v] for v in range(g.n)], dtype=bool)
        verdicts["mis"] = verify_mis(g, member).to_dict()
    return m, verdicts


def _run_ball(cfg, g, params, seed) -> tuple[dict, dict]:
    qs = question_set(cfg.questions, g.n, seed)[: cfg.ball_questions]
    out = run(g, params)
    probes, bad, skipped = [], None, 0
    for v in qs.tolist():
        o = Oracle(g)
        try:
            st = ball_simulate_answer(o, params, v, budget=cfg.ball_budget)
        except BallBudgetExceeded:
            skipped += 1
            continue
        probes.append(o.probe_counter)
        if bad is None and st != out.status(v):
            bad = f"ball status of {v}: {st} vs {out.status(v)}"
    m = {"questions": int(qs.size), "skipped_over_budget": skipped, "probes": probe_stats(probes)}
    return m, {"ball_status": (fail(bad) if bad else PASS).to_dict()}


def _run_bench(cfg, g, params, seed) -> tuple[dict, dict]:
    qs = question_set(cfg.questions, g.n, seed)
    cap = cfg.cap if cfg.cap is not None else default_cap(params.delta_max_degree, g.n)
    single, fails, _ = _lca_answers(g, params, qs, cap, shared=False)
    rg = rgmis_answer_all(g, seed, qs.tolist())
    ball_probes = []
    for v in qs[: cfg.ball_questions].tolist():
        o = Oracle(g)
        try:
            ball_simulate_answer(o, params, v, budget=cfg.ball_budget)
        except BallBudgetExceeded:
            break
        ball_probes.append(o.probe_counter)
    m = {
        "questions": int(qs.size),
        "lca_probes": probe_stats([a.probes_used for a in single.values()]),
        "rgmis_probes": probe_stats(rg.probes),
        "ball_probes": probe_stats(ball_probes),
        "ball_estimate_unbounded": _unbounded_ball(params.delta_max_degree, ball_radius(params)),
        "ball_estimate": estimate_ball_probes(g.n, params.delta_max_degree, ball_radius(params)),
        "shattering_failures": len(fails),
    }
    return m, {}


def _unbounded_ball(D: int, R: int) -> str:
    # Moore bound on an infinite graph, as a decimal string (it is astronomically large)
    D = max(D, 1)
    total = 1 + sum(D * (D - 1) ** (d - 1) for d in range(1, R + 1)) if D > 1 else 1 + min(R, 1)
    return str(total * (D + 1))


def _run_sweep_point(cfg, g, params, seed) -> tuple[dict, dict]:
    out = run(g, params)
    m, verdicts = _global_metrics(out, with_classes=False)
    qs = question_set(cfg.questions, g.n, seed)
    if qs.size:
        tape = Tape(params, g.n)
        probes = []
        for v in qs.tolist():
            ctx = QuestionContext(Oracle(g), params, tape)
            ctx.status(v)
            probes.append(ctx.oracle.probe_counter)
        m["phase1_probes"] = probe_stats(probes)
    return m, verdicts


_RUNNERS = {
    "lca": _run_lca,
    "global": lambda cfg, g, p, s: _global_metrics(run(g, p)),
    "baseline-rg": _run_rg,
    "baseline-ball": _run_ball,
    "verify": _run_verify,
    "bench": _run_bench,
    "sweep": _run_sweep_point,
}


# report -------------------------------------------------------------------

@dataclass
class Report:
    config: dict
    runs: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return _verdicts_ok(self.verdicts)

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "config": self.config, "runs": self.runs,
                "aggregate": self.aggregate, "verdicts": self.verdicts}


TOP_LEVEL_KEYS = ("schema", "config", "runs", "aggregate", "verdicts")
CSV_HEADER = ("seed", "sweep_value", "metric", "value")


def _aggregate(runs: list[dict]) -> dict:
    groups: dict = {}
    for r in runs:
        groups.setdefault(json.dumps(r.get("sweep_value")), []).append(r)
    agg = {}
    for key, rs in sorted(groups.items()):
        ms = [r["metrics"] for r in rs]
        a = {"runs": len(rs)}
        fr = [m["residual_fraction"] for m in ms if "residual_fraction" in m]
        if fr:
            a["residual_fraction_mean"] = float(np.mean(fr))
            a["residual_fraction_stderr"] = float(np.std(fr, ddof=1) / math.sqrt(len(fr))) if len(fr) > 1 else 0.0
        cm = [m["component_max"] for m in ms if "component_max" in m]
        if cm:
            a["component_max"] = int(max(cm))
        for pk in ("probes", "lca_probes", "phase1_probes", "rgmis_probes", "ball_probes"):
            ps = [m[pk]["max"] for m in ms if pk in m and m[pk]["count"]]
            if ps:
                a[f"{pk}_max"] = int(max(ps))
        sf = [m.get("shattering_failures", 0) for m in ms]
        a["shattering_failures"] = int(sum(sf))
        agg[key] = a
    return agg


def run_experiment(cfg: ExperimentConfig) -> Report:
    report = Report(cfg.to_dict())
    points = [(None, {})]
    if cfg.mode == "sweep":
        points = [(v, {cfg.sweep_param: v}) for v in cfg.sweep_values]
    runner = _RUNNERS[cfg.mode]
    for value, overrides in points:
        gen_over = {k: v for k, v in overrides.items() if k not in ("ct", "delta", "k_override")}
        for seed in cfg.seeds:
            t0 = time.perf_counter()
            g = build_graph(cfg, seed, gen_over)
            params = _params_for(cfg, g, seed, overrides)
            metrics, verdicts = runner(cfg, g, params, seed)
            rec = {"seed": int(seed), "sweep_value": value, "n": g.n, "edges": g.num_edges,
                   "max_degree": g.max_degree, "T": params.T, "K": params.K, "metrics": metrics,
                   "verdicts": verdicts}
            if cfg.timing:
                rec["seconds"] = time.perf_counter() - t0
            report.runs.append(rec)
    report.runs.sort(key=lambda r: (json.dumps(r["sweep_value"]), r["seed"]))
    report.aggregate = _aggregate(report.runs)
    for r in report.runs:
        for name, v in r["verdicts"].items():
            cur = report.verdicts.get(name)
            if cur is None or (cur["verdict"] == "Pass" and v["verdict"] == "Fail"):
                reason = v["reason"] and f"seed {r['seed']}: {v['reason']}"
                report.verdicts[name] = {"verdict": v["verdict"], "reason": reason}
    report.verdicts = dict(sorted(report.verdicts.items()))
    return report


def _flatten(prefix: str, obj, out: list):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], out)
    else:
        out.append((prefix, obj))


def report_json(report: Report) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def report_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in report.runs:
        rows: list = []
        _flatten("", {"metrics": r["metrics"], "verdicts": r["verdicts"]}, rows)
        for metric, value in rows:
            w.writerow([r["seed"], "" if r["sweep_value"] is None else r["sweep_value"], metric, value])
    return buf.getvalue()


def emit_report(report: Report, path, fmt: str = "json") -> Path:
    if fmt not in ("json", "csv"):
        raise ConfigError(f"unknown format {fmt!r}")
    text = report_json(report) if fmt == "json" else report_csv(report)
    p = Path(path)
    p.write_text(text)
    return p
