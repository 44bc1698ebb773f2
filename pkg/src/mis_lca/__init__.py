"""Maximal independent set by local computation: a global reference run of the
marking algorithm, a probe-counted per-vertex LCA that reproduces it, a
residual completion step, baselines and an experiment harness."""

from .graph import Graph, GraphError, Oracle, generate_graph, load_edge_list, save_edge_list
from .tape import Params, initial_exponent, is_marked, rho
from .states import NodeRoundState, Phase1Status, Status, Verdict
from .reference import Outcome, assert_influence_bounds, initialize, run, run_round
from .diagnostics import classify_rounds
from .lca import (Answer, QuestionContext, answer, answer_all, greedy_complete, phase1_status,
                  residual_component, simulate_node)
from .baselines import ball_simulate_answer, rgmis_answer
from .harness import ExperimentConfig, Report, emit_report, run_experiment, verify_mis
from .estimators import GreedyMIS, LocalMIS, MarkingSimulator

__all__ = [
    "Graph",
    "GraphError",
    "Oracle",
    "generate_graph",
    "load_edge_list",
    "save_edge_list",
    "Params",
    "initial_exponent",
    "is_marked",
    "rho",
    "NodeRoundState",
    "Phase1Status",
    "Status",
    "Verdict",
    "Outcome",
    "assert_influence_bounds",
    "initialize",
    "run",
    "run_round",
    "classify_rounds",
    "Answer",
    "QuestionContext",
    "answer",
    "answer_all",
    "greedy_complete",
    "phase1_status",
    "residual_component",
    "simulate_node",
    "ball_simulate_answer",
    "rgmis_answer",
    "ExperimentConfig",
    "Report",
    "emit_report",
    "run_experiment",
    "verify_mis",
    "GreedyMIS",
    "LocalMIS",
    "MarkingSimulator",
]

__version__ = "0.1.0"
