"""Batch command line front end.

Subcommands:
  plan       solve a scene for a budget, write solution JSON + path OBJ
  evaluate   score a recorded path, write report JSON + quality PLY
  gen-scene  generate a procedural scene bundle

Exit codes: 0 success, 2 validation error, 3 infeasible or undefined metric.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .evaluator import RecordedPath, evaluate
from .geometry import write_obj_polyline, write_ply_with_quality
from .planner import (DEFAULT_KAPPA, PlanningProblem, UndefinedMetricError,
                      gcb, gcb_plus)
from .quality import quality_matrix
from .scenes import SCENE_OBJECTS, Scene, generate_scene
from .viewgraph import InfeasiblePathError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3


def _cmd_plan(args):
    scene = Scene.load(args.scene)
    qm = quality_matrix(scene.points, scene.graph.poses, scene.mesh,
                        scene.cam, scene.model)
    problem = PlanningProblem(graph=scene.graph, qm=qm,
                              cost_model=scene.cost_model, budget=args.budget)
    base = gcb(problem)
    solution = gcb_plus(problem, base) if not args.no_improve else base
    out = Path(args.out)
    out.write_text(solution.to_json())
    if args.obj:
        positions = [scene.graph.poses[i].position for i in solution.order]
        write_obj_polyline(args.obj, [("auto_path", positions)])
    print(f"f={solution.f_value:.4f} cost={solution.cost:.4f} "
          f"poses={len(solution.order)}")
    return EXIT_OK


def _cmd_evaluate(args):
    scene = Scene.load(args.scene)
    path = RecordedPath.from_json(Path(args.path).read_text())
    report = evaluate(path, scene.mesh, scene.points, scene.cam, scene.model,
                      scene.graph, scene.cost_model,
                      spacing=args.spacing, d_link=args.d_link,
                      kappa=args.kappa)
    Path(args.out).write_text(report.to_json())
    if args.ply:
        write_ply_with_quality(args.ply, scene.mesh, report.per_point_quality)
    if args.obj:
        write_obj_polyline(args.obj, [
            ("user_path", path.positions()),
            ("auto_path", np.array(report.auto_positions).reshape(-1, 3)),
        ])
    print(f"qr={report.quality_ratio:.4f} user_f={report.user_f:.4f} "
          f"gcb_plus_f={report.gcb_plus_f:.4f} budget={report.user_cost:.4f}")
    return EXIT_OK


def _cmd_gen_scene(args):
    scene = generate_scene(args.object, name=args.object,
                           chain_preset=args.chain, stride=args.stride)
    scene.save(args.out)
    print(f"scene '{scene.name}' written to {args.out} "
          f"({scene.mesh.n_vertices} vertices, {scene.graph.k} poses)")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="inspectplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve a scene for a budget")
    p.add_argument("scene", help="scene bundle directory")
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--out", required=True, help="solution JSON output")
    p.add_argument("--obj", help="optional path OBJ output")
    p.add_argument("--no-improve", action="store_true",
                   help="skip the improvement pass")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_plan)

    p = sub.add_parser("evaluate", help="score a recorded path")
    p.add_argument("scene")
    p.add_argument("--path", required=True, help="recorded path JSON")
    p.add_argument("--out", required=True, help="report JSON output")
    p.add_argument("--ply", help="optional per-vertex quality PLY")
    p.add_argument("--obj", help="optional user/auto path OBJ")
    p.add_argument("--spacing", type=float, default=None)
    p.add_argument("--d-link", type=float, default=None)
    p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("gen-scene", help="generate a procedural scene bundle")
    p.add_argument("--object", choices=SCENE_OBJECTS, required=True)
    p.add_argument("--out", required=True, help="scene bundle directory")
    p.add_argument("--chain", default=None,
                   help="bundled chain preset name, e.g. kr16-like")
    p.add_argument("--stride", type=int, default=None,
                   help="candidate stride; default depends on the object")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_gen_scene)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (InfeasiblePathError, UndefinedMetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
