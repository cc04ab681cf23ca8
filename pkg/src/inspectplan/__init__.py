"""Inspection path planning and evaluation engine.

Core pieces:
  geometry    - OBJ/PLY loading, surface points with normals
  visibility  - software depth-buffer visibility + ray-cast oracle
  quality     - measurement quality models, quality matrix, objective
  viewgraph   - candidate poses, weighted workspace graph, metric closure
  planner     - greedy cost-benefit solver (GCB / GCB+), brute-force oracle
  evaluator   - scoring of human-recorded paths against budget-matched plans
  kinematics  - serial-chain FK and damped least squares IK
  scenes      - procedural test objects and scene bundles
  service     - FastAPI session service
  cli         - batch command line front end
"""

__version__ = "0.1.0"
