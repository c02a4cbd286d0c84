from polydg.solver.driver import SolveOutcome, condense_cell, solve_problem
from polydg.solver.skeleton import (
    EdgeCoefficients,
    SkeletonSpace,
    apply_neumann,
    build_skeleton_space,
)
from polydg.solver.solution import DGSolution, reconstruct, save_solution
from polydg.solver.system import GlobalSolution, SkeletonSystem, assemble_global, solve_global
