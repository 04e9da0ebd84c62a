"""Data-driven uncertainty sets, loadability sets and flexibility metrics for DC networks."""

from ._backend import BACKEND
from .ddio import DdioResult, InverseCertificate, ddio_assess, ddio_subproblem, \
    recover_certificate, rho_sweep
from .errors import ConfigError, FlexcertError, NumericalError
from .loadability import ProjectionReport, fme_eliminate, is_redundant, mc_volume, \
    project_loadability, remove_redundant
from .lp import LinearProgram, LpOutcome, Status, solve
from .network import BaResult, NetworkCase, assemble_gd_polytope, bundled_case, \
    compute_ptdf, load_case, load_commitment, solve_ba
from .numerics import cholesky, sym_eigen
from .polyhedron import HPolyhedron
from .uncertainty import BoxSet, Pus, build_pus, pus_contains, pus_to_hrep, synth_generate

__version__ = "0.1.0"
