"""Exact experiments on contracting geodesics and the Morse boundary of
small Cayley graphs."""
from .boundary import (BoundaryPoint, Verdict, dl_stratum, experiment_clopen,
                       experiment_flat_excursions, membership_U, membership_V,
                       membership_V_prime, rho_zeta, separation)
from .constants import (ConstantBundle, SublinearFn, escape_constants, kappa, kappa_prime,
                        lambda_, psi, witness_bounds)
from .contraction import (ContractionProfile, check_contracting, morse_profile, profile,
                          recurrence, uniformity_profile)
from .kernels import BACKEND
from .projection import project, set_diam
from .reports import CheckReport, report_schema_version
from .space import (LineSchema, PathSeg, RaySchema, SpaceSpec, build_space, check_qg,
                    enumerate_geodesics, geodesic, tame)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoundaryPoint", "CheckReport", "ConstantBundle", "ContractionProfile",
    "LineSchema", "PathSeg", "RaySchema", "SpaceSpec", "SublinearFn", "Verdict",
    "build_space", "check_contracting", "check_qg", "dl_stratum", "enumerate_geodesics",
    "escape_constants", "experiment_clopen", "experiment_flat_excursions", "geodesic",
    "kappa", "kappa_prime", "lambda_", "membership_U", "membership_V", "membership_V_prime",
    "morse_profile", "profile", "project", "psi", "recurrence", "report_schema_version",
    "rho_zeta", "separation", "set_diam", "tame", "uniformity_profile", "witness_bounds",
]
