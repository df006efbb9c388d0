"""Matrix elements of powers of sparse Hermitian matrices via simulated quantum walks."""

from .chebyshev import ChebyshevWeights, TruncationPlan, apply_chebyshev, expected_order, truncation_plan, weights
from .errors import (HermiticityError, HermPowerError, NonHermitianMethodError, ParseError,
                     PreconditionError, StructuralError)
from .fourier import (FourierCoefficients, HarmonicPlan, coefficients, evolution_overlap,
                      harmonics_needed, power_overlaps, scalar_series_eval)
from .ledger import EstimateReport, QueryLedger, ledger_charge_walk_step
from .matrix import (GeneralSparseMatrix, NormBounds, SparseHermitianMatrix, ValidationReport,
                     gen_cycle_walk, gen_parity_chain, gen_parity_chain_irreducible, gen_random_stable,
                     one_norm, parity_delta, scale_to_contraction, validate)
from .overlap import (RankOneDecomposition, decompose, dense_power_oracle, matrix_power_element,
                      montecarlo_stochastic)
from .walk import (WalkOperators, WalkSpace, build_lcu_operators, build_operators, hadamard_sample,
                   lcu_estimate, walk_identity_residual, sampling_estimate)

__version__ = "0.1.0"
