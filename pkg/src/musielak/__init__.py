"""Generalized Musielak-Orlicz sequence spaces l_Phi^A(X): modulars, Luxemburg
norms, matrix-kernel diagnostics, s-numbers and property harnesses."""

from ._backend import BACKEND
from .errors import (DegeneracyError, DivergenceError, DomainError, MusielakError,
                     PreconditionError, RangeError, TruncationError, UsageError,
                     ValidationError)
from .matrix import (MatrixKernel, column_lphi_norm, entry, estimate_condition_M,
                     in_class_A, is_triangle)
from .orlicz import (ConditionWitness, Exponents, MusielakFamily, OrliczFunction,
                     check_convexity_monotonicity, check_delta2_family,
                     check_delta2_zero, check_star_condition, check_superadditive,
                     evaluate)
from .snumbers import (FiniteOperator, RankOneOperator, SNumberSequence,
                       ideal_quasi_norm, operator_norm, singular_values)
from .space import (ModularValue, NormResult, TruncationPolicy, VectorNorm,
                    VectorSequence, luxemburg, luxemburg_norm, membership_diagnostic,
                    modular, rearrangement, row_image, section, tail_section)

__version__ = "0.1.0"
