# Algebra package initialization
from app.algebra.errors import AlgebraError
from app.algebra.gf2 import Gf2Matrix, GradedKComplex, build_contraction, homology_dims
from app.algebra.graded import ExtElement, GradedPoly, Monomial
from app.algebra.dg_module import DgLambdaModule, DgSModule, Window, homology_of_s_module
from app.algebra.equivariant import FreeGComplex, builtin, to_lambda_module
from app.algebra.koszul import TwistedModel, carlsson_minimal, minimal_hirsch_brown
from app.algebra.operad import PathSequence, PlanarTree, bar_homology, normal_form, wtilde_basis

__all__ = [
    'AlgebraError',
    'Gf2Matrix', 'GradedKComplex', 'build_contraction', 'homology_dims',
    'ExtElement', 'GradedPoly', 'Monomial',
    'DgLambdaModule', 'DgSModule', 'Window', 'homology_of_s_module',
    'FreeGComplex', 'builtin', 'to_lambda_module',
    'TwistedModel', 'carlsson_minimal', 'minimal_hirsch_brown',
    'PathSequence', 'PlanarTree', 'bar_homology', 'normal_form', 'wtilde_basis',
]
