"""Exact algebra over F_p: graded p-polar algebras, Witt and co-Witt vectors,
F-modules, Dieudonne modules, cofree Hopf algebras and Dyer-Lashof words."""

from .graded import (GradedAlgebra, GradedModule, ValidationError, algebra_from_json,
                     check_algebra, ground_field, make_preset, monomial_algebra, polynomial,
                     standard_presets, tensor_product)
from .polar import (PolarAlgebra, check_assoc, free_polar, hull, is_p_polar, p_typical_split,
                    polar_from_json, polarity_report, polarize)
from .witt import (CoWitt, WittResourceError, WittVector, cowitt_u, frobenius, ghost,
                   teichmuller, verschiebung, witt_add, witt_sub, witt_sum_polys)
from .fmodule import (Barcode, FModule, VModule, decompose, dualize, fmodule_from_json,
                      lift_to_polar, reconstruct, u_f)
from .dieudonne import (DieudonneModule, check_dieudonne, cowitt_dieudonne, is_isomorphic,
                        module_from_json)
from .hopf import (HopfAlgebra, check_hopf, cof_u, counterexample_pair, exterior_hopf,
                   lambda_p, primitives, symmetric_tensor_coalgebra, verify_cofree)
from .dyer_lashof import (DLExpression, DLMonomial, adem_rewrite, admissible_basis,
                          apply_instability, cartan_expand, dl_degree)

__version__ = "0.1.0"
