"""Exact ingredients of character formulas for tame supercuspidal representations of GL_n.

The package is organised bottom-up:

* ``exactnum``: cyclotomic numbers and square roots of prime powers;
* ``ffield``: finite fields, linear algebra and polynomials over them;
* ``forms``: (eps, tau)-Hermitian forms, Witt indices, trace forms;
* ``gauss``: quadratic Gauss sums, closed form and brute force;
* ``weil``: Weil representations of finite symplectic groups and the eps sign;
* ``padic`` and ``tame``: tame extensions of Q_p, Moy-Prasad filtrations,
  normal approximations and filtration-group orders;
* ``rootsets``: root orbits of tame tori, Gauss-sum signs and magnitudes;
* ``assembler``: cuspidal data and the symbolic character formula.
"""

from .exactnum import CycNumber, QPowerSqrt, cyc_embed, cyc_equal
from .ffield import FqElement, FqField, GF, get_field
from .forms import SesquiForm, witt_decompose, witt_index_formula
from .gauss import gauss_bruteforce, gauss_closed
from .padic import PadicMatrix, PrecisionError, TameElement, TameTower, get_tower
from .tame import Depth, FiltrationGroupSpec, NormalApproximation, Subalgebra, normal_approx
from .rootsets import GenericCharacterData, TameTorus, classify_roots
from .assembler import CharFormula, CuspidalDatum, LevelCharacter, assemble_full_char

__version__ = "0.1.0"

__all__ = [
    "CharFormula",
    "CuspidalDatum",
    "CycNumber",
    "Depth",
    "FiltrationGroupSpec",
    "FqElement",
    "FqField",
    "GF",
    "GenericCharacterData",
    "LevelCharacter",
    "NormalApproximation",
    "PadicMatrix",
    "PrecisionError",
    "QPowerSqrt",
    "SesquiForm",
    "Subalgebra",
    "TameElement",
    "TameTorus",
    "TameTower",
    "assemble_full_char",
    "classify_roots",
    "cyc_embed",
    "cyc_equal",
    "gauss_bruteforce",
    "gauss_closed",
    "get_field",
    "get_tower",
    "normal_approx",
    "witt_decompose",
    "witt_index_formula",
]
