"""Hypocoercivity and hypocontractivity indices of complex matrices.

The continuous-time side works with the generator ``B`` of ``x' = -B x``
(accretive when its Hermitian part is positive semi-definite); the
discrete-time side with ``A`` in ``x_{k+1} = A x_k``.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .matcore import *  # noqa: F401,F403
from .staircase import *  # noqa: F401,F403
from .coercivity import *  # noqa: F401,F403
from .contractivity import *  # noqa: F401,F403
from .transforms import *  # noqa: F401,F403
from .analysis import *  # noqa: F401,F403
from .io import MatrixFile, load_matrix_file, dump_matrix_file  # noqa: F401
