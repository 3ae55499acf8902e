"""Color morphology from a learned consensus of reduced orderings.

Submodules:

- ``ordering``: reduced mappings, induced pre-orders, rank look-up tables
- ``morphology``: flat erosion/dilation/opening/closing on rank images
- ``voting``: vote margins, Kemeny objective, exact solver, Borda rule
- ``sco``: soft Condorcet optimization and the learned 3-64-1 mapping
- ``evaluation``: irregularity index, Wilcoxon tests, Hasse diagrams
- ``imageio`` / ``experiment`` / ``cli``: files, protocol, command line
"""
from .errors import (
    ConfigError,
    DataFormatError,
    DimensionError,
    InvalidOrderError,
    LutLookupError,
    NumericError,
    ProblemTooLargeError,
)
from .evaluation import global_irregularity, hasse_from_tests, wilcoxon_signed_rank
from .morphology import StructuringElement, closing, dilate, erode, opening
from .ordering import (
    LexMapping,
    LinearMapping,
    RankLut,
    TableMapping,
    build_rank_lut,
    eval_lex_mapping,
    induced_compare,
    lex_mappings,
    rank_decode,
    rank_encode,
)
from .sco import MlpMapping, MlpParams, SoftConfig, sco_scores, train
from .voting import (
    BordaRule,
    borda_mapping,
    borda_scores,
    exact_condorcet_order,
    kemeny_objective,
    margin_matrix_from_mappings,
    margin_matrix_from_orders,
)

__version__ = "0.1.0"
