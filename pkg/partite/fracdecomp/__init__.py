"""partite.fracdecomp - fractional clique decompositions of balanced r-partite graphs."""

from .backend import EXACT_BACKEND, FLOAT_BACKEND, NumericBackend, get_backend
from .cliques import CliqueIndex, bounds_report, enumerate_cliques
from .errors import FracDecompError
from .gadgets import (
    StarGadgetSpec,
    SwapGadgetSpec,
    split_corrections,
    star_gadget,
    swap_gadget,
)
from .graph import PartiteGraph, VertexId, generate_divisible, summarize
from .oracle import lp_feasible, verify
from .transport import (
    AnchorMode,
    concentrate_on_clique,
    decompose,
    move_vertex_into_set,
    sweep_into_set,
)
from .weighting import CliqueWeighting, CorrectionField, corrections, uniform_init

__version__ = "2024.1.0"

__all__ = [
    "AnchorMode",
    "CliqueIndex",
    "CliqueWeighting",
    "CorrectionField",
    "EXACT_BACKEND",
    "FLOAT_BACKEND",
    "FracDecompError",
    "NumericBackend",
    "PartiteGraph",
    "StarGadgetSpec",
    "SwapGadgetSpec",
    "VertexId",
    "__version__",
    "bounds_report",
    "concentrate_on_clique",
    "corrections",
    "decompose",
    "enumerate_cliques",
    "generate_divisible",
    "get_backend",
    "lp_feasible",
    "move_vertex_into_set",
    "split_corrections",
    "star_gadget",
    "summarize",
    "swap_gadget",
    "sweep_into_set",
    "uniform_init",
    "verify",
]
