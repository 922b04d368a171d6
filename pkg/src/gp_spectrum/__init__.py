"""Complex spectrum of the Gurtin-Pipkin equation for the kernel ``a_k = k**-alpha``, ``b_k = k**beta``."""

__version__ = "0.1.0"

from .errors import SpectrumError  # noqa: E402
from .kernel import (  # noqa: E402
    KernelEval,
    KernelParams,
    SectorSpec,
    asymptotic_K,
    euler_integral,
    eval_h,
    eval_K,
    eval_Kprime,
)
from .charfunc import ModeProblem, SpectrumPoint, char_fn, g_map, solve_mode, solve_range  # noqa: E402
from .asymptotics import Prediction, fit_remainder, predict  # noqa: E402

__all__ = [
    "SpectrumError",
    "KernelEval",
    "KernelParams",
    "SectorSpec",
    "asymptotic_K",
    "euler_integral",
    "eval_h",
    "eval_K",
    "eval_Kprime",
    "ModeProblem",
    "SpectrumPoint",
    "char_fn",
    "g_map",
    "solve_mode",
    "solve_range",
    "Prediction",
    "fit_remainder",
    "predict",
]
