"""Quasi-projection operators on expansive dilation lattices."""
from . import analyzers, conditions, dilation, field, kernels
from .analyzers import Delta, Differential, FunctionKernel
from .dilation import DilationMatrix
from .kernels import BSplineTensor, CustomKernel, WindowedSinc

__version__ = "0.1.0"
