from .brute_force import (BruteForceResult, bass_law_value,
                          brute_force_bass_measure)
from .finite_difference import fd_gradient, fd_second

__all__ = [
    fd_gradient, fd_second,
    BruteForceResult, bass_law_value, brute_force_bass_measure,
]
