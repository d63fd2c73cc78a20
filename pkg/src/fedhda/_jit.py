"""JIT shim: use numba when available, fall back to plain Python.

The arithmetic coder and the Viterbi forward pass are tight sequential
loops; numba makes them fast enough for Monte-Carlo sweeps. Without
numba everything still runs, just slowly.
"""

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


__all__ = ["njit"]
