"""Numba plumbing shared by the kernels.

Every data-parallel kernel is compiled twice: once as a plain ``njit``
function (``prange`` degrades to ``range``) and once with
``parallel=True``.  ``threads == 1`` always dispatches to the serial twin.
"""
from __future__ import annotations

import contextlib
import types as _pytypes

import numba
from numba import njit, types
from numba.core import cgutils
from numba.extending import intrinsic

__all__ = ["Kernel", "kernel", "max_threads", "thread_limit", "atomic_cas"]


def _clone(fn, suffix):
    g = _pytypes.FunctionType(
        fn.__code__, fn.__globals__, fn.__name__ + suffix, fn.__defaults__, fn.__closure__
    )
    g.__qualname__ = fn.__qualname__ + suffix
    g.__module__ = fn.__module__
    g.__doc__ = fn.__doc__
    return g


class Kernel:
    """Serial/parallel pair of compiled versions of one Python function."""

    def __init__(self, fn):
        self.py_func = fn
        self.serial = njit(cache=True)(_clone(fn, "_ser"))
        self.parallel = njit(cache=True, parallel=True)(_clone(fn, "_par"))

    def __call__(self, threads, *args):
        if threads <= 1:
            return self.serial(*args)
        with thread_limit(threads):
            return self.parallel(*args)


def kernel(fn):
    return Kernel(fn)


def max_threads() -> int:
    return int(numba.config.NUMBA_NUM_THREADS)


@contextlib.contextmanager
def thread_limit(threads: int):
    old = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(threads), max_threads())))
    try:
        yield
    finally:
        numba.set_num_threads(old)


@intrinsic
def atomic_cas(typingctx, arr, idx, expected, desired):
    """Compare-and-swap ``arr[idx]``; returns the value seen before the swap."""
    if not isinstance(arr, types.Array) or not isinstance(arr.dtype, types.Integer):
        return None
    sig = arr.dtype(arr, idx, expected, desired)

    def codegen(context, builder, signature, args):
        arr_v, idx_v, exp_v, des_v = args
        aryty = signature.args[0]
        ary = context.make_array(aryty)(context, builder, arr_v)
        idx_v = context.cast(builder, idx_v, signature.args[1], types.intp)
        exp_v = context.cast(builder, exp_v, signature.args[2], aryty.dtype)
        des_v = context.cast(builder, des_v, signature.args[3], aryty.dtype)
        ptr = cgutils.get_item_pointer(context, builder, aryty, ary, [idx_v], wraparound=False)
        res = builder.cmpxchg(ptr, exp_v, des_v, "seq_cst", "seq_cst")
        return builder.extract_value(res, 0)

    return sig, codegen
