"""Gauss-Legendre helpers shared by the quadrature routines."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_nodes(a, b, n):
    """Nodes and weights of the n-point rule on [a, b].

    ``a`` and ``b`` may be arrays; the node axis is appended last.
    """
    x, w = gauss_legendre(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_nodes(edges, n):
    """Composite rule over consecutive intervals of ``edges`` (last axis)."""
    edges = np.asarray(edges, dtype=float)
    xs, ws = gl_nodes(edges[..., :-1], edges[..., 1:], n)
    shape = xs.shape[:-2] + (xs.shape[-2] * xs.shape[-1],)
    return xs.reshape(shape), ws.reshape(shape)
