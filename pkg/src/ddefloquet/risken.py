"""Tridiagonal continued fraction route to the same closure problem.

Pairing even and odd Fourier indices stacks the banded recurrence into a
block tridiagonal one,

    Q_{-1,n+1} Phi_{n+1} + Q_{0,n} Phi_n + Q_{1,n-1} Phi_{n-1} = 0,

with Phi_n = (phi_{2n}, phi_{2n+1}) and the Q blocks assembled entry by
entry from the same L table the n-diagonal route uses.  Ladder operators
R^+-_n then obey one-directional recursions from the truncation boundary
inward and close the system at block zero.  Kernels wider than
pentadiagonal are first grouped into stacks of ceil(K/2) consecutive
indices, which restores the pentadiagonal pattern, and the same pairing is
applied to the stacks.

This module deliberately computes nothing of its own beyond block
bookkeeping: every matrix entry is read from dde-model's L table, so any
disagreement with the n-diagonal route isolates the continued fraction
iteration itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CfBreakdown, SingularMatrix
from .linalg import determinant, solve_linear
from .model import FourierMatrixDensity, LMatrixTable, build_L
from .rootfind import DEFAULT_BOX, DEFAULT_GRID, find_roots, pad_box_im, strip_shift

__all__ = [
    "TridiagonalBlocks",
    "assemble_blocks",
    "tridiagonal_closure",
    "closure_determinant_risken",
    "find_exponents_risken",
]


def _stack_width(bandwidth: int) -> int:
    return 1 if bandwidth <= 2 else (bandwidth + 1) // 2


@dataclass(frozen=True)
class TridiagonalBlocks:
    """Q blocks of the paired recurrence for one value of lambda."""

    lam: complex
    stack_width: int
    depth: int
    table: LMatrixTable

    @property
    def block_dim(self) -> int:
        return 2 * self.stack_width * self.table.dim

    def _stacked_entry(self, kappa: int, row_stack: int):
        """Coupling of stack row `row_stack` to stack column row_stack - kappa."""
        w0 = self.stack_width
        d = self.table.dim
        out = np.zeros((w0 * d, w0 * d), dtype=complex)
        col_stack = row_stack - kappa
        for r in range(w0):
            p = w0 * row_stack + r
            for c in range(w0):
                q = w0 * col_stack + c
                k = p - q
                if abs(k) > self.table.bandwidth:
                    continue
                block = self.table.get(k, q)
                if k == 0:
                    block = block - (self.lam + 1j * p) * np.eye(d)
                out[r * d : (r + 1) * d, c * d : (c + 1) * d] = block
        return out

    def q_zero(self, n: int) -> np.ndarray:
        a = self._stacked_entry
        top = np.hstack([a(0, 2 * n), a(-1, 2 * n)])
        bot = np.hstack([a(1, 2 * n + 1), a(0, 2 * n + 1)])
        return np.vstack([top, bot])

    def q_minus(self, n: int) -> np.ndarray:
        """Q_{-1,n}: coupling of block row n-1 to block column n."""
        a = self._stacked_entry
        w0d = self.stack_width * self.table.dim
        zero = np.zeros((w0d, w0d), dtype=complex)
        top = np.hstack([a(-2, 2 * n - 2), zero])
        bot = np.hstack([a(-1, 2 * n - 1), a(-2, 2 * n - 1)])
        return np.vstack([top, bot])

    def q_plus(self, n: int) -> np.ndarray:
        """Q_{1,n}: coupling of block row n+1 to block column n."""
        a = self._stacked_entry
        w0d = self.stack_width * self.table.dim
        zero = np.zeros((w0d, w0d), dtype=complex)
        top = np.hstack([a(2, 2 * n + 2), a(1, 2 * n + 2)])
        bot = np.hstack([zero, a(2, 2 * n + 3)])
        return np.vstack([top, bot])

    def residual_of(self, phi_blocks, n: int) -> np.ndarray:
        """Q_{-1,n+1} Phi_{n+1} + Q_{0,n} Phi_n + Q_{1,n-1} Phi_{n-1}."""
        return (
            self.q_minus(n + 1) @ phi_blocks[n + 1]
            + self.q_zero(n) @ phi_blocks[n]
            + self.q_plus(n - 1) @ phi_blocks[n - 1]
        )


def assemble_blocks(
    density: FourierMatrixDensity, lam: complex, depth: int
) -> TridiagonalBlocks:
    """Blocks for |block index| <= depth, backed by a shared L table."""
    lam = complex(lam)
    w0 = _stack_width(density.bandwidth)
    window = 2 * w0 * (depth + 1) + density.bandwidth
    table = build_L(density, lam, window)
    return TridiagonalBlocks(lam=lam, stack_width=w0, depth=depth, table=table)


def tridiagonal_closure(blocks: TridiagonalBlocks, depth: int | None = None):
    """Closure matrix [Q_{-1,1} R^+_0 + Q_{0,0} + Q_{1,-1} R^-_0].

    Both ladder recursions start from R = 0 at the boundary block and are
    exact single sweeps; breakdowns surface as CfBreakdown with the block
    index attached.
    """
    if depth is None:
        depth = blocks.depth
    if depth < 1:
        raise ValueError("depth must be at least 1")
    bd = blocks.block_dim
    r_up = np.zeros((bd, bd), dtype=complex)
    for n in range(depth - 1, -1, -1):
        bracket = blocks.q_minus(n + 2) @ r_up + blocks.q_zero(n + 1)
        try:
            r_up = solve_linear(bracket, -blocks.q_plus(n))
        except SingularMatrix as exc:
            raise CfBreakdown(f"singular block at level {n + 1}", level=n + 1) from exc
    r_down = np.zeros((bd, bd), dtype=complex)
    for n in range(-depth + 1, 1):
        bracket = blocks.q_plus(n - 2) @ r_down + blocks.q_zero(n - 1)
        try:
            r_down = solve_linear(bracket, -blocks.q_minus(n))
        except SingularMatrix as exc:
            raise CfBreakdown(f"singular block at level {n - 1}", level=n - 1) from exc
    return blocks.q_minus(1) @ r_up + blocks.q_zero(0) + blocks.q_plus(-1) @ r_down


def closure_determinant_risken(
    density: FourierMatrixDensity, lam: complex, depth: int
) -> complex:
    blocks = assemble_blocks(density, lam, depth)
    return complex(determinant(tridiagonal_closure(blocks)))


def find_exponents_risken(
    density: FourierMatrixDensity,
    box=DEFAULT_BOX,
    depth: int = 10,
    tol: float = 1e-10,
    grid=DEFAULT_GRID,
    threads: int | None = None,
):
    """Strip representatives of the closure determinant roots in `box`.

    Stacking makes the closure determinant periodic under lambda ->
    lambda + 2i w0, and each exponent class only produces zeros at the
    translates where a dominant Fourier component enters the block zero
    unknown; the scan band is therefore widened by one stack period in the
    imaginary direction (with a proportionally refined grid) and converged
    roots are kept whenever their strip representative falls in `box`.
    Returns (strip root, raw root) pairs sorted by (-Re, Im).
    """

    def det_at(lam):
        return closure_determinant_risken(density, lam, depth)

    # the closure determinant is periodic under lambda -> lambda + 2 i w0,
    # so a band of height 2 w0 plus margin is guaranteed to contain a zero
    # of every class
    w0 = _stack_width(density.bandwidth)
    sb, wide, wide_grid = pad_box_im(box, grid, w0 + 0.5)

    def accept(z):
        return sb.contains(z, slack=1e-6) or sb.contains(
            z - 1j * strip_shift(z), slack=1e-6
        )

    raw = find_roots(
        det_at, box=wide, grid=wide_grid, tol=tol, threads=threads, accept=accept
    )
    by_class: dict = {}
    for root, ok in raw:
        if not ok:
            continue
        strip = root - 1j * strip_shift(root)
        key = None
        for existing in by_class:
            if abs(strip - existing) <= 10 * tol:
                key = existing
                break
        if key is None:
            by_class[strip] = root
        elif abs(root.imag) < abs(by_class[key].imag):
            by_class[key] = root
    out = [(root - 1j * strip_shift(root), root) for root in by_class.values()]
    out.sort(key=lambda t: (-t[0].real, t[0].imag))
    return out
