"""Dealiased pseudospectral advection B(u, v) = Pi[(u . grad) v]."""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .spectral import GridSpec, ConfigError, inner, project_leray


def dealias_mask(grid: GridSpec) -> np.ndarray:
    """Boolean mask of modes kept after a product (the retained Galerkin set)."""
    return grid.retained


def _check_pair(grid, uh, vh):
    if uh.shape[-3:] != grid.shape or vh.shape[-3:] != grid.shape:
        raise ConfigError(
            f"fields {uh.shape} and {vh.shape} do not live on grid N={grid.N}"
        )


def advect(
    grid: GridSpec,
    uh: np.ndarray,
    vh: np.ndarray,
    dealias: bool = True,
    return_physical: bool = False,
):
    """Pseudospectral B(u, v), batched over leading axes.

    u and grad v are taken to physical space, multiplied pointwise, brought
    back, masked to the retained modes and Leray-projected. With
    ``return_physical`` the physical samples of u are returned as well, so
    callers can reuse them for L^4 quadrature.
    """
    _check_pair(grid, uh, vh)
    ikap = 1j * grid.kappa
    # grad v: dv[..., i, j] = d_j v_i
    dvh = vh[..., :, None, :, :] * ikap[:, :, :]
    phys = sfft.ifft2(
        np.concatenate([uh, dvh.reshape(dvh.shape[:-4] + (4,) + dvh.shape[-2:])], axis=-3),
        norm="forward",
    ).real
    u = phys[..., 0:2, :, :]
    dv = phys[..., 2:6, :, :]
    adv = np.empty(u.shape)
    adv[..., 0, :, :] = u[..., 0, :, :] * dv[..., 0, :, :] + u[..., 1, :, :] * dv[..., 1, :, :]
    adv[..., 1, :, :] = u[..., 0, :, :] * dv[..., 2, :, :] + u[..., 1, :, :] * dv[..., 3, :, :]
    advh = sfft.fft2(adv, norm="forward")
    if dealias:
        advh *= grid.retained
    out = project_leray(grid, advh)
    if return_physical:
        return out, u
    return out


def bilinear_B(grid: GridSpec, uh: np.ndarray, vh: np.ndarray, dealias: bool = True) -> np.ndarray:
    return advect(grid, uh, vh, dealias=dealias)


def trilinear_form(
    grid: GridSpec, uh: np.ndarray, vh: np.ndarray, wh: np.ndarray, dealias: bool = True
) -> np.ndarray:
    """<B(u, v), w> in the L^2 inner product."""
    _check_pair(grid, uh, wh)
    return inner(grid, advect(grid, uh, vh, dealias=dealias), wh)
