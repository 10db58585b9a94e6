import numpy as np
import pytest

from eev.spectral import (
    GridSpec,
    PhysicalVector,
    SpectralField,
    dealias,
    l2_norm_sq,
    leray_project,
    to_spectral,
)


def band_limit(f: SpectralField, max_mode: int) -> SpectralField:
    """Keep only modes with every |m_i| <= max_mode."""
    keep = np.ones(f.grid.spectral_shape, dtype=bool)
    for m in f.grid.modes:
        keep &= np.abs(m) <= max_mode
    return SpectralField(f.grid, f.coeffs * keep, f.is_divergence_free, f.is_dealiased)


def random_field(grid: GridSpec, seed: int, max_mode: int = 4, rms: float = 1.0,
                 solenoidal: bool = True) -> SpectralField:
    """Smooth random mean-zero field, band-limited, optionally divergence-free."""
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((grid.dim,) + grid.phys_shape)
    f = band_limit(to_spectral(PhysicalVector(grid, values)), max_mode)
    f = dealias(f)
    if solenoidal:
        f = leray_project(f)
    scale = np.sqrt(l2_norm_sq(f, volume_normalized=True))
    if scale > 0:
        f = f.copy(coeffs=f.coeffs * (rms / scale))
    return f


@pytest.fixture
def grid2d():
    return GridSpec(dim=2, n=32, box_len=2.0 * np.pi)


@pytest.fixture
def grid3d():
    return GridSpec(dim=3, n=16, box_len=2.0 * np.pi)
