"""Fourier representation of periodic vector fields and spectral calculus.

Fields live on the periodic box (0, box_len)^dim and are stored as truncated
Fourier coefficients in the numpy ``rfftn`` layout (half-spectrum along the
last axis, Hermitian symmetry implicit).  Coefficients are normalized so that
u(x) = sum_k uhat(k) exp(i k.x); with that convention Parseval reads

    (1/|Omega|) int |u|^2 dx = sum_k w_k |uhat_k|^2

where w_k is 2 on modes whose conjugate partner is not stored and 1 on the
self-conjugate planes.  All fields handled here are real, mean-zero vector
fields; the velocity additionally carries a divergence-free flag maintained
by the Leray projector.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, ContractViolationError

TWO_THIRDS = 2.0 / 3.0


def _axes(grid, arr):
    """Spatial FFT axes of ``arr`` (trailing ``grid.dim`` axes)."""
    return tuple(range(arr.ndim - grid.dim, arr.ndim))


@dataclass(frozen=True)
class GridSpec:
    """Uniform collocation grid for the periodic box (0, box_len)^dim.

    Wavevectors are k = (2*pi/box_len)*m with integer m, |m_i| <= n/2.
    """

    dim: int
    n: int
    box_len: float
    dealias_fraction: float = TWO_THIRDS
    # derived, filled in __post_init__
    k: tuple = field(init=False, repr=False, compare=False)
    modes: tuple = field(init=False, repr=False, compare=False)
    k_sq: np.ndarray = field(init=False, repr=False, compare=False)
    dealias_mask: np.ndarray = field(init=False, repr=False, compare=False)
    parseval_weight: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigurationError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2 != 0:
            raise ConfigurationError(f"n must be even and >= 8, got {self.n}")
        if self.box_len <= 0:
            raise ConfigurationError("box_len must be positive")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ConfigurationError("dealias_fraction must lie in (0, 1]")

        n, d = self.n, self.dim
        k0 = 2.0 * np.pi / self.box_len
        modes = []
        for ax in range(d):
            if ax == d - 1:
                m = np.fft.rfftfreq(n, 1.0 / n)
            else:
                m = np.fft.fftfreq(n, 1.0 / n)
            shape = [1] * d
            shape[ax] = m.size
            modes.append(m.reshape(shape))
        object.__setattr__(self, "modes", tuple(modes))
        object.__setattr__(self, "k", tuple(k0 * m for m in modes))
        object.__setattr__(self, "k_sq", sum((k0 * m) ** 2 for m in modes))

        cutoff = self.dealias_fraction * (n / 2)
        mask = np.ones(self.spectral_shape, dtype=bool)
        for m in modes:
            mask &= np.abs(m) <= cutoff
        object.__setattr__(self, "dealias_mask", mask)

        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        w[..., -1] = 1.0  # last rfft entry is the Nyquist plane (n even)
        object.__setattr__(self, "parseval_weight", w)

    @property
    def phys_shape(self):
        return (self.n,) * self.dim

    @property
    def spectral_shape(self):
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def dx(self):
        return self.box_len / self.n

    @property
    def volume(self):
        return self.box_len**self.dim

    @property
    def n_points(self):
        return self.n**self.dim

    def coords(self):
        """Broadcastable physical coordinates x_i in [0, box_len)."""
        x = np.linspace(0.0, self.box_len, self.n, endpoint=False)
        out = []
        for ax in range(self.dim):
            shape = [1] * self.dim
            shape[ax] = self.n
            out.append(x.reshape(shape))
        return tuple(out)


@dataclass(frozen=True)
class PhysicalScalar:
    """Real scalar samples on the collocation grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.phys_shape:
            raise ConfigurationError(
                f"scalar shape {self.values.shape} != grid {self.grid.phys_shape}"
            )


@dataclass(frozen=True)
class PhysicalVector:
    """Real vector samples on the collocation grid, shape (dim, n, ..., n)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        expected = (self.grid.dim,) + self.grid.phys_shape
        if self.values.shape != expected:
            raise ConfigurationError(
                f"vector shape {self.values.shape} != expected {expected}"
            )


@dataclass(frozen=True)
class SpectralField:
    """Mean-zero real vector field as truncated Fourier coefficients."""

    grid: GridSpec
    coeffs: np.ndarray  # complex, shape (dim,) + grid.spectral_shape
    is_divergence_free: bool = False
    is_dealiased: bool = False

    def __post_init__(self):
        expected = (self.grid.dim,) + self.grid.spectral_shape
        if self.coeffs.shape != expected:
            raise ConfigurationError(
                f"coefficient shape {self.coeffs.shape} != expected {expected}"
            )

    def copy(self, **changes):
        return replace(self, **changes)


def zero_mean(coeffs, grid):
    """Zero the k = 0 mode in place and return the array."""
    idx = (Ellipsis,) + (0,) * grid.dim
    coeffs[idx] = 0.0
    return coeffs


def to_physical(f: SpectralField) -> PhysicalVector:
    """Inverse transform to collocation values."""
    values = np.fft.irfftn(f.coeffs, s=f.grid.phys_shape, axes=_axes(f.grid, f.coeffs))
    return PhysicalVector(f.grid, values * f.grid.n_points)


def to_spectral(g: PhysicalVector) -> SpectralField:
    """Forward transform; the zero mode is re-zeroed (fields are mean-zero)."""
    coeffs = np.fft.rfftn(g.values, axes=_axes(g.grid, g.values)) / g.grid.n_points
    zero_mean(coeffs, g.grid)
    return SpectralField(g.grid, coeffs)


def scalar_to_grid(coeffs, grid):
    """Inverse transform of one scalar coefficient array (internal helper)."""
    return np.fft.irfftn(coeffs, s=grid.phys_shape, axes=_axes(grid, coeffs)) * grid.n_points


def grid_to_scalar(values, grid):
    """Forward transform of one scalar grid array (internal helper)."""
    return np.fft.rfftn(values, axes=_axes(grid, values)) / grid.n_points


def gradient(f: SpectralField) -> np.ndarray:
    """Spectral gradient tensor, entry [i, j] = coefficients of d f_i / d x_j."""
    d = f.grid.dim
    out = np.empty((d, d) + f.grid.spectral_shape, dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i, j] = 1j * f.grid.k[j] * f.coeffs[i]
    return out


def gradient_grids(f: SpectralField) -> np.ndarray:
    """Gradient tensor evaluated on the collocation grid, shape (dim, dim, *phys)."""
    return scalar_to_grid(gradient(f), f.grid)


def divergence(f: SpectralField) -> np.ndarray:
    """Spectral divergence (scalar coefficient array)."""
    return sum(1j * f.grid.k[i] * f.coeffs[i] for i in range(f.grid.dim))


def leray_project(f: SpectralField) -> SpectralField:
    """Project onto divergence-free fields: uhat -= k (k.uhat) / |k|^2, k != 0."""
    grid = f.grid
    k_sq_safe = np.where(grid.k_sq == 0.0, 1.0, grid.k_sq)
    k_dot_u = sum(grid.k[i] * f.coeffs[i] for i in range(grid.dim))
    coeffs = np.array([f.coeffs[i] - grid.k[i] * k_dot_u / k_sq_safe for i in range(grid.dim)])
    zero_mean(coeffs, grid)
    return SpectralField(grid, coeffs, is_divergence_free=True, is_dealiased=f.is_dealiased)


def dealias(f: SpectralField) -> SpectralField:
    """Zero every coefficient with any |m_i| above dealias_fraction * n/2."""
    coeffs = f.coeffs * f.grid.dealias_mask
    return SpectralField(
        f.grid, coeffs, is_divergence_free=f.is_divergence_free, is_dealiased=True
    )


def _check_same_grid(f, g):
    if f.grid is not g.grid and f.grid != g.grid:
        raise ConfigurationError("fields live on different grids")


def l2_norm_sq(f: SpectralField, volume_normalized: bool = False) -> float:
    """||f||^2 = int |f|^2 dx via Parseval; (1/|Omega|)-normalized on request."""
    s = float(np.sum(f.grid.parseval_weight * (f.coeffs.real**2 + f.coeffs.imag**2)))
    return s if volume_normalized else s * f.grid.volume


def inner(f: SpectralField, g: SpectralField, volume_normalized: bool = False) -> float:
    """(f, g) = int f.g dx via Parseval; (1/|Omega|)-normalized on request."""
    _check_same_grid(f, g)
    s = float(np.sum(f.grid.parseval_weight * (f.coeffs * np.conj(g.coeffs)).real))
    return s if volume_normalized else s * f.grid.volume


def linf_norm(f: SpectralField) -> float:
    """Collocation-grid maximum of the pointwise vector magnitude."""
    u = to_physical(f).values
    return float(np.sqrt((u**2).sum(axis=0)).max())


def grad_l2_norm_sq(f: SpectralField, volume_normalized: bool = False) -> float:
    """||grad f||^2 via Parseval (sum_k |k|^2 w_k |fhat_k|^2 per component)."""
    s = float(
        np.sum(f.grid.parseval_weight * f.grid.k_sq * (f.coeffs.real**2 + f.coeffs.imag**2))
    )
    return s if volume_normalized else s * f.grid.volume


def nonlinear_term(u: SpectralField) -> SpectralField:
    """Skew-symmetric advection 0.5 * [(u.grad)u + div(u x u)], dealiased.

    Products are formed in physical space.  The output is not projected; by
    construction inner(N(u), u) = 0 to roundoff for dealiased divergence-free
    u, which keeps the discrete energy balance exact up to time stepping.
    """
    if not u.is_divergence_free:
        raise ContractViolationError("nonlinear_term requires a divergence-free field")
    ud = u if u.is_dealiased else dealias(u)
    grid = u.grid
    d = grid.dim

    vel = to_physical(ud).values
    grad = scalar_to_grid(gradient(ud), grid)  # (d, d, *phys)

    conv = np.einsum("j...,ij...->i...", vel, grad)
    conv_hat = grid_to_scalar(conv, grid)

    prod_hat = grid_to_scalar(np.einsum("i...,j...->ij...", vel, vel), grid)
    div_hat = np.empty((d,) + grid.spectral_shape, dtype=complex)
    for i in range(d):
        div_hat[i] = sum(1j * grid.k[j] * prod_hat[i, j] for j in range(d))

    out = 0.5 * (conv_hat + div_hat) * grid.dealias_mask
    zero_mean(out, grid)
    return SpectralField(grid, out, is_divergence_free=False, is_dealiased=True)


def single_mode_field(grid: GridSpec, component: int, mode, amplitude: float = 1.0,
                      phase: float = 0.0) -> SpectralField:
    """amplitude * cos(k.x + phase) in one component; convenience for tests."""
    x = grid.coords()
    k0 = 2.0 * np.pi / grid.box_len
    arg = sum(k0 * m * xi for m, xi in zip(mode, x)) + phase
    values = np.zeros((grid.dim,) + grid.phys_shape)
    values[component] = amplitude * np.cos(arg)
    return to_spectral(PhysicalVector(grid, values))


def inject_to_grid(f: SpectralField, fine: GridSpec) -> SpectralField:
    """Represent the same band-limited field on a finer grid (zero padding).

    Every retained mode of the source must fit inside the target's dealias
    cutoff; refinement studies then compare one continuum problem across
    resolutions.
    """
    coarse = f.grid
    if fine.dim != coarse.dim or fine.box_len != coarse.box_len:
        raise ConfigurationError("target grid must share dim and box size")
    if fine.n < coarse.n:
        raise ConfigurationError("target grid must be at least as fine")
    src = f.coeffs * coarse.dealias_mask
    out = np.zeros((fine.dim,) + fine.spectral_shape, dtype=complex)
    n_c, n_f = coarse.n, fine.n
    half = n_c // 2
    idx = []
    for ax in range(coarse.dim - 1):
        m = np.fft.fftfreq(n_c, 1.0 / n_c).astype(int)
        idx.append((m % n_f, m % n_c))
    # last axis is the rfft half-spectrum: indices coincide
    sel_src = np.ix_(*[pair[1] for pair in idx], np.arange(half + 1))
    sel_dst = np.ix_(*[pair[0] for pair in idx], np.arange(half + 1))
    for c in range(coarse.dim):
        out[c][sel_dst] = src[c][sel_src]
    return SpectralField(fine, out, is_divergence_free=f.is_divergence_free,
                         is_dealiased=True)


def hermitian_defect(f: SpectralField) -> float:
    """Max |uhat(-k) - conj(uhat(k))|; zero for real fields.

    In the rfft layout only the first and last planes of the final axis hold
    both members of a conjugate pair, so the check runs on those planes.
    """
    grid = f.grid
    defect = 0.0
    for plane_idx in (0, grid.spectral_shape[-1] - 1):
        plane = f.coeffs[..., plane_idx]
        flipped = plane
        for ax in range(1, 1 + grid.dim - 1):
            flipped = np.flip(np.roll(flipped, -1, axis=ax), axis=ax)
        defect = max(defect, float(np.abs(flipped - np.conj(plane)).max()))
    return defect


def max_divergence(f: SpectralField) -> float:
    """max_k |k.uhat(k)|, the pointwise-in-k incompressibility defect."""
    return float(np.abs(divergence(f)).max())
