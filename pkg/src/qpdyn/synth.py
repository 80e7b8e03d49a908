"""Ground-truth quasiperiodically driven systems for testing the pipeline.

The generated dynamics is a torus rotation driving an additively forced
contraction:

    theta_{n+1} = theta_n + rho  (mod 2 pi)
    y_n = g_per(theta_n) + g_chaos(x_n),   x_{n+1} = y_n (noiseless part)

with g_per a finite Fourier sum over an integer lattice of the rotation
generators and g_chaos a componentwise contraction.  Every recorded sample
splits exactly into a known periodic term and a known chaotic increment,
so each pipeline stage has an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ingest import TimeSeries


class SynthError(ValueError):
    pass


@dataclass
class SynthSpec:
    """Parameters of a synthetic quasiperiodically driven system.

    ``rho``: rotation increment per step for each torus coordinate
    (radians, each in (0, 2 pi)).  ``gper_coeffs`` maps integer lattice
    vectors (length d tuples) to complex per-channel coefficients; the
    periodic forcing is Re sum_j c_j exp(i j . theta).  ``chaos`` selects a
    contraction family: {"family": "none"} or
    {"family": "tanh", "a": ..., "b": ...} for x -> a*tanh(b*x), which
    requires |a*b| < 1.
    """

    rho: np.ndarray
    gper_coeffs: dict
    chaos: dict = field(default_factory=lambda: {"family": "none"})
    noise_sd: float = 0.0
    N: int = 1024
    dt: float = 1.0
    k: int = 1
    seed: int = 0
    burn_in: int = 0

    def __post_init__(self):
        self.rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        if np.any(self.rho <= 0) or np.any(self.rho >= 2 * np.pi):
            raise SynthError("every rotation increment must lie in (0, 2*pi)")
        if self.N < 2 or self.k < 1 or self.dt <= 0 or self.noise_sd < 0:
            raise SynthError("need N >= 2, k >= 1, dt > 0, noise_sd >= 0")
        d = len(self.rho)
        coeffs = {}
        for jvec, c in self.gper_coeffs.items():
            jvec = tuple(int(j) for j in np.atleast_1d(jvec))
            if len(jvec) != d:
                raise SynthError(f"lattice vector {jvec} has wrong dimension")
            c = np.atleast_1d(np.asarray(c, dtype=complex))
            if c.size == 1:
                c = np.full(self.k, c[0])
            if c.size != self.k:
                raise SynthError(f"coefficient for {jvec} has wrong channel count")
            coeffs[jvec] = c
        self.gper_coeffs = coeffs
        _validate_chaos(self.chaos)

    @property
    def d(self) -> int:
        return len(self.rho)

    def generator_omegas(self) -> np.ndarray:
        """Physical angular frequencies of the drive, rho / dt."""
        return self.rho / self.dt

    def gper(self, theta: np.ndarray) -> np.ndarray:
        out = np.zeros(self.k, dtype=complex)
        for jvec, c in self.gper_coeffs.items():
            out += c * np.exp(1j * float(np.dot(jvec, theta)))
        return np.real(out)

    def gchaos(self, x: np.ndarray) -> np.ndarray:
        fam = self.chaos["family"]
        if fam == "none":
            return np.zeros_like(x)
        a, b = self.chaos["a"], self.chaos["b"]
        return a * np.tanh(b * x)


def _validate_chaos(chaos: dict) -> None:
    fam = chaos.get("family")
    if fam == "none":
        return
    if fam == "tanh":
        a, b = float(chaos["a"]), float(chaos["b"])
        # sup |d/dx a tanh(bx)| = |a b|: contraction keeps orbits bounded
        if abs(a * b) >= 1:
            raise SynthError(
                f"tanh map with |a*b| = {abs(a * b):.3g} >= 1 is not a contraction"
            )
        return
    raise SynthError(f"unknown chaos family {fam!r}")


@dataclass
class GroundTruth:
    """Exact decomposition of a generated series."""

    generator_omegas: np.ndarray
    rho: np.ndarray
    gper_samples: np.ndarray
    chaos_increments: np.ndarray
    seed: int


def on_grid_rho(bins, n: int) -> np.ndarray:
    """Rotation increments that put the generators exactly on DFT bins."""
    return 2 * np.pi * np.atleast_1d(np.asarray(bins, dtype=float)) / n


def generate(spec: SynthSpec) -> tuple[TimeSeries, GroundTruth]:
    """Iterate the synthetic system; returns the observed series and truth.

    Sample n is y_n = g_per(theta_n) + g_chaos(x_n) (+ observation noise);
    the chaotic state x advances through the noiseless samples.  Same seed,
    same series, bitwise.
    """
    rng = np.random.default_rng(spec.seed)
    theta = np.zeros(spec.d)
    x = np.zeros(spec.k)
    for _ in range(spec.burn_in):
        x = spec.gper(theta) + spec.gchaos(x)
        theta = np.mod(theta + spec.rho, 2 * np.pi)
    y = np.empty((spec.N, spec.k))
    gper_samples = np.empty((spec.N, spec.k))
    chaos_increments = np.empty((spec.N, spec.k))
    for n in range(spec.N):
        gper_samples[n] = spec.gper(theta)
        chaos_increments[n] = spec.gchaos(x)
        x = gper_samples[n] + chaos_increments[n]
        y[n] = x
        theta = np.mod(theta + spec.rho, 2 * np.pi)
    if spec.noise_sd > 0:
        y = y + rng.normal(0.0, spec.noise_sd, size=y.shape)
    ts = TimeSeries(values=y, dt=spec.dt)
    truth = GroundTruth(
        generator_omegas=spec.generator_omegas(),
        rho=spec.rho.copy(),
        gper_samples=gper_samples,
        chaos_increments=chaos_increments,
        seed=spec.seed,
    )
    return ts, truth
