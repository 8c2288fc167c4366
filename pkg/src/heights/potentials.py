"""Discretized Kahler potentials on n = 1 fiber geometries."""

from __future__ import annotations

import numpy as np

from .errors import NonKahler, ValidationError
from .geometry import SphereGeometry, TorusGeometry, make_geometry

POSITIVITY_MARGIN = 1e-10


class PotentialField:
    """Samples of phi plus the derived omega_phi relative density.

    omega_phi = 1 + ddc(phi) must stay strictly positive; violations
    abort instead of clipping.
    """

    def __init__(self, geometry, samples, _ddc=None):
        samples = np.asarray(samples, float)
        if samples.shape != geometry.shape:
            raise ValidationError(
                f"sample shape {samples.shape} != grid {geometry.shape}")
        self.geometry = geometry
        self.samples = samples
        self.ddc = geometry.ddc(samples) if _ddc is None else _ddc
        self.omega_phi = 1.0 + self.ddc
        if np.min(self.omega_phi) <= POSITIVITY_MARGIN:
            raise NonKahler(
                "omega_phi loses positivity (min density "
                f"{np.min(self.omega_phi):.3e})")

    @staticmethod
    def constant(geometry, c: float) -> "PotentialField":
        z = np.full(geometry.shape, float(c))
        return PotentialField(geometry, z, _ddc=np.zeros(geometry.shape))

    @staticmethod
    def from_harmonics(geometry, coeffs: dict) -> "PotentialField":
        if not isinstance(geometry, SphereGeometry):
            raise ValidationError("harmonic synthesis needs a sphere grid")
        return PotentialField(geometry, geometry.synth_harmonics(coeffs))

    @staticmethod
    def random(geometry, seed: int, **kw) -> "PotentialField":
        rng = np.random.default_rng(seed)
        return PotentialField(geometry, geometry.random_potential(rng, **kw))

    def __add__(self, other: "PotentialField") -> "PotentialField":
        if other.geometry is not self.geometry:
            raise ValidationError("potentials live on different grids")
        return PotentialField(self.geometry, self.samples + other.samples,
                              _ddc=self.ddc + other.ddc)

    def scale(self, a: float) -> "PotentialField":
        return PotentialField(self.geometry, a * self.samples,
                              _ddc=a * self.ddc)


def save_potential_csv(field: PotentialField, path):
    g = field.geometry
    with open(path, "w") as fh:
        if isinstance(g, SphereGeometry):
            fh.write(f"# sphere,{g.n_theta},{g.n_psi}\n")
        elif isinstance(g, TorusGeometry):
            fh.write(f"# torus,{g.n},{g.degree},{g.tau.real},{g.tau.imag}\n")
        else:
            raise ValidationError("unknown geometry kind")
        np.savetxt(fh, field.samples, delimiter=",")


def load_potential_csv(path) -> PotentialField:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValidationError("potential CSV must start with a header row")
        parts = [p.strip() for p in header[1:].split(",")]
        if parts[0] == "sphere":
            geom = make_geometry("sphere", n_theta=int(parts[1]),
                                 n_psi=int(parts[2]))
        elif parts[0] == "torus":
            geom = make_geometry(
                "torus", n=int(parts[1]), degree=int(parts[2]),
                tau=complex(float(parts[3]), float(parts[4])))
        else:
            raise ValidationError(f"unknown geometry {parts[0]!r}")
        data = np.loadtxt(fh, delimiter=",")
    return PotentialField(geom, data)
