"""Consistent noise realizations over a registered finite region family.

A realization assigns independent values to the atoms of the family, so
additivity over disjoint registered regions holds exactly rather than in
distribution.  Three semigroup kinds are supported: Gaussian (variance
t), Poisson (mean rate * t, with point placements), and deterministic
mass (rate * t).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .errors import NonGaussian, UnsupportedKind
from .matrices import as_matrix
from .regions import AtomTable, Region, atomize, intersection_volume, volume

GAUSSIAN = "gaussian"
POISSON = "poisson"
DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class NoiseSpec:
    """Infinitely divisible marginal family, indexed by measure t.

    gaussian: Normal(0, t); poisson: Poisson(intensity * t);
    deterministic: point mass at rate * t.
    """

    kind: str
    intensity: float = 1.0  # poisson intensity or deterministic rate

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, POISSON, DETERMINISTIC):
            raise UnsupportedKind(f"unknown noise kind {self.kind!r}")
        if self.kind == POISSON and self.intensity <= 0:
            raise ValueError("poisson intensity must be positive")

    def sample_mass(self, measure, rng, size=None):
        """Draw from the marginal law at parameter `measure`."""
        if self.kind == GAUSSIAN:
            return rng.normal(0.0, np.sqrt(measure), size=size)
        if self.kind == POISSON:
            return rng.poisson(self.intensity * measure, size=size).astype(float)
        out = self.intensity * measure
        return out if size is None else np.full(size, out)

    def to_json(self):
        return {"kind": self.kind, "intensity": self.intensity}


@dataclass(frozen=True)
class NoiseRealization:
    """One sample of the noise over a registered region family."""

    spec: NoiseSpec
    regions: tuple
    atoms: AtomTable
    atom_values: np.ndarray            # mass per atom
    atom_points: tuple = field(default=(), repr=False)  # poisson only
    seed: int = 0

    def value(self, region_index) -> float:
        """Mass assigned to the registered region; additive by construction."""
        idx = self.atoms.atoms_of_region(region_index)
        return float(self.atom_values[idx].sum())

    def points(self) -> np.ndarray:
        if self.spec.kind != POISSON:
            raise UnsupportedKind("only poisson realizations carry points")
        nonempty = [p for p in self.atom_points if len(p)]
        return np.vstack(nonempty) if nonempty else np.empty((0, self.atoms.bounding_box.shape[0]))

    def count_in(self, region: Region) -> int:
        """Geometric point count; agrees with value() on registered regions."""
        pts = self.points()
        if not len(pts):
            return 0
        return int(region.contains(pts).sum())

    def to_json(self):
        out = {
            "spec": self.spec.to_json(),
            "seed": self.seed,
            "atom_signatures": ["".join("1" if b else "0" for b in s)
                                for s in self.atoms.signatures],
            "atom_values": [float(v) for v in self.atom_values],
        }
        if self.spec.kind == POISSON:
            out["atom_points"] = [np.asarray(p).tolist() for p in self.atom_points]
        return out


def _sample_points_in_atom(atoms, atom_index, regions, count, rng,
                           max_tries=10_000):
    """Uniform points in one atom via rejection against its signature."""
    bounds = atoms.bounding_box
    d = bounds.shape[0]
    sig = np.array(atoms.signatures[atom_index])
    out = np.empty((0, d))
    tries = 0
    while len(out) < count and tries < max_tries:
        batch = max(64, 4 * (count - len(out)))
        pts = bounds[:, 0] + rng.random((batch, d)) * (bounds[:, 1] - bounds[:, 0])
        memb = np.stack([r.contains(pts) for r in regions], axis=1)
        hit = np.all(memb == sig, axis=1)
        out = np.vstack([out, pts[hit]])
        tries += 1
    if len(out) < count:
        raise RuntimeError("rejection sampling inside atom failed")
    return out[:count]


def realize(spec: NoiseSpec, regions, n_atom_samples=100_000, seed=0,
            atoms: AtomTable = None, replicate=0) -> NoiseRealization:
    """One noise realization over the atom partition of `regions`.

    Atom values are independent draws from the marginal law at the
    atom's measure; streams are keyed by (seed, atom index, replicate)
    so results do not depend on evaluation order.  The complement atom
    (outside every region) gets no mass.
    """
    regions = tuple(regions)
    if atoms is None:
        atoms = atomize(regions, n=n_atom_samples, seed=seed)
    values = np.zeros(len(atoms.signatures))
    points = []
    for i, sig in enumerate(atoms.signatures):
        if not any(sig):
            points.append(np.empty((0, atoms.bounding_box.shape[0])))
            continue
        rng = _rng.stream(seed, "atom", i, replicate)
        if spec.kind == POISSON:
            count = int(rng.poisson(spec.intensity * atoms.measures[i]))
            pts = _sample_points_in_atom(atoms, i, regions, count, rng)
            points.append(pts)
            values[i] = float(count)
        else:
            values[i] = float(spec.sample_mass(atoms.measures[i], rng))
            points.append(np.empty((0, atoms.bounding_box.shape[0])))
    return NoiseRealization(spec, regions, atoms, values,
                            tuple(points), seed)


def realize_masses(spec: NoiseSpec, atoms: AtomTable, n_reps, seed=0):
    """(n_reps, n_atoms) array of independent atom masses, one row per
    replicate.  Vectorized path for Monte Carlo experiments; the stream
    is keyed per atom with the replicate as the draw index."""
    n_atoms = len(atoms.signatures)
    out = np.zeros((n_reps, n_atoms))
    for i, sig in enumerate(atoms.signatures):
        if not any(sig):
            continue
        rng = _rng.stream(seed, "atom", i)
        out[:, i] = spec.sample_mass(atoms.measures[i], rng, size=n_reps)
    return out


def apply_transform(g, realization: NoiseRealization) -> NoiseRealization:
    """Pointwise pushforward of a Poisson realization by the map g.

    Every point p moves to g p, so the count in any region B afterwards
    equals the count in g^-1 B before.  Gaussian noise has no pointwise
    representation; its invariance is exercised through region
    pre-images, so requesting it here is an error.
    """
    g = as_matrix(g)
    if realization.spec.kind != POISSON:
        raise UnsupportedKind("pointwise pushforward requires poisson noise")
    moved = tuple(p @ g.T if len(p) else p for p in realization.atom_points)
    return NoiseRealization(realization.spec, realization.regions,
                            realization.atoms, realization.atom_values,
                            moved, realization.seed)


def gaussian_conditional_samples(f, s, r, n, rng, quad_nodes=32):
    """Samples of the Gaussian smooth of f at scale sqrt(r), evaluated at
    v ~ Normal(0, s).  This is E[f(v + Z)] with Z ~ Normal(0, r)."""
    v = rng.normal(0.0, np.sqrt(max(s, 0.0)), size=n)
    if r <= 1e-14:
        return np.asarray(f(v), dtype=float)
    nodes, weights = np.polynomial.hermite.hermgauss(quad_nodes)
    shifted = v[:, None] + np.sqrt(2.0 * r) * nodes[None, :]
    vals = np.asarray(f(shifted), dtype=float)
    return (vals @ weights) / np.sqrt(np.pi)


def conditional_expectation_gaussian(f, C: Region, B: Region, quad_nodes=32,
                                     realization_samples=1000, seed=0,
                                     spec: NoiseSpec = None,
                                     measure_method="auto", measure_n=200_000):
    """Samples of E[f(mass(C)) | information generated inside B].

    Splits mass(C) into the part measurable in B (variance s, the
    overlap measure) and an independent remainder (variance r); the
    conditional expectation at observed value v is the Gaussian smooth
    of f at scale sqrt(r), evaluated by Gauss-Hermite quadrature.
    Returns an array of realization_samples values of that smooth at
    v ~ Normal(0, s).
    """
    if spec is not None and spec.kind != GAUSSIAN:
        raise NonGaussian("conditional expectation requires gaussian noise")
    if quad_nodes < 8:
        raise ValueError("quad_nodes must be at least 8")
    s, _ = intersection_volume(C, B, method=measure_method, n=measure_n,
                               seed=_rng.stream_key(seed, "ce-overlap") % 2**31)
    total, _ = volume(C, method="exact") if C.disjoint else \
        volume(C, method="mc", n=measure_n, seed=seed)
    r = max(total - s, 0.0)
    rng = _rng.stream(seed, "ce-draws")
    return gaussian_conditional_samples(f, s, r, realization_samples, rng,
                                        quad_nodes=quad_nodes)
