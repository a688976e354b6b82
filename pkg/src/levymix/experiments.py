"""Desk-scale experiments exhibiting the compact / non-compact dichotomy.

Each experiment returns an ExperimentReport whose verdict is
recomputable from the emitted series alone.  The four experiments are:
covariance mixing curves under iterated maps, conditional-variance decay
along a shrinking family, equivariance of conditional expectations under
measure-preserving maps, and the compact-group counterexample (an
invariant region with non-degenerate mass).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import rng as _rng
from .errors import ApproximationTooCoarse, ConfigError, GroupTooLarge, InvalidGenerator
from .gallery import named_matrix
from .matrices import (
    as_matrix,
    cyclic_closure_compact,
    in_measure_preserving_group,
    matrix_from_json,
    weyl_conjugator,
)
from .noise import (
    GAUSSIAN,
    NoiseSpec,
    gaussian_conditional_samples,
    realize_masses,
)
from .regions import (
    Piece,
    Region,
    atomize,
    box_region,
    intersection_volume,
    transform,
    volume,
)
from .shrinking import ShrinkingFamily, build_family, contains_many

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class ExperimentReport:
    experiment: str
    inputs: dict
    series: list = field(default_factory=list)  # rows: (series, param, est, err)
    verdict: str = INCONCLUSIVE
    criterion: str = ""

    def add(self, series, parameter, estimate, stderr=0.0):
        self.series.append((str(series), float(parameter), float(estimate),
                            float(stderr)))

    def rows(self, series):
        return [(p, e, s) for name, p, e, s in self.series if name == series]

    def series_csv(self) -> str:
        lines = ["series,parameter,estimate,stderr"]
        for name, p, e, s in self.series:
            lines.append(f"{name},{p!r},{e!r},{s!r}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "inputs": self.inputs,
            "series": [list(row) for row in self.series],
            "verdict": self.verdict,
            "criterion": self.criterion,
        }


def _cov_stderr(v1, v2, c, n):
    return np.sqrt(max(v1 * v2 + c * c, 0.0) / max(n - 1, 1))


# ---------------------------------------------------------------------------
# mixing curve


def mixing_curve(g, C: Region, m_range=(0, 8), n_reps=10_000, seed=0,
                 atom_samples=200_000) -> ExperimentReport:
    """Overlap measure and empirical mass covariance along powers of g.

    For each m the overlap of C with g^m C is estimated, together with
    the covariance of the Gaussian masses of the two regions over n_reps
    independent realizations.  Non-compact maps mix (covariance decays);
    a compact map fixing C keeps the covariance at the measure of C.
    """
    g = as_matrix(g)
    if not in_measure_preserving_group(g, det_tol=1e-6):
        raise InvalidGenerator("mixing map must have |det| = 1")
    compact = cyclic_closure_compact(g)
    lam_C, _ = volume(C, method="exact")
    spec = NoiseSpec(GAUSSIAN)
    report = ExperimentReport(
        "mixing_curve",
        {"g": g.tolist(), "C": C.to_json(), "m_range": list(m_range),
         "n_reps": n_reps, "seed": seed, "compact": compact},
    )
    ok_cov, identical_region = True, True
    last_cov = None
    for m in range(m_range[0], m_range[1] + 1):
        gm = np.linalg.matrix_power(g, m)
        Cm = transform(gm, C) if m else C
        sub = _rng.stream_key(seed, "mix", m) % 2**31
        overlap, ov_err = intersection_volume(C, Cm, method="auto",
                                              n=atom_samples, seed=sub)
        atoms = atomize([C, Cm], n=atom_samples, seed=sub)
        masses = realize_masses(spec, atoms, n_reps, seed=sub)
        in0 = np.array([sig[0] for sig in atoms.signatures])
        in1 = np.array([sig[1] for sig in atoms.signatures])
        pi_C = masses[:, in0].sum(axis=1)
        pi_Cm = masses[:, in1].sum(axis=1)
        cmat = np.cov(pi_C, pi_Cm)
        c = float(cmat[0, 1])
        c_err = _cov_stderr(cmat[0, 0], cmat[1, 1], c, n_reps)
        report.add("overlap", m, overlap, ov_err)
        report.add("covariance", m, c, c_err)
        tol = 3.0 * np.hypot(c_err, ov_err)
        if abs(c - overlap) > tol:
            ok_cov = False
        if abs(overlap - lam_C) > max(3.0 * ov_err, 1e-9):
            identical_region = False
        last_cov = c
    if not ok_cov:
        verdict = FAIL
        criterion = "covariance disagrees with overlap beyond 3 sigma"
    elif not compact:
        verdict = PASS if last_cov < 0.05 * lam_C else FAIL
        criterion = "non-compact map: covariance below 0.05 * measure(C) at final m"
    elif identical_region:
        verdict = PASS
        criterion = "compact map fixing C: covariance stays at measure(C)"
    else:
        verdict = INCONCLUSIVE
        criterion = "compact map does not fix C; no dichotomy claim"
    report.verdict, report.criterion = verdict, criterion
    return report


# ---------------------------------------------------------------------------
# grid approximation of D_t within a box


def family_box_region(fam: ShrinkingFamily, t, box_bounds, max_err,
                      n_start=1024, n_cap=8192) -> Region:
    """Axis-box union approximating D_t intersected with a box (2D).

    Grid cells are classified by the membership oracle at their centers;
    the measure error is bounded by the volume of cells whose neighbors
    disagree.  The grid is refined until that bound is below max_err.
    """
    if fam.dim != 2:
        raise ApproximationTooCoarse("grid approximation implemented for d=2")
    box_bounds = np.asarray(box_bounds, dtype=float)
    n = n_start
    while n <= n_cap:
        xs = np.linspace(box_bounds[0, 0], box_bounds[0, 1], n + 1)
        ys = np.linspace(box_bounds[1, 0], box_bounds[1, 1], n + 1)
        xc = 0.5 * (xs[1:] + xs[:-1])
        yc = 0.5 * (ys[1:] + ys[:-1])
        cellvol = (xs[1] - xs[0]) * (ys[1] - ys[0])
        member = np.empty((n, n), dtype=bool)  # [row=y, col=x]
        chunk = max(1, 2_000_000 // n)
        for j0 in range(0, n, chunk):
            j1 = min(j0 + chunk, n)
            pts = np.stack(np.meshgrid(xc, yc[j0:j1], indexing="xy"),
                           axis=-1).reshape(-1, 2)
            member[j0:j1] = contains_many(fam, t, pts).reshape(j1 - j0, n)
        boundary = np.zeros_like(member)
        boundary[:, :-1] |= member[:, :-1] != member[:, 1:]
        boundary[:, 1:] |= member[:, :-1] != member[:, 1:]
        boundary[:-1, :] |= member[:-1, :] != member[1:, :]
        boundary[1:, :] |= member[:-1, :] != member[1:, :]
        err = float(boundary.sum()) * cellvol
        if err <= max_err:
            pieces = []
            for j in range(n):
                row = member[j]
                if not row.any():
                    continue
                edges = np.flatnonzero(np.diff(row.astype(np.int8)))
                starts = [0] if row[0] else []
                starts += [e + 1 for e in edges if not row[e]]
                ends = [e + 1 for e in edges if row[e]]
                if row[-1]:
                    ends.append(n)
                for a, b in zip(starts, ends):
                    pieces.append(Piece(np.eye(2),
                                        np.array([[xs[a], xs[b]],
                                                  [ys[j], ys[j + 1]]])))
            if not pieces:
                raise ApproximationTooCoarse("approximated set is empty")
            return Region(tuple(pieces), disjoint=True)
        n *= 2
    raise ApproximationTooCoarse(
        f"boundary error {err:.2e} above {max_err:.2e} at finest grid")


# ---------------------------------------------------------------------------
# tail triviality decay


def tail_triviality_decay(g, f=None, C: Region = None,
                          t_grid=(5.0, 2.0, 1.0, 0.5, 0.2, 0.1),
                          n_reps=10_000, seed=0, box_bounds=None,
                          approx_frac=0.01) -> ExperimentReport:
    """Variance of conditional expectations along the shrinking family of g.

    For each t, the conditioning set is D_t intersected with a box
    (grid-approximated); the variance of E[f(mass(C)) | that set] is
    estimated from n_reps samples and compared with the conditional
    variance implied by the overlap measure.  The series must decay to
    below 10% of the unconditional variance.
    """
    if C is None:
        C = box_region([[0.0, 1.0], [0.0, 1.0]])
    if f is None:
        f = lambda v: v
    fam = build_family(as_matrix(g))
    if box_bounds is None:
        bb = C.bounding_box()
        pad = 0.5 * max(bb[:, 1] - bb[:, 0])
        box_bounds = np.column_stack([np.minimum(bb[:, 0] - pad, -1.5),
                                      np.maximum(bb[:, 1] + pad, 1.5)])
    lam_C, _ = volume(C, method="exact")
    report = ExperimentReport(
        "tail_triviality_decay",
        {"g": as_matrix(g).tolist(), "C": C.to_json(),
         "t_grid": [float(t) for t in t_grid], "n_reps": n_reps,
         "seed": seed, "box": np.asarray(box_bounds).tolist()},
    )
    # unconditional variance of f(mass(C))
    rng_total = _rng.stream(seed, "tail", "total")
    totals = np.asarray(f(rng_total.normal(0.0, np.sqrt(lam_C), size=100_000)))
    var_total = float(totals.var(ddof=1))
    report.add("total_variance", 0.0, var_total,
               var_total * np.sqrt(2.0 / (len(totals) - 1)))
    t_sorted = sorted(t_grid, reverse=True)
    variances, verrs = [], []
    for t in t_sorted:
        B = family_box_region(fam, t, box_bounds, approx_frac * lam_C)
        s, _ = intersection_volume(C, B, method="axis")
        r = max(lam_C - s, 0.0)
        rng = _rng.stream(seed, "tail", t)
        samples = gaussian_conditional_samples(f, s, r, n_reps, rng)
        var = float(samples.var(ddof=1))
        verr = var * np.sqrt(2.0 / (n_reps - 1))
        report.add("overlap", t, s, 0.0)
        report.add("cond_variance", t, var, verr)
        variances.append(var)
        verrs.append(verr)
    decreasing = all(
        variances[i + 1] <= variances[i]
        + 2.0 * np.hypot(verrs[i], verrs[i + 1])
        for i in range(len(variances) - 1))
    small_tail = variances[-1] < 0.1 * var_total
    report.verdict = PASS if (decreasing and small_tail) else FAIL
    report.criterion = ("conditional variance nonincreasing within 2 sigma "
                        "and below 10% of the total variance at the smallest t")
    return report


# ---------------------------------------------------------------------------
# equivariance


def equivariance_check(g, C: Region, B: Region, f=None, n_reps=10_000,
                       seed=0, alpha=0.01, measure_n=200_000) -> ExperimentReport:
    """Two-sample KS test of conditional-expectation laws for (C, B) vs (gC, gB)."""
    g = as_matrix(g)
    if not in_measure_preserving_group(g, det_tol=1e-6):
        raise InvalidGenerator("map must have |det| = 1")
    if f is None:
        f = np.tanh
    lam_C, _ = volume(C, method="exact")
    s1, e1 = intersection_volume(C, B, method="auto", n=measure_n,
                                 seed=_rng.stream_key(seed, "eq", 0) % 2**31)
    gC, gB = transform(g, C), transform(g, B)
    s2, e2 = intersection_volume(gC, gB, method="auto", n=measure_n,
                                 seed=_rng.stream_key(seed, "eq", 1) % 2**31)
    rng1 = _rng.stream(seed, "eq-samples", 0)
    rng2 = _rng.stream(seed, "eq-samples", 1)
    x1 = gaussian_conditional_samples(f, s1, max(lam_C - s1, 0.0), n_reps, rng1)
    x2 = gaussian_conditional_samples(f, s2, max(lam_C - s2, 0.0), n_reps, rng2)
    ks = stats.ks_2samp(x1, x2)
    overlap_ok = abs(s2 - s1) <= 3.0 * np.hypot(e1, e2) + 1e-9
    report = ExperimentReport(
        "equivariance_check",
        {"g": g.tolist(), "C": C.to_json(), "B": B.to_json(),
         "n_reps": n_reps, "seed": seed, "alpha": alpha},
    )
    report.add("overlap", 0, s1, e1)
    report.add("overlap", 1, s2, e2)
    report.add("ks_statistic", 0, float(ks.statistic))
    report.add("ks_pvalue", 0, float(ks.pvalue))
    report.verdict = PASS if (ks.pvalue >= alpha and overlap_ok) else FAIL
    report.criterion = (f"KS p-value >= {alpha} and transformed overlap within "
                        "3 sigma of the original")
    return report


# ---------------------------------------------------------------------------
# compact invariant demo


def _disc_strips(radius, n_strips):
    """Horizontal-strip approximation of the closed disc."""
    ys = np.linspace(-radius, radius, n_strips + 1)
    pieces = []
    for j in range(n_strips):
        yc = 0.5 * (ys[j] + ys[j + 1])
        half = np.sqrt(max(radius**2 - yc**2, 0.0))
        if half <= 0:
            continue
        pieces.append(Piece(np.eye(2), np.array([[-half, half],
                                                 [ys[j], ys[j + 1]]])))
    return Region(tuple(pieces), disjoint=True)


def _is_signed_permutation(Q, tol=1e-8):
    P = np.abs(Q)
    return (np.all(np.abs(P - np.round(P)) <= tol)
            and np.all(np.round(P).sum(axis=0) == 1)
            and np.all(np.round(P).sum(axis=1) == 1))


def compact_invariant_demo(generators, n_reps=10_000, seed=0, mode="auto",
                           n_strips=400, check_points=10_000,
                           mismatch_tol=0.01) -> ExperimentReport:
    """Invariant region with non-degenerate mass for a compact group.

    Conjugates the group into the orthogonal group, builds an invariant
    region (an exactly invariant box when the orthogonal form consists
    of signed permutations, otherwise the image of a strip-approximated
    disc), and checks invariance pointwise plus positivity of the mass
    variance.
    """
    gens = [as_matrix(g) for g in generators]
    if mode == "auto":
        try:
            h = weyl_conjugator(gens, mode="finite")
            mode_used = "finite"
        except GroupTooLarge:
            h = weyl_conjugator(gens, mode="cesaro")
            mode_used = "cesaro"
    else:
        h = weyl_conjugator(gens, mode=mode)
        mode_used = mode
    hinv = np.linalg.inv(h)
    qs = [hinv @ g @ h for g in gens]
    exact_box = all(_is_signed_permutation(Q) for Q in qs)
    d = gens[0].shape[0]
    if exact_box:
        base = box_region(np.column_stack([-np.ones(d), np.ones(d)]))
        tol_frac = 0.0
    else:
        if d != 2:
            raise ApproximationTooCoarse("disc approximation implemented for d=2")
        base = _disc_strips(1.0, n_strips)
        tol_frac = mismatch_tol
    region = transform(h, base)
    lam, _ = volume(region, method="exact")
    report = ExperimentReport(
        "compact_invariant_demo",
        {"generators": [g.tolist() for g in gens], "mode": mode_used,
         "n_reps": n_reps, "seed": seed, "exact_box": exact_box},
    )
    bb = region.bounding_box()
    rng = _rng.stream(seed, "invariant-pts")
    pts = bb[:, 0] + rng.random((check_points, d)) * (bb[:, 1] - bb[:, 0])
    base_member = region.contains(pts)
    invariant = True
    for i, g in enumerate(gens):
        Rg = transform(g, region)
        mismatch = float(np.mean(base_member != Rg.contains(pts)))
        report.add("membership_mismatch", i, mismatch,
                   np.sqrt(mismatch * (1 - mismatch) / check_points))
        vg, _ = volume(Rg, method="exact")
        report.add("volume_ratio", i, vg / lam)
        if mismatch > tol_frac + 3.0 * np.sqrt(max(tol_frac, 1e-4) / check_points):
            invariant = False
        if abs(vg - lam) > 1e-9 * lam:
            invariant = False
    masses = _rng.stream(seed, "invariant-mass").normal(
        0.0, np.sqrt(lam), size=n_reps)
    var = float(masses.var(ddof=1))
    verr = var * np.sqrt(2.0 / (n_reps - 1))
    report.add("mass_variance", 0, var, verr)
    positive = var - 3.0 * verr > 0.0
    report.verdict = PASS if (invariant and positive) else FAIL
    report.criterion = ("every generator fixes the region within tolerance and "
                        "the region's mass variance is positive at 3 sigma")
    return report


# ---------------------------------------------------------------------------
# config-driven runner


_FUNCTIONS = {"identity": lambda v: v, "tanh": np.tanh}


def _matrix_from_cfg(obj, what="matrix"):
    if isinstance(obj, str):
        try:
            return named_matrix(obj)
        except KeyError as exc:
            raise ConfigError(f"{what}: {exc}") from exc
    if isinstance(obj, dict) and "rows" in obj:
        try:
            return matrix_from_json({"d": obj.get("d", len(obj["rows"])),
                                     "rows": obj["rows"]})
        except Exception as exc:
            raise ConfigError(f"{what}: {exc}") from exc
    raise ConfigError(f"{what}: expected an alias string or a rows object")


def _region_from_cfg(obj, what="region"):
    try:
        if isinstance(obj, dict) and "box" in obj:
            return box_region(np.asarray(obj["box"], dtype=float))
        if isinstance(obj, dict) and "pieces" in obj:
            return Region.from_json(obj)
    except Exception as exc:
        raise ConfigError(f"{what}: {exc}") from exc
    raise ConfigError(f"{what}: expected a box or pieces object")


def default_config():
    """The canonical experiment battery: shear, squeeze and rotation."""
    unit = {"box": [[0.0, 1.0], [0.0, 1.0]]}
    return {
        "seed": 42,
        "out": "reports",
        "experiments": [
            {"kind": "mixing_curve", "name": "mixing-squeeze",
             "g": "squeeze", "C": unit, "m_max": 8, "n_reps": 4000},
            {"kind": "mixing_curve", "name": "mixing-rotation90",
             "g": "rotation90",
             "C": {"box": [[-1.0, 1.0], [-1.0, 1.0]]}, "m_max": 8,
             "n_reps": 4000},
            {"kind": "tail_triviality_decay", "name": "tail-shear",
             "g": "shear", "C": unit,
             "t_grid": [5.0, 2.0, 1.0, 0.5, 0.2, 0.1], "n_reps": 4000},
            {"kind": "equivariance_check", "name": "equivariance-shear",
             "g": "shear", "C": unit,
             "B": {"box": [[0.5, 1.5], [0.0, 1.0]]}, "n_reps": 4000},
            {"kind": "compact_invariant_demo", "name": "invariant-rotation90",
             "generators": ["rotation90"], "n_reps": 4000},
        ],
    }


def _run_one(entry, master_seed):
    kind = entry.get("kind")
    name = entry.get("name", kind)
    seed = _rng.stream_key(master_seed, "experiment", name) % 2**31
    if kind == "mixing_curve":
        return name, mixing_curve(
            _matrix_from_cfg(entry["g"], "g"),
            _region_from_cfg(entry["C"], "C"),
            m_range=(0, int(entry.get("m_max", 8))),
            n_reps=int(entry.get("n_reps", 10_000)), seed=seed)
    if kind == "tail_triviality_decay":
        return name, tail_triviality_decay(
            _matrix_from_cfg(entry["g"], "g"),
            f=_FUNCTIONS[entry.get("f", "identity")],
            C=_region_from_cfg(entry["C"], "C"),
            t_grid=tuple(entry.get("t_grid", (5.0, 2.0, 1.0, 0.5, 0.2, 0.1))),
            n_reps=int(entry.get("n_reps", 10_000)), seed=seed)
    if kind == "equivariance_check":
        return name, equivariance_check(
            _matrix_from_cfg(entry["g"], "g"),
            _region_from_cfg(entry["C"], "C"),
            _region_from_cfg(entry["B"], "B"),
            f=_FUNCTIONS[entry.get("f", "tanh")],
            n_reps=int(entry.get("n_reps", 10_000)), seed=seed)
    if kind == "compact_invariant_demo":
        return name, compact_invariant_demo(
            [_matrix_from_cfg(g, "generator") for g in entry["generators"]],
            n_reps=int(entry.get("n_reps", 10_000)), seed=seed)
    raise ConfigError(f"unknown experiment kind {kind!r}")


def run_all(config_path=None, seed_override=None, out_override=None):
    """Run the configured experiment list and write report + series files.

    Returns (exit_code, {name: ExperimentReport}); exit code 0 iff every
    verdict is pass.
    """
    if config_path is None:
        config = default_config()
    else:
        try:
            with open(config_path) as fh:
                config = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"malformed JSON at line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}") from exc
    if not isinstance(config, dict) or "experiments" not in config:
        raise ConfigError("config must be an object with an 'experiments' list")
    seed = seed_override if seed_override is not None else config.get("seed", 0)
    out_dir = out_override if out_override is not None else config.get("out", "reports")
    os.makedirs(out_dir, exist_ok=True)
    reports = {}
    for i, entry in enumerate(config["experiments"]):
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ConfigError(f"experiments[{i}]: each entry needs a 'kind'")
        name, report = _run_one(entry, seed)
        reports[name] = report
        with open(os.path.join(out_dir, f"{name}.report.json"), "w") as fh:
            json.dump(report.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(os.path.join(out_dir, f"{name}.series.csv"), "w") as fh:
            fh.write(report.series_csv())
    exit_code = 0 if all(r.verdict == PASS for r in reports.values()) else 1
    return exit_code, reports
