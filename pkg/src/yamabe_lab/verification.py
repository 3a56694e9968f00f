"""Named verification bundles shared by ``yamabe-lab verify`` and the test suite.

Every check is a function returning a :class:`Check`. Checks are
deterministic: fixed seeds, fixed grids, no timing in the payload.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import catalog, clifford, confgrid, lattice, spectrum

SEED = 20240417


@dataclass
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "details": _clean(self.details)}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    return obj


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def random_conformal_factor(n: int, rng: np.random.Generator, amplitude: float = 0.3) -> np.ndarray:
    """``exp`` of a random low-mode trigonometric polynomial; smooth and positive."""
    x = confgrid.coordinates(n)
    w = np.zeros((n,) * 4)
    for axis in range(4):
        for k in (1, 2):
            a, b = rng.normal(scale=amplitude / (2 * k), size=2)
            w += a * np.cos(2 * np.pi * k * x[axis]) + b * np.sin(2 * np.pi * k * x[axis])
    return np.exp(w)


# ---------------------------------------------------------------- constants


def check_constants() -> Check:
    cp2 = catalog.lookup("CP2")[0]
    y_cp2, y_s4 = 12 * math.sqrt(2) * math.pi, 8 * math.sqrt(6) * math.pi
    errs = {
        "cp2_lower": rel_err(float(cp2.lo), y_cp2),
        "cp2_upper": rel_err(float(cp2.hi), y_cp2),
        "s4_aubin": rel_err(catalog.aubin_sphere_value(4), y_s4),
        "s4_catalog": rel_err(float(catalog.lookup("S4")[0].lo), y_s4),
    }
    hopf, blowup = catalog.hopf_comparison()
    ok = max(errs.values()) <= 1e-12 and cp2.exact and hopf > blowup
    return Check("constants: Y(CP2) = 12 sqrt2 pi, Y(S4) = 8 sqrt6 pi", ok,
                 {"Y_CP2": float(cp2.lo), "Y_S4": catalog.aubin_sphere_value(4), "max_rel_err": max(errs.values()),
                  "hopf_gap": hopf - blowup})


def check_theorem_b_table() -> Check:
    y_s4 = 8 * math.sqrt(6) * math.pi
    rows, ok = [], True
    for k in (1, 2, 3):
        expected = (12 * math.sqrt(2) * math.pi, 4 * math.pi * math.sqrt(2 * k + 16))
        base = catalog.theorem_B_bounds(k, 0)
        for m in range(6):
            e = catalog.theorem_B_bounds(k, m)
            lo, hi = float(e.lo), float(e.hi)
            good = (
                rel_err(lo, expected[0]) <= 1e-12
                and rel_err(hi, expected[1]) <= 1e-12
                and e.lo == base.lo and e.hi == base.hi
                and hi < y_s4
                and e.exact == (k == 1)
            )
            ok &= good
            rows.append({"k": k, "m": m, "lower": lo, "upper": hi, "ok": good})
    return Check("bound table k=1..3, m=0..5", ok, {"rows": rows})


# ---------------------------------------------------------------- lattice


def check_min_characteristic() -> Check:
    found = {}
    ok = True
    for k in (1, 2, 3):
        sq, witness = lattice.min_characteristic_square(lattice.IntersectionForm.identity(k), 5)
        found[k] = {"eta_sq": sq, "witness": list(witness.coords)}
        ok &= sq == 8 + k and all(c % 2 for c in witness.coords)
    return Check("min characteristic square on k<1> is 8+k", ok, found)


def check_mod8(max_rank: int = 6, bound: int = 3, n_random: int = 12) -> Check:
    rng = np.random.default_rng(SEED)
    forms = lattice.sign_pattern_forms(max_rank)
    for i in range(n_random):
        base = forms[int(rng.integers(len(forms)))]
        forms.append(base.congruent(lattice.random_unimodular(base.rank, rng, steps=3)))
    total, failures = 0, []
    for Q in forms:
        count, bad = lattice.check_mod8(Q, bound)
        total += count
        failures += bad[:3]
    return Check("eta^2 = tau (mod 8) for characteristic eta, rank <= 6, |coords| <= 3", not failures,
                 {"forms": len(forms), "characteristic_vectors": total, "failures": failures})


# ---------------------------------------------------------------- covariance


def covariance_residuals(ns=(8, 16, 32)) -> dict:
    out = {"N": list(ns), "stencil": [], "covariant": []}
    for n in ns:
        x = confgrid.coordinates(n)
        grid = confgrid.ConformalGrid(n, 1 + 0.2 * np.cos(2 * np.pi * x[0]))
        phi = np.cos(2 * np.pi * x[1])
        f = confgrid.WeightedField(0.5 * np.cos(2 * np.pi * x[2]), -2)
        u = grid.u
        flat = spectrum.assemble(confgrid.ConformalGrid.flat(n), f)
        target = u**-3 * flat.apply(u * phi)
        for scheme in ("stencil", "covariant"):
            lhs = spectrum.assemble(grid, f, scheme).apply(phi)
            out[scheme].append(float(np.max(np.abs(lhs - target))))
    s = out["stencil"]
    out["ratios"] = [s[i] / s[i + 1] for i in range(len(s) - 1)]
    return out


def check_covariance() -> Check:
    res = covariance_residuals()
    ok = all(3.5 <= r <= 4.5 for r in res["ratios"]) and max(res["covariant"]) <= 1e-12
    return Check("covariance residual is O(h^2) (ratio in [3.5, 4.5])", ok, res)


def check_l2_invariance(n: int = 8, trials: int = 10) -> Check:
    rng = np.random.default_rng(SEED + 9)
    omega = clifford.SelfDualPoint(0.7, -0.3, 1.1).as_two_form()
    ref = confgrid.l2_norm_2form(omega, confgrid.ConformalGrid.flat(n))
    devs = []
    for _ in range(trials):
        grid = confgrid.ConformalGrid(n, random_conformal_factor(n, rng))
        devs.append(rel_err(confgrid.l2_norm_2form(omega, grid), ref))
    cup = confgrid.cup_pairing(omega, omega)
    ok = max(devs) <= 1e-12 and rel_err(ref**2, cup) <= 1e-12
    return Check("L2 norm of a 2-form is conformally invariant", ok,
                 {"flat_value": ref, "max_rel_dev": max(devs), "norm_sq_vs_cup": rel_err(ref**2, cup)})


# ---------------------------------------------------------------- spectra


def check_constant_shift(n: int = 8) -> Check:
    grid = confgrid.ConformalGrid.flat(n)
    rows, ok = [], True
    for c in (0.5, 1.0, 2.0):
        res = spectrum.lowest_eigenpair(spectrum.assemble(grid, spectrum.constant_field(c, n)), 1e-10)
        psi = res.eigenfunction
        spread = float(np.ptp(psi) / psi.mean())
        good = abs(res.lam + c) <= 1e-10 and spread <= 1e-10 and bool(np.all(psi > 0))
        ok &= good
        rows.append({"c": c, "lambda": res.lam, "error": abs(res.lam + c), "spread": spread})
    return Check("lambda(6 Delta - c) = -c with constant ground state", ok, {"rows": rows})


def ground_state_study(ns=(8, 16)) -> dict:
    out = {"N": list(ns), "covariant_lambda": [], "zero_band": [], "covariant_dev": [],
           "stencil_lambda": [], "stencil_dev": []}
    f0 = confgrid.WeightedField(0.0, -2)
    for n in ns:
        x = confgrid.coordinates(n)
        grid = confgrid.ConformalGrid(n, 1 + 0.2 * np.cos(2 * np.pi * x[0]))
        cov = spectrum.lowest_eigenpair(spectrum.assemble(grid, f0), 1e-10)
        sten = spectrum.lowest_eigenpair(spectrum.assemble(grid, f0, "stencil"), 1e-10)
        out["covariant_lambda"].append(cov.lam)
        out["zero_band"].append(spectrum.zero_band(cov.lam, grid.h))
        out["covariant_dev"].append(spectrum.ground_state_deviation(cov, grid))
        out["stencil_lambda"].append(sten.lam)
        out["stencil_dev"].append(spectrum.ground_state_deviation(sten, grid))
    d = out["stencil_dev"]
    out["stencil_ratio"] = [d[i] / d[i + 1] for i in range(len(d) - 1)]
    return out


def check_ground_state() -> Check:
    res = ground_state_study()
    ok = (
        all(abs(l) < b for l, b in zip(res["covariant_lambda"], res["zero_band"]))
        and max(res["covariant_dev"]) <= 1e-8
        and all(3.5 <= r <= 4.5 for r in res["stencil_ratio"])
    )
    return Check("ground state of u^2 delta is u^-1 (O(h^2) for the stencil assembly)", ok, res)


def check_trichotomy(n: int = 8, trials: int = 10) -> Check:
    rng = np.random.default_rng(SEED + 7)
    factors = [random_conformal_factor(n, rng) for _ in range(trials)]
    expected = {-1.0: 1, 0.0: 0, 1.0: -1}
    rows, ok = [], True
    for fval, want in expected.items():
        f = spectrum.constant_field(fval, n)
        signs, lams = [], []
        for u in factors:
            norm = spectrum.conformal_normalize(confgrid.ConformalGrid(n, u), f)
            signs.append(norm.sign)
            lams.append(norm.spectral.lam)
        good = all(s == want for s in signs)
        ok &= good
        rows.append({"f": fval, "signs": [spectrum.sign_symbol(s) for s in signs],
                     "lambda_min": min(lams), "lambda_max": max(lams)})
    return Check("trichotomy sign is invariant under conformal rescaling", ok, {"rows": rows})


def check_descent(n: int = 16, iters: int = 500) -> Check:
    x = confgrid.coordinates(n)
    trial = 1 + 0.1 * np.cos(2 * np.pi * x[0]) + 0.1 * np.sin(2 * np.pi * x[2])
    res = spectrum.yamabe_constant_estimate(confgrid.ConformalGrid.flat(n), iters=iters, trial=trial)
    monotone = all(b <= a for a, b in zip(res.trace, res.trace[1:]))
    ok = abs(res.estimate) <= 1e-3 and monotone and len(res.trace) - 1 <= iters
    return Check("Yamabe constant of the flat class is 0", ok,
                 {"initial": res.trace[0], "estimate": res.estimate, "steps": len(res.trace) - 1,
                  "monotone": monotone})


# ---------------------------------------------------------------- algebra


def check_clifford(samples: int = 1000) -> Check:
    rng = np.random.default_rng(SEED + 8)
    eig_err, anti_err = 0.0, 0.0
    for _ in range(samples):
        w = clifford.SelfDualPoint.from_array(rng.normal(size=3))
        wp = clifford.SelfDualPoint.from_array(rng.normal(size=3))
        ev = clifford.clifford_eigenvalues(w)
        target = np.array([-1j, 1j]) * math.sqrt(2) * w.norm
        eig_err = max(eig_err, float(np.max(np.abs(ev - target))))
        anti_err = max(anti_err, clifford.anticommutator_check(w, wp))
    ok = eig_err <= 1e-12 and anti_err <= 1e-12
    return Check("Clifford eigenvalues are +-i sqrt2 |w|", ok,
                 {"samples": samples, "max_eigen_err": eig_err, "max_anticommutator": anti_err})


def check_hodge() -> Check:
    rng = np.random.default_rng(SEED + 3)
    errs = []
    for _ in range(100):
        w = confgrid.TwoFormField(rng.normal(size=6))
        star = confgrid.hodge_star_2form
        plus, minus = confgrid.selfdual_projection(w), confgrid.antiselfdual_projection(w)
        errs += [
            np.max(np.abs(star(star(w)).components - w.components)),
            np.max(np.abs(star(plus).components - plus.components)),
            np.max(np.abs(star(minus).components + minus.components)),
            abs(confgrid.cup_pairing(plus, minus)),
        ]
    return Check("Hodge star is an involution splitting into +-1 eigenspaces", max(errs) <= 1e-12,
                 {"max_err": max(errs)})


SUITES = {
    "constants": [check_constants, check_theorem_b_table],
    "lattice": [check_min_characteristic, check_mod8],
    "covariance": [check_covariance, check_l2_invariance],
    "trichotomy": [check_constant_shift, check_ground_state, check_trichotomy, check_descent],
    "algebra": [check_clifford, check_hodge],
}


def run_suite(name: str, jobs: int = 1) -> list[Check]:
    """Run one bundle; results keep the declared order regardless of ``jobs``."""
    if name == "all":
        checks = [c for suite in SUITES.values() for c in suite]
    elif name in SUITES:
        checks = SUITES[name]
    else:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))} or all")
    if jobs <= 1:
        return [c() for c in checks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda c: c(), checks))
