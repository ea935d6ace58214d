"""Named, repeatable checks that return structured verdicts.

Verdicts:
  PASS          the checked relation holds within tolerance on every usable sample
  FAIL          it does not
  RECONCILE     a quantity was measured instead of asserted (e.g. a fitted exponent)
  PASS-VACUOUS  every sample was skipped because the relation is empty there

Each report carries a ``criterion``: ``"max<=tol"`` (residual checks) or
``"witness>tol"`` (existence checks, where the max residual is the witness).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .jets import JetDomainError
from .metrics import FinslerMetric, MetricDomainError, RandersMetric, TangentSample, unit_directions
from .product import (
    CustomProduct,
    InadmissiblePoint,
    Linear,
    LpProduct,
    ProductMetric,
    admissibility,
)
from .tensors import (
    ProductEvaluator,
    cartan_spectral_norm,
    contraction_norm_sq,
    fiber_tensors,
    mean_cartan,
    mean_cartan_split,
    mixed_entries,
    printed_variant_deviations,
    randers_cartan_bound,
    randers_mean_norm_formula,
)

PASS, FAIL, RECONCILE, VACUOUS = "PASS", "FAIL", "RECONCILE", "PASS-VACUOUS"

DEFAULT_TOLERANCES = {
    "route_rel": 1e-8,
    "route_abs": 1e-10,
    "g_route": 1e-10,
    "inverse": 1e-9,
    "split_zero": 1e-12,
    "witness": 1e-4,
    "identity": 1e-10,
    "mean_split": 1e-10,
    "mean_norm": 1e-9,
    "norm_cross": 1e-10,
    "exponent_var": 1e-6,
    "c2like": 1e-8,
    "randers_upper": 1e-6,
    "randers_slack": 1e-2,
    "homogeneity": 1e-10,
}

_DOMAIN_ERRORS = (InadmissiblePoint, MetricDomainError, JetDomainError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class SamplePlan:
    count: int = 50
    seed: int = 0
    radius_range: tuple = (0.1, 10.0)

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("sample count must be at least 1")
        lo, hi = self.radius_range
        if not 0 < lo <= hi:
            raise ValueError("radius range must satisfy 0 < lo <= hi")


def sample_tangents(m: int, n: int, plan: SamplePlan) -> list[TangentSample]:
    """Uniform directions on each factor's unit sphere, log-uniform radii."""
    rng = np.random.default_rng(plan.seed)
    lo, hi = np.log(plan.radius_range[0]), np.log(plan.radius_range[1])
    ub = unit_directions(m, plan.count, rng)
    ut = unit_directions(n, plan.count, rng)
    rb = np.exp(rng.uniform(lo, hi, plan.count))
    rt = np.exp(rng.uniform(lo, hi, plan.count))
    return [TangentSample(ub[i] * rb[i], ut[i] * rt[i]) for i in range(plan.count)]


@dataclass
class CheckSpec:
    name: str
    pm: ProductMetric | None = None
    plan: SamplePlan = field(default_factory=SamplePlan)
    tolerances: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)  # overrides: {"linear": bool, "c2like": bool}

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def samples(self) -> list[TangentSample]:
        return sample_tangents(self.pm.m, self.pm.n, self.plan)


@dataclass
class VerificationReport:
    check: str
    provenance: str
    verdict: str
    max_residual: float
    tolerance: float
    criterion: str = "max<=tol"
    residuals: list = field(default_factory=list)
    measured: dict = field(default_factory=dict)
    skipped: int = 0
    notes: list = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "provenance": self.provenance,
            "verdict": self.verdict,
            "criterion": self.criterion,
            "max_residual": _clean(self.max_residual),
            "tolerance": self.tolerance,
            "residuals": [_clean(r) for r in self.residuals],
            "measured": _clean(self.measured),
            "skipped": self.skipped,
            "notes": list(self.notes),
        }


def _clean(x):
    """JSON-safe copy: numpy -> python, non-finite floats -> None."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _verdict(max_res: float, tol: float) -> str:
    return PASS if max_res <= tol else FAIL


def _rel(num: float, scale: float) -> float:
    if num == 0.0:
        return 0.0
    return num / scale if scale > 0 else math.inf


def _max_abs(x) -> float:
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


# ---------------------------------------------------------------------------
# sample evaluation with per-sample fallback

def _evaluate(pm: ProductMetric, samples):
    """ProductEvaluator for all usable samples; returns (evaluator, kept_samples, skipped)."""
    try:
        return ProductEvaluator(pm, samples), list(samples), 0
    except _DOMAIN_ERRORS:
        pass
    kept = []
    for s in samples:
        try:
            ProductEvaluator(pm, s)
            kept.append(s)
        except _DOMAIN_ERRORS:
            continue
    if not kept:
        return None, [], len(samples)
    return ProductEvaluator(pm, kept), kept, len(samples) - len(kept)


def _ad_tensors(ev: ProductEvaluator):
    F2, g, C = ev.ad()
    g_inv = np.linalg.inv(g)
    return F2, g, g_inv, C, mean_cartan(g_inv, C)


def is_linear(pm: ProductMetric, expect: dict | None = None) -> bool:
    """Whether f is linear: structural for built-ins, sampled second partials otherwise."""
    if expect and "linear" in expect:
        return bool(expect["linear"])
    pf = pm.pf
    if isinstance(pf, (Linear, LpProduct)):
        return pf.is_linear
    grid = np.geomspace(1e-2, 1e2, 8)
    for s in grid:
        for t in grid:
            p = pf.partials(s, t)
            scale = abs(p.fK) / s + abs(p.fH) / t
            if max(abs(p.fKK), abs(p.fKH), abs(p.fHH)) > 1e-13 * scale:
                return False
    return True


def _linear_coefficients(pm: ProductMetric) -> tuple[float, float]:
    p = pm.pf.partials(1.0, 1.0)
    return p.fK, p.fH


# ---------------------------------------------------------------------------
# checks

def check_admissibility(spec: CheckSpec) -> VerificationReport:
    """Conditions (a)-(e) on f, plus sampled homogeneity/convexity of custom factors."""
    pm = spec.pm
    rep = admissibility(pm.pf)
    notes = [f"condition ({c}) violated" for c, ok in rep.conditions.items() if not ok]
    measured = {"product_function": rep.as_dict()}
    ok = rep.passed
    rng = np.random.default_rng(spec.plan.seed)
    for label, metric in (("factor1", pm.factor1), ("factor2", pm.factor2)):
        dirs = unit_directions(metric.dim, 32 * max(1, metric.dim // 2), rng)
        hom, eig_min = 0.0, math.inf
        for y in dirs:
            try:
                base = float(metric.f2(list(y)))
                for lam in (0.5, 2.0, 7.0):
                    v = float(metric.f2(list(lam * y)))
                    hom = max(hom, abs(v - lam * lam * base) / abs(lam * lam * base) if base else math.inf)
            except _DOMAIN_ERRORS + (ValueError, ZeroDivisionError):
                hom = math.inf
        try:
            ft = fiber_tensors(metric, dirs)
            eig_min = float(np.linalg.eigvalsh(ft.g)[:, 0].min())
        except _DOMAIN_ERRORS:
            eig_min = -math.inf
        measured[label] = {"homogeneity_residual": hom, "min_eigenvalue": eig_min}
        if not hom <= spec.tol("homogeneity"):
            ok = False
            notes.append(f"{label}: F^2 is not 2-homogeneous (residual {hom:.3g})")
        if not eig_min > 0:
            ok = False
            notes.append(f"{label}: Hessian of F^2/2 not positive definite at sampled directions")
    return VerificationReport("admissibility", "product-function conditions and factor admissibility",
                              PASS if ok else FAIL, 0.0 if ok else 1.0, 0.0, measured=measured, notes=notes)


def check_homogeneity_suite(spec: CheckSpec) -> VerificationReport:
    """Euler identities of K and H, y-contraction of C, 0-homogeneity of g."""
    pm = spec.pm
    prov = "Euler identities and y-contraction of C"
    tol = spec.tol("identity")
    ev, kept, skipped = _evaluate(pm, spec.samples())
    if ev is not None:
        try:
            ev2 = ProductEvaluator(pm, [s.scaled(2.0) for s in kept])
        except _DOMAIN_ERRORS:
            ev2 = None
    if ev is None or ev2 is None:
        return VerificationReport("homogeneity", prov, FAIL, math.inf, tol, skipped=skipped + len(kept),
                                  notes=["no usable samples"])
    _, g, C = ev.ad()
    _, g2, _ = ev2.ad()
    S = len(kept)

    def rel(num, den):
        num, den = np.asarray(num, dtype=float), np.asarray(den, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(num == 0, 0.0, num / den)

    def rowmax(x):
        return np.abs(x).reshape(S, -1).max(axis=1)

    parts = []
    for fd in (ev.a, ev.b):
        parts.append(rel(np.abs(np.einsum("si,si->s", fd.K1, fd.y) - 2 * fd.K), np.abs(2 * fd.K)))
        parts.append(rel(rowmax(np.einsum("sij,sj->si", fd.K2, fd.y) - fd.K1), rowmax(fd.K1)))
    Y = ev.Y
    parts.append(rel(rowmax(np.einsum("sa,sabc->sbc", Y, C)), np.linalg.norm(Y, axis=1) * rowmax(C)))
    parts.append(rel(rowmax(g2 - g), rowmax(g)))
    residuals = np.max(np.array(parts), axis=0)
    mx = float(residuals.max())
    return VerificationReport("homogeneity", prov, _verdict(mx, tol), mx, tol, residuals=residuals.tolist(),
                              skipped=skipped)


def check_route_equivalence(spec: CheckSpec) -> VerificationReport:
    """Closed-form blocks vs direct differentiation, for g and C."""
    pm = spec.pm
    ev, kept, skipped = _evaluate(pm, spec.samples())
    if ev is None:
        return VerificationReport("route_equivalence", "closed-form blocks vs direct differentiation", FAIL,
                                  math.inf, 1.0, skipped=skipped, notes=["no usable samples"])
    _, g_ad, C_ad = ev.ad()
    g_cl = ev.g_closed_blocks().full()
    C_cl = ev.cartan_closed()
    rel, aabs = spec.tol("route_rel"), spec.tol("route_abs")
    residuals = []
    g_worst = 0.0
    for s in range(len(kept)):
        bound = max(rel * _max_abs(C_ad[s]), aabs)
        residuals.append(_max_abs(C_cl[s] - C_ad[s]) / bound)  # <= 1 means within tolerance
        g_worst = max(g_worst, _rel(_max_abs(g_cl[s] - g_ad[s]), _max_abs(g_ad[s])))
    variants = printed_variant_deviations(pm, kept)
    variant_max = {k: float(np.max(v)) for k, v in variants.items()}
    notes = [f"literal variant {k} deviates from the exact entry by up to {v:.3g} (relative)"
             for k, v in variant_max.items() if v > rel]
    mx = max(residuals)
    ok = mx <= 1.0 and g_worst <= spec.tol("g_route")
    return VerificationReport(
        "route_equivalence", "closed-form blocks vs direct differentiation", PASS if ok else FAIL, mx, 1.0,
        residuals=residuals, skipped=skipped,
        measured={"g_max_rel_error": g_worst, "literal_variant_deviation": variant_max,
                  "residual_unit": "|C_closed - C_ad|_inf / max(route_rel*|C_ad|_inf, route_abs)"},
        notes=notes)


def check_inverse(spec: CheckSpec) -> VerificationReport:
    pm = spec.pm
    ev, kept, skipped = _evaluate(pm, spec.samples())
    tol = spec.tol("inverse")
    if ev is None:
        return VerificationReport("inverse", "block inverse of the fundamental tensor", FAIL, math.inf, tol,
                                  skipped=skipped)
    _, g_ad, _ = ev.ad()
    N = ev.g_inv_closed_blocks().full()
    eye = np.eye(pm.dim)
    residuals = [_max_abs(g_ad[s] @ N[s] - eye) for s in range(len(kept))]
    mx = max(residuals)
    off = max(_max_abs(ev.g_inv_closed_blocks().ab), _max_abs(ev.g_inv_closed_blocks().ba))
    return VerificationReport("inverse", "block inverse of the fundamental tensor", _verdict(mx, tol), mx, tol,
                              residuals=residuals, skipped=skipped, measured={"max_offdiagonal_block": off})


def check_splitting(spec: CheckSpec) -> VerificationReport:
    """Torsion splits (zero mixed entries, pure blocks = coefficient x factor torsion) iff f is linear."""
    pm = spec.pm
    prov = "torsion splits iff the product function is linear"
    ev, kept, skipped = _evaluate(pm, spec.samples())
    if ev is None:
        return VerificationReport("splitting", prov, FAIL, math.inf, 0.0, skipped=skipped)
    _, _, C_ad = ev.ad()
    C_cl = ev.cartan_closed()
    m = pm.m
    mixed = np.array([max(_max_abs(mixed_entries(C_ad[s], m)), _max_abs(mixed_entries(C_cl[s], m)))
                      for s in range(len(kept))])
    if is_linear(pm, spec.expect):
        tol = spec.tol("split_zero")
        cK, cH = _linear_coefficients(pm)
        residuals, fit = [], {"first_block": [], "second_block": []}
        for s in range(len(kept)):
            Cb, Ct = 0.25 * ev.a.K3[s], 0.25 * ev.b.K3[s]
            pa, pb = C_ad[s][:m, :m, :m], C_ad[s][m:, m:, m:]
            prop = max(_rel(_max_abs(pa - cK * Cb), cK * _max_abs(Cb)),
                       _rel(_max_abs(pb - cH * Ct), cH * _max_abs(Ct)))
            residuals.append(max(mixed[s], prop))
            if np.any(Cb):
                fit["first_block"].append(float(np.sum(pa * Cb) / np.sum(Cb * Cb)))
            if np.any(Ct):
                fit["second_block"].append(float(np.sum(pb * Ct) / np.sum(Ct * Ct)))
        mx = max(residuals)
        measured = {
            "max_mixed_entry": float(mixed.max()),
            "coefficients": [cK, cH],
            "fitted_first_block_factor": float(np.mean(fit["first_block"])) if fit["first_block"] else None,
            "fitted_second_block_factor": float(np.mean(fit["second_block"])) if fit["second_block"] else None,
            "pairing": "first coefficient scales the first factor's torsion",
        }
        return VerificationReport("splitting", prov, _verdict(mx, tol), mx, tol, residuals=[float(r) for r in residuals],
                                  skipped=skipped, measured=measured)
    thr = spec.tol("witness")
    w = float(mixed.max())
    return VerificationReport("splitting", prov, PASS if w > thr else FAIL, w, thr, criterion="witness>tol",
                              residuals=mixed.tolist(), skipped=skipped,
                              measured={"witness_sample": int(np.argmax(mixed)), "max_mixed_entry": w})


def _block_norms(C, g_inv, m):
    A, B = slice(0, m), slice(m, None)
    P1 = contraction_norm_sq(C[..., A, A, A], g_inv[..., A, A])
    P2 = contraction_norm_sq(C[..., B, B, B], g_inv[..., B, B])
    return P1, P2


def fit_norm_exponent(pm: ProductMetric, samples, coefficients=(1.0, 2.0, 4.0)) -> dict:
    """Fit e in ||C||^2_block = f_K^-e ||C_bar||^2 by varying the linear coefficient.

    Uses the factor with nonzero torsion (first factor preferred). Returns the
    per-sample exponents, their mean and variance.
    """
    factor = None
    for which in (0, 1):
        metric = (pm.factor1, pm.factor2)[which]
        ys = np.array([(s.y_bar, s.y_tilde)[which] for s in samples])
        ft = fiber_tensors(metric, ys)
        if np.max(np.abs(ft.C)) > 0:
            factor = which
            own = ft.normC_sq
            break
    if factor is None:
        return {"exponent": None, "variance": None, "factor": None, "note": "both factors torsion-free"}
    logs = []
    for c in coefficients:
        pf = Linear(c, 1.0) if factor == 0 else Linear(1.0, c)
        ev = ProductEvaluator(ProductMetric(pm.factor1, pm.factor2, pf), samples)
        _, g, C = ev.ad()
        P1, P2 = _block_norms(C, np.linalg.inv(g), pm.m)
        logs.append(np.log((P1 if factor == 0 else P2) / own))
    x = np.log(np.asarray(coefficients))
    L = np.array(logs)  # (len(coeffs), S)
    xc = x - x.mean()
    slopes = (xc @ (L - L.mean(axis=0))) / (xc @ xc)
    e = -slopes
    return {"exponent": float(np.mean(e)), "variance": float(np.var(e)), "factor": factor + 1,
            "per_sample": e.tolist(), "coefficients": list(coefficients)}


def check_norm_split(spec: CheckSpec) -> VerificationReport:
    """||C||^2 = c1 ||C_bar||^2 + c2 ||C_tilde||^2: cross terms, and the measured law c1 = f_K^-e."""
    pm = spec.pm
    prov = "Cartan norm decomposition"
    ev, kept, skipped = _evaluate(pm, spec.samples())
    tol = spec.tol("norm_cross")
    if ev is None:
        return VerificationReport("norm_split", prov, FAIL, math.inf, tol, skipped=skipped)
    _, g, C = ev.ad()
    g_inv = np.linalg.inv(g)
    total = contraction_norm_sq(C, g_inv)
    P1, P2 = _block_norms(C, g_inv, pm.m)
    fa, fb = ev.factor_fibers()
    nb, nt = fa.normC_sq, fb.normC_sq
    p = ev.p
    scale = np.maximum(np.abs(total), 1e-300)
    cross = np.where(total == P1 + P2, 0.0, np.abs(total - P1 - P2) / scale)
    claimed = nb / p.fK ** 2 + nt / p.fH ** 2
    claimed_res = np.where(total == claimed, 0.0, np.abs(total - claimed) / scale)
    fit = fit_norm_exponent(pm, kept)
    var_ok = fit["variance"] is None or fit["variance"] < spec.tol("exponent_var")
    measured = {"exponent_fit": {k: v for k, v in fit.items() if k != "per_sample"},
                "exponent_is_integer": None if fit["exponent"] is None
                else bool(abs(fit["exponent"] - round(fit["exponent"])) < 1e-6 and var_ok),
                "claimed_law_max_rel_residual": float(np.max(claimed_res)),
                "max_cross_fraction": float(np.max(cross))}
    mx = float(np.max(cross))
    torsion_free = not np.any(nb) and not np.any(nt)
    if torsion_free:
        return VerificationReport("norm_split", prov, _verdict(float(np.max(np.abs(total))), tol),
                                  float(np.max(np.abs(total))), tol, skipped=skipped, measured=measured,
                                  notes=["both factors torsion-free: 0 = 0"])
    if is_linear(pm, spec.expect):
        if mx > tol:
            return VerificationReport("norm_split", prov, FAIL, mx, tol, residuals=cross.tolist(), skipped=skipped,
                                      measured=measured, notes=["cross terms do not vanish for a linear product"])
        if np.allclose(p.fK, 1.0, rtol=0, atol=0) and np.allclose(p.fH, 1.0, rtol=0, atol=0):
            # both exponent readings coincide: ||C||^2 = ||C_bar||^2 + ||C_tilde||^2
            direct = np.where(total == nb + nt, 0.0, np.abs(total - nb - nt) / scale)
            dm = float(max(mx, np.max(direct)))
            return VerificationReport("norm_split", prov, _verdict(dm, spec.tol("mean_norm")), dm,
                                      spec.tol("mean_norm"), residuals=direct.tolist(), skipped=skipped,
                                      measured=measured)
        return VerificationReport("norm_split", prov, RECONCILE, mx, tol, residuals=cross.tolist(), skipped=skipped,
                                  measured=measured,
                                  notes=[f"block coefficient measured as f_K^-{fit['exponent']:.6g}"])
    return VerificationReport("norm_split", prov, RECONCILE, mx, tol, residuals=cross.tolist(), skipped=skipped,
                              measured=measured,
                              notes=["non-linear product: cross terms and claimed law measured, not asserted"])


def check_mean_split(spec: CheckSpec) -> VerificationReport:
    """I = (I_bar, I_tilde) and ||I||^2 = I_bar^2/c1 + I_tilde^2/c2 iff f is linear."""
    pm = spec.pm
    prov = "mean torsion splits iff the product function is linear"
    ev, kept, skipped = _evaluate(pm, spec.samples())
    if ev is None:
        return VerificationReport("mean_split", prov, FAIL, math.inf, 0.0, skipped=skipped)
    _, _, g_inv, _, I = _ad_tensors(ev)
    fa, fb = ev.factor_fibers()
    m = pm.m
    I_split = np.concatenate([fa.I, fb.I], axis=1)
    dev = np.max(np.abs(I - I_split), axis=1)
    if not is_linear(pm, spec.expect):
        thr = spec.tol("witness")
        w = float(dev.max())
        return VerificationReport("mean_split", prov, PASS if w > thr else FAIL, w, thr, criterion="witness>tol",
                                  residuals=dev.tolist(), skipped=skipped, measured={"max_deviation": w})
    cK, cH = _linear_coefficients(pm)
    normI = np.einsum("si,sij,sj->s", I, g_inv, I)
    nb, nt = fa.normI_sq, fb.normI_sq
    pair_first = nb / cK + nt / cH
    pair_swap = nb / cH + nt / cK
    scale = np.maximum(np.abs(normI), 1e-300)
    r_first = np.where(normI == pair_first, 0.0, np.abs(normI - pair_first) / scale)
    r_swap = np.where(normI == pair_swap, 0.0, np.abs(normI - pair_swap) / scale)
    I_scale = np.maximum(np.max(np.abs(I), axis=1), 1e-300)
    r_I = np.where(dev == 0, 0.0, dev / I_scale)
    tol_I, tol_n = spec.tol("mean_split"), spec.tol("mean_norm")
    measured = {"max_I_deviation": float(r_I.max()), "norm_residual_first_pairing": float(r_first.max()),
                "norm_residual_swapped_pairing": float(r_swap.max()), "coefficients": [cK, cH]}
    if r_I.max() > tol_I:
        return VerificationReport("mean_split", prov, FAIL, float(r_I.max()), tol_I, residuals=r_I.tolist(),
                                  skipped=skipped, measured=measured)
    first_ok, swap_ok = r_first.max() <= tol_n, r_swap.max() <= tol_n
    residuals = np.maximum(r_I, r_first)
    if cK == cH:
        mx = float(residuals.max())
        return VerificationReport("mean_split", prov, _verdict(mx, tol_n), mx, tol_n,
                                  residuals=residuals.tolist(), skipped=skipped, measured=measured)
    if first_ok or swap_ok:
        measured["pairing"] = ("first-factor coefficient divides I_bar^2" if first_ok
                               else "second-factor coefficient divides I_bar^2")
        if first_ok and swap_ok:
            measured["pairing"] = "indistinguishable (both mean torsions vanish)"
        return VerificationReport("mean_split", prov, RECONCILE, float(residuals.max()), tol_n,
                                  residuals=residuals.tolist(), skipped=skipped, measured=measured)
    return VerificationReport("mean_split", prov, FAIL, float(min(r_first.max(), r_swap.max())), tol_n,
                              skipped=skipped, measured=measured, notes=["no coefficient pairing reproduces ||I||^2"])


def check_uv_reconciliation(spec: CheckSpec) -> VerificationReport:
    """Compare the transcribed U, V formulas and the exact ones against the oracle I."""
    pm = spec.pm
    prov = "mean torsion coefficients U, V"
    lit, exact, prop, rows, skipped = [], [], [], [], 0
    for s in spec.samples():
        try:
            ms = mean_cartan_split(pm, s)
        except _DOMAIN_ERRORS:
            skipped += 1
            continue
        scale = max(_max_abs(ms.I_oracle), 1e-300)
        lit.append(ms.literal_residual / scale if ms.literal_residual else 0.0)
        exact.append(ms.exact_residual / scale if ms.exact_residual else 0.0)
        prop.append(ms.proportionality_residual / scale if ms.proportionality_residual else 0.0)
        rows.append({k: ms.as_dict()[k] for k in ("U_literal", "V_literal", "U_exact", "V_exact",
                                                   "U_measured", "V_measured")})
    measured = {
        "literal_max_rel_residual": max(lit, default=None),
        "exact_max_rel_residual": max(exact, default=None),
        "proportionality_max_rel_residual": max(prop, default=None),
        "per_sample": rows,
    }
    mx = max(lit, default=math.inf)
    notes = []
    if lit and mx > spec.tol("mean_split"):
        notes.append("transcribed U, V do not reproduce I; exact U, V residual "
                     f"{max(exact):.3g}")
    return VerificationReport("uv_reconciliation", prov, RECONCILE, mx, spec.tol("mean_split"), residuals=lit,
                              measured=measured, skipped=skipped, notes=notes)


def _riemannian_at(fibers, tol=1e-12) -> bool:
    c = np.max(np.abs(fibers.C).reshape(fibers.C.shape[0], -1), axis=1)
    y_scale = np.max(np.abs(fibers.g).reshape(fibers.g.shape[0], -1), axis=1)
    return bool(np.all(c <= tol * y_scale))


def c2like_residuals(C, I, g_inv):
    """||C |I|^2 - I x I x I||_inf / |I|^3 per sample; NaN where I = 0."""
    nI = np.einsum("si,sij,sj->s", I, g_inv, I)
    III = np.einsum("si,sj,sk->sijk", I, I, I)
    R = np.abs(C * nI[:, None, None, None] - III).reshape(C.shape[0], -1).max(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(nI > 0, R / nI ** 1.5, np.nan), nI


def check_c2like(spec: CheckSpec) -> VerificationReport:
    """C2-like products of 2-D factors: C2-like iff one factor is Riemannian (linear f)."""
    pm = spec.pm
    prov = "C2-like products of C2-like factors"
    notes = []
    if not is_linear(pm, spec.expect) or pm.m != 2 or pm.n != 2:
        notes.append("precondition: linear product of two 2-dimensional factors")
    ev, kept, skipped = _evaluate(pm, spec.samples())
    if ev is None:
        return VerificationReport("c2like", prov, FAIL, math.inf, 0.0, skipped=skipped)
    _, _, g_inv, C, I = _ad_tensors(ev)
    R, nI = c2like_residuals(C, I, g_inv)
    usable = np.isfinite(R)
    degenerate = int(np.sum(~usable & (np.abs(C).reshape(len(kept), -1).max(axis=1) > 0)))
    skipped += int(np.sum(~usable))
    if degenerate:
        notes.append(f"{degenerate} samples with I = 0 but C != 0")
    fa, fb = ev.factor_fibers()
    one_riemannian = _riemannian_at(fa) or _riemannian_at(fb)
    expect_c2 = spec.expect.get("c2like", one_riemannian)
    measured = {"one_factor_riemannian": one_riemannian, "expect_c2like": bool(expect_c2)}
    if not usable.any():
        return VerificationReport("c2like", prov, VACUOUS, 0.0, spec.tol("c2like"), skipped=skipped,
                                  measured=measured, notes=notes + ["C = I = 0 at every sample"])
    res = R[usable]
    mx = float(res.max())
    if expect_c2:
        tol = spec.tol("c2like")
        return VerificationReport("c2like", prov, _verdict(mx, tol), mx, tol, residuals=res.tolist(),
                                  skipped=skipped, measured=measured, notes=notes)
    thr = spec.tol("witness")
    return VerificationReport("c2like", prov, PASS if mx > thr else FAIL, mx, thr, criterion="witness>tol",
                              residuals=res.tolist(), skipped=skipped, measured=measured, notes=notes)


def single_metric_c2like(metric: FinslerMetric, directions) -> np.ndarray:
    ft = fiber_tensors(metric, directions)
    R, _ = c2like_residuals(ft.C, ft.I, ft.g_inv)
    return R


def sampled_sups(metric: FinslerMetric, directions) -> tuple[float, float]:
    """max over directions of F |I|_g and F max|C(u,u,u)| (g-unit u)."""
    ft = fiber_tensors(metric, directions)
    F = ft.F
    i_vals = F * np.sqrt(np.maximum(ft.normI_sq, 0.0))
    c_vals = F * cartan_spectral_norm(ft.C, ft.g, ft.I)
    return float(np.max(i_vals)), float(np.max(c_vals))


def check_randers_bound(metric: RandersMetric, directions: int = 4096, seed: int = 0,
                        tolerances: dict | None = None, b_claimed: float | None = None) -> VerificationReport:
    """Sampled sup-norms of I and C of one Randers norm against the closed-form values."""
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    prov = "Randers sup-norm formula"
    b = metric.b_norm if b_claimed is None else float(b_claimed)
    if not b < 1.0:
        raise ValueError("Randers covector norm must be < 1")
    n = metric.dim
    rng = np.random.default_rng(seed)
    Y = unit_directions(n, directions, rng)
    i_sup, c_sup = sampled_sups(metric, Y)
    formula = randers_mean_norm_formula(n, b)
    c_bound = randers_cartan_bound(b)
    upper = tol["randers_upper"]
    slack = tol["randers_slack"]
    checks = {
        "I_sup_below_formula": i_sup <= formula + upper,
        "I_sup_within_slack": i_sup >= formula - slack,
        "I_sup_below_limit": i_sup < (n + 1) / math.sqrt(2.0),
        "C_sup_below_bound": c_sup <= c_bound + upper,
    }
    measured = {"n": n, "b": b, "I_sup": i_sup, "I_formula": formula, "sampling_gap": formula - i_sup,
                "C_sup": c_sup, "C_bound": c_bound, "directions": directions, "checks": checks}
    mx = max(i_sup - formula, c_sup - c_bound)
    return VerificationReport(f"randers_bound(n={n},b={b:.6g})", prov, PASS if all(checks.values()) else FAIL,
                              mx, upper, measured=measured)


def factor_bounds(metric: FinslerMetric):
    """(sup-norm of I, upper bound for sup-norm of C) for a factor, when known."""
    if isinstance(metric, RandersMetric):
        b = metric.b_norm
        return randers_mean_norm_formula(max(metric.dim, 2), b), randers_cartan_bound(b)
    if metric.is_riemannian:
        return 0.0, 0.0
    return None, None


def product_sups(pm: ProductMetric, samples):
    ev, kept, _ = _evaluate(pm, samples)
    F2, g, g_inv, C, I = _ad_tensors(ev)
    F = np.sqrt(F2)
    i_vals = F * np.sqrt(np.maximum(np.einsum("si,sij,sj->s", I, g_inv, I), 0.0))
    c_vals = F * cartan_spectral_norm(C, g, I)
    cK, cH = _linear_coefficients(pm)
    rho = cH * ev.b.K / (cK * ev.a.K)
    return float(i_vals.max()), float(c_vals.max()), float(rho.min()), float(rho.max())


def check_boundedness(spec: CheckSpec, widen: float = 100.0) -> VerificationReport:
    """Sampled sup of F|I| and F||C|| for a linear product against the factor-derived bound.

    The residual is sampled sup / window bound (<= 1 when the bound holds).

    For f = aK + bH the fixed-y quantities obey
      (F|I|)^2 <= iota1^2 (1 + rho) + iota2^2 (1 + 1/rho),
      F||C||  <= max(c1 sqrt(1 + rho), c2 sqrt(1 + 1/rho)),
    with rho = bH / (aK) and iota, c the factor sup-norms. The sweep checks these on
    the sampled ratio window, then widens the radius range to measure growth.
    """
    pm = spec.pm
    prov = "boundedness of torsion norms of linear products"
    if not is_linear(pm, spec.expect):
        return VerificationReport("boundedness", prov, RECONCILE, 0.0, 0.0,
                                  notes=["no factor-derived bound for non-linear products"])
    plan = replace(spec.plan, count=max(spec.plan.count, 512))
    samples = sample_tangents(pm.m, pm.n, plan)
    i_sup, c_sup, rmin, rmax = product_sups(pm, samples)
    (i1, c1), (i2, c2) = factor_bounds(pm.factor1), factor_bounds(pm.factor2)
    lo, hi = plan.radius_range
    wide = replace(plan, radius_range=(lo / widen, hi * widen), seed=plan.seed + 1)
    wi, wc, wrmin, wrmax = product_sups(pm, sample_tangents(pm.m, pm.n, wide))
    measured = {"I_sup": i_sup, "C_sup": c_sup, "rho_window": [rmin, rmax],
                "I_sup_wide": wi, "C_sup_wide": wc, "rho_window_wide": [wrmin, wrmax], "samples": plan.count}
    if i1 is None or i2 is None:
        return VerificationReport("boundedness", prov, RECONCILE, i_sup, 0.0, measured=measured,
                                  notes=["factor sup-norms unknown for custom factors"])
    i_bound = math.sqrt(i1 ** 2 * (1 + rmax) + i2 ** 2 * (1 + 1 / rmin))
    c_bound = max(c1 * math.sqrt(1 + rmax), c2 * math.sqrt(1 + 1 / rmin))
    measured.update({"I_window_bound": i_bound, "C_window_bound": c_bound})
    ratio = max(i_sup / i_bound if i_bound else (math.inf if i_sup else 0.0),
                c_sup / c_bound if c_bound else (math.inf if c_sup else 0.0))
    tol = 1.0 + spec.tol("randers_upper")
    if ratio > tol:
        return VerificationReport("boundedness", prov, FAIL, ratio, tol, measured=measured,
                                  notes=["sampled sup exceeds the factor-derived window bound"])
    if i_sup == 0 and c_sup == 0 and wi == 0 and wc == 0:
        return VerificationReport("boundedness", prov, PASS, 0.0, tol, measured=measured)
    growth = max(wi / i_sup if i_sup else 1.0, wc / c_sup if c_sup else 1.0)
    measured["growth_under_widening"] = growth
    return VerificationReport("boundedness", prov, RECONCILE, ratio, tol, measured=measured,
                              notes=["bounded on every bounded ratio window; the F-weighted sup grows with the "
                                     f"window (x{growth:.3g} after widening radii by {widen:g})"])


# ---------------------------------------------------------------------------

def run_suite(spec: CheckSpec) -> list[VerificationReport]:
    """Every applicable check for one product configuration, in a fixed order."""
    checks = [check_admissibility, check_homogeneity_suite, check_route_equivalence, check_inverse,
              check_splitting, check_norm_split, check_mean_split, check_uv_reconciliation]
    pm = spec.pm
    if pm.m == 2 and pm.n == 2 and is_linear(pm, spec.expect):
        checks.append(check_c2like)
    if is_linear(pm, spec.expect):
        checks.append(check_boundedness)
    reports = []
    for chk in checks:
        try:
            reports.append(chk(spec))
        except Exception as exc:  # a check that cannot run is a failed check
            name = chk.__name__.removeprefix("check_")
            reports.append(VerificationReport(name, "", FAIL, math.inf, 0.0,
                                              notes=[f"{type(exc).__name__}: {exc}"]))
    for metric in (pm.factor1, pm.factor2):
        if isinstance(metric, RandersMetric) and metric.dim >= 2:
            reports.append(check_randers_bound(metric, seed=spec.plan.seed))
    return reports
