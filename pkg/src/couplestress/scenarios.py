"""Named scenarios run from a :class:`~couplestress.config.ScenarioConfig`."""

import warnings

import numpy as np

from . import identities
from .config import ConfigError
from .geometry import make_domain
from .poly_fields import PolyField
from .report import Report, write_traction_dump
from .ritz import (
    BasisSpec,
    Constraints,
    CoupleStressRitz,
    manufactured_loads,
    patch_test,
)
from .tractions import StressState, sample_tractions
from .virtual_work import SmoothBoundaryWarning, balance_report

DEFAULT_TOL = {
    "identity": 1e-12,
    "closure": 1e-8,
    "accounting": 1e-8,
    "witness": 1e-3,
    "recovery": 1e-7,
    "mt_deviation_factor": 10.0,
    "patch": 1e-9,
    "tangency": 1e-12,
}


def _tol(cfg, key, scale):
    value = cfg.tolerances.get(key, DEFAULT_TOL[key])
    return value if key in ("witness", "mt_deviation_factor") else value * scale


def _domain(cfg, field_degree=3):
    d = cfg.domain
    return make_domain(d["kind"], d["size"], d["order"], d["dirichlet"], field_degree=field_degree)


def _config_echo(cfg):
    return {
        "name": cfg.name,
        "source": cfg.source,
        "domain": {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.domain.items()},
        "material": cfg.material.as_dict(),
        "fields": dict(cfg.field_text),
        "tolerances": dict(cfg.tolerances),
    }


def run_verify_identities(cfg, report, scale, out_dir):
    sec = cfg.section("identities")
    cases = int(sec.get("cases", 200))
    degree = int(sec.get("degree", 5))
    rng = np.random.default_rng(cfg.seed)
    tol = _tol(cfg, "identity", scale)
    for name, fn in identities.SUITE.items():
        kwargs = {"cases": cases}
        if name in ("curl_grad", "div_curl", "skw_grad_curl"):
            kwargs["degree"] = degree
        report.check(name, fn(rng, **kwargs), tol)
    report.check("trace_free_couple_stress",
                 identities.trace_free_couple_stress(rng, cases=max(cases // 4, 1), degree=degree),
                 tol)


def run_compare_bc(cfg, report, scale, out_dir):
    u, du = cfg.fields["u"], cfg.fields["du"]
    degree = max(u.degree, du.degree)
    domain = _domain(cfg, degree)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmoothBoundaryWarning)
        rep = balance_report(cfg.material, u, du, domain, f=cfg.fields.get("f"), refine=2)
    report.values["balance"] = rep.as_dict()
    tol = _tol(cfg, "closure", scale) if degree <= 3 else max(_tol(cfg, "closure", scale), 1e-6)
    s = rep.scale()
    report.check("residual_corrected", rep.residual_corrected / s, tol)
    if rep.mt_reliable:
        report.check("residual_mt", rep.residual_mt / s, tol)
    report.check("missing_term_accounting",
                 abs(rep.discrepancy - rep.missing_work - rep.edge_work) / s,
                 _tol(cfg, "accounting", scale))
    if domain.kind == "box":
        report.check("missing_term_witness", abs(rep.discrepancy),
                     _tol(cfg, "witness", scale), kind=">")


def run_missing_term_map(cfg, report, scale, out_dir):
    u = cfg.fields["u"]
    domain = _domain(cfg, u.degree)
    state = StressState(cfg.material, u)
    per_patch = {}
    worst_rot = 0.0
    for name in domain.neumann:
        patch = domain.patch(name)
        t = state.surface_terms(patch, patch.points)
        g_mt, g_c = t["moment_mt"], t["moment_corrected"]
        worst_rot = max(worst_rot,
                        float(np.max(np.abs(g_c - np.cross(g_mt, t["n"])))),
                        float(np.max(np.abs(np.einsum("qi,qi->q", g_c, t["n"])))))
        per_patch[name] = {
            "max_missing_term": float(np.max(np.linalg.norm(t["missing_term"], axis=1))),
            "max_traction_mt": float(np.max(np.linalg.norm(t["traction_mt"], axis=1))),
            "max_traction_corrected": float(np.max(np.linalg.norm(t["traction_corrected"], axis=1))),
        }
    edges = {}
    for ename in domain.edges:
        e = state.edge_terms(domain, ename)
        edges[ename] = {"max_jump": float(np.max(np.linalg.norm(e["jump"], axis=1))),
                        "max_normal_jump": float(np.max(np.linalg.norm(e["normal_jump"], axis=1)))}
    report.values["patches"] = per_patch
    report.values["edges"] = edges
    report.check("moment_rotation", worst_rot, _tol(cfg, "tangency", scale))
    if cfg.traction_dump and out_dir is not None:
        _dump(cfg, u, domain, out_dir)


def _dump(cfg, u, domain, out_dir):
    from pathlib import Path

    Path(out_dir).mkdir(parents=True, exist_ok=True)
    write_traction_dump(sample_tractions(cfg.material, u, domain, domain.neumann),
                        Path(out_dir) / "tractions.csv")


def run_solve(cfg, report, scale, out_dir):
    sec = cfg.section("solve")
    u_star = cfg.fields["u"]
    degree = int(sec.get("degree", max(u_star.degree, 1)))
    flavor = sec.get("traction", "corrected")
    if degree < u_star.degree:
        raise ConfigError(f"solve degree {degree} is below the degree {u_star.degree} of u",
                          cfg.source)
    domain = _domain(cfg, degree)
    cons = Constraints(tuple(sorted(domain.dirichlet)), cfg.fields.get("u0", u_star),
                       gauge=not domain.dirichlet, gauge_reference=u_star)
    params = cfg.material
    est = CoupleStressRitz(params.mu, params.lam, params.alpha1, params.alpha2, degree=degree)
    est.fit(domain, manufactured_loads(params, u_star, domain, flavor), cons)
    basis = BasisSpec(degree)
    err = float(np.max(np.abs(est.coef_ - basis.coefficients(u_star))))
    est.traction_roundtrip(u_star, flavor)
    report.values["solve"] = est.report_.as_dict()
    report.values["coefficient_error"] = err
    tol = _tol(cfg, "recovery", scale)
    if flavor == "corrected":
        report.check("recovery", err, tol)
    report.check("optimality", est.report_.optimality_residual, 1e-9 * scale)
    if sec.get("compare_mt", "false").lower() in ("1", "true", "yes"):
        mt = CoupleStressRitz(params.mu, params.lam, params.alpha1, params.alpha2, degree=degree)
        mt.fit(domain, manufactured_loads(params, u_star, domain, "mt"), cons)
        dev = float(np.max(np.abs(mt.coef_ - basis.coefficients(u_star))))
        report.values["mt_deviation"] = dev
        report.check("mt_deviation", dev, _tol(cfg, "mt_deviation_factor", scale) * tol, kind=">")
    if cfg.traction_dump and out_dir is not None:
        _dump(cfg, est.field_, domain, out_dir)


def _matrix(text):
    rows = [r.split() for r in text.replace(",", " ").split(";")]
    A = np.array(rows, dtype=float)
    if A.shape != (3, 3):
        raise ValueError("A must be 3x3")
    return A


def run_patch_test(cfg, report, scale, out_dir):
    sec = cfg.section("patch-test")
    domain = _domain(cfg, 2)
    rng = np.random.default_rng(cfg.seed)
    spec = sec.get("a", sec.get("A", "random"))
    if spec.strip() == "random":
        mats = []
        for _ in range(int(sec.get("count", 5))):
            B = rng.uniform(-1, 1, (3, 3))
            mats.append(0.5 * (B + B.T))
    else:
        mats = [_matrix(spec)]
    tol = _tol(cfg, "patch", scale)
    results = []
    for k, A in enumerate(mats):
        res = patch_test(cfg.material, domain, A, tol=tol)
        results.append({"A": A, **res.as_dict()})
        report.check(f"patch_{k}_error", res.max_error, tol)
        report.check(f"patch_{k}_traction", res.traction_error, tol)
        report.check(f"patch_{k}_missing_term", res.missing_term, tol)
    report.values["patch_tests"] = results


RUNNERS = {
    "verify-identities": run_verify_identities,
    "compare-bc": run_compare_bc,
    "missing-term-map": run_missing_term_map,
    "solve": run_solve,
    "patch-test": run_patch_test,
}


def run_scenario(cfg, out_dir=None, tol_scale=1.0):
    """Execute ``cfg`` and return the :class:`Report` (not yet written)."""
    report = Report(cfg.name, cfg.seed, _config_echo(cfg))
    RUNNERS[cfg.name](cfg, report, float(tol_scale), out_dir)
    return report


__all__ = ["run_scenario", "RUNNERS", "DEFAULT_TOL", "PolyField"]
