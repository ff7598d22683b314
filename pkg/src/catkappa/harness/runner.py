"""Scenario dispatch and batch execution."""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..analysis import circumcenter, circumcenter_certificate
from ..errors import (
    CatKappaError,
    ConfigError,
    DomainError,
    LadderError,
    NonConvergenceError,
    NotIsometryError,
    OrderCertificationError,
    RadiusGuardError,
)
from ..isometries import (
    OrthogonalMap,
    equality_case_probe,
    isometry_from_config,
    random_finite_order_orthogonal,
    tangent_flat_check,
    verify_chord_inequality,
    verify_rotation_bound,
)
from ..model import SphericalCurve, hemisphere_center, model_distance, random_spherical_polygon
from ..polytopes import PolytopeSpec, build_equivariant_configuration, gram_sum_certificate, verify_polytope_angles
from ..spaces import Euclidean, space_from_config
from .config import Batch, Scenario, parse_scenario
from .report import Summary, VerificationReport, make_body, worst_verdict

ORACLE_TOL = 1e-8


def _euclidean_oracle_angle(M, x):
    """Exact angle at the orbit centre: the centre is the projection onto Fix(M)."""
    n = len(M)
    P = np.zeros((n, n))
    A = np.eye(n)
    k = 0
    while True:
        P += A
        k += 1
        A = M @ A
        if np.max(np.abs(A - np.eye(n))) < 1e-9:
            break
    c = (P / k) @ x
    v, w = x - c, M @ x - c
    v = v / np.linalg.norm(v)
    w = w / np.linalg.norm(w)
    return 2.0 * math.atan2(np.linalg.norm(v - w), np.linalg.norm(v + w))


def _run_isometry(sc: Scenario, rng):
    p = sc.params
    space = space_from_config(p["space"])
    tol = sc.tolerances["verify"]
    if "random_orthogonal" in p:
        if not isinstance(space, Euclidean):
            raise ConfigError("random_orthogonal needs a Euclidean space")
        n = int(p["random_orthogonal"]["order"])
        M = random_finite_order_orthogonal(space.dim, n, rng)
        g = OrthogonalMap(space, M, n).certify(seed=int(rng.integers(2 ** 31)))
    else:
        if "isometry" not in p:
            raise ConfigError("isometry scenarios need 'isometry' or 'random_orthogonal'")
        g = isometry_from_config(space, p["isometry"])
    if "point" in p:
        x = space.point_from_json(p["point"])
    elif isinstance(space, Euclidean):
        x = rng.normal(size=space.dim)
    else:
        x = space.sample(rng)
    n = g.order
    checks = p.get("checks")
    if checks is None:
        checks = ["rotation", "equality"] + (["chord"] if n >= 4 and space.curvature.kappa <= 0 else [])
    details = {"space": space.to_config(), "order": n, "point": space.point_to_json(x)}
    notes = []
    rep = verify_rotation_bound(space, g, x, tol=tol)
    verdicts = [rep.verdict if rep.verdict not in ("vacuous", "trivial") else "pass"]
    notes.extend(rep.notes)
    if rep.degenerate:
        return make_body(sc, "pass", n, None, 2 * math.pi / n, None, details, notes + ["vacuous: x is fixed"])
    details.update({
        "center": space.point_to_json(rep.center),
        "radius": rep.radius,
        "center_drift": rep.center_drift,
        "angle_ladder": [[t, a] for t, a in rep.angle.ladder],
        "upper_bias_bound": rep.angle.upper_bias_bound,
        "baseline": rep.baseline,
        "baseline_slack": rep.baseline_slack,
        "equality": rep.equality,
    })
    if isinstance(g, OrthogonalMap):
        exact = _euclidean_oracle_angle(g.matrix, x)
        details["oracle_angle"] = exact
        details["oracle_agreement"] = abs(exact - rep.measured)
        if abs(exact - rep.measured) > ORACLE_TOL:
            verdicts.append("fail")
            notes.append("measured angle disagrees with the dot-product oracle")
    if "equality" in checks and rep.equality == "equality" and n >= 3:
        sig = equality_case_probe(space, g, x, rep)
        flat = tangent_flat_check(sig.distances, n)
        details["circle_signature"] = {"distances": sig.distances.tolist(), "max_deviation": sig.max_deviation,
                                       "passed": sig.passed}
        details["tangent_flat"] = {"cone_deviation": flat.cone_deviation, "passed": flat.passed}
        if not (sig.passed and flat.passed):
            verdicts.append("fail")
            notes.append("equality detected but the circle/flat signature failed")
    if "chord" in checks:
        if n < 4 or space.curvature.kappa > 0:
            notes.append("chord inequality skipped (needs n >= 4 and a CAT(0) space)")
        else:
            ch = verify_chord_inequality(space, g, x, tol=tol)
            details["chord"] = {"ratio": ch.chord_ratio, "bound": ch.chord_bound, "slack": ch.chord_slack,
                                "equality": ch.equality, "flat": bool(ch.flat.flat),
                                "flat_deviation": ch.flat.worst_deviation}
            verdicts.append(ch.verdict)
            notes.extend(ch.notes)
    return make_body(sc, worst_verdict(verdicts), n, rep.measured, rep.bound, rep.slack, details, notes)


def _polytope_config(p):
    poly = p["polytope"]
    if not isinstance(poly, dict) or "family" not in poly:
        raise ConfigError("'polytope' needs a 'family'")
    spec = PolytopeSpec(poly["family"], int(poly.get("k", 3)))
    cons = p.get("construction", {"tag": "isometric-embed"})
    if not isinstance(cons, dict) or "tag" not in cons:
        raise ConfigError("'construction' needs a 'tag'")
    return spec, build_equivariant_configuration(spec, cons["tag"], cons.get("params", {}))


def _run_polytope(sc: Scenario, rng):
    spec, cfg = _polytope_config(sc.params)
    rep = verify_polytope_angles(cfg, tol=sc.tolerances["verify"])
    details = {"family": spec.family, "k": spec.k, "tag": cfg.tag, "label": rep.label, "edge": list(rep.edge),
               "radius": rep.radius, "upper_bias_bound": rep.bias, "space": cfg.space.to_config()}
    return make_body(sc, rep.verdict, spec.name, rep.measured, rep.bound, rep.slack, details, rep.notes)


def _run_gram(sc: Scenario, rng):
    spec, cfg = _polytope_config(sc.params)
    cert = gram_sum_certificate(cfg, tol=sc.tolerances["verify"])
    details = {
        "family": spec.family, "k": spec.k, "tag": cfg.tag, "method": cert.method,
        "orbit_angles": {"a%d" % k: v for k, v in cert.orbit_angles.items()},
        "links": [{"name": lk.name, "lhs": lk.lhs, "rhs": lk.rhs, "slack": lk.slack} for lk in cert.links],
        "a1_sq_measured": cert.a1_sq_measured, "a1_sq_bound": cert.a1_sq_bound,
        "angle_bound": cert.angle_bound,
    }
    return make_body(sc, cert.verdict, spec.name, cert.total, 0.0, -cert.total, details, cert.notes)


def _run_circumcenter(sc: Scenario, rng):
    p = sc.params
    space = space_from_config(p["space"])
    if "points" in p:
        pts = [space.point_from_json(q) for q in p["points"]]
    elif "random" in p:
        pts = [space.sample(rng) for _ in range(int(p["random"].get("count", 5)))]
    else:
        raise ConfigError("circumcenter scenarios need 'points' or 'random'")
    if not pts:
        raise ConfigError("circumcenter of an empty point set")
    res = circumcenter(space, pts, tol=sc.tolerances["kernel"], max_iter=int(p.get("max_iter", 100000)),
                       symmetric=bool(p.get("symmetric", False)), method=p.get("method", "auto"))
    probes = [q for q in pts + [space.sample(rng) for _ in range(8)] if space.distance(q, res.center) > 1e-9]
    cert = circumcenter_certificate(space, res.center, pts, probes) if probes else 0.0
    tol = sc.tolerances["verify"]
    details = {"center": space.point_to_json(res.center), "method": res.method, "iterations": res.iterations,
               "residual": res.residual, "uniqueness_guard": res.uniqueness_guard, "optimality_certificate": cert}
    verdict = "pass" if cert <= tol else "fail"
    return make_body(sc, verdict, len(pts), res.radius, None, -cert, details)


def _run_hemisphere(sc: Scenario, rng):
    p = sc.params
    if "curve" in p:
        curve = SphericalCurve(np.array(p["curve"], dtype=float))
    elif "random" in p:
        r = p["random"]
        curve = random_spherical_polygon(rng, int(r.get("vertices", 8)), float(r.get("length", 5.8)))
    else:
        raise ConfigError("hemisphere scenarios need 'curve' or 'random'")
    m = hemisphere_center(curve)
    worst = max(model_distance(1.0, m, v) for v in curve.vertices)
    slack = math.pi / 2 - worst
    details = {"center": m.tolist(), "length": curve.length, "vertices": len(curve.vertices)}
    return make_body(sc, "pass" if slack > 0 else "fail", len(curve.vertices), worst, math.pi / 2, slack, details)


_DISPATCH = {
    "isometry": _run_isometry,
    "polytope": _run_polytope,
    "gram": _run_gram,
    "circumcenter": _run_circumcenter,
    "hemisphere": _run_hemisphere,
}


def run_scenario(sc) -> VerificationReport:
    """Run one scenario.  Mathematical failures are report entries; only
    malformed or unsupported configurations raise ConfigError."""
    if isinstance(sc, dict):
        sc = parse_scenario(sc)
    rng = sc.rng()
    t0 = time.perf_counter()
    try:
        body = _DISPATCH[sc.subject](sc, rng)
    except RadiusGuardError as exc:
        body = make_body(sc, "precondition-failed", notes=[str(exc)])
    except (LadderError, NonConvergenceError) as exc:
        body = make_body(sc, "fail", notes=["%s: %s" % (type(exc).__name__, exc)])
    except (NotIsometryError, OrderCertificationError) as exc:
        raise ConfigError("scenario %s: invalid isometry: %s" % (sc.id, exc)) from None
    except ConfigError as exc:
        raise ConfigError("scenario %s: %s" % (sc.id, exc)) from None
    except (KeyError, TypeError, DomainError, CatKappaError) as exc:
        raise ConfigError("scenario %s: unsupported or malformed input: %s" % (sc.id, exc)) from None
    return VerificationReport(body, time.perf_counter() - t0)


def _error_report(sid, message, subject=None):
    return VerificationReport({"id": sid, "subject": subject, "n_or_family": None, "measured": None,
                               "bound": None, "slack": None, "verdict": "error", "details": {},
                               "notes": [message]})


def _safe_run(sc):
    try:
        return run_scenario(sc)
    except ConfigError as exc:
        return _error_report(sc.id, str(exc), sc.subject)


def run_batch(batch: Batch, jobs: int = 1):
    """All scenarios (optionally in worker processes), reports sorted by id."""
    reports = [_error_report(sid, msg) for sid, msg in batch.errors]
    if jobs and jobs > 1 and len(batch.scenarios) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports.extend(ex.map(_safe_run, batch.scenarios))
    else:
        reports.extend(_safe_run(sc) for sc in batch.scenarios)
    reports.sort(key=lambda r: r.id)
    return reports, Summary.of(reports)
