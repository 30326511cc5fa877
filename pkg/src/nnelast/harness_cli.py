"""Convergence/locking study on the unit cube, verification suites, and CLI.

The manufactured displacement is trigonometric with Dirichlet data taken
everywhere; the body force is f = -div(C eps(u)) in closed form.  The
'paper' variant uses the printed third component cos(3x1)cos(3x3)sin(3x3);
'symmetrized' replaces it by cos(3x1)cos(3x2)sin(3x3), which restores the
cyclic symmetry of the first two components (the variant the trace/deviator
identities of the study hold for).  Errors are integrated with the 14-point
degree-5 rule; the load functional uses the 4-point degree-2 rule.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import kernels
from . import symtensor as st
from .assembly_solve import TET_DEG5_14PT, assemble, export_coo, quad_rule, solve
from .dof_system import GlobalDofMap, apply_dirichlet, build_dof_map
from .errors import NNElastError, SolverBreakdown, ToleranceNotReached
from .interpolation import DiscreteStressField, check_commuting
from .mesh import TetMesh, generate_box, quality
from .quadrature import exact_simplex_integral
from .ref_element import (
    Tet,
    dof_matrix,
    geometry,
    reduced_matrix_12,
    reference_tet,
)
from .symtensor import Material

#: Reference determinant of the reduced 12x12 unisolvence matrix, 2^-8 3^4 5^2.
REFERENCE_DETERMINANT = 2025.0 / 256.0

VARIANTS = ("paper", "symmetrized")


class ManufacturedSolution:
    """Closed-form displacement, stress, and body force for the cube study."""

    def __init__(self, material: Material, variant="paper"):
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
        self.material = material
        self.variant = variant

    @staticmethod
    def _trig(x):
        x = np.asarray(x, dtype=float)
        return np.sin(3.0 * x), np.cos(3.0 * x)

    def u(self, x):
        s, c = self._trig(x)
        out = np.empty_like(np.asarray(x, dtype=float))
        out[..., 0] = s[..., 0] * c[..., 1] * c[..., 2]
        out[..., 1] = c[..., 0] * s[..., 1] * c[..., 2]
        if self.variant == "paper":
            out[..., 2] = c[..., 0] * c[..., 2] * s[..., 2]
        else:
            out[..., 2] = c[..., 0] * c[..., 1] * s[..., 2]
        return out

    def grad_u(self, x):
        s, c = self._trig(x)
        s1, s2, s3 = s[..., 0], s[..., 1], s[..., 2]
        c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2]
        g = np.empty(np.asarray(x).shape[:-1] + (3, 3))
        g[..., 0, 0] = 3.0 * c1 * c2 * c3
        g[..., 0, 1] = -3.0 * s1 * s2 * c3
        g[..., 0, 2] = -3.0 * s1 * c2 * s3
        g[..., 1, 0] = -3.0 * s1 * s2 * c3
        g[..., 1, 1] = 3.0 * c1 * c2 * c3
        g[..., 1, 2] = -3.0 * c1 * s2 * s3
        if self.variant == "paper":
            g[..., 2, 0] = -3.0 * s1 * c3 * s3
            g[..., 2, 1] = 0.0
            g[..., 2, 2] = 3.0 * c1 * np.cos(6.0 * np.asarray(x, dtype=float)[..., 2])
        else:
            g[..., 2, 0] = -3.0 * s1 * c2 * s3
            g[..., 2, 1] = -3.0 * c1 * s2 * s3
            g[..., 2, 2] = 3.0 * c1 * c2 * c3
        return g

    def strain(self, x):
        return st.from_matrix(self.grad_u(x))

    def div_u(self, x):
        g = self.grad_u(x)
        return g[..., 0, 0] + g[..., 1, 1] + g[..., 2, 2]

    def sigma(self, x):
        return st.stiffness_apply(self.strain(x), self.material)

    def laplacian_u(self, x):
        s, c = self._trig(x)
        s1, s3 = s[..., 0], s[..., 2]
        c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2]
        out = np.empty_like(np.asarray(x, dtype=float))
        out[..., 0] = -27.0 * s1 * c2 * c3
        out[..., 1] = -27.0 * c1 * s[..., 1] * c3
        if self.variant == "paper":
            out[..., 2] = -45.0 * c1 * c3 * s3
        else:
            out[..., 2] = -27.0 * c1 * c2 * s3
        return out

    def grad_div_u(self, x):
        s, c = self._trig(x)
        s1, s2, s3 = s[..., 0], s[..., 1], s[..., 2]
        c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2]
        out = np.empty_like(np.asarray(x, dtype=float))
        if self.variant == "paper":
            z = np.asarray(x, dtype=float)[..., 2]
            out[..., 0] = -18.0 * s1 * c2 * c3 - 9.0 * s1 * np.cos(6.0 * z)
            out[..., 1] = -18.0 * c1 * s2 * c3
            out[..., 2] = -18.0 * c1 * c2 * s3 - 18.0 * c1 * np.sin(6.0 * z)
        else:
            out[..., 0] = -27.0 * s1 * c2 * c3
            out[..., 1] = -27.0 * c1 * s2 * c3
            out[..., 2] = -27.0 * c1 * c2 * s3
        return out

    def div_sigma(self, x):
        m = self.material
        return m.mu * self.laplacian_u(x) + (m.mu + m.lam) * self.grad_div_u(x)

    def f(self, x):
        return -self.div_sigma(x)

    # tensor-field protocol used by interpolate_nn
    def value(self, x):
        return self.sigma(x)

    def divergence(self, x):
        return self.div_sigma(x)


class AffineSolution:
    """u = a + G x for the patch test; sigma constant, f = 0."""

    def __init__(self, material: Material, offset, grad):
        self.material = material
        self.offset = np.asarray(offset, dtype=float)
        self.grad_mat = np.asarray(grad, dtype=float)
        self._eps = st.from_matrix(self.grad_mat)
        self._sigma = st.stiffness_apply(self._eps, material)

    def u(self, x):
        return np.asarray(x, dtype=float) @ self.grad_mat.T + self.offset

    def strain(self, x):
        shape = np.asarray(x).shape[:-1]
        return np.broadcast_to(self._eps, shape + (6,)).copy()

    def sigma(self, x):
        shape = np.asarray(x).shape[:-1]
        return np.broadcast_to(self._sigma, shape + (6,)).copy()

    def div_sigma(self, x):
        return np.zeros(np.asarray(x).shape)

    f = div_sigma

    def value(self, x):
        return self.sigma(x)

    divergence = div_sigma


# ---------------------------------------------------------------------------
# error measurement


def _tet_volumes(mesh: TetMesh):
    v = mesh.tet_verts()
    return np.abs(np.linalg.det(v[:, 1:] - v[:, :1])) / 6.0


def solution_norm(mesh: TetMesh, solution, rule=TET_DEG5_14PT):
    """(||u||_1^2 + ||sigma||_div^2)^(1/2) integrated by quadrature."""
    pts = rule.physical_points(mesh.tet_verts())
    vol = _tet_volumes(mesh)
    u = solution.u(pts)
    eps = solution.strain(pts)
    sig = solution.sigma(pts)
    dsig = solution.div_sigma(pts)
    dens = (
        (u**2).sum(axis=-1)
        + st.frobenius(eps, eps)
        + st.frobenius(sig, sig)
        + (dsig**2).sum(axis=-1)
    )
    return float(np.sqrt(np.einsum("ep,p,e->", dens, rule.weights, vol)))


def compute_errors(mesh: TetMesh, dofmap: GlobalDofMap, data, solution, x,
                   boundary_values, rule=TET_DEG5_14PT):
    """L2 errors (u, strain of the trace lift, sigma, div sigma)."""
    pts = rule.points
    w = rule.weights
    phys = rule.physical_points(mesh.tet_verts())
    vol = data.volume

    sig_field = DiscreteStressField(mesh, dofmap, data, x[: dofmap.n_sigma])
    d_sig = sig_field.values_bary(pts) - solution.sigma(phys)
    err_sigma = np.einsum("ep,p,e->", st.frobenius(d_sig, d_sig), w, vol)

    d_div = np.einsum("pj,ejd->epd", pts, sig_field.divergence_p1()) - solution.div_sigma(phys)
    err_div = np.einsum("epd,epd,p,e->", d_div, d_div, w, vol)

    u_coef = x[dofmap.u_offset : dofmap.u_offset + dofmap.n_u].reshape(-1, 4, 3)
    d_u = np.einsum("pv,evd->epd", pts, u_coef) - solution.u(phys)
    err_u = np.einsum("epd,epd,p,e->", d_u, d_u, w, vol)

    w_full = boundary_values.copy()
    free = dofmap.vertex_eta >= 0
    if dofmap.n_eta:
        w_full[free] = x[dofmap.eta_offset :].reshape(-1, 3)[dofmap.vertex_eta[free]]
    eps_h = st.sym_outer(w_full[mesh.tets], data.grad).sum(axis=1)  # (ne, 6)
    d_eps = eps_h[:, None, :] - solution.strain(phys)
    err_strain = np.einsum("ep,p,e->", st.frobenius(d_eps, d_eps), w, vol)

    return {
        "err_u": math.sqrt(max(err_u, 0.0)),
        "err_strain": math.sqrt(max(err_strain, 0.0)),
        "err_sigma": math.sqrt(max(err_sigma, 0.0)),
        "err_divsigma": math.sqrt(max(err_div, 0.0)),
    }


# ---------------------------------------------------------------------------
# convergence study


@dataclass
class StudyConfig:
    nus: tuple = (0.3, 0.45, 0.49, 0.4999)
    levels: tuple = (2, 4, 8, 16)
    e_young: float = 1.0
    variant: str = "paper"
    out: str | None = None
    solver_tol: float = 1e-9
    export_matrix: str | None = None

    def __post_init__(self):
        if list(self.levels) != sorted(set(self.levels)):
            raise ValueError("levels must be strictly increasing")
        for nu in self.nus:
            if not 0.0 < nu < 0.5:
                raise ValueError(f"nu must lie in (0, 1/2), got {nu}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")


@dataclass
class ErrorRecord:
    nu: float
    level: int
    h: float
    ndof_sigma: int
    ndof_u: int
    ndof_eta: int
    err_u: float = math.nan
    err_strain: float = math.nan
    err_sigma: float = math.nan
    err_divsigma: float = math.nan
    norm_exact: float = math.nan
    rel_u: float = math.nan
    rel_strain: float = math.nan
    rel_sigma: float = math.nan
    rel_divsigma: float = math.nan
    eoc_u: float | None = None
    eoc_strain: float | None = None
    eoc_sigma: float | None = None
    eoc_divsigma: float | None = None
    failed: bool = False
    solve_residual: float = math.nan
    solve_time: float = math.nan


ERROR_KEYS = ("u", "strain", "sigma", "divsigma")


def _finalize(records_by_nu, norms):
    for nu, records in records_by_nu.items():
        norm = norms[nu]
        for rec in records:
            rec.norm_exact = norm
            for key in ERROR_KEYS:
                err = getattr(rec, f"err_{key}")
                setattr(rec, f"rel_{key}", err / norm)
        for prev, cur in zip(records, records[1:]):
            if prev.failed or cur.failed:
                continue
            scale = math.log(prev.h / cur.h)
            for key in ERROR_KEYS:
                e0 = getattr(prev, f"err_{key}")
                e1 = getattr(cur, f"err_{key}")
                if e0 > 0.0 and e1 > 0.0:
                    setattr(cur, f"eoc_{key}", math.log(e0 / e1) / scale)


def run_convergence(cfg: StudyConfig, log=None):
    """Run the study; returns {nu: [ErrorRecord per level]}."""

    def say(msg):
        if log is not None:
            log(msg)

    materials = {nu: Material.from_young_poisson(cfg.e_young, nu) for nu in cfg.nus}
    records = {nu: [] for nu in cfg.nus}
    norms = {}
    for level in cfg.levels:
        mesh = generate_box(level)
        dofmap = build_dof_map(mesh)
        data = kernels.build_element_data(mesh.tet_verts())
        say(f"level {level}: {mesh.n_tets} tets, {dofmap.n_total} dofs")
        for nu in cfg.nus:
            ms = ManufacturedSolution(materials[nu], cfg.variant)
            rec = ErrorRecord(
                nu=nu,
                level=level,
                h=mesh.h,
                ndof_sigma=dofmap.n_sigma,
                ndof_u=dofmap.n_u,
                ndof_eta=dofmap.n_eta,
            )
            records[nu].append(rec)
            boundary_values = apply_dirichlet(ms.u, mesh)
            system = assemble(
                mesh, dofmap, materials[nu], f=ms.f,
                boundary_values=boundary_values, data=data,
                materialize=bool(cfg.export_matrix),
            )
            if cfg.export_matrix:
                import os

                os.makedirs(cfg.export_matrix, exist_ok=True)
                export_coo(system, os.path.join(cfg.export_matrix, f"K_nu{nu:g}_n{level}.txt"))
            try:
                x, report = solve(system, tol=cfg.solver_tol)
            except (SolverBreakdown, ToleranceNotReached) as exc:
                say(f"  nu={nu:g}: solve failed: {exc}")
                rec.failed = True
                continue
            finally:
                system = None  # release the sparse matrix before error integration
            rec.solve_residual = report.residual
            rec.solve_time = report.wall_time
            errs = compute_errors(mesh, dofmap, data, ms, x, boundary_values)
            for key, value in errs.items():
                setattr(rec, key, value)
            if level == cfg.levels[-1]:
                norms[nu] = solution_norm(mesh, ms)
            say(
                f"  nu={nu:g}: err_sigma={rec.err_sigma:.3e} err_u={rec.err_u:.3e} "
                f"(residual {report.residual:.1e}, {report.wall_time:.1f}s)"
            )
    for nu in cfg.nus:
        if nu not in norms:  # finest level failed; fall back to coarsest computed
            mesh = generate_box(cfg.levels[0])
            norms[nu] = solution_norm(mesh, ManufacturedSolution(materials[nu], cfg.variant))
    _finalize(records, norms)
    return records


CSV_COLUMNS = (
    "nu", "level", "h", "ndof_sigma", "ndof_u", "ndof_eta",
    "err_u", "err_strain", "err_sigma", "err_divsigma", "norm_exact",
    "rel_u", "rel_strain", "rel_sigma", "rel_divsigma",
    "eoc_u", "eoc_strain", "eoc_sigma", "eoc_divsigma",
)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.17g}"


def emit_csv(records_by_nu, path):
    """Write records as CSV with the documented column order."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for nu in records_by_nu:
            for rec in records_by_nu[nu]:
                fh.write(",".join(_fmt(getattr(rec, col)) for col in CSV_COLUMNS) + "\n")


# ---------------------------------------------------------------------------
# verification suites


def random_shape_regular_tet(rng, max_ratio=20.0, min_volume=1e-3):
    """Random tetrahedron in the unit cube with shape ratio <= max_ratio.

    A volume floor keeps Piola factors 1/J^2 bounded so that transformation
    identities can be checked at absolute tolerances.
    """
    while True:
        tet = Tet(rng.random((4, 3)))
        try:
            geom = geometry(tet)
        except NNElastError:
            continue
        if geom.shape_ratio <= max_ratio and geom.volume >= min_volume:
            return tet, geom


class PolynomialTensorField:
    """Symmetric-tensor polynomial in x with closed-form divergence."""

    def __init__(self, exponents, coeffs):
        self.exponents = np.asarray(exponents, dtype=np.int64)  # (nm, 3)
        self.coeffs = np.asarray(coeffs, dtype=float)  # (nm, 6)

    @classmethod
    def random(cls, rng, degree=4, n_terms=8):
        exps = []
        while len(exps) < n_terms:
            e = tuple(int(v) for v in rng.integers(0, degree + 1, size=3))
            if sum(e) <= degree:
                exps.append(e)
        return cls(exps, rng.standard_normal((n_terms, 6)))

    def _monomials(self, x):
        x = np.asarray(x, dtype=float)
        return np.prod(x[..., None, :] ** self.exponents, axis=-1)  # (..., nm)

    def value(self, x):
        return np.einsum("...m,mc->...c", self._monomials(x), self.coeffs)

    def divergence(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for exp, cf in zip(self.exponents, self.coeffs):
            grad = np.zeros(x.shape)
            for d in range(3):
                if exp[d] == 0:
                    continue
                lowered = exp.copy()
                lowered[d] -= 1
                grad[..., d] = exp[d] * np.prod(x**lowered, axis=-1)
            out += st.matvec(cf, grad)
        return out


def patch_test(n=2, material=None):
    """Affine-solution exactness check; returns the relative errors."""
    if material is None:
        material = Material.from_young_poisson(1.0, 0.3)
    grad = np.array([[0.4, 0.1, -0.2], [0.1, -0.3, 0.25], [-0.2, 0.25, 0.5]])
    sol = AffineSolution(material, offset=(0.1, -0.2, 0.3), grad=grad)
    mesh = generate_box(n)
    dofmap = build_dof_map(mesh)
    data = kernels.build_element_data(mesh.tet_verts())
    boundary_values = apply_dirichlet(sol.u, mesh)
    system = assemble(mesh, dofmap, material, f=None,
                      boundary_values=boundary_values, data=data)
    x, report = solve(system)
    errs = compute_errors(mesh, dofmap, data, sol, x, boundary_values)
    norm = solution_norm(mesh, sol)
    rel = {key: value / norm for key, value in errs.items()}
    rel["solve_residual"] = report.residual
    return rel


def verify_unisolvence():
    lines = []
    ok = True
    _, det = reduced_matrix_12(geometry(reference_tet()))
    lines.append(f"reference reduced 12x12 determinant = {det:.12g} (target 2025/256 = {REFERENCE_DETERMINANT:.12g})")
    if abs(det - REFERENCE_DETERMINANT) > 1e-10 * REFERENCE_DETERMINANT:
        ok = False
        lines.append("determinant MISMATCH")
    rng = np.random.default_rng(20240901)
    worst = 0.0
    for _ in range(100):
        _, geom = random_shape_regular_tet(rng)
        vmat = dof_matrix(geom)
        sign, logdet = np.linalg.slogdet(vmat)
        if sign == 0.0 or not np.isfinite(logdet):
            ok = False
            lines.append("singular DOF matrix on a random tetrahedron")
            break
        worst = max(worst, np.linalg.cond(vmat))
    lines.append(f"100 random tets (shape ratio <= 20): DOF matrices invertible, max cond {worst:.3e}")
    return ok, lines


def verify_transform():
    from .geometry_map import map_from_tets, push_constant_dual, push_stress, push_vector_dual
    from .ref_element import dof_values, nodal_basis

    rng = np.random.default_rng(20240902)
    ref = reference_tet()
    ref_geom = geometry(ref)
    ref_shapes = nodal_basis(ref_geom)
    worst = 0.0
    for _ in range(20):
        tet, geom = random_shape_regular_tet(rng)
        amap = map_from_tets(ref, tet)
        tau_hat = np.einsum("k,kmc->mc", rng.standard_normal(30), ref_shapes.coeffs)
        tau = push_stress(amap, tau_hat)
        hat_dofs = dof_values(ref_geom, tau_hat)
        phys_dofs = dof_values(geom, tau)
        # face and volume moments transform identically by construction of
        # dof_values; vector moments correspond through the Piola maps, and
        # the canonical volume basis must be pushed explicitly:
        diff = np.abs(phys_dofs[:12] - hat_dofs[:12]).max()
        worst = max(worst, diff)
        for c_hat in np.eye(6):
            c_phys = push_constant_dual(amap, c_hat)
            lhs = _moment_volume(geom, tau, c_phys)
            rhs = _moment_volume(ref_geom, tau_hat, c_hat)
            worst = max(worst, abs(lhs - rhs))
        for v_hat in rng.standard_normal((3, 4, 3)):
            v_phys = push_vector_dual(amap, v_hat)
            lhs = _moment_divergence(geom, tau, v_phys)
            rhs = _moment_divergence(ref_geom, tau_hat, v_hat)
            worst = max(worst, abs(lhs - rhs))
    ok = worst < 1e-10
    lines = [f"max DOF transformation defect over 20 random tets: {worst:.3e} (tol 1e-10)"]
    return ok, lines


def _moment_volume(geom, poly, c6):
    from .ref_element import MONO_VOLUME

    mean = geom.volume * (MONO_VOLUME @ np.asarray(poly))
    return float(st.frobenius(mean, c6))


def _moment_divergence(geom, poly, vertex_values):
    from .ref_element import P1_MASS, divergence_coeffs

    div = divergence_coeffs(poly, geom)
    return float(geom.volume * np.einsum("jd,jv,vd->", div, P1_MASS, np.asarray(vertex_values, dtype=float)))


def verify_commuting():
    mesh = generate_box(2)
    dofmap = build_dof_map(mesh)
    data = kernels.build_element_data(mesh.tet_verts())
    rng = np.random.default_rng(20240903)
    worst = 0.0
    for _ in range(20):
        fld = PolynomialTensorField.random(rng, degree=4)
        worst = max(worst, check_commuting(fld, mesh, dofmap, data))
    ok = worst < 1e-9
    return ok, [f"max commuting defect over 20 random degree-4 fields: {worst:.3e} (tol 1e-9)"]


def verify_patch():
    rel = patch_test(n=2)
    worst = max(rel["err_u"], rel["err_sigma"], rel["err_divsigma"])
    ok = worst < 1e-8
    lines = [
        f"patch test relative errors: u {rel['err_u']:.3e}, sigma {rel['err_sigma']:.3e}, "
        f"div sigma {rel['err_divsigma']:.3e} (tol 1e-8)"
    ]
    return ok, lines


def verify_quadrature():
    import itertools

    worst4 = 0.0
    worst14 = 0.0
    for exps in itertools.product(range(6), repeat=4):
        exact = exact_simplex_integral(*exps)
        for rule, deg, acc in ((quad_rule("deg2_4pt"), 2, "4"), (quad_rule("deg5_14pt"), 5, "14")):
            if sum(exps) > deg:
                continue
            approx = float(np.einsum("p,p->", rule.weights, np.prod(rule.points ** np.array(exps), axis=1)))
            rel = abs(approx - exact) / abs(exact)
            if acc == "4":
                worst4 = max(worst4, rel)
            else:
                worst14 = max(worst14, rel)
    ok = worst4 <= 1e-12 and worst14 <= 1e-12
    lines = [
        f"4-point rule: max relative defect {worst4:.3e} through degree 2",
        f"14-point rule: max relative defect {worst14:.3e} through degree 5",
    ]
    return ok, lines


VERIFY_SUITES = {
    "unisolvence": verify_unisolvence,
    "transform": verify_transform,
    "commuting": verify_commuting,
    "patch": verify_patch,
    "quadrature": verify_quadrature,
}


def run_verify(suite):
    """Run one named suite; returns process exit status."""
    try:
        fn = VERIFY_SUITES[suite]
    except KeyError:
        print(f"unknown suite {suite!r}; choose from {', '.join(sorted(VERIFY_SUITES))}", file=sys.stderr)
        return 2
    ok, lines = fn()
    for line in lines:
        print(line)
    print(f"{suite}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# command line


def _parse_levels(text):
    try:
        levels = tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse levels {text!r}") from None
    return levels


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nn-elast",
        description="Normal-normal continuous mixed FEM for 3D linear elasticity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    study = sub.add_parser("study", help="manufactured-solution convergence study")
    study.add_argument("--nu", action="append", type=float, default=None,
                       help="Poisson ratio; repeatable (default 0.3 0.45 0.49 0.4999)")
    study.add_argument("--levels", type=_parse_levels, default=(2, 4, 8, 16),
                       help="comma-separated refinement levels, e.g. 2,4,8,16")
    study.add_argument("--variant", choices=VARIANTS, default="paper")
    study.add_argument("--out", default="results.csv", help="output CSV path")
    study.add_argument("--export-matrix", default=None, metavar="DIR",
                       help="write assembled matrices as coordinate text files")
    study.add_argument("--solver-tol", type=float, default=1e-9)

    verify = sub.add_parser("verify", help="run a named verification suite")
    verify.add_argument("suite", choices=sorted(VERIFY_SUITES))

    info = sub.add_parser("mesh-info", help="print mesh statistics for a level")
    info.add_argument("--n", type=int, required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "study":
        cfg = StudyConfig(
            nus=tuple(args.nu) if args.nu else StudyConfig.nus,
            levels=args.levels,
            variant=args.variant,
            out=args.out,
            solver_tol=args.solver_tol,
            export_matrix=args.export_matrix,
        )
        records = run_convergence(cfg, log=print)
        emit_csv(records, cfg.out)
        print(f"wrote {cfg.out}")
        failed = any(rec.failed for recs in records.values() for rec in recs)
        return 1 if failed else 0
    if args.command == "verify":
        return run_verify(args.suite)
    if args.command == "mesh-info":
        mesh = generate_box(args.n)
        print(quality(mesh))
        return 0
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
