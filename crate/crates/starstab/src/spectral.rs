//! Discretized quadratic forms of the stability operators and their inertia.
//!
//! Two operators are assembled per star, with piecewise-quadratic finite
//! elements on radial meshes graded toward the center and the surface:
//!
//! * `L_mu = Phi''(rho_mu) - 4 pi (-Delta)^{-1}` acting on densities with
//!   the zero-total-mass constraint `Z_mu`. The density is parameterized as
//!   `rho = sigma / Phi''(rho_mu)`, which keeps every integral weighted by
//!   `w = 1/Phi''(rho_mu)` (continuous, vanishing at the surface) instead of
//!   by the singular `Phi''` itself:
//!   `<L_mu rho, rho> = 4 pi int sigma^2 w r^2 dr - int q^2 / r^2 dr`,
//!   `q(r) = 4 pi int_0^r sigma w s^2 ds`.
//! * `tilde L_mu = -Delta - (4 pi / Phi'')(I - P)` on potentials, per
//!   spherical-harmonic degree l in {0, 1}, with the exact multipole Robin
//!   closure `phi'(R_out) = -(l+1) phi(R_out)/R_out` standing in for the
//!   unbounded exterior.
//!
//! Inertia (counts of negative/zero generalized eigenvalues) is computed by
//! Cholesky reduction to a dense symmetric eigenproblem.

use crate::eos::Enthalpy;
use crate::error::{Error, Result};
use crate::quad::{GAUSS5_W, GAUSS5_X};
use crate::star::StarProfile;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// Radial `L_mu` restricted to the zero-mass subspace.
    LmuZmuRadial,
    /// Dual operator, spherically symmetric block (with the projection P).
    TildeL0,
    /// Dual operator, translation block l = 1 (P vanishes on l >= 1).
    TildeL1,
}

/// Assembled form/weight pair with metadata.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub kind: OperatorKind,
    /// Quadratic form matrix.
    pub a: DMatrix<f64>,
    /// SPD weight matrix defining the eigenproblem inner product.
    pub b: DMatrix<f64>,
    /// Mass-constraint vector (`int rho dx` per DOF) for `L_mu`.
    pub constraint: Option<DVector<f64>>,
    /// Element edges.
    pub mesh: Vec<f64>,
    /// DOF positions (edges and midpoints interleaved).
    pub dof_r: Vec<f64>,
    /// Bare weighted mass matrix `int phi_i phi_j w r^2 dr` over the star,
    /// kept for weighted-norm comparisons.
    pub m_w: DMatrix<f64>,
    /// Projection ingredients of the l = 0 dual operator:
    /// `g[i] = int phi_i w r^2 dr`, `w_tot = int w r^2 dr`.
    pub proj_g: DVector<f64>,
    pub proj_w_tot: f64,
    pub r_star: f64,
    pub r_out: f64,
}

/// Eigen-structure summary of one assembled operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    pub kind: OperatorKind,
    pub cells: usize,
    pub dofs: usize,
    pub r_out: f64,
    pub zero_tol: f64,
    pub n_neg: usize,
    pub n_zero: usize,
    pub min_eigenvalue: f64,
    pub min_abs_eigenvalue: f64,
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors of the zero band plus the minimum-|lambda| mode.
    #[serde(skip)]
    pub kernel_vectors: Vec<Vec<f64>>,
    #[serde(skip)]
    pub min_abs_vector: Vec<f64>,
    /// Eigenvector of the lowest eigenvalue.
    #[serde(skip)]
    pub min_vector: Vec<f64>,
    pub convergence: Option<ConvergenceInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceInfo {
    pub coarse_cells: usize,
    pub coarse_n_neg: usize,
    pub coarse_n_zero: usize,
    pub coarse_min_abs_eigenvalue: f64,
    /// |lambda_min| shrink factor from the coarse to the fine grid.
    pub min_abs_ratio: f64,
}

/// Chebyshev-graded mesh on [0, r]: clustered at both the center and the
/// surface.
pub fn graded_mesh(r: f64, cells: usize) -> Vec<f64> {
    (0..=cells)
        .map(|i| {
            let t = i as f64 / cells as f64;
            r * 0.5 * (1.0 - (PI * t).cos())
        })
        .collect()
}

/// Exterior mesh on [r_star, r_out], clustered at the star surface.
fn exterior_mesh(r_star: f64, r_out: f64, cells: usize) -> Vec<f64> {
    (0..=cells)
        .map(|i| {
            let t = i as f64 / cells as f64;
            r_star + (r_out - r_star) * (1.0 - (0.5 * PI * t).cos())
        })
        .collect()
}

// P2 reference shapes on [-1, 1]: left edge, midpoint, right edge.
#[inline]
fn shape(xi: f64) -> [f64; 3] {
    [0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)]
}

#[inline]
fn shape_dxi(xi: f64) -> [f64; 3] {
    [xi - 0.5, -2.0 * xi, xi + 0.5]
}

struct Quad5 {
    /// (global position, weight, local shape, local shape derivative d/dr)
    pts: Vec<(f64, f64, [f64; 3], [f64; 3])>,
}

fn cell_quad(a: f64, b: f64) -> Quad5 {
    let h = b - a;
    let mut pts = Vec::with_capacity(5);
    for (xi, w) in GAUSS5_X.iter().zip(GAUSS5_W.iter()) {
        let r = 0.5 * (a + b) + 0.5 * h * xi;
        let n = shape(*xi);
        let mut dn = shape_dxi(*xi);
        for d in dn.iter_mut() {
            *d *= 2.0 / h;
        }
        pts.push((r, 0.5 * h * w, n, dn));
    }
    Quad5 { pts }
}

/// Assemble the radial `L_mu` pair in the sigma representation on the star
/// support. Returns the form, the `L^2_w` weight, and the mass-constraint
/// vector. The DOF at the surface is dropped (its weight vanishes there).
pub fn assemble_lmu_zmu(profile: &StarProfile, enthalpy: &Enthalpy, cells: usize) -> Result<Assembly> {
    if profile.residual > 1e-4 {
        return Err(Error::Spectral(format!(
            "profile residual {} too large for spectral assembly",
            profile.residual
        )));
    }
    let mesh = graded_mesh(profile.radius, cells);
    let ndof_full = 2 * cells + 1;
    let ndof = ndof_full - 1; // drop the surface DOF
    let w_at = |r: f64| profile.inv_phi2_at(r, enthalpy);

    let mut w_mat = DMatrix::<f64>::zeros(ndof, ndof);
    let mut kq = DMatrix::<f64>::zeros(ndof, ndof);
    let mut cvec = DVector::<f64>::zeros(ndof);
    // prefix coefficients of q(r) = 4 pi int sigma w s^2 ds at the cell's
    // left edge
    let mut prefix = DVector::<f64>::zeros(ndof);

    for k in 0..cells {
        let (a, b) = (mesh[k], mesh[k + 1]);
        let idx = [2 * k, 2 * k + 1, 2 * k + 2];
        let quad = cell_quad(a, b);
        // local L^2_w mass and the cumulative rows
        for (r, wq, n, _) in &quad.pts {
            let w = w_at(*r) * r * r;
            for i in 0..3 {
                if idx[i] >= ndof {
                    continue;
                }
                cvec[idx[i]] += 4.0 * PI * wq * n[i] * w;
                for j in 0..3 {
                    if idx[j] < ndof {
                        w_mat[(idx[i], idx[j])] += 4.0 * PI * wq * n[i] * n[j] * w;
                    }
                }
            }
        }
        // K term: at each Gauss point of the cell, q = prefix + partial over
        // [a, r_g]; accumulate (w_g / r_g^2) q q^T
        for (rg, wq, _, _) in &quad.pts {
            let mut row = prefix.clone();
            // partial integrals of the three local shapes over [a, rg]
            let part = cell_quad(a, *rg);
            for (r, wp, np, _) in &part.pts {
                // shape evaluated in the coordinates of the FULL cell
                let xi_full = 2.0 * (r - a) / (b - a) - 1.0;
                let nf = shape(xi_full);
                let w = w_at(*r) * r * r;
                let _ = np;
                for i in 0..3 {
                    if idx[i] < ndof {
                        row[idx[i]] += 4.0 * PI * wp * nf[i] * w;
                    }
                }
            }
            if *rg > 0.0 {
                let scale = wq / (rg * rg);
                kq.ger(scale, &row, &row, 1.0);
            }
        }
        // advance the prefix by the full-cell integral
        for (r, wq, n, _) in &quad.pts {
            let w = w_at(*r) * r * r;
            for i in 0..3 {
                if idx[i] < ndof {
                    prefix[idx[i]] += 4.0 * PI * wq * n[i] * w;
                }
            }
        }
    }
    // exterior tail of the field energy: q(R)^2 / R (dies on Z_mu, kept for
    // the unconstrained operator)
    kq.ger(1.0 / profile.radius, &cvec, &cvec, 1.0);
    let a_mat = &w_mat - &kq;
    Ok(Assembly {
        kind: OperatorKind::LmuZmuRadial,
        a: a_mat,
        b: w_mat.clone(),
        constraint: Some(cvec),
        mesh,
        dof_r: dof_positions(&graded_mesh(profile.radius, cells))[..ndof].to_vec(),
        m_w: w_mat / (4.0 * PI),
        proj_g: DVector::zeros(0),
        proj_w_tot: 0.0,
        r_star: profile.radius,
        r_out: profile.radius,
    })
}

fn dof_positions(mesh: &[f64]) -> Vec<f64> {
    let cells = mesh.len() - 1;
    let mut r = Vec::with_capacity(2 * cells + 1);
    for k in 0..cells {
        r.push(mesh[k]);
        r.push(0.5 * (mesh[k] + mesh[k + 1]));
    }
    r.push(mesh[cells]);
    r
}

/// Assemble the dual operator `tilde L_mu` for harmonic degree l in {0, 1}
/// on [0, r_out] with the exact exterior closure. The weight is the full
/// (extended) gradient form.
pub fn assemble_tilde_l(
    profile: &StarProfile,
    enthalpy: &Enthalpy,
    l: u32,
    r_out: f64,
    cells: usize,
) -> Result<Assembly> {
    if r_out <= profile.radius {
        return Err(Error::Spectral(format!(
            "r_out = {r_out} must exceed the star radius {}",
            profile.radius
        )));
    }
    assert!(l <= 1, "only l = 0 and l = 1 are assembled");
    let cells_in = (2 * cells).div_ceil(3).max(4);
    let cells_out = (cells - cells_in.min(cells - 2)).max(2);
    let mut mesh = graded_mesh(profile.radius, cells_in);
    mesh.extend(exterior_mesh(profile.radius, r_out, cells_out).into_iter().skip(1));
    let cells = mesh.len() - 1;
    let ndof = 2 * cells + 1;
    let w_at = |r: f64| profile.inv_phi2_at(r, enthalpy);

    let mut grad = DMatrix::<f64>::zeros(ndof, ndof);
    let mut m_w = DMatrix::<f64>::zeros(ndof, ndof);
    let mut g = DVector::<f64>::zeros(ndof);
    let mut w_tot = 0.0;
    let ll = (l * (l + 1)) as f64;
    for k in 0..cells {
        let (a, b) = (mesh[k], mesh[k + 1]);
        let idx = [2 * k, 2 * k + 1, 2 * k + 2];
        for (r, wq, n, dn) in &cell_quad(a, b).pts {
            let r2 = r * r;
            for i in 0..3 {
                for j in 0..3 {
                    grad[(idx[i], idx[j])] += wq * (dn[i] * dn[j] * r2 + ll * n[i] * n[j]);
                }
            }
            if *r < profile.radius {
                let w = w_at(*r) * r2;
                w_tot += wq * w;
                for i in 0..3 {
                    g[idx[i]] += wq * n[i] * w;
                    for j in 0..3 {
                        m_w[(idx[i], idx[j])] += wq * n[i] * n[j] * w;
                    }
                }
            }
        }
    }
    // exact multipole closure: the exterior harmonic r^{-(l+1)} carries
    // radial energy (l+1)^2/(2l+1) * r_out * phi^2 plus angular energy
    // l(l+1)/(2l+1) * r_out * phi^2, in total (l+1) * r_out * phi(r_out)^2
    let lf = l as f64;
    grad[(ndof - 1, ndof - 1)] += (lf + 1.0) * r_out;

    let b_mat = 4.0 * PI * &grad;
    let mut a_mat = b_mat.clone();
    let c2 = (4.0 * PI) * (4.0 * PI);
    a_mat -= c2 * &m_w;
    if l == 0 {
        // +(4 pi)^2 g g^T / w_tot restores the projection P
        a_mat.ger(c2 / w_tot, &g, &g, 1.0);
    }
    Ok(Assembly {
        kind: if l == 0 { OperatorKind::TildeL0 } else { OperatorKind::TildeL1 },
        a: a_mat,
        b: b_mat,
        constraint: None,
        dof_r: dof_positions(&mesh),
        mesh,
        m_w,
        proj_g: g,
        proj_w_tot: w_tot,
        r_star: profile.radius,
        r_out,
    })
}

impl Assembly {
    /// Evaluate the P2 function with coefficients `c` at radius `r`.
    pub fn eval(&self, c: &[f64], r: f64) -> f64 {
        let cells = self.mesh.len() - 1;
        let k = match self.mesh.binary_search_by(|v| v.total_cmp(&r)) {
            Ok(j) => j.min(cells - 1),
            Err(j) => j.saturating_sub(1).min(cells - 1),
        };
        let (a, b) = (self.mesh[k], self.mesh[k + 1]);
        let xi = 2.0 * (r - a) / (b - a) - 1.0;
        let n = shape(xi);
        let idx = [2 * k, 2 * k + 1, 2 * k + 2];
        let mut acc = 0.0;
        for i in 0..3 {
            if idx[i] < c.len() {
                acc += c[idx[i]] * n[i];
            }
        }
        acc
    }

    /// Nodal interpolation of a closure onto the DOFs.
    pub fn interpolate<F: Fn(f64) -> f64>(&self, f: F) -> DVector<f64> {
        DVector::from_iterator(self.dof_r.len(), self.dof_r.iter().map(|&r| f(r)))
    }

    /// Weighted `L^2_w(B_mu)` norm of a DOF vector.
    pub fn weighted_norm(&self, c: &DVector<f64>) -> f64 {
        (c.dot(&(&self.m_w * c))).max(0.0).sqrt()
    }

    pub fn form_value(&self, c: &DVector<f64>) -> f64 {
        c.dot(&(&self.a * c))
    }
}

/// Project out the constraint direction with a Householder reflector and
/// return the reduced pair plus the back-map.
fn reduce_constraint(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = c.len();
    let mut v = c.clone();
    let norm = v.norm();
    v[0] += norm * v[0].signum();
    let vn2 = v.dot(&v);
    let mut h = DMatrix::<f64>::identity(n, n);
    h.ger(-2.0 / vn2, &v, &v, 1.0);
    // columns 1.. of H span the null space of c^T
    let q = h.columns(1, n - 1).into_owned();
    (q.transpose() * a * &q, q.transpose() * b * &q, q)
}

/// Inertia of the (possibly constrained) pair: generalized eigenvalues,
/// counts below `-zero_tol` and within the zero band, kernel candidates.
pub fn inertia(asm: &Assembly, use_constraint: bool, zero_tol_factor: f64) -> Result<SpectralReport> {
    let (a, b, back): (DMatrix<f64>, DMatrix<f64>, Option<DMatrix<f64>>) =
        match (&asm.constraint, use_constraint) {
            (Some(c), true) => {
                let (ar, br, q) = reduce_constraint(&asm.a, &asm.b, c);
                (ar, br, Some(q))
            }
            _ => (asm.a.clone(), asm.b.clone(), None),
        };
    let n = a.nrows();
    // symmetric diagonal scaling for conditioning
    let d: DVector<f64> = DVector::from_iterator(n, (0..n).map(|i| 1.0 / b[(i, i)].max(1e-300).sqrt()));
    let scale = |m: &DMatrix<f64>| -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| m[(i, j)] * d[i] * d[j])
    };
    let a2 = scale(&a);
    let b2 = scale(&b);
    let chol = nalgebra::Cholesky::new(b2.clone())
        .ok_or_else(|| Error::Spectral("weight matrix not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&a2)
        .ok_or_else(|| Error::Spectral("singular Cholesky factor".into()))?;
    let ct = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Spectral("singular Cholesky factor".into()))?;
    let sym = 0.5 * (&ct + ct.transpose());
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let max_abs = eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let zero_tol = zero_tol_factor * max_abs;
    let n_neg = eigenvalues.iter().filter(|&&v| v < -zero_tol).count();
    let n_zero = eigenvalues.iter().filter(|&&v| v.abs() <= zero_tol).count();
    // back-map eigenvectors of the zero band and the min |lambda| mode
    let lt = l.transpose();
    let to_original = |col: usize| -> Vec<f64> {
        let y = eig.eigenvectors.column(col).into_owned();
        let z = lt
            .solve_upper_triangular(&y)
            .unwrap_or_else(|| DVector::zeros(n));
        let z = DVector::from_iterator(n, (0..n).map(|i| z[i] * d[i]));
        let full = match &back {
            Some(q) => q * z,
            None => z,
        };
        let nrm = full.norm().max(1e-300);
        (full / nrm).iter().cloned().collect()
    };
    let mut kernel_vectors = Vec::new();
    for (pos, &col) in order.iter().enumerate() {
        if eigenvalues[pos].abs() <= zero_tol && kernel_vectors.len() < 6 {
            kernel_vectors.push(to_original(col));
        }
    }
    let min_abs_pos = (0..n)
        .min_by(|&i, &j| eigenvalues[i].abs().total_cmp(&eigenvalues[j].abs()))
        .unwrap();
    let min_abs_vector = to_original(order[min_abs_pos]);
    let min_vector = to_original(order[0]);
    Ok(SpectralReport {
        kind: asm.kind,
        cells: asm.mesh.len() - 1,
        dofs: asm.dof_r.len(),
        r_out: asm.r_out,
        zero_tol,
        n_neg,
        n_zero,
        min_eigenvalue: eigenvalues[0],
        min_abs_eigenvalue: eigenvalues[min_abs_pos].abs(),
        eigenvalues,
        kernel_vectors,
        min_abs_vector,
        min_vector,
        convergence: None,
    })
}

/// Options for the grid-doubled report.
#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub cells: usize,
    pub r_out_factor: f64,
    pub zero_tol_factor: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { cells: 96, r_out_factor: 2.0, zero_tol_factor: 1e-6 }
    }
}

/// Assemble the requested operator at `cells` and `2 * cells`, report the
/// fine result with convergence metadata from the pair.
pub fn spectral_report(
    profile: &StarProfile,
    enthalpy: &Enthalpy,
    kind: OperatorKind,
    opts: &ReportOptions,
) -> Result<SpectralReport> {
    let run = |cells: usize| -> Result<SpectralReport> {
        let asm = match kind {
            OperatorKind::LmuZmuRadial => assemble_lmu_zmu(profile, enthalpy, cells)?,
            OperatorKind::TildeL0 => {
                assemble_tilde_l(profile, enthalpy, 0, opts.r_out_factor * profile.radius, cells)?
            }
            OperatorKind::TildeL1 => {
                assemble_tilde_l(profile, enthalpy, 1, opts.r_out_factor * profile.radius, cells)?
            }
        };
        inertia(&asm, matches!(kind, OperatorKind::LmuZmuRadial), opts.zero_tol_factor)
    };
    let coarse = run(opts.cells)?;
    let mut fine = run(2 * opts.cells)?;
    fine.convergence = Some(ConvergenceInfo {
        coarse_cells: coarse.cells,
        coarse_n_neg: coarse.n_neg,
        coarse_n_zero: coarse.n_zero,
        coarse_min_abs_eigenvalue: coarse.min_abs_eigenvalue,
        min_abs_ratio: coarse.min_abs_eigenvalue / fine.min_abs_eigenvalue.max(1e-300),
    });
    Ok(fine)
}

/// Rayleigh-quotient coercivity constant of the stable radial dual form:
/// the smallest generalized eigenvalue of the l = 0 form against the
/// gradient-norm weight. Errors when negative or zero directions exist.
pub fn coercivity_constant(
    profile: &StarProfile,
    enthalpy: &Enthalpy,
    opts: &ReportOptions,
) -> Result<f64> {
    let report = spectral_report(profile, enthalpy, OperatorKind::TildeL0, opts)?;
    if report.n_neg > 0 || report.n_zero > 0 {
        return Err(Error::NotCoercive { n_neg: report.n_neg, n_zero: report.n_zero });
    }
    Ok(report.min_eigenvalue)
}

/// The discrete dual functional on a P2 coefficient vector of the l = 0
/// assembly: `(1/8 pi) c^T B c + int_B Psi*(P phi_c - phi_c) dx`. Its second
/// difference at 0 converges to `(1/4 pi) c^T A c`.
pub fn dual_b_discrete(asm: &Assembly, profile: &StarProfile, enthalpy: &Enthalpy, c: &DVector<f64>) -> f64 {
    assert_eq!(asm.kind, OperatorKind::TildeL0);
    let grad = 0.5 / (4.0 * PI) * c.dot(&(&asm.b * c));
    let p_phi = asm.proj_g.dot(c) / asm.proj_w_tot;
    let cells = asm.mesh.len() - 1;
    let mut leg = 0.0;
    for k in 0..cells {
        let (a, b) = (asm.mesh[k], asm.mesh[k + 1]);
        if a >= profile.radius {
            break;
        }
        let idx = [2 * k, 2 * k + 1, 2 * k + 2];
        for (r, wq, n, _) in &cell_quad(a, b).pts {
            if *r >= profile.radius {
                continue;
            }
            let phi = idx.iter().zip(n.iter()).map(|(&i, &ni)| c[i] * ni).sum::<f64>();
            let rho_b = profile.rho_at(*r, enthalpy);
            leg += wq * 4.0 * PI * enthalpy.psi_star(rho_b, p_phi - phi).value * r * r;
        }
    }
    grad + leg
}
