//! Brute-force check of the harmonic-limit results.
//!
//! Both oscillators are represented in a truncated Fock space, the Lindblad
//! generator is assembled as a band matrix, the steady state is taken from its
//! kernel and the force-force correlation integral is evaluated with the
//! quantum regression theorem by a direct restricted linear solve.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{BandLu, BandMatrix, DenseMatrix};
use crate::model::{SceneConfig, SystemParams};
use crate::scalar::{im, re, Cplx, Real};
use crate::vec3::Vec3;

/// Default limit on the Hilbert space dimension (Liouvillian size 4096).
pub const DEFAULT_MAX_DIM: usize = 64;

/// Fock cutoffs for the atomic and cavity oscillators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedSpace {
    n_atom: usize,
    n_cav: usize,
}

impl TruncatedSpace {
    pub fn new(n_atom: usize, n_cav: usize) -> Result<Self> {
        Self::with_limit(n_atom, n_cav, DEFAULT_MAX_DIM)
    }

    pub fn with_limit(n_atom: usize, n_cav: usize, max_dim: usize) -> Result<Self> {
        if n_atom < 2 || n_cav < 2 {
            return Err(Error::config(
                "cutoffs",
                format!("Fock cutoffs must be at least 2 (got {n_atom}, {n_cav})"),
            ));
        }
        let dim = n_atom.saturating_mul(n_cav);
        if dim > max_dim {
            return Err(Error::DimensionOverflow {
                dim,
                limit: max_dim,
            });
        }
        Ok(TruncatedSpace { n_atom, n_cav })
    }

    pub fn n_atom(&self) -> usize {
        self.n_atom
    }

    pub fn n_cav(&self) -> usize {
        self.n_cav
    }

    pub fn dim(&self) -> usize {
        self.n_atom * self.n_cav
    }

    /// Composite index of `|m>_atom |n>_cav`.
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.n_cav + n
    }

    /// Atomic lowering operator (harmonic), tensored with the cavity identity.
    pub fn sigma<T: Real>(&self) -> DenseMatrix<T> {
        let mut op = DenseMatrix::zeros(self.dim(), self.dim());
        for m in 1..self.n_atom {
            for n in 0..self.n_cav {
                op[(self.index(m - 1, n), self.index(m, n))] = re(T::from_usize(m).unwrap().sqrt());
            }
        }
        op
    }

    /// Cavity annihilation operator, tensored with the atomic identity.
    pub fn a<T: Real>(&self) -> DenseMatrix<T> {
        let mut op = DenseMatrix::zeros(self.dim(), self.dim());
        for m in 0..self.n_atom {
            for n in 1..self.n_cav {
                op[(self.index(m, n - 1), self.index(m, n))] = re(T::from_usize(n).unwrap().sqrt());
            }
        }
        op
    }

    /// Normalized product coherent state `|alpha>_atom |beta>_cav`.
    pub fn coherent_product<T: Real>(&self, alpha: Cplx<T>, beta: Cplx<T>) -> Vec<Cplx<T>> {
        let ca = coherent_coefficients(alpha, self.n_atom);
        let cb = coherent_coefficients(beta, self.n_cav);
        let mut psi = Vec::with_capacity(self.dim());
        for x in &ca {
            for y in &cb {
                psi.push(*x * *y);
            }
        }
        let norm = psi
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt();
        psi.iter().map(|z| z / norm).collect()
    }
}

fn coherent_coefficients<T: Real>(alpha: Cplx<T>, n: usize) -> Vec<Cplx<T>> {
    let mut out = Vec::with_capacity(n);
    let mut c = re((-alpha.norm_sqr() / T::lit(2.0)).exp());
    for k in 0..n {
        out.push(c);
        c = c * alpha / T::from_usize(k + 1).unwrap().sqrt();
    }
    out
}

/// Operators of the driven Jaynes-Cummings model at a fixed position.
struct ModelOperators<T> {
    sigma: DenseMatrix<T>,
    a: DenseMatrix<T>,
    hamiltonian: DenseMatrix<T>,
}

fn hamiltonian<T: Real>(
    space: &TruncatedSpace,
    params: &SystemParams<T>,
    delta_a: T,
    eta: Cplx<T>,
    g: Cplx<T>,
) -> ModelOperators<T> {
    let sigma = space.sigma::<T>();
    let a = space.a::<T>();
    let sd = sigma.adjoint();
    let ad = a.adjoint();
    let n_atom = sd.matmul(&sigma);
    let n_cav = ad.matmul(&a);
    let e = params.cavity_drive;
    let h = n_atom
        .scale(re(delta_a))
        .sub(&sd.scale(eta))
        .sub(&sigma.scale(eta.conj()))
        .add(&n_cav.scale(re(params.delta_c)))
        .add(&ad.scale(e))
        .add(&a.scale(e.conj()))
        .add(&a.matmul(&sd).scale(g))
        .add(&ad.matmul(&sigma).scale(g.conj()));
    ModelOperators {
        sigma,
        a,
        hamiltonian: h,
    }
}

/// Lindblad generator acting on row-major vectorized density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian<T> {
    space: TruncatedSpace,
    matrix: BandMatrix<T>,
}

impl<T: Real> Liouvillian<T> {
    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn matrix(&self) -> &BandMatrix<T> {
        &self.matrix
    }

    /// `L[rho]`
    pub fn apply(&self, rho: &DenseMatrix<T>) -> DenseMatrix<T> {
        let d = self.space.dim();
        DenseMatrix::from_vec(d, d, self.matrix.mul_vec(rho.as_slice()))
    }
}

/// Assembles `L[rho] = -i[H, rho] + kappa D[a] rho + gamma D[sigma] rho` with
/// `D[c] rho = 2 c rho c^dag - rho c^dag c - c^dag c rho` at position `r`.
pub fn build_liouvillian<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    space: &TruncatedSpace,
) -> Result<Liouvillian<T>> {
    scene.validate()?;
    let p = &scene.params;
    let lf = scene.local_fields(r);
    let ops = hamiltonian(space, p, lf.delta_a, lf.eta, lf.g);
    let d = space.dim();
    let two = T::lit(2.0);

    let sd = ops.sigma.adjoint();
    let ad = ops.a.adjoint();
    let damping = ad
        .matmul(&ops.a)
        .scale(re(p.kappa))
        .add(&sd.matmul(&ops.sigma).scale(re(p.gamma)));
    // rho -> A rho + rho A^dag with A = -i H - damping
    let left = ops.hamiltonian.scale(im(-T::one())).sub(&damping);
    let right = left.adjoint();

    let mut entries = Vec::new();
    for (i, k, v) in left.nonzeros() {
        for j in 0..d {
            entries.push((i * d + j, k * d + j, v));
        }
    }
    for (k, j, v) in right.nonzeros() {
        for i in 0..d {
            entries.push((i * d + j, i * d + k, v));
        }
    }
    for (op, rate) in [(&ops.a, p.kappa), (&ops.sigma, p.gamma)] {
        let nz: Vec<_> = op.nonzeros().collect();
        for &(i, k, x) in &nz {
            for &(j, l, y) in &nz {
                entries.push((i * d + j, k * d + l, x * y.conj() * (two * rate)));
            }
        }
    }
    Ok(Liouvillian {
        space: *space,
        matrix: BandMatrix::from_triplets(d * d, &entries),
    })
}

/// Hermitian, unit-trace, positive semidefinite state on a truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: DenseMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates the density matrix invariants at tolerance `tol`.
    pub fn new(matrix: DenseMatrix<T>, tol: T) -> Result<Self> {
        let herm = matrix.sub(&matrix.adjoint()).max_abs();
        if herm > tol {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - re(T::one())).norm() > tol {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let shifted = matrix.add(&DenseMatrix::identity(matrix.rows()).scale(re(tol)));
        if !shifted.is_positive_definite() {
            return Err(Error::InvalidDensity(format!("eigenvalue below -{tol:e}")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `Tr(op rho)`
    pub fn expect(&self, op: &DenseMatrix<T>) -> Cplx<T> {
        op.trace_product(&self.matrix)
    }

    /// `Tr(rho^2)`
    pub fn purity(&self) -> T {
        self.matrix.trace_product(&self.matrix).re
    }

    /// `<psi| rho |psi>` for a normalized pure state.
    pub fn fidelity_with(&self, psi: &[Cplx<T>]) -> T {
        let d = self.dim();
        assert_eq!(psi.len(), d);
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..d {
            for j in 0..d {
                acc = acc + psi[i].conj() * self.matrix[(i, j)] * psi[j];
            }
        }
        acc.re
    }
}

fn density_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e3))
}

/// Index of the vacuum population `|0,0><0,0|` in the vectorized state.
const PINNED: usize = 0;

/// Kernel of `L` with one normalization row pinned, plus the factorization
/// for later restricted solves.
struct SteadySolution<T> {
    rho: DensityMatrix<T>,
    lu: BandLu<T>,
}

fn solve_steady<T: Real>(l: &Liouvillian<T>) -> Result<SteadySolution<T>> {
    let d = l.space.dim();
    let mut pinned = l.matrix.clone();
    pinned.set_unit_row(PINNED);
    let lu = pinned.factorize().map_err(|e| match e {
        Error::Singular { pivot, .. } => Error::DegenerateKernel {
            index: PINNED,
            pivot,
        },
        other => other,
    })?;
    let cond = lu.condition_estimate();
    if cond > T::lit(1e-2) / T::epsilon() {
        return Err(Error::IllConditioned {
            condition: cond.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); d * d];
    rhs[PINNED] = re(T::one());
    let x = lu.solve(&rhs);
    let raw = DenseMatrix::from_vec(d, d, x);
    let tr = raw.trace();
    if !(tr.norm() > T::zero()) || !tr.re.is_finite() {
        return Err(Error::DegenerateKernel {
            index: PINNED,
            pivot: 0.0,
        });
    }
    let rho = raw.scale(Complex::new(T::one(), T::zero()) / tr);
    let tol = density_tolerance::<T>();
    // validate first, then symmetrize away rounding noise
    DensityMatrix::new(rho.clone(), tol)?;
    let half = re(T::lit(0.5));
    let rho = DensityMatrix::new(rho.add(&rho.adjoint()).scale(half), tol)?;
    Ok(SteadySolution { rho, lu })
}

/// Normalized steady state `L[rho] = 0`.
pub fn steady_density<T: Real>(l: &Liouvillian<T>) -> Result<DensityMatrix<T>> {
    solve_steady(l).map(|s| s.rho)
}

/// Oracle estimates at one position and axis.
#[derive(Debug, Clone)]
pub struct OracleDiffusion<T> {
    /// Force-fluctuation diffusion `2 Re int_0^inf <dF(t) dF(0)> dt`.
    pub two_d_force: T,
    /// Spontaneous-recoil term `(hbar k)^2 2 gamma <sigma^dag sigma>`.
    pub two_d_spont: T,
    /// Relative imaginary part of the two-sided correlation integral.
    pub imag_residual: T,
    /// `Tr(F rho)` along the axis.
    pub mean_force: T,
    pub sigma_mean: Cplx<T>,
    pub a_mean: Cplx<T>,
    /// `<sigma^dag sigma>`
    pub p_e: T,
    /// `<a^dag a>`
    pub n_cav: T,
    pub purity: T,
    /// `<sigma^dag sigma> - |<sigma>|^2`, zero for a coherent atomic state.
    pub harmonic_residual: T,
    pub condition_estimate: T,
    pub density: DensityMatrix<T>,
}

impl<T: Real> OracleDiffusion<T> {
    pub fn two_d_total(&self) -> T {
        self.two_d_force + self.two_d_spont
    }
}

/// Force operator `-axis . grad H` at position `r`.
pub fn force_operator<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    axis: &Vec3<T>,
    space: &TruncatedSpace,
) -> DenseMatrix<T> {
    let lf = scene.local_fields(r);
    let d_delta = lf.grad_delta_a.dot(axis);
    let d_eta = lf.grad_eta.along(axis);
    let d_g = lf.grad_g.along(axis);
    // derivative of H with the position-independent terms dropped
    let mut params = scene.params;
    params.delta_c = T::zero();
    params.cavity_drive = Complex::new(T::zero(), T::zero());
    let dh = hamiltonian(space, &params, d_delta, d_eta, d_g).hamiltonian;
    dh.scale(re(-T::one()))
}

/// Diffusion along `axis` from the truncated master equation.
pub fn regression_diffusion<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    axis: &Vec3<T>,
    space: &TruncatedSpace,
) -> Result<OracleDiffusion<T>> {
    let axis = axis
        .normalized()
        .ok_or_else(|| Error::config("axis", "diffusion axis must be nonzero"))?;
    let l = build_liouvillian(scene, r, space)?;
    let SteadySolution { rho, lu } = solve_steady(&l)?;
    let d = space.dim();

    let force = force_operator(scene, r, &axis, space);
    let mean_force = rho.expect(&force).re;
    let delta_f = force.sub(&DenseMatrix::identity(d).scale(re(mean_force)));

    let correlation = |conditioned: DenseMatrix<T>| -> Cplx<T> {
        // solve L X = -conditioned on the traceless subspace
        let mut rhs: Vec<_> = conditioned.into_vec().into_iter().map(|z| -z).collect();
        rhs[PINNED] = Complex::new(T::zero(), T::zero());
        let x = DenseMatrix::from_vec(d, d, lu.solve(&rhs));
        let x = x.sub(&rho.matrix().scale(x.trace()));
        delta_f.trace_product(&x)
    };
    let forward = correlation(delta_f.matmul(rho.matrix()));
    let backward = correlation(rho.matrix().matmul(&delta_f));
    let total = forward + backward;
    let two_d_force = total.re;
    let imag_residual = if two_d_force != T::zero() {
        total.im.abs() / two_d_force.abs()
    } else {
        total.im.abs()
    };

    let sigma = space.sigma::<T>();
    let a = space.a::<T>();
    let sigma_mean = rho.expect(&sigma);
    let a_mean = rho.expect(&a);
    let p_e = rho.expect(&sigma.adjoint().matmul(&sigma)).re;
    let n_cav = rho.expect(&a.adjoint().matmul(&a)).re;
    let p = &scene.params;
    let hbar = SystemParams::<T>::hbar();
    let two_d_spont = (hbar * p.k).powi(2) * T::lit(2.0) * p.gamma * p_e;
    Ok(OracleDiffusion {
        two_d_force: two_d_force * hbar * hbar,
        two_d_spont,
        imag_residual,
        mean_force: mean_force * hbar,
        sigma_mean,
        a_mean,
        p_e,
        n_cav,
        purity: rho.purity(),
        harmonic_residual: p_e - sigma_mean.norm_sqr(),
        condition_estimate: lu.condition_estimate(),
        density: rho,
    })
}
