//! Momentum diffusion and mean force.
//!
//! The diffusion is `2D = (hbar k)^2 2 gamma P_e + |hbar grad<sigma>|^2 2 gamma
//! + |hbar grad<a>|^2 2 kappa`. It is evaluated with analytic gradients of the
//! closed-form means, with the compact coupled-oscillator expression
//! `-u^dag (M^-1 + M^-1^dag) u`, or with finite-difference gradients.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{adjoint2, inverse2};
use crate::model::{LocalFields, SceneConfig, SystemParams};
use crate::scalar::{im, re, Cplx, Real};
use crate::steady_state::{closed_form_at, mat_vec, matrix_at, OscillatorMatrix, SteadyState};
use crate::vec3::{CVec3, Vec3};

/// Gradients of the two mean amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanGradients<T> {
    pub grad_sigma: CVec3<T>,
    pub grad_a: CVec3<T>,
}

/// Harmonic-limit validity flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Validity {
    /// `P_e < p_max`
    pub pe_small: bool,
    /// `2 P_e < (gamma / |delta_a|)^(2/3)`
    pub harmonic_ok: bool,
}

impl Validity {
    pub fn ok(&self) -> bool {
        self.pe_small && self.harmonic_ok
    }
}

/// Evaluation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionOptions<T> {
    /// Upper bound on the excitation probability for the validity flag.
    pub p_max: T,
    /// Angular second moments of the spontaneous-emission recoil used for
    /// the tensor; must have unit trace. Isotropic by default.
    pub spont_moments: [[T; 3]; 3],
}

impl<T: Real> Default for DiffusionOptions<T> {
    fn default() -> Self {
        let third = T::one() / T::lit(3.0);
        let z = T::zero();
        DiffusionOptions {
            p_max: T::lit(0.1),
            spont_moments: [[third, z, z], [z, third, z], [z, z, third]],
        }
    }
}

/// Diffusion along one axis plus the full symmetric tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionResult<T> {
    pub axis: Vec3<T>,
    /// `(hbar k)^2 2 gamma P_e`, total recoil from free-space emission.
    pub two_d_spont: T,
    /// `|hbar axis.grad<sigma>|^2 2 gamma`
    pub two_d_atom: T,
    /// `|hbar axis.grad<a>|^2 2 kappa`
    pub two_d_mode: T,
    pub two_d_total: T,
    /// `2D_ij`; the spontaneous block is weighted by the angular moments.
    pub tensor: [[T; 3]; 3],
    /// `D_total / m` when a mass is given.
    pub heating_rate: Option<T>,
    pub validity: Validity,
    pub steady: SteadyState<T>,
    pub gradients: MeanGradients<T>,
}

impl<T: Real> DiffusionResult<T> {
    /// Force-fluctuation part, `two_d_atom + two_d_mode`.
    pub fn two_d_force(&self) -> T {
        self.two_d_atom + self.two_d_mode
    }
}

fn unit_axis<T: Real>(axis: &Vec3<T>) -> Result<Vec3<T>> {
    axis.normalized()
        .ok_or_else(|| Error::config("axis", "diffusion axis must be a nonzero finite vector"))
}

/// Assembles a [`DiffusionResult`] from means and their gradients.
pub fn assemble<T: Real>(
    params: &SystemParams<T>,
    delta_a: T,
    steady: SteadyState<T>,
    gradients: MeanGradients<T>,
    axis: &Vec3<T>,
    options: &DiffusionOptions<T>,
) -> Result<DiffusionResult<T>> {
    let axis = unit_axis(axis)?;
    let hbar = SystemParams::<T>::hbar();
    let two = T::lit(2.0);
    let two_gamma = two * params.gamma;
    let two_kappa = two * params.kappa;
    let two_d_spont = (hbar * params.k).powi(2) * two_gamma * steady.p_e;
    let two_d_atom = (hbar * gradients.grad_sigma.along(&axis).norm()).powi(2) * two_gamma;
    let two_d_mode = (hbar * gradients.grad_a.along(&axis).norm()).powi(2) * two_kappa;
    let two_d_total = two_d_spont + two_d_atom + two_d_mode;

    let mut tensor = [[T::zero(); 3]; 3];
    for (i, row) in tensor.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let gs = (gradients.grad_sigma[i].conj() * gradients.grad_sigma[j]).re;
            let ga = (gradients.grad_a[i].conj() * gradients.grad_a[j]).re;
            *entry = hbar * hbar * (two_gamma * gs + two_kappa * ga)
                + two_d_spont * options.spont_moments[i][j];
        }
    }

    let harmonic_bound = if delta_a == T::zero() {
        T::infinity()
    } else {
        (params.gamma / delta_a.abs()).powf(two / T::lit(3.0))
    };
    let validity = Validity {
        pe_small: steady.p_e < options.p_max,
        harmonic_ok: two * steady.p_e < harmonic_bound,
    };
    Ok(DiffusionResult {
        axis,
        two_d_spont,
        two_d_atom,
        two_d_mode,
        two_d_total,
        tensor,
        heating_rate: params.mass.map(|m| two_d_total / two / m),
        validity,
        steady,
        gradients,
    })
}

/// Chain-rule gradients of the closed-form means.
pub fn analytic_gradients<T: Real>(
    params: &SystemParams<T>,
    lf: &LocalFields<T>,
    steady: &SteadyState<T>,
) -> MeanGradients<T> {
    let one = re(T::one());
    let two = T::lit(2.0);
    let da = lf.delta_a_tilde(params);
    let dc = params.delta_c_tilde();
    let e = params.cavity_drive;
    let nu = lf.nu(params);
    let (sigma, a) = (steady.sigma_mean, steady.a_mean);
    let d_sigma = (one - nu) * da;
    let d_a = (one - nu) * dc;

    let mut grad_sigma = CVec3::zero();
    let mut grad_a = CVec3::zero();
    for i in 0..3 {
        let dg = lf.grad_g[i];
        let deta = lf.grad_eta[i];
        let ddelta = re(lf.grad_delta_a[i]);
        let d_abs_g2 = re(two * (lf.g.conj() * dg).re);
        let dnu = d_abs_g2 / (da * dc) - nu * ddelta / da;

        let dn_sigma = deta + dg * e / dc;
        let dd_sigma = -dnu * da + (one - nu) * ddelta;
        grad_sigma.0[i] = (dn_sigma - sigma * dd_sigma) / d_sigma;

        let dn_a = dg.conj() * lf.eta / da + lf.g.conj() * deta / da
            - lf.g.conj() * lf.eta * ddelta / (da * da);
        let dd_a = -dnu * dc;
        grad_a.0[i] = -(dn_a + a * dd_a) / d_a;
    }
    MeanGradients { grad_sigma, grad_a }
}

/// Free-space diffusion: the coupling is ignored and `<sigma> = eta / delta_a~`.
pub fn diffusion_free_space<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    axis: &Vec3<T>,
) -> Result<DiffusionResult<T>> {
    diffusion_free_space_with(scene, r, axis, &DiffusionOptions::default())
}

pub fn diffusion_free_space_with<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    axis: &Vec3<T>,
    options: &DiffusionOptions<T>,
) -> Result<DiffusionResult<T>> {
    let params = &scene.params;
    params.validate()?;
    let mut lf = scene.local_fields(r);
    lf.g = Complex::new(T::zero(), T::zero());
    lf.grad_g = CVec3::zero();
    let da = lf.delta_a_tilde(params);
    let sigma = lf.eta / da;
    let zero = Complex::new(T::zero(), T::zero());
    let mut steady = SteadyState::from_means(params, &lf, sigma, zero);
    steady.omega_mode = zero;
    let grad_sigma = lf.grad_eta.zip(&lf.grad_delta_a.to_complex(), |deta, dd| {
        (deta - sigma * dd) / da
    });
    let gradients = MeanGradients {
        grad_sigma,
        grad_a: CVec3::zero(),
    };
    assemble(params, lf.delta_a, steady, gradients, axis, options)
}

/// Diffusion from analytic gradients of the closed-form means.
pub fn diffusion_mean_field<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    axis: &Vec3<T>,
) -> Result<DiffusionResult<T>> {
    diffusion_mean_field_with(scene, r, axis, &DiffusionOptions::default())
}

pub fn diffusion_mean_field_with<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    axis: &Vec3<T>,
    options: &DiffusionOptions<T>,
) -> Result<DiffusionResult<T>> {
    let params = &scene.params;
    params.validate()?;
    let lf = scene.local_fields(r);
    let steady = closed_form_at(params, &lf);
    let gradients = analytic_gradients(params, &lf, &steady);
    assemble(params, lf.delta_a, steady, gradients, axis, options)
}

/// Force-coordinate vector `u = hbar [grad I - i (grad M) S]` along one
/// direction, built from the derivative of the Hamiltonian.
pub fn force_coordinates<T: Real>(
    lf: &LocalFields<T>,
    om: &OscillatorMatrix<T>,
    direction: &Vec3<T>,
) -> [Cplx<T>; 2] {
    let i = im(T::one());
    let hbar = re(SystemParams::<T>::hbar());
    let dg = lf.grad_g.along(direction);
    let deta = lf.grad_eta.along(direction);
    let ddelta = re(lf.grad_delta_a.dot(direction));
    let zero = Complex::new(T::zero(), T::zero());
    // grad P = diag(-i grad delta_a, 0), grad G = [[0, dg], [dg*, 0]]
    let dm = [[-i * ddelta, -i * dg], [-i * dg.conj(), zero]];
    let dms = mat_vec(&dm, &om.means);
    [hbar * (deta - i * dms[0]), hbar * (zero - i * dms[1])]
}

/// Compact force-fluctuation term `-u^dag (M^-1 + M^-1^dag) u`.
pub fn compact_force_term<T: Real>(m_inv: &[[Cplx<T>; 2]; 2], u: &[Cplx<T>; 2]) -> T {
    let m_inv_dag = adjoint2(m_inv);
    let mut acc = Complex::new(T::zero(), T::zero());
    for r in 0..2 {
        for c in 0..2 {
            acc = acc + u[r].conj() * (m_inv[r][c] + m_inv_dag[r][c]) * u[c];
        }
    }
    -acc.re
}

/// Diffusion from the compact coupled-oscillator expression.
///
/// The force coordinates come from the Hamiltonian derivative, not from the
/// closed-form gradients; the per-oscillator split uses `grad S = M^-1 u / (i hbar)`.
pub fn diffusion_matrix_form<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    axis: &Vec3<T>,
) -> Result<DiffusionResult<T>> {
    let params = &scene.params;
    params.validate()?;
    let axis = unit_axis(axis)?;
    let lf = scene.local_fields(r);
    let (steady, om) = matrix_at(params, &lf)?;
    let m_inv = inverse2(&om.m)?;
    let ih = im(SystemParams::<T>::hbar());

    let mut grad_sigma = CVec3::zero();
    let mut grad_a = CVec3::zero();
    for i in 0..3 {
        let u = force_coordinates(&lf, &om, &Vec3::unit(i));
        let ds = mat_vec(&m_inv, &u);
        grad_sigma.0[i] = ds[0] / ih;
        grad_a.0[i] = ds[1] / ih;
    }
    let gradients = MeanGradients { grad_sigma, grad_a };
    let mut result = assemble(
        params,
        lf.delta_a,
        steady,
        gradients,
        &axis,
        &DiffusionOptions::default(),
    )?;

    let u = force_coordinates(&lf, &om, &axis);
    let compact = compact_force_term(&m_inv, &u);
    result.two_d_total = result.two_d_spont + compact;
    if let Some(m) = params.mass {
        result.heating_rate = Some(result.two_d_total / T::lit(2.0) / m);
    }
    Ok(result)
}

/// Central-difference gradients of the closed-form means.
pub fn gradient_fd<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    step: T,
) -> Result<MeanGradients<T>> {
    if !(step > T::zero() && step.is_finite()) {
        return Err(Error::config(
            "step",
            "finite-difference step must be positive",
        ));
    }
    scene.params.validate()?;
    let params = &scene.params;
    let mut grad_sigma = CVec3::zero();
    let mut grad_a = CVec3::zero();
    let inv = re(T::one() / (T::lit(2.0) * step));
    for i in 0..3 {
        let h = Vec3::unit(i).scale(step);
        let plus = closed_form_at(params, &scene.local_fields(&(*r + h)));
        let minus = closed_form_at(params, &scene.local_fields(&(*r - h)));
        grad_sigma.0[i] = (plus.sigma_mean - minus.sigma_mean) * inv;
        grad_a.0[i] = (plus.a_mean - minus.a_mean) * inv;
    }
    Ok(MeanGradients { grad_sigma, grad_a })
}

/// Diffusion evaluated with finite-difference gradients.
pub fn diffusion_fd<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    axis: &Vec3<T>,
    step: T,
) -> Result<DiffusionResult<T>> {
    let gradients = gradient_fd(scene, r, step)?;
    let lf = scene.local_fields(r);
    let steady = closed_form_at(&scene.params, &lf);
    assemble(
        &scene.params,
        lf.delta_a,
        steady,
        gradients,
        axis,
        &DiffusionOptions::default(),
    )
}

/// Mean radiation-pressure force with its mean-field decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanForce<T> {
    /// `-<grad H>` with factorized means.
    pub total: Vec3<T>,
    /// `-<grad H_atom>`: `2 Re[grad(Omega_atom) <sigma>*] - grad(delta_a) P_e`.
    pub atom: Vec3<T>,
    /// `-<grad H_mode>`: `-2 Re[grad(Omega_mode) <a>*]`.
    pub mode: Vec3<T>,
    /// `grad U` with `U = -2 Re[g <a> <sigma>*]`, so `total = atom + mode - grad_u`.
    pub grad_u: Vec3<T>,
    /// Photon removal rate `2 gamma P_e + 2 kappa N_cav`.
    pub removal_rate: T,
}

pub fn mean_force<T: Real>(scene: &SceneConfig<T>, r: &Vec3<T>) -> Result<MeanForce<T>> {
    let params = &scene.params;
    params.validate()?;
    let lf = scene.local_fields(r);
    let steady = closed_form_at(params, &lf);
    let grads = analytic_gradients(params, &lf, &steady);
    let hbar = SystemParams::<T>::hbar();
    let two = T::lit(2.0);
    let (sigma, a) = (steady.sigma_mean, steady.a_mean);

    let mut total = [T::zero(); 3];
    let mut atom = [T::zero(); 3];
    let mut mode = [T::zero(); 3];
    let mut grad_u = [T::zero(); 3];
    for i in 0..3 {
        let dg = lf.grad_g[i];
        let deta = lf.grad_eta[i];
        let ddelta = lf.grad_delta_a[i];
        let (ds, da) = (grads.grad_sigma[i], grads.grad_a[i]);
        total[i] = hbar
            * (two * (deta * sigma.conj()).re
                - two * (dg * a * sigma.conj()).re
                - ddelta * steady.p_e);
        let d_omega_atom = deta - dg * a - lf.g * da;
        let d_omega_mode = dg.conj() * sigma + lf.g.conj() * ds;
        atom[i] = hbar * (two * (d_omega_atom * sigma.conj()).re - ddelta * steady.p_e);
        mode[i] = -hbar * two * (d_omega_mode * a.conj()).re;
        let d_gas = dg * a * sigma.conj() + lf.g * da * sigma.conj() + lf.g * a * ds.conj();
        grad_u[i] = -hbar * two * d_gas.re;
    }
    Ok(MeanForce {
        total: Vec3(total),
        atom: Vec3(atom),
        mode: Vec3(mode),
        grad_u: Vec3(grad_u),
        removal_rate: two * params.gamma * steady.p_e + two * params.kappa * steady.n_cav,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FieldProfile;
    use crate::scalar::rel_dev_real;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Complex::new(re, im)
    }

    fn side_scene(params: SystemParams<f64>, eta_standing: bool) -> SceneConfig<f64> {
        let eta = if eta_standing {
            FieldProfile::standing(c(0.0, 0.0), Vec3::y())
        } else {
            FieldProfile::running(c(0.0, 0.0), Vec3::y())
        };
        SceneConfig::new(
            params,
            FieldProfile::standing(c(0.0, 0.0), Vec3::x()),
            eta,
            FieldProfile::constant(c(0.0, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn free_space_running_wave() {
        let params = SystemParams {
            eta0: c(0.1, 0.0),
            ..Default::default()
        };
        let sc = side_scene(params, false);
        let d = diffusion_free_space(&sc, &Vec3::new(0.0, 0.37, 0.0), &Vec3::y()).unwrap();
        assert!((d.steady.p_e - 0.01).abs() < 1e-15);
        assert!((d.two_d_atom - 0.02).abs() < 1e-15);
        assert!((d.two_d_spont - 0.02).abs() < 1e-15);
        assert_eq!(d.two_d_mode, 0.0);
    }

    #[test]
    fn free_space_node_has_finite_diffusion() {
        let params = SystemParams {
            eta0: c(0.1, 0.0),
            delta_a0: 2.0,
            ..Default::default()
        };
        let sc = side_scene(params, true);
        let d = diffusion_free_space(&sc, &Vec3::new(0.0, FRAC_PI_2, 0.0), &Vec3::y()).unwrap();
        assert!(d.steady.p_e < 1e-32);
        assert!(d.two_d_spont < 1e-32);
        let expected = 0.01 * 1.0 * 2.0 / (4.0 + 1.0);
        assert!(rel_dev_real(d.two_d_atom, expected) < 1e-14);
    }

    #[test]
    fn zero_drive_gives_zero_diffusion() {
        let sc = side_scene(SystemParams::default(), false);
        let d = diffusion_free_space(&sc, &Vec3::zero(), &Vec3::y()).unwrap();
        assert_eq!(d.two_d_total, 0.0);
    }

    #[test]
    fn node_heating_with_empty_cavity() {
        let params = SystemParams {
            g0: c(3.0, 0.0),
            eta0: c(0.1, 0.0),
            delta_a0: 1.5,
            delta_c: -0.7,
            kappa: 0.8,
            ..Default::default()
        };
        let sc = side_scene(params, false);
        let r = Vec3::new(FRAC_PI_2, 0.0, 0.0);
        let d = diffusion_mean_field(&sc, &r, &Vec3::x()).unwrap();
        assert!(d.steady.n_cav < 1e-30);
        let lf = sc.local_fields(&r);
        let da2 = 1.5f64.powi(2) + 1.0;
        let expected =
            2.0 * 0.8 * lf.grad_g[0].norm_sqr() * 0.01 / (0.8f64.powi(2) + 0.7f64.powi(2)) / da2;
        assert!(rel_dev_real(d.two_d_mode, expected) < 1e-12);
        assert!(d.two_d_mode > 0.0);
    }

    #[test]
    fn uncoupled_cavity_reduces_to_free_space() {
        let params = SystemParams {
            eta0: c(0.2, 0.05),
            delta_a0: -0.8,
            cavity_drive: c(0.0, 0.0),
            ..Default::default()
        };
        let sc = side_scene(params, true);
        let r = Vec3::new(0.2, 0.6, 0.0);
        let a = diffusion_free_space(&sc, &r, &Vec3::y()).unwrap();
        let b = diffusion_mean_field(&sc, &r, &Vec3::y()).unwrap();
        assert!(rel_dev_real(a.two_d_total, b.two_d_total) < 1e-15);
        assert_eq!(b.two_d_mode, 0.0);
    }

    #[test]
    fn matrix_form_diagonal_case() {
        let params = SystemParams {
            eta0: c(0.2, 0.0),
            delta_a0: 1.0,
            ..Default::default()
        };
        let sc = side_scene(params, false);
        let r = Vec3::new(0.0, 0.4, 0.0);
        let m = diffusion_matrix_form(&sc, &r, &Vec3::y()).unwrap();
        let expected =
            2.0 * m.gradients.grad_sigma[1].norm_sqr() + 2.0 * m.gradients.grad_a[1].norm_sqr();
        assert!(rel_dev_real(m.two_d_total - m.two_d_spont, expected) < 1e-14);
    }

    #[test]
    fn force_coordinate_identity() {
        let params = SystemParams {
            g0: c(2.0, 1.0),
            eta0: c(0.2, -0.1),
            cavity_drive: c(0.1, 0.05),
            delta_a0: 0.3,
            delta_c: 1.2,
            ..Default::default()
        };
        let sc = SceneConfig::new(
            params,
            FieldProfile::standing(c(0.0, 0.0), Vec3::x()).with_phase(0.4),
            FieldProfile::running(c(0.0, 0.0), Vec3::new(0.3, 1.0, 0.0)),
            FieldProfile::standing(c(0.5, 0.0), Vec3::x()),
        )
        .unwrap();
        let r = Vec3::new(0.3, -0.2, 0.1);
        let lf = sc.local_fields(&r);
        let (_, om) = matrix_at(&sc.params, &lf).unwrap();
        let st = closed_form_at(&sc.params, &lf);
        let g = analytic_gradients(&sc.params, &lf, &st);
        for i in 0..3 {
            let u = force_coordinates(&lf, &om, &Vec3::unit(i));
            let ds = [g.grad_sigma[i], g.grad_a[i]];
            let m_ds = mat_vec(&om.m, &ds);
            for k in 0..2 {
                let rhs = c(0.0, 1.0) * m_ds[k];
                assert!(
                    (u[k] - rhs).norm() <= 1e-12 * u[k].norm().max(1e-3),
                    "{} vs {}",
                    u[k],
                    rhs
                );
            }
        }
    }

    #[test]
    fn constant_profiles_have_zero_gradient() {
        let params = SystemParams {
            g0: c(2.0, 0.0),
            eta0: c(0.1, 0.0),
            cavity_drive: c(0.1, 0.0),
            ..Default::default()
        };
        let sc = SceneConfig::new(
            params,
            FieldProfile::constant(c(0.0, 0.0)),
            FieldProfile::constant(c(0.0, 0.0)),
            FieldProfile::constant(c(0.0, 0.0)),
        )
        .unwrap();
        let g = gradient_fd(&sc, &Vec3::new(0.2, 0.3, 0.4), 1e-6).unwrap();
        assert_eq!(g.grad_sigma.norm(), 0.0);
        assert_eq!(g.grad_a.norm(), 0.0);
    }

    #[test]
    fn antinode_cavity_gradient_vanishes() {
        let params = SystemParams {
            g0: c(4.0, 0.0),
            eta0: c(0.1, 0.0),
            delta_a0: 1.0,
            delta_c: 2.0,
            ..Default::default()
        };
        let sc = side_scene(params, false);
        let g = gradient_fd(&sc, &Vec3::zero(), 1e-6).unwrap();
        assert!(g.grad_a[0].norm() < 1e-9);
        assert!(g.grad_sigma[0].norm() < 1e-9);
    }

    #[test]
    fn rejects_bad_step_and_axis() {
        let sc = side_scene(SystemParams::default(), false);
        assert!(gradient_fd(&sc, &Vec3::zero(), 0.0).is_err());
        assert!(diffusion_mean_field(&sc, &Vec3::zero(), &Vec3::zero()).is_err());
    }

    #[test]
    fn side_laser_radiation_pressure() {
        let params = SystemParams {
            g0: c(3.0, 0.0),
            eta0: c(0.1, 0.0),
            delta_a0: 0.5,
            delta_c: -1.0,
            k_l: 1.3,
            ..Default::default()
        };
        let sc = SceneConfig::new(
            params,
            FieldProfile::constant(c(0.0, 0.0)),
            FieldProfile::running(c(0.0, 0.0), Vec3::y()),
            FieldProfile::constant(c(0.0, 0.0)),
        )
        .unwrap();
        let f = mean_force(&sc, &Vec3::new(0.0, 0.8, 0.0)).unwrap();
        let st = steady_closed_form_at(&sc, &Vec3::new(0.0, 0.8, 0.0));
        let expected = 1.3 * (2.0 * st.p_e + 2.0 * st.n_cav);
        assert!(rel_dev_real(f.total[1], expected) < 1e-12);
        assert!(rel_dev_real(f.total[1], 1.3 * f.removal_rate) < 1e-12);
        assert!(rel_dev_real(f.atom[1], 1.3 * 2.0 * st.p_e) < 1e-12);
        assert!(rel_dev_real(f.mode[1], 1.3 * 2.0 * st.n_cav) < 1e-12);
        assert!(f.grad_u[1].abs() < 1e-14);
    }

    fn steady_closed_form_at(sc: &SceneConfig<f64>, r: &Vec3<f64>) -> SteadyState<f64> {
        closed_form_at(&sc.params, &sc.local_fields(r))
    }

    #[test]
    fn force_vanishes_without_excitation() {
        let sc = SceneConfig::new(
            SystemParams::default(),
            FieldProfile::standing(c(0.0, 0.0), Vec3::x()),
            FieldProfile::running(c(0.0, 0.0), Vec3::y()),
            FieldProfile::standing(c(5.0, 0.0), Vec3::x()),
        )
        .unwrap();
        let f = mean_force(&sc, &Vec3::new(0.3, 0.0, 0.0)).unwrap();
        assert_eq!(f.total, Vec3::zero());
        assert_eq!(f.removal_rate, 0.0);
    }

    #[test]
    fn validity_flags() {
        let params = SystemParams {
            eta0: c(1.0, 0.0),
            ..Default::default()
        };
        let d =
            diffusion_free_space(&side_scene(params, false), &Vec3::zero(), &Vec3::y()).unwrap();
        assert!(!d.validity.pe_small);
        // delta_a = 1000, P_e = 0.01: P_e small but dressed-state regime
        let params = SystemParams {
            eta0: c(10.0, 0.0),
            delta_a0: 1000.0,
            ..Default::default()
        };
        let d =
            diffusion_free_space(&side_scene(params, false), &Vec3::zero(), &Vec3::y()).unwrap();
        assert!((d.steady.p_e - 1e-4 / (1.0 + 1e-6)).abs() < 1e-9);
        assert!(d.validity.pe_small);
        let params = SystemParams {
            eta0: c(100.0, 0.0),
            delta_a0: 1000.0,
            ..Default::default()
        };
        let d =
            diffusion_free_space(&side_scene(params, false), &Vec3::zero(), &Vec3::y()).unwrap();
        assert!(d.validity.pe_small && !d.validity.harmonic_ok);
    }

    #[test]
    fn heating_rate_uses_mass() {
        let params = SystemParams {
            eta0: c(0.1, 0.0),
            mass: Some(4.0),
            ..Default::default()
        };
        let d =
            diffusion_mean_field(&side_scene(params, false), &Vec3::zero(), &Vec3::y()).unwrap();
        assert!(rel_dev_real(d.heating_rate.unwrap(), d.two_d_total / 8.0) < 1e-15);
    }

    fn random_scene(
        gamma: f64,
        kappa: f64,
        da: f64,
        dc: f64,
        g: (f64, f64),
        eta: (f64, f64),
        e: (f64, f64),
        stark: f64,
    ) -> SceneConfig<f64> {
        SceneConfig::new(
            SystemParams {
                gamma,
                kappa,
                delta_a0: da,
                delta_c: dc,
                g0: c(g.0, g.1),
                eta0: c(eta.0, eta.1),
                cavity_drive: c(e.0, e.1),
                ..Default::default()
            },
            FieldProfile::standing(c(0.0, 0.0), Vec3::x()).with_phase(0.3),
            FieldProfile::running(c(0.0, 0.0), Vec3::new(0.2, 1.0, 0.1)),
            FieldProfile::standing(c(stark, 0.0), Vec3::new(1.0, 0.5, 0.0)),
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn routes_agree_and_components_positive(
            gamma in 0.2f64..3.0, kappa in 0.2f64..3.0,
            da in -10.0f64..10.0, dc in -10.0f64..10.0,
            gr in -6.0f64..6.0, gi in -2.0f64..2.0,
            er in -0.3f64..0.3, ei in -0.3f64..0.3,
            cr in -0.3f64..0.3, ci in -0.3f64..0.3,
            stark in -2.0f64..2.0,
            x in -3.0f64..3.0, y in -3.0f64..3.0, z in -1.0f64..1.0,
            ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0,
        ) {
            let sc = random_scene(gamma, kappa, da, dc, (gr, gi), (er, ei), (cr, ci), stark);
            let r = Vec3::new(x, y, z);
            let axis = Vec3::new(ax, ay, az);
            prop_assume!(axis.norm() > 0.1);
            let mf = diffusion_mean_field(&sc, &r, &axis).unwrap();
            let mx = diffusion_matrix_form(&sc, &r, &axis).unwrap();
            let fd = diffusion_fd(&sc, &r, &axis, 1e-6).unwrap();
            prop_assert!(mf.two_d_atom >= 0.0 && mf.two_d_mode >= 0.0 && mf.two_d_spont >= 0.0);
            let scale = mf.two_d_total.max(1e-300);
            prop_assert!((mf.two_d_total - mx.two_d_total).abs() <= 1e-10 * scale,
                "mean-field {} vs matrix {}", mf.two_d_total, mx.two_d_total);
            prop_assert!((mf.two_d_total - fd.two_d_total).abs() <= 1e-6 * scale);
            // tensor symmetric, diagonal reproduces axis-aligned force terms
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((mf.tensor[i][j] - mf.tensor[j][i]).abs() <= 1e-14 * scale.max(1.0));
                }
                let d = diffusion_mean_field(&sc, &r, &Vec3::unit(i)).unwrap();
                let spont = mf.two_d_spont / 3.0;
                prop_assert!((mf.tensor[i][i] - spont - d.two_d_force()).abs() <= 1e-12 * scale.max(1e-12));
            }
            // projection of the tensor's force block onto the axis
            let mut proj = 0.0;
            for i in 0..3 { for j in 0..3 {
                proj += mf.axis[i] * mf.axis[j] * (mf.tensor[i][j] - mf.two_d_spont * if i == j { 1.0 / 3.0 } else { 0.0 });
            }}
            prop_assert!((proj - mf.two_d_force()).abs() <= 1e-12 * scale.max(1e-12));
        }

        #[test]
        fn analytic_gradients_match_finite_differences(
            da in -10.0f64..10.0, dc in -10.0f64..10.0,
            gr in -6.0f64..6.0, gi in -2.0f64..2.0,
            er in -0.3f64..0.3, cr in -0.3f64..0.3, stark in -2.0f64..2.0,
            x in -3.0f64..3.0, y in -3.0f64..3.0,
        ) {
            let sc = random_scene(1.0, 0.7, da, dc, (gr, gi), (er, 0.05), (cr, 0.0), stark);
            let r = Vec3::new(x, y, 0.2);
            let lf = sc.local_fields(&r);
            let st = closed_form_at(&sc.params, &lf);
            let an = analytic_gradients(&sc.params, &lf, &st);
            let fd = gradient_fd(&sc, &r, 1e-6).unwrap();
            let scale_s = an.grad_sigma.norm().max(1e-300);
            let scale_a = an.grad_a.norm().max(1e-300);
            prop_assert!((an.grad_sigma - fd.grad_sigma).norm() <= 1e-6 * scale_s);
            prop_assert!((an.grad_a - fd.grad_a).norm() <= 1e-6 * scale_a);
        }

        #[test]
        fn free_running_wave_poisson_identity(
            er in -1.0f64..1.0, ei in -1.0f64..1.0, da in -20.0f64..20.0,
            gamma in 0.1f64..3.0, kl in 0.2f64..3.0, y in -5.0f64..5.0,
        ) {
            let params = SystemParams {
                gamma, k_l: kl, delta_a0: da, eta0: c(er, ei), ..Default::default()
            };
            let d = diffusion_free_space(&side_scene(params, false), &Vec3::new(0.0, y, 0.0), &Vec3::y()).unwrap();
            let expected = kl * kl * 2.0 * gamma * d.steady.p_e;
            prop_assert!((d.two_d_atom - expected).abs() <= 1e-12 * expected.max(1e-300));
        }

        #[test]
        fn no_cross_terms(
            theta in 0.0f64..std::f64::consts::TAU,
            da in -5.0f64..5.0, dc in -5.0f64..5.0, gr in -4.0f64..4.0,
            x in -3.0f64..3.0,
        ) {
            let sc = random_scene(1.0, 1.0, da, dc, (gr, 0.0), (0.1, 0.0), (0.05, 0.0), 0.0);
            let r = Vec3::new(x, 0.3, 0.0);
            let lf = sc.local_fields(&r);
            let st = closed_form_at(&sc.params, &lf);
            let g = analytic_gradients(&sc.params, &lf, &st);
            let opts = DiffusionOptions::default();
            let base = assemble(&sc.params, lf.delta_a, st, g, &Vec3::x(), &opts).unwrap();
            let rotated = MeanGradients {
                grad_sigma: g.grad_sigma,
                grad_a: g.grad_a * Complex::from_polar(1.0, theta),
            };
            let rot = assemble(&sc.params, lf.delta_a, st, rotated, &Vec3::x(), &opts).unwrap();
            prop_assert!((base.two_d_total - rot.two_d_total).abs() <= 1e-14 * base.two_d_total.max(1e-300));
        }

        #[test]
        fn mean_force_decomposition_identity(
            da in -5.0f64..5.0, dc in -5.0f64..5.0, gr in -4.0f64..4.0, gi in -1.0f64..1.0,
            cr in -0.3f64..0.3, stark in -1.0f64..1.0, x in -3.0f64..3.0, y in -3.0f64..3.0,
        ) {
            let sc = random_scene(1.0, 0.8, da, dc, (gr, gi), (0.1, 0.02), (cr, 0.0), stark);
            let f = mean_force(&sc, &Vec3::new(x, y, 0.1)).unwrap();
            for i in 0..3 {
                let rebuilt = f.atom[i] + f.mode[i] - f.grad_u[i];
                prop_assert!((rebuilt - f.total[i]).abs() <= 1e-12 * f.total.norm().max(1e-6));
            }
        }
    }
}
