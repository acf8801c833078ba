//! Steady-state amplitudes of the coupled atom and cavity oscillators.
//!
//! Two independent routes: the closed-form mean-field expressions and a direct
//! solve of the 2x2 coupled-oscillator system `I - i M S = 0`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{solve_small, Mat2};
use crate::model::{LocalFields, SceneConfig, SystemParams};
use crate::scalar::{im, rel_dev, Cplx, Real};
use crate::vec3::Vec3;

/// Mean dipole and field amplitudes plus derived observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState<T> {
    pub sigma_mean: Cplx<T>,
    pub a_mean: Cplx<T>,
    /// `|<sigma>|^2`
    pub p_e: T,
    /// `|<a>|^2`
    pub n_cav: T,
    pub nu: Cplx<T>,
    /// Effective drive seen by the atom, `eta - g <a>`.
    pub omega_atom: Cplx<T>,
    /// Effective drive seen by the mode, `E + g* <sigma>`.
    pub omega_mode: Cplx<T>,
}

impl<T: Real> SteadyState<T> {
    pub(crate) fn from_means(
        params: &SystemParams<T>,
        lf: &LocalFields<T>,
        sigma_mean: Cplx<T>,
        a_mean: Cplx<T>,
    ) -> Self {
        SteadyState {
            sigma_mean,
            a_mean,
            p_e: sigma_mean.norm_sqr(),
            n_cav: a_mean.norm_sqr(),
            nu: lf.nu(params),
            omega_atom: lf.eta - lf.g * a_mean,
            omega_mode: params.cavity_drive + lf.g.conj() * sigma_mean,
        }
    }

    /// `|1 - nu|^2`, the fluorescence suppression factor.
    pub fn suppression(&self) -> T {
        (Complex::new(T::one(), T::zero()) - self.nu).norm_sqr()
    }

    /// Largest relative deviation of the two means from another solution.
    pub fn deviation(&self, other: &Self) -> T {
        rel_dev(self.sigma_mean, other.sigma_mean).max(rel_dev(self.a_mean, other.a_mean))
    }
}

/// The linear system `dS/dt = M S + i I` governing the mean amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorMatrix<T> {
    /// `M = P - i G`
    pub m: Mat2<T>,
    /// Drive vector `(eta, -E)`.
    pub drive: [Cplx<T>; 2],
    /// Mean vector `(<sigma>, <a>)`.
    pub means: [Cplx<T>; 2],
}

impl<T: Real> OscillatorMatrix<T> {
    pub fn build(params: &SystemParams<T>, lf: &LocalFields<T>) -> Self {
        let p11 = -im(T::one()) * lf.delta_a_tilde(params);
        let p22 = -im(T::one()) * params.delta_c_tilde();
        let i = im(T::one());
        let zero = Complex::new(T::zero(), T::zero());
        OscillatorMatrix {
            m: [[p11, -i * lf.g], [-i * lf.g.conj(), p22]],
            drive: [lf.eta, -params.cavity_drive],
            means: [zero, zero],
        }
    }

    /// Relative residual of `I - i M S`.
    pub fn residual(&self) -> T {
        let i = im(T::one());
        let ms = mat_vec(&self.m, &self.means);
        let r0 = self.drive[0] - i * ms[0];
        let r1 = self.drive[1] - i * ms[1];
        let num = (r0.norm_sqr() + r1.norm_sqr()).sqrt();
        let scale = (self.drive[0].norm_sqr() + self.drive[1].norm_sqr()).sqrt();
        if scale == T::zero() {
            num
        } else {
            num / scale
        }
    }
}

pub(crate) fn mat_vec<T: Real>(m: &Mat2<T>, v: &[Cplx<T>; 2]) -> [Cplx<T>; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Closed-form means at a precomputed set of local fields.
pub fn closed_form_at<T: Real>(params: &SystemParams<T>, lf: &LocalFields<T>) -> SteadyState<T> {
    let da = lf.delta_a_tilde(params);
    let dc = params.delta_c_tilde();
    let one_minus_nu = Complex::new(T::one(), T::zero()) - lf.nu(params);
    let e = params.cavity_drive;
    let sigma = (lf.eta + lf.g * e / dc) / (one_minus_nu * da);
    let a = -(e + lf.g.conj() * lf.eta / da) / (one_minus_nu * dc);
    SteadyState::from_means(params, lf, sigma, a)
}

/// Matrix-route means at a precomputed set of local fields.
pub fn matrix_at<T: Real>(
    params: &SystemParams<T>,
    lf: &LocalFields<T>,
) -> Result<(SteadyState<T>, OscillatorMatrix<T>)> {
    let mut om = OscillatorMatrix::build(params, lf);
    // M S = -i I
    let rhs = [-im(T::one()) * om.drive[0], -im(T::one()) * om.drive[1]];
    let s = solve_small(om.m, rhs)?;
    om.means = s;
    Ok((SteadyState::from_means(params, lf, s[0], s[1]), om))
}

/// Steady state from the closed-form mean-field expressions.
pub fn steady_closed_form<T: Real>(scene: &SceneConfig<T>, r: &Vec3<T>) -> Result<SteadyState<T>> {
    scene.params.validate()?;
    Ok(closed_form_at(&scene.params, &scene.local_fields(r)))
}

/// Steady state from the 2x2 coupled-oscillator linear system.
pub fn steady_matrix<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
) -> Result<(SteadyState<T>, OscillatorMatrix<T>)> {
    scene.params.validate()?;
    matrix_at(&scene.params, &scene.local_fields(r))
}

/// Closed-form steady state, cross-checked against the matrix route when
/// `cross_check` is set and always in debug builds.
pub fn steady_state<T: Real>(
    scene: &SceneConfig<T>,
    r: &Vec3<T>,
    cross_check: bool,
) -> Result<SteadyState<T>> {
    let closed = steady_closed_form(scene, r)?;
    if cross_check || cfg!(debug_assertions) {
        let (matrix, _) = steady_matrix(scene, r)?;
        check_routes(&closed, &matrix, T::cross_check_tolerance())?;
    }
    Ok(closed)
}

pub(crate) fn check_routes<T: Real>(a: &SteadyState<T>, b: &SteadyState<T>, tol: T) -> Result<()> {
    let dev = a.deviation(b);
    if dev > tol || dev.is_nan() {
        return Err(Error::CrossCheck {
            what: "steady-state means",
            deviation: dev.to_f64().unwrap_or(f64::NAN),
            tolerance: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FieldProfile;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Complex::new(re, im)
    }

    fn constant_scene(params: SystemParams<f64>) -> SceneConfig<f64> {
        SceneConfig::new(
            params,
            FieldProfile::constant(c(0.0, 0.0)),
            FieldProfile::constant(c(0.0, 0.0)),
            FieldProfile::constant(c(0.0, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn decoupled_limit() {
        let params = SystemParams {
            delta_a0: 1.3,
            delta_c: -0.4,
            kappa: 2.0,
            eta0: c(0.1, 0.02),
            cavity_drive: c(0.3, -0.1),
            ..Default::default()
        };
        let scene = constant_scene(params);
        let s = steady_closed_form(&scene, &Vec3::zero()).unwrap();
        let sigma = params.eta0 / c(1.3, -1.0);
        let a = -params.cavity_drive / c(-0.4, -2.0);
        assert!(rel_dev(s.sigma_mean, sigma) < 1e-15);
        assert!(rel_dev(s.a_mean, a) < 1e-15);
        let (m, om) = steady_matrix(&scene, &Vec3::zero()).unwrap();
        assert_eq!(om.m[0][1], c(0.0, 0.0));
        assert!(m.deviation(&s) < 1e-14);
    }

    #[test]
    fn hand_evaluated_resonant_case() {
        let params = SystemParams {
            g0: c(1.0, 0.0),
            eta0: c(0.1, 0.0),
            ..Default::default()
        };
        let scene = constant_scene(params);
        let s = steady_closed_form(&scene, &Vec3::zero()).unwrap();
        assert!((s.nu - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((s.sigma_mean - c(0.0, 0.05)).norm() < 1e-15);
        assert!((s.a_mean - c(0.05, 0.0)).norm() < 1e-15);
        assert!((s.p_e - 0.0025).abs() < 1e-15);
        let (m, om) = steady_matrix(&scene, &Vec3::zero()).unwrap();
        assert!(m.deviation(&s) < 1e-12);
        assert!(om.residual() < 1e-12);
    }

    #[test]
    fn dark_state_cancels_dipole() {
        let dc = c(0.0, -1.0);
        let params = SystemParams {
            g0: c(2.0, 0.0),
            cavity_drive: c(1.0, 0.0),
            eta0: -c(2.0, 0.0) * c(1.0, 0.0) / dc,
            ..Default::default()
        };
        assert!((params.eta0 - c(0.0, -2.0)).norm() < 1e-15);
        let scene = constant_scene(params);
        let s = steady_closed_form(&scene, &Vec3::zero()).unwrap();
        assert_eq!(s.sigma_mean.norm(), 0.0);
        assert!((s.a_mean - c(0.0, -1.0)).norm() < 1e-15);
        let (m, _) = steady_matrix(&scene, &Vec3::zero()).unwrap();
        assert!(m.sigma_mean.norm() < 1e-14);
        assert!((m.a_mean - c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn no_drive_gives_null_state() {
        let params = SystemParams {
            g0: c(4.0, 1.0),
            delta_a0: 3.0,
            ..Default::default()
        };
        let s = steady_closed_form(&constant_scene(params), &Vec3::zero()).unwrap();
        assert_eq!(s.p_e, 0.0);
        assert_eq!(s.n_cav, 0.0);
    }

    #[test]
    fn rejects_zero_damping() {
        let mut scene = constant_scene(SystemParams::default());
        scene.params.gamma = 0.0;
        assert!(matches!(
            steady_closed_form(&scene, &Vec3::zero()),
            Err(Error::Config(_))
        ));
        scene.params.gamma = 1.0;
        scene.params.kappa = -0.5;
        assert!(matches!(
            steady_matrix(&scene, &Vec3::zero()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn damping_keeps_pole_away() {
        // |1 - nu| bounded below on a detuning grid for g = 6
        let mut min = f64::INFINITY;
        for i in -200..=200 {
            for j in -200..=200 {
                let params = SystemParams {
                    g0: c(6.0, 0.0),
                    delta_a0: i as f64 * 0.1,
                    delta_c: j as f64 * 0.1,
                    ..Default::default()
                };
                let lf = constant_scene(params).local_fields(&Vec3::zero());
                let d = (c(1.0, 0.0) - lf.nu(&params)).norm();
                min = min.min(d);
            }
        }
        // |delta_a~ delta_c~ - g^2| >= gamma kappa ... scaled by |delta_a~ delta_c~|
        assert!(min > 1e-3, "min |1-nu| = {min}");
    }

    #[test]
    fn cross_check_entry_point() {
        let params = SystemParams {
            g0: c(2.0, 0.7),
            eta0: c(0.1, 0.0),
            cavity_drive: c(0.05, 0.02),
            delta_a0: 1.5,
            delta_c: -2.0,
            ..Default::default()
        };
        let scene = constant_scene(params);
        let s = steady_state(&scene, &Vec3::zero(), true).unwrap();
        assert!(s.p_e > 0.0);
        let mut other = s;
        other.sigma_mean *= c(1.0 + 1e-6, 0.0);
        assert!(matches!(
            check_routes(&s, &other, 1e-10),
            Err(Error::CrossCheck { .. })
        ));
    }

    #[test]
    fn single_precision_routes_agree() {
        let params = SystemParams::<f32> {
            g0: Complex::new(3.0, 0.0),
            eta0: Complex::new(0.1, 0.0),
            delta_a0: 2.0,
            delta_c: -1.0,
            ..Default::default()
        };
        let scene = SceneConfig::new(
            params,
            FieldProfile::standing(Complex::new(0.0, 0.0), Vec3::x()),
            FieldProfile::running(Complex::new(0.0, 0.0), Vec3::y()),
            FieldProfile::constant(Complex::new(0.0, 0.0)),
        )
        .unwrap();
        let r = Vec3::new(0.3f32, 0.2, 0.0);
        let a = steady_closed_form(&scene, &r).unwrap();
        let (b, _) = steady_matrix(&scene, &r).unwrap();
        assert!(a.deviation(&b) < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn routes_agree(
            gamma in 0.1f64..5.0, kappa in 0.1f64..5.0,
            da in -20.0f64..20.0, dc in -20.0f64..20.0,
            gr in -8.0f64..8.0, gi in -8.0f64..8.0,
            er in -1.0f64..1.0, ei in -1.0f64..1.0,
            cr in -1.0f64..1.0, ci in -1.0f64..1.0,
            x in -3.0f64..3.0, y in -3.0f64..3.0,
        ) {
            let params = SystemParams {
                gamma, kappa, delta_a0: da, delta_c: dc,
                g0: c(gr, gi), eta0: c(er, ei), cavity_drive: c(cr, ci),
                ..Default::default()
            };
            let scene = SceneConfig::new(
                params,
                FieldProfile::standing(c(0.0, 0.0), Vec3::x()).with_phase(0.2),
                FieldProfile::running(c(0.0, 0.0), Vec3::y()),
                FieldProfile::standing(c(0.7, 0.0), Vec3::x()),
            ).unwrap();
            let r = Vec3::new(x, y, 0.0);
            let a = steady_closed_form(&scene, &r).unwrap();
            let (b, om) = steady_matrix(&scene, &r).unwrap();
            prop_assert!(a.deviation(&b) < 1e-12, "deviation {}", a.deviation(&b));
            prop_assert!(om.residual() < 1e-12);
            let lf = scene.local_fields(&r);
            let da_t = lf.delta_a_tilde(&params);
            prop_assert!(rel_dev(a.sigma_mean, a.omega_atom / da_t) < 1e-12);
            prop_assert!(rel_dev(a.a_mean, -a.omega_mode / params.delta_c_tilde()) < 1e-12);
        }

        #[test]
        fn dark_state_condition_holds_everywhere(
            gr in -5.0f64..5.0, gi in -5.0f64..5.0,
            er in -1.0f64..1.0, ei in -1.0f64..1.0,
            dc in -5.0f64..5.0, kappa in 0.2f64..3.0, da in -5.0f64..5.0,
        ) {
            let e = c(er, ei);
            let g = c(gr, gi);
            let dct = c(dc, -kappa);
            let params = SystemParams {
                kappa, delta_c: dc, delta_a0: da, g0: g, cavity_drive: e,
                eta0: -g * e / dct,
                ..Default::default()
            };
            let s = steady_closed_form(&constant_scene(params), &Vec3::zero()).unwrap();
            let scale = (g * e / dct).norm().max(1e-300);
            prop_assert!(s.sigma_mean.norm() <= 1e-14 * scale);
            prop_assert!(rel_dev(s.a_mean, -e / dct) < 1e-13);
        }
    }
}
