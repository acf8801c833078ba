//! Physical parameters, field profiles and their analytic gradients.
//!
//! Units: the atomic dipole decay rate sets the frequency scale (`gamma = 1` by
//! default), `hbar = 1`, and positions are measured in radians of optical phase
//! so the default wavenumbers are 1. Detunings follow `delta = omega_system -
//! omega_laser`.

use num_complex::Complex;

use crate::error::{ConfigIssue, Error, Result};
use crate::scalar::{im, re, Cplx, Real};
use crate::vec3::{CVec3, Vec3};

/// Planck constant in the library's unit system.
pub const HBAR: f64 = 1.0;

/// All rates, detunings and drive strengths, in units of the atomic decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    /// Atomic dipole decay rate.
    pub gamma: T,
    /// Cavity field decay rate.
    pub kappa: T,
    /// Atom-laser detuning before any Stark shift.
    pub delta_a0: T,
    /// Cavity-laser detuning.
    pub delta_c: T,
    /// Peak atom-cavity coupling (half the vacuum Rabi frequency).
    pub g0: Cplx<T>,
    /// Peak side-drive amplitude (half the laser-atom Rabi frequency).
    pub eta0: Cplx<T>,
    /// Cavity drive strength; `|E|^2 / (delta_c^2 + kappa^2)` is the empty-cavity photon number.
    pub cavity_drive: Cplx<T>,
    /// Wavenumber of spontaneously emitted photons.
    pub k: T,
    /// Side-laser wavenumber.
    pub k_l: T,
    /// Cavity-mode wavenumber.
    pub k_cav: T,
    /// Atomic mass, only used to turn diffusion into a heating rate.
    pub mass: Option<T>,
}

impl<T: Real> Default for SystemParams<T> {
    fn default() -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        SystemParams {
            gamma: T::one(),
            kappa: T::one(),
            delta_a0: T::zero(),
            delta_c: T::zero(),
            g0: zero,
            eta0: zero,
            cavity_drive: zero,
            k: T::one(),
            k_l: T::one(),
            k_cav: T::one(),
            mass: None,
        }
    }
}

impl<T: Real> SystemParams<T> {
    pub fn hbar() -> T {
        T::lit(HBAR)
    }

    /// Complex cavity detuning `delta_c - i kappa`.
    pub fn delta_c_tilde(&self) -> Cplx<T> {
        Complex::new(self.delta_c, -self.kappa)
    }

    /// Peak cooperativity `|g0|^2 / (2 kappa gamma)`.
    pub fn peak_cooperativity(&self) -> T {
        cooperativity(self.g0, self.kappa, self.gamma)
    }

    /// Every invariant violation, reported together.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let mut push = |key: &str, message: &str| {
            out.push(ConfigIssue {
                line: None,
                key: key.to_string(),
                message: message.to_string(),
            })
        };
        if !(self.gamma > T::zero() && self.gamma.is_finite()) {
            push(
                "gamma",
                "atomic decay rate must be finite and strictly positive",
            );
        }
        if !(self.kappa > T::zero() && self.kappa.is_finite()) {
            push(
                "kappa",
                "cavity decay rate must be finite and strictly positive",
            );
        }
        for (key, v) in [("k", self.k), ("k_L", self.k_l), ("k_cav", self.k_cav)] {
            if !(v > T::zero() && v.is_finite()) {
                push(key, "wavenumber must be finite and strictly positive");
            }
        }
        for (key, v) in [("delta_a", self.delta_a0), ("delta_c", self.delta_c)] {
            if !v.is_finite() {
                push(key, "detuning must be finite");
            }
        }
        for (key, v) in [
            ("g0", self.g0),
            ("eta0", self.eta0),
            ("E", self.cavity_drive),
        ] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                push(key, "amplitude must be finite");
            }
        }
        if let Some(m) = self.mass {
            if !(m > T::zero() && m.is_finite()) {
                push("mass", "mass must be finite and strictly positive");
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }
}

/// Cooperativity `|g|^2 / (2 kappa gamma)`.
pub fn cooperativity<T: Real>(g: Cplx<T>, kappa: T, gamma: T) -> T {
    g.norm_sqr() / (T::lit(2.0) * kappa * gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Constant,
    RunningWave,
    StandingWave,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Constant => "constant",
            ProfileKind::RunningWave => "running",
            ProfileKind::StandingWave => "standing",
        }
    }
}

/// Position dependence of a field amplitude.
///
/// `Constant` evaluates to `amplitude`, `RunningWave` to
/// `amplitude * exp(i (k.r + phase))` and `StandingWave` to
/// `amplitude * cos(k.r + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldProfile<T> {
    pub kind: ProfileKind,
    pub amplitude: Cplx<T>,
    pub wavevector: Vec3<T>,
    pub phase: T,
}

impl<T: Real> FieldProfile<T> {
    pub fn constant(amplitude: Cplx<T>) -> Self {
        FieldProfile {
            kind: ProfileKind::Constant,
            amplitude,
            wavevector: Vec3::zero(),
            phase: T::zero(),
        }
    }

    pub fn running(amplitude: Cplx<T>, wavevector: Vec3<T>) -> Self {
        FieldProfile {
            kind: ProfileKind::RunningWave,
            amplitude,
            wavevector,
            phase: T::zero(),
        }
    }

    pub fn standing(amplitude: Cplx<T>, wavevector: Vec3<T>) -> Self {
        FieldProfile {
            kind: ProfileKind::StandingWave,
            amplitude,
            wavevector,
            phase: T::zero(),
        }
    }

    pub fn with_phase(mut self, phase: T) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_amplitude(mut self, amplitude: Cplx<T>) -> Self {
        self.amplitude = amplitude;
        self
    }

    fn argument(&self, r: &Vec3<T>) -> T {
        self.wavevector.dot(r) + self.phase
    }

    pub fn value(&self, r: &Vec3<T>) -> Cplx<T> {
        match self.kind {
            ProfileKind::Constant => self.amplitude,
            ProfileKind::RunningWave => {
                self.amplitude * Complex::from_polar(T::one(), self.argument(r))
            }
            ProfileKind::StandingWave => self.amplitude * self.argument(r).cos(),
        }
    }

    pub fn gradient(&self, r: &Vec3<T>) -> CVec3<T> {
        let k = self.wavevector.to_complex();
        match self.kind {
            ProfileKind::Constant => CVec3::zero(),
            ProfileKind::RunningWave => k * (im(T::one()) * self.value(r)),
            ProfileKind::StandingWave => k * (-self.amplitude * self.argument(r).sin()),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.kind == ProfileKind::Constant || self.wavevector == Vec3::zero()
    }

    /// Unit propagation direction, `None` for constant profiles.
    pub fn direction(&self) -> Option<Vec3<T>> {
        if self.kind == ProfileKind::Constant {
            None
        } else {
            self.wavevector.normalized()
        }
    }
}

/// Complete description of the atom-cavity configuration.
///
/// The amplitudes of `g_profile` and `eta_profile` and the wavevector
/// magnitudes of those two profiles are owned by `params` (`g0`, `eta0`,
/// `k_cav`, `k_l`); [`SceneConfig::new`] and [`SceneConfig::with_params`] keep
/// them in sync. The Stark profile carries its own real amplitude and
/// wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig<T> {
    pub params: SystemParams<T>,
    pub g_profile: FieldProfile<T>,
    pub eta_profile: FieldProfile<T>,
    pub stark_profile: FieldProfile<T>,
}

impl<T: Real> SceneConfig<T> {
    /// Builds a validated scene. Only the kind, direction and phase of the
    /// coupling and side-drive profiles are taken from the arguments.
    pub fn new(
        params: SystemParams<T>,
        g_profile: FieldProfile<T>,
        eta_profile: FieldProfile<T>,
        stark_profile: FieldProfile<T>,
    ) -> Result<Self> {
        let scene = SceneConfig {
            params,
            g_profile,
            eta_profile,
            stark_profile,
        }
        .synced();
        scene.validate()?;
        Ok(scene)
    }

    /// Same profile shapes with new parameters.
    pub fn with_params(&self, params: SystemParams<T>) -> Result<Self> {
        Self::new(params, self.g_profile, self.eta_profile, self.stark_profile)
    }

    fn synced(mut self) -> Self {
        self.g_profile = sync_profile(self.g_profile, self.params.g0, self.params.k_cav);
        self.eta_profile = sync_profile(self.eta_profile, self.params.eta0, self.params.k_l);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut issues = self.params.issues();
        for (key, p) in [
            ("g_profile", &self.g_profile),
            ("eta_profile", &self.eta_profile),
            ("stark_profile", &self.stark_profile),
        ] {
            if !p.wavevector.is_finite() || !p.phase.is_finite() {
                issues.push(ConfigIssue {
                    line: None,
                    key: key.into(),
                    message: "wavevector and phase must be finite".into(),
                });
            }
            if p.kind != ProfileKind::Constant && p.wavevector == Vec3::zero() {
                issues.push(ConfigIssue {
                    line: None,
                    key: key.into(),
                    message: "non-constant profile needs a nonzero propagation axis".into(),
                });
            }
        }
        let stark = &self.stark_profile;
        if stark.amplitude.im != T::zero() || !stark.amplitude.re.is_finite() {
            issues.push(ConfigIssue {
                line: None,
                key: "stark_profile".into(),
                message: "Stark shift amplitude must be real and finite".into(),
            });
        }
        if stark.kind == ProfileKind::RunningWave {
            issues.push(ConfigIssue {
                line: None,
                key: "stark_profile".into(),
                message: "Stark shift must be constant or a standing wave".into(),
            });
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    /// Evaluates every position-dependent quantity at `r`.
    pub fn local_fields(&self, r: &Vec3<T>) -> LocalFields<T> {
        let stark = self.stark_profile.value(r).re;
        let grad_stark = self.stark_profile.gradient(r);
        LocalFields {
            g: self.g_profile.value(r),
            grad_g: self.g_profile.gradient(r),
            eta: self.eta_profile.value(r),
            grad_eta: self.eta_profile.gradient(r),
            delta_a: self.params.delta_a0 + stark,
            grad_delta_a: Vec3([grad_stark[0].re, grad_stark[1].re, grad_stark[2].re]),
        }
    }
}

fn sync_profile<T: Real>(p: FieldProfile<T>, amplitude: Cplx<T>, k: T) -> FieldProfile<T> {
    let wavevector = match p.direction() {
        Some(dir) => dir.scale(k),
        None => p.wavevector,
    };
    FieldProfile {
        amplitude,
        wavevector,
        ..p
    }
}

/// Coupling, drive and detuning with their gradients at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFields<T> {
    pub g: Cplx<T>,
    pub grad_g: CVec3<T>,
    pub eta: Cplx<T>,
    pub grad_eta: CVec3<T>,
    pub delta_a: T,
    pub grad_delta_a: Vec3<T>,
}

impl<T: Real> LocalFields<T> {
    /// Complex atomic detuning `delta_a - i gamma`.
    pub fn delta_a_tilde(&self, params: &SystemParams<T>) -> Cplx<T> {
        Complex::new(self.delta_a, -params.gamma)
    }

    /// Generalized cooperativity `|g|^2 / (delta_a~ delta_c~)`.
    pub fn nu(&self, params: &SystemParams<T>) -> Cplx<T> {
        re(self.g.norm_sqr()) / (self.delta_a_tilde(params) * params.delta_c_tilde())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn standing_wave_antinode_and_node() {
        let p = FieldProfile::standing(c(6.0, 0.0), Vec3::x());
        let v = p.value(&Vec3::zero());
        assert!((v - c(6.0, 0.0)).norm() < 1e-15);
        assert!(p.gradient(&Vec3::zero()).norm() < 1e-15);

        let node = Vec3::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        assert!(p.value(&node).norm() < 1e-15);
        let g = p.gradient(&node);
        assert!((g[0] - c(-6.0, 0.0)).norm() < 1e-15);
        assert!(g[1].norm() == 0.0 && g[2].norm() == 0.0);
    }

    #[test]
    fn running_wave_value_and_gradient() {
        let p = FieldProfile::running(c(0.1, 0.0), Vec3::y());
        let r = Vec3::new(0.0, 2.0, 0.0);
        let expected = c(0.1, 0.0) * Complex::from_polar(1.0, 2.0);
        assert!((p.value(&r) - expected).norm() < 1e-15);
        let g = p.gradient(&r);
        assert!((g[1] - c(0.0, 1.0) * expected).norm() < 1e-15);
        assert!(g[0].norm() == 0.0 && g[2].norm() == 0.0);
    }

    #[test]
    fn scene_syncs_amplitude_and_wavenumber() {
        let params = SystemParams {
            g0: c(3.0, 0.5),
            eta0: c(0.2, 0.0),
            k_cav: 2.0,
            k_l: 0.5,
            ..Default::default()
        };
        let scene = SceneConfig::new(
            params,
            FieldProfile::standing(c(1.0, 0.0), Vec3::x().scale(7.0)),
            FieldProfile::running(c(9.0, 0.0), Vec3::y()),
            FieldProfile::constant(c(0.0, 0.0)),
        )
        .unwrap();
        assert_eq!(scene.g_profile.amplitude, c(3.0, 0.5));
        assert_eq!(scene.g_profile.wavevector, Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(scene.eta_profile.wavevector, Vec3::new(0.0, 0.5, 0.0));
    }

    #[test]
    fn invariant_violations_reported_together() {
        let params = SystemParams::<f64> {
            gamma: 0.0,
            kappa: -1.0,
            k_l: 0.0,
            ..Default::default()
        };
        let err = SceneConfig::new(
            params,
            FieldProfile::constant(c(0.0, 0.0)),
            FieldProfile::constant(c(0.0, 0.0)),
            FieldProfile::running(c(1.0, 0.0), Vec3::x()),
        )
        .unwrap_err();
        match err {
            Error::Config(issues) => {
                let keys: Vec<_> = issues.iter().map(|i| i.key.as_str()).collect();
                assert!(keys.contains(&"gamma"));
                assert!(keys.contains(&"kappa"));
                assert!(keys.contains(&"k_L"));
                assert!(keys.contains(&"stark_profile"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn complex_stark_amplitude_rejected() {
        let err = SceneConfig::new(
            SystemParams::<f64>::default(),
            FieldProfile::constant(c(0.0, 0.0)),
            FieldProfile::constant(c(0.0, 0.0)),
            FieldProfile::standing(c(1.0, 0.1), Vec3::x()),
        );
        assert!(err.is_err());
    }

    fn kind_strategy() -> impl Strategy<Value = ProfileKind> {
        prop_oneof![
            Just(ProfileKind::Constant),
            Just(ProfileKind::RunningWave),
            Just(ProfileKind::StandingWave),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn gradient_matches_central_difference(
            kind in kind_strategy(),
            ar in -5.0f64..5.0, ai in -5.0f64..5.0,
            kx in -2.0f64..2.0, ky in -2.0f64..2.0, kz in -2.0f64..2.0,
            phase in -3.0f64..3.0,
            rx in -5.0f64..5.0, ry in -5.0f64..5.0, rz in -5.0f64..5.0,
        ) {
            let p = FieldProfile { kind, amplitude: c(ar, ai), wavevector: Vec3::new(kx, ky, kz), phase };
            let r = Vec3::new(rx, ry, rz);
            let grad = p.gradient(&r);
            let h = 1e-6;
            let scale = p.amplitude.norm() * (1.0 + p.wavevector.norm());
            for i in 0..3 {
                let e = Vec3::unit(i).scale(h);
                let fd = (p.value(&(r + e)) - p.value(&(r - e))) / c(2.0 * h, 0.0);
                prop_assert!((fd - grad[i]).norm() <= 1e-6 * scale.max(1e-300),
                    "axis {i}: fd {fd} vs analytic {}", grad[i]);
            }
        }

        #[test]
        fn running_wave_modulus_is_uniform(
            ar in -5.0f64..5.0, ai in -5.0f64..5.0,
            kx in -2.0f64..2.0, ky in -2.0f64..2.0,
            rx in -5.0f64..5.0, ry in -5.0f64..5.0,
        ) {
            let p = FieldProfile::running(c(ar, ai), Vec3::new(kx, ky, 0.0));
            let r = Vec3::new(rx, ry, 0.0);
            let a = p.amplitude.norm();
            prop_assert!((p.value(&r).norm() - a).abs() <= 1e-12 * a.max(1.0));
            let expected = p.wavevector.norm() * p.value(&r).norm();
            prop_assert!((p.gradient(&r).norm() - expected).abs() <= 1e-12 * expected.max(1e-300));
        }
    }
}
