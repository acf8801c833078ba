//! Parameter sweeps, peak extraction, spatial averages and regime checks.

use num_complex::Complex;

use crate::diffusion::diffusion_mean_field;
use crate::error::{Error, Result};
use crate::model::{cooperativity, FieldProfile, ProfileKind, SceneConfig, SystemParams};
use crate::scalar::{Cplx, Real};
use crate::vec3::Vec3;

/// A scalar field of [`SystemParams`] that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamField {
    Gamma,
    Kappa,
    DeltaA,
    DeltaC,
    G0Re,
    G0Im,
    Eta0Re,
    Eta0Im,
    DriveRe,
    DriveIm,
    K,
    KL,
    KCav,
}

impl ParamField {
    pub const ALL: [ParamField; 13] = [
        ParamField::Gamma,
        ParamField::Kappa,
        ParamField::DeltaA,
        ParamField::DeltaC,
        ParamField::G0Re,
        ParamField::G0Im,
        ParamField::Eta0Re,
        ParamField::Eta0Im,
        ParamField::DriveRe,
        ParamField::DriveIm,
        ParamField::K,
        ParamField::KL,
        ParamField::KCav,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamField::Gamma => "gamma",
            ParamField::Kappa => "kappa",
            ParamField::DeltaA => "delta_a",
            ParamField::DeltaC => "delta_c",
            ParamField::G0Re => "g0_re",
            ParamField::G0Im => "g0_im",
            ParamField::Eta0Re => "eta0_re",
            ParamField::Eta0Im => "eta0_im",
            ParamField::DriveRe => "E_re",
            ParamField::DriveIm => "E_im",
            ParamField::K => "k",
            ParamField::KL => "k_L",
            ParamField::KCav => "k_cav",
        }
    }

    pub fn set<T: Real>(self, p: &mut SystemParams<T>, v: T) {
        match self {
            ParamField::Gamma => p.gamma = v,
            ParamField::Kappa => p.kappa = v,
            ParamField::DeltaA => p.delta_a0 = v,
            ParamField::DeltaC => p.delta_c = v,
            ParamField::G0Re => p.g0.re = v,
            ParamField::G0Im => p.g0.im = v,
            ParamField::Eta0Re => p.eta0.re = v,
            ParamField::Eta0Im => p.eta0.im = v,
            ParamField::DriveRe => p.cavity_drive.re = v,
            ParamField::DriveIm => p.cavity_drive.im = v,
            ParamField::K => p.k = v,
            ParamField::KL => p.k_l = v,
            ParamField::KCav => p.k_cav = v,
        }
    }
}

/// What a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Laser frequency; the swept value is `delta_a` and `delta_c` follows so
    /// that `omega_eg - omega_cav` stays fixed.
    LaserFrequency,
    /// Cavity frequency; the swept value is `delta_c`.
    CavityFrequency,
    /// One Cartesian component of the atom position.
    Position(usize),
    Param(ParamField),
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::LaserFrequency => "laser",
            SweepParameter::CavityFrequency => "cavity",
            SweepParameter::Position(0) => "x",
            SweepParameter::Position(1) => "y",
            SweepParameter::Position(_) => "z",
            SweepParameter::Param(p) => p.name(),
        }
    }

    /// Column label for the swept value.
    pub fn column(&self) -> &'static str {
        match self {
            SweepParameter::LaserFrequency => "delta_a",
            SweepParameter::CavityFrequency => "delta_c",
            other => other.name(),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "laser" => Some(SweepParameter::LaserFrequency),
            "cavity" => Some(SweepParameter::CavityFrequency),
            "x" => Some(SweepParameter::Position(0)),
            "y" => Some(SweepParameter::Position(1)),
            "z" => Some(SweepParameter::Position(2)),
            _ => ParamField::ALL
                .iter()
                .find(|f| f.name() == name)
                .map(|f| SweepParameter::Param(*f)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec<T> {
    pub parameter: SweepParameter,
    pub from: T,
    pub to: T,
    pub steps: usize,
    pub scene: SceneConfig<T>,
    pub position: Vec3<T>,
    pub axis: Vec3<T>,
}

impl<T: Real> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.from.is_finite() && self.to.is_finite() && self.from < self.to) {
            return Err(Error::Sweep(format!(
                "range must satisfy from < to (got {} .. {})",
                self.from, self.to
            )));
        }
        if self.steps < 2 {
            return Err(Error::Sweep(format!(
                "need at least 2 steps (got {})",
                self.steps
            )));
        }
        if self.axis.normalized().is_none() {
            return Err(Error::Sweep("diffusion axis must be nonzero".into()));
        }
        self.scene.validate()
    }

    pub fn value(&self, i: usize) -> T {
        if i + 1 == self.steps {
            return self.to;
        }
        let t = T::from_usize(i).unwrap() / T::from_usize(self.steps - 1).unwrap();
        self.from + (self.to - self.from) * t
    }

    /// Scene and position for the swept value `v`.
    pub fn configure(&self, v: T) -> Result<(SceneConfig<T>, Vec3<T>)> {
        let mut params = self.scene.params;
        let mut r = self.position;
        match self.parameter {
            SweepParameter::LaserFrequency => {
                let split = params.delta_a0 - params.delta_c;
                params.delta_a0 = v;
                params.delta_c = v - split;
            }
            SweepParameter::CavityFrequency => params.delta_c = v,
            SweepParameter::Position(i) => r.0[i.min(2)] = v,
            SweepParameter::Param(f) => f.set(&mut params, v),
        }
        Ok((self.scene.with_params(params)?, r))
    }
}

/// One evaluated sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub value: T,
    pub two_d_spont: T,
    pub two_d_atom: T,
    pub two_d_mode: T,
    pub two_d_total: T,
    pub p_e: T,
    pub n_cav: T,
    /// `|1 - nu|^2`
    pub suppression: T,
}

/// Numeric columns of a [`SweepRow`], in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Value,
    Spont,
    Atom,
    Mode,
    Total,
    ExcitedPopulation,
    PhotonNumber,
    Suppression,
}

impl Column {
    pub const ALL: [Column; 8] = [
        Column::Value,
        Column::Spont,
        Column::Atom,
        Column::Mode,
        Column::Total,
        Column::ExcitedPopulation,
        Column::PhotonNumber,
        Column::Suppression,
    ];

    /// Looks up a column by its output name; `value` is not searchable.
    pub fn from_name(name: &str) -> Option<Self> {
        Column::ALL[1..].iter().copied().find(|c| c.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Column::Value => "value",
            Column::Spont => "two_D_spont",
            Column::Atom => "two_D_atom",
            Column::Mode => "two_D_mode",
            Column::Total => "two_D_total",
            Column::ExcitedPopulation => "P_e",
            Column::PhotonNumber => "N_cav",
            Column::Suppression => "abs_one_minus_nu_sq",
        }
    }
}

impl<T: Real> SweepRow<T> {
    pub fn get(&self, c: Column) -> T {
        match c {
            Column::Value => self.value,
            Column::Spont => self.two_d_spont,
            Column::Atom => self.two_d_atom,
            Column::Mode => self.two_d_mode,
            Column::Total => self.two_d_total,
            Column::ExcitedPopulation => self.p_e,
            Column::PhotonNumber => self.n_cav,
            Column::Suppression => self.suppression,
        }
    }
}

/// Evaluates the mean-field diffusion at every grid point, in grid order.
pub fn sweep<T: Real>(spec: &SweepSpec<T>) -> Result<Vec<SweepRow<T>>> {
    spec.validate()?;
    (0..spec.steps)
        .map(|i| {
            let v = spec.value(i);
            let (scene, r) = spec.configure(v)?;
            let d = diffusion_mean_field(&scene, &r, &spec.axis)?;
            Ok(SweepRow {
                value: v,
                two_d_spont: d.two_d_spont,
                two_d_atom: d.two_d_atom,
                two_d_mode: d.two_d_mode,
                two_d_total: d.two_d_total,
                p_e: d.steady.p_e,
                n_cav: d.steady.n_cav,
                suppression: d.steady.suppression(),
            })
        })
        .collect()
}

/// Which fluctuating oscillator dominates at a peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominant {
    Atom,
    Mode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    /// Sub-grid location from a parabola through the three nearest rows.
    pub location: T,
    pub height: T,
    pub dominant: Dominant,
    /// Index of the grid maximum.
    pub index: usize,
}

/// Interior local maxima of the total diffusion.
pub fn find_peaks<T: Real>(rows: &[SweepRow<T>]) -> Vec<Peak<T>> {
    find_peaks_by(rows, Column::Total)
}

/// Interior local maxima of `column`.
pub fn find_peaks_by<T: Real>(rows: &[SweepRow<T>], column: Column) -> Vec<Peak<T>> {
    if rows.len() < 3 {
        return Vec::new();
    }
    let y = |i: usize| rows[i].get(column);
    let mut peaks = Vec::new();
    for i in 1..rows.len() - 1 {
        if !(y(i) > y(i - 1) && y(i) >= y(i + 1)) {
            continue;
        }
        let (x0, x1, x2) = (rows[i - 1].value, rows[i].value, rows[i + 1].value);
        let (y0, y1, y2) = (y(i - 1), y(i), y(i + 1));
        let (location, height) = parabola_vertex((x0, y0), (x1, y1), (x2, y2)).unwrap_or((x1, y1));
        let dominant = if rows[i].two_d_atom >= rows[i].two_d_mode {
            Dominant::Atom
        } else {
            Dominant::Mode
        };
        peaks.push(Peak {
            location,
            height,
            dominant,
            index: i,
        });
    }
    peaks
}

fn parabola_vertex<T: Real>(p0: (T, T), p1: (T, T), p2: (T, T)) -> Option<(T, T)> {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !(a < T::zero()) {
        return None;
    }
    let b = d01 - a * (x0 + x1);
    let xv = -b / (T::lit(2.0) * a);
    let yv = y1 + (xv - x1) * (d01 + a * (xv - x0));
    if xv < x0 || xv > x2 || !yv.is_finite() {
        return None;
    }
    Some((xv, yv))
}

/// Quantity averaged along a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Spont,
    Atom,
    Mode,
    Total,
    /// `two_D_atom + two_D_mode`
    Force,
    ExcitedPopulation,
    PhotonNumber,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageSpec<T> {
    /// Start of the averaging segment.
    pub origin: Vec3<T>,
    /// Direction of the averaging line.
    pub along: Vec3<T>,
    /// Axis of the diffusion components being averaged.
    pub diffusion_axis: Vec3<T>,
    /// Uniform grid points per period.
    pub points: usize,
}

impl<T: Real> AverageSpec<T> {
    pub fn new(origin: Vec3<T>, along: Vec3<T>, diffusion_axis: Vec3<T>) -> Self {
        AverageSpec {
            origin,
            along,
            diffusion_axis,
            points: 256,
        }
    }
}

/// Common spatial period of every profile along `dir`; `None` when all
/// profiles are constant along it.
pub fn period_along<T: Real>(scene: &SceneConfig<T>, dir: &Vec3<T>) -> Result<Option<T>> {
    let dir = dir
        .normalized()
        .ok_or_else(|| Error::NonPeriodic("averaging direction is zero".into()))?;
    let mut ks: Vec<T> = Vec::new();
    for p in [&scene.g_profile, &scene.eta_profile, &scene.stark_profile] {
        if p.kind == ProfileKind::Constant {
            continue;
        }
        let kp = p.wavevector.dot(&dir).abs();
        if kp > T::lit(1e-12) * p.wavevector.norm() {
            ks.push(kp);
        }
    }
    let Some(base) = ks.iter().copied().reduce(T::min) else {
        return Ok(None);
    };
    for &k in &ks {
        let ratio = k / base;
        if (ratio - ratio.round()).abs() > T::lit(1e-9) * ratio {
            return Err(Error::NonPeriodic(format!(
                "wavenumber ratio {ratio} along the averaging axis is not an integer"
            )));
        }
    }
    Ok(Some(T::lit(2.0) * T::PI() / base))
}

/// Mean of `quantity` over one spatial period along `spec.along`.
pub fn spatial_average<T: Real>(
    scene: &SceneConfig<T>,
    spec: &AverageSpec<T>,
    quantity: Quantity,
) -> Result<T> {
    if spec.points == 0 {
        return Err(Error::Sweep(
            "averaging grid needs at least one point".into(),
        ));
    }
    let eval = |r: &Vec3<T>| -> Result<T> {
        let d = diffusion_mean_field(scene, r, &spec.diffusion_axis)?;
        Ok(match quantity {
            Quantity::Spont => d.two_d_spont,
            Quantity::Atom => d.two_d_atom,
            Quantity::Mode => d.two_d_mode,
            Quantity::Total => d.two_d_total,
            Quantity::Force => d.two_d_force(),
            Quantity::ExcitedPopulation => d.steady.p_e,
            Quantity::PhotonNumber => d.steady.n_cav,
        })
    };
    let Some(period) = period_along(scene, &spec.along)? else {
        return eval(&spec.origin);
    };
    let dir = spec.along.normalized().expect("checked by period_along");
    let n = T::from_usize(spec.points).unwrap();
    let mut sum = T::zero();
    for i in 0..spec.points {
        let s = period * T::from_usize(i).unwrap() / n;
        sum = sum + eval(&(spec.origin + dir.scale(s)))?;
    }
    Ok(sum / n)
}

/// One measured-versus-predicted regime ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeEntry<T> {
    pub name: &'static str,
    pub measured: Option<T>,
    pub predicted: T,
    /// `measured / predicted`
    pub ratio: Option<T>,
    /// `|measured / predicted - 1|`
    pub rel_deviation: Option<T>,
}

impl<T: Real> RegimeEntry<T> {
    fn new(name: &'static str, num: T, den: T, predicted: T) -> Self {
        let measured = if den != T::zero() && (num / den).is_finite() {
            Some(num / den)
        } else {
            None
        };
        let ratio = measured.and_then(|m| {
            if predicted != T::zero() {
                Some(m / predicted)
            } else {
                None
            }
        });
        RegimeEntry {
            name,
            measured,
            predicted,
            ratio,
            rel_deviation: ratio.map(|q| (q - T::one()).abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport<T> {
    pub entries: Vec<RegimeEntry<T>>,
}

impl<T: Real> RegimeReport<T> {
    pub fn get(&self, name: &str) -> Option<&RegimeEntry<T>> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub const CAVITY_LOCAL: &str = "cavity_pumped_mode_over_8C_atom";
pub const CAVITY_AVERAGED: &str = "cavity_pumped_averaged_enhancement";
pub const ATOM_AVERAGED: &str = "atom_pumped_averaged_mode_over_spont";
pub const SIDE_RESONANT: &str = "side_resonant_mode_over_atom";

/// Evaluates the large-detuning and resonant regime laws for the scene's
/// `gamma`, `kappa`, `g0`, `delta_a` and wavenumbers.
///
/// Each entry rebuilds its own configuration: the cavity-pumped entries use
/// `delta_c = 0`, `eta = 0` and the coupling profile of `scene`; the
/// atom-pumped entry uses a side drive constant along the cavity axis; the
/// resonant entry uses `delta_a = delta_c = 0`, an antinode coupling and a
/// running-wave side drive. Stark shifts are dropped. No pass/fail judgment is
/// made here.
pub fn regime_report<T: Real>(scene: &SceneConfig<T>, r: &Vec3<T>) -> Result<RegimeReport<T>> {
    scene.validate()?;
    let p = scene.params;
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let magnitude = |z: Cplx<T>| {
        if z.norm() > T::zero() {
            Complex::new(z.norm(), T::zero())
        } else {
            one
        }
    };
    let cavity_axis = scene.g_profile.direction().unwrap_or_else(Vec3::x);
    let side_axis = match scene.eta_profile.direction() {
        Some(d) if scene.eta_profile.kind == ProfileKind::RunningWave => d,
        _ => Vec3::y(),
    };
    let g_shape = if scene.g_profile.kind == ProfileKind::Constant {
        FieldProfile::standing(zero, cavity_axis)
    } else {
        scene.g_profile
    };
    let no_stark = FieldProfile::constant(zero);
    let c0 = p.peak_cooperativity();

    // cavity pumped, delta_c = 0
    let cav_params = SystemParams {
        delta_c: T::zero(),
        eta0: zero,
        cavity_drive: magnitude(p.cavity_drive),
        ..p
    };
    let cav = SceneConfig::new(cav_params, g_shape, FieldProfile::constant(zero), no_stark)?;
    let d = diffusion_mean_field(&cav, r, &cavity_axis)?;
    let c_local = cooperativity(cav.local_fields(r).g, p.kappa, p.gamma);
    let local = RegimeEntry::new(
        CAVITY_LOCAL,
        d.two_d_mode,
        d.two_d_atom,
        T::lit(8.0) * c_local,
    );

    let avg = AverageSpec::new(*r, cavity_axis, cavity_axis);
    let cav_total = spatial_average(&cav, &avg, Quantity::Total)?;
    // free-space atom driven by the equivalent standing wave g(r) E / delta_c~
    let eq_params = SystemParams {
        g0: zero,
        eta0: cav_params.g0 * cav_params.cavity_drive / cav_params.delta_c_tilde(),
        cavity_drive: zero,
        k_l: p.k_cav,
        ..cav_params
    };
    let eq_shape = FieldProfile::standing(zero, cavity_axis).with_phase(g_shape.phase);
    let eq = SceneConfig::new(eq_params, FieldProfile::constant(zero), eq_shape, no_stark)?;
    let eq_total = spatial_average(&eq, &avg, Quantity::Total)?;
    let averaged = RegimeEntry::new(CAVITY_AVERAGED, cav_total, eq_total, T::one() + c0);

    // atom pumped, delta_c = 0
    let atom_params = SystemParams {
        delta_c: T::zero(),
        eta0: magnitude(p.eta0),
        cavity_drive: zero,
        ..p
    };
    let atom = SceneConfig::new(atom_params, g_shape, FieldProfile::constant(zero), no_stark)?;
    let mode_avg = spatial_average(&atom, &avg, Quantity::Mode)?;
    let spont_avg = spatial_average(&atom, &avg, Quantity::Spont)?;
    let atom_entry = RegimeEntry::new(ATOM_AVERAGED, mode_avg, spont_avg, c0);

    // both resonant, side running wave, antinode
    let res_params = SystemParams {
        delta_a0: T::zero(),
        delta_c: T::zero(),
        eta0: magnitude(p.eta0),
        cavity_drive: zero,
        ..p
    };
    let res = SceneConfig::new(
        res_params,
        FieldProfile::constant(zero),
        FieldProfile::running(zero, side_axis),
        no_stark,
    )?;
    let d = diffusion_mean_field(&res, r, &side_axis)?;
    let resonant = RegimeEntry::new(SIDE_RESONANT, d.two_d_mode, d.two_d_atom, T::lit(2.0) * c0);

    Ok(RegimeReport {
        entries: vec![local, averaged, atom_entry, resonant],
    })
}
