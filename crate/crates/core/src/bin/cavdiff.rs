use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cavity_diffusion::analysis::{Column, SweepParameter};
use cavity_diffusion::cli::{self, Command, Route, RunConfig};
use cavity_diffusion::Error;

#[derive(Parser, Debug)]
#[command(
    name = "cavdiff",
    version,
    about = "Momentum diffusion of a driven atom in a driven cavity"
)]
struct Opt {
    #[command(subcommand)]
    command: Cmd,

    /// Flat key=value scene file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write CSV here instead of stdout
    #[arg(long, short, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Significant digits, 6 to 17
    #[arg(long, global = true, default_value_t = cli::DEFAULT_PRECISION)]
    precision: usize,

    /// Compare closed-form and matrix steady states; exit 4 on disagreement
    #[arg(long, global = true)]
    cross_check: bool,

    #[arg(
        long,
        global = true,
        hide = true,
        default_value_t = 1e-10,
        allow_negative_numbers = true
    )]
    cross_check_tol: f64,

    #[command(flatten)]
    scene: SceneFlags,
}

/// Scene keys as flags; they override the config file.
#[derive(Args, Debug)]
#[command(rename_all = "verbatim")]
#[allow(non_snake_case)]
struct SceneFlags {
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta_a: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta_c: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    g0_re: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    g0_im: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    eta0_re: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    eta0_im: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    E_re: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    E_im: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    k_L: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    k_cav: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    mass: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    g_profile: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    eta_profile: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    stark_profile: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    axis: Option<String>,
}

impl SceneFlags {
    fn overrides(&self) -> Vec<(String, String)> {
        let fields = [
            ("gamma", &self.gamma),
            ("kappa", &self.kappa),
            ("delta_a", &self.delta_a),
            ("delta_c", &self.delta_c),
            ("g0_re", &self.g0_re),
            ("g0_im", &self.g0_im),
            ("eta0_re", &self.eta0_re),
            ("eta0_im", &self.eta0_im),
            ("E_re", &self.E_re),
            ("E_im", &self.E_im),
            ("k", &self.k),
            ("k_L", &self.k_L),
            ("k_cav", &self.k_cav),
            ("mass", &self.mass),
            ("g_profile", &self.g_profile),
            ("eta_profile", &self.eta_profile),
            ("stark_profile", &self.stark_profile),
            ("x", &self.x),
            ("y", &self.y),
            ("z", &self.z),
            ("axis", &self.axis),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RouteArg {
    MeanField,
    Matrix,
    Fd,
    FreeSpace,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Steady-state means at the configured position
    Steady,
    /// Diffusion along the configured axis
    Diffusion {
        #[arg(long, value_enum, default_value = "mean-field")]
        route: RouteArg,
    },
    /// Mean-field diffusion over a parameter range
    Sweep {
        /// laser, cavity, x, y, z or a scene key such as g0_re
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = cli::DEFAULT_STEPS)]
        steps: usize,
        /// Print the interior maxima of a column (default two_D_total) instead of the rows
        #[arg(long, num_args = 0..=1, default_missing_value = "two_D_total", value_name = "COLUMN")]
        peaks: Option<String>,
    },
    /// Quantum-regression diffusion on a truncated Fock space
    Oracle {
        #[arg(long, default_value_t = 8)]
        n_atom: usize,
        #[arg(long, default_value_t = 8)]
        n_cav: usize,
    },
    /// Regime ratios for the scene's rates and coupling
    Regime,
    /// Sweep for a figure preset: fig2, fig2-cavity or fig3
    Figure {
        name: String,
        #[arg(long)]
        steps: Option<usize>,
        /// Print the interior maxima of a column (default two_D_total) instead of the rows
        #[arg(long, num_args = 0..=1, default_missing_value = "two_D_total", value_name = "COLUMN")]
        peaks: Option<String>,
    },
}

fn command(cmd: Cmd) -> Result<Command, Error> {
    Ok(match cmd {
        Cmd::Steady => Command::Steady,
        Cmd::Diffusion { route } => Command::Diffusion {
            route: match route {
                RouteArg::MeanField => Route::MeanField,
                RouteArg::Matrix => Route::Matrix,
                RouteArg::Fd => Route::FiniteDifference,
                RouteArg::FreeSpace => Route::FreeSpace,
            },
        },
        Cmd::Sweep {
            param,
            from,
            to,
            steps,
            peaks,
        } => Command::Sweep {
            parameter: SweepParameter::from_name(&param)
                .ok_or_else(|| Error::Sweep(format!("unknown sweep parameter `{param}`")))?,
            from,
            to,
            steps,
            peaks: peak_column(peaks)?,
        },
        Cmd::Oracle { n_atom, n_cav } => Command::Oracle { n_atom, n_cav },
        Cmd::Regime => Command::Regime,
        Cmd::Figure { name, steps, peaks } => Command::Figure {
            name,
            steps,
            peaks: peak_column(peaks)?,
        },
    })
}

fn peak_column(name: Option<String>) -> Result<Option<Column>, Error> {
    name.map(|n| Column::from_name(&n).ok_or_else(|| Error::Sweep(format!("unknown column `{n}`"))))
        .transpose()
}

fn run(opt: Opt) -> Result<(), Error> {
    let config_text = match &opt.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?),
        None => None,
    };
    let cfg = RunConfig {
        command: command(opt.command)?,
        config_text,
        overrides: opt.scene.overrides(),
        output: opt.output,
        precision: opt.precision,
        cross_check: opt.cross_check,
        cross_check_tolerance: opt.cross_check_tol,
    };
    let text = cli::run(&cfg)?;
    match &cfg.output {
        Some(path) => cli::write_output(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let opt = Opt::parse();
    match run(opt) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavdiff: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
