//! Command-line flags, `--config` files and their merge into one run config.
//!
//! A config file holds `key = value` lines whose keys are the long flag names
//! (`preset = 2p1s`, `tau-points = 50`). Flags given on the command line win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zeno_core::analysis::{linear_grid, log_grid, DEFAULT_GRID_POINTS};
use zeno_core::oracle::{DEFAULT_CUTOFF_MULTIPLE, DEFAULT_MODES};
use zeno_core::spectra::{presets, TabulatedSpectrum};
use zeno_core::{Approach, OhmicParams, Spectrum, SpectrumKind};

use crate::error::{CliError, Result};

/// Environment variable naming the directory for data files when `--output`
/// is not given.
pub const OUTPUT_DIR_ENV: &str = "ZENO_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "zeno",
    version,
    about = "Decay rate of a frequently measured two-level atom, with and without the rotating-wave approximation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Renormalized level spacings Ω₁ and Ω′ of a model
    Shift(ShiftArgs),
    /// R, R₀ and R/R₀ over a grid of measurement intervals
    RateCurve(RateCurveArgs),
    /// ΔΩ = Ω₁ − sω_c of the Ohmic family over a grid of (A, s)
    ZenoMap(ZenoMapArgs),
    /// Compare the rate formula with discretized-bath dynamics
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    #[value(name = "2p1s")]
    Hydrogen2p1s,
    #[value(name = "3p1s")]
    Hydrogen3p1s,
    /// 3p-1s with the uncalibrated tabulated constants
    #[value(name = "3p1s-literal")]
    Hydrogen3p1sLiteral,
    /// Zero spectrum
    None,
    /// Ohmic family with s = Ω/ω_c
    SubOhmicMatched,
    /// Ohmic family with s = 0.5
    SubOhmic,
    /// Ohmic family with s = 1
    Ohmic,
    /// Ohmic family with s = 2
    SuperOhmic,
}

impl Preset {
    pub fn spectrum(self) -> Spectrum {
        match self {
            Preset::Hydrogen2p1s => presets::hydrogen_2p1s(),
            Preset::Hydrogen3p1s => presets::hydrogen_3p1s(),
            Preset::Hydrogen3p1sLiteral => presets::hydrogen_3p1s_literal(),
            Preset::None => Spectrum::zero(),
            Preset::SubOhmicMatched => presets::sub_ohmic_matched(),
            Preset::SubOhmic => presets::ohmic_family(0.5),
            Preset::Ohmic => presets::ohmic_family(1.0),
            Preset::SuperOhmic => presets::ohmic_family(2.0),
        }
    }

    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    /// Frequencies in Ω, times in 1/Ω
    Reduced,
    /// Frequencies in rad/s, times in s
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Named model
    #[arg(long, value_enum, conflicts_with_all = ["ohmic", "spectrum"])]
    pub preset: Option<Preset>,
    /// Ohmic-family spectrum, e.g. "A=1e-8,s=2,wc=500" (A and wc default to 1e-8 and 500)
    #[arg(long, conflicts_with = "spectrum")]
    pub ohmic: Option<String>,
    /// Tabulated spectrum file with "ω G" lines
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// Ω in rad/s, overriding the value recorded with the model
    #[arg(long)]
    pub omega_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    /// Output file ("-" for stdout)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// File of key = value lines supplying defaults for the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// Smallest τ in 1/Ω [default: 1e-2/ω_c]
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Largest τ in 1/Ω [default: 1e3/ω_c]
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Number of τ values [default: 200]
    #[arg(long)]
    pub tau_points: Option<usize>,
    #[arg(long, value_enum)]
    pub tau_spacing: Option<Spacing>,
}

#[derive(Debug, Clone, Args)]
pub struct ShiftArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RateCurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// I, II or RWA [default: I]
    #[arg(long)]
    pub approach: Option<Approach>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ZenoMapArgs {
    /// Explicit comma-separated amplitudes A, replacing the A range
    #[arg(long)]
    pub a_values: Option<String>,
    /// [default: 1e-9]
    #[arg(long)]
    pub a_min: Option<f64>,
    /// [default: 1e-6]
    #[arg(long)]
    pub a_max: Option<f64>,
    /// Log-spaced amplitudes [default: 31]
    #[arg(long)]
    pub a_points: Option<usize>,
    /// [default: 1e-3]
    #[arg(long)]
    pub s_min: Option<f64>,
    /// [default: 4e-3]
    #[arg(long)]
    pub s_max: Option<f64>,
    /// Linearly spaced exponents [default: 31]
    #[arg(long)]
    pub s_points: Option<usize>,
    /// ω_c/Ω [default: 500]
    #[arg(long)]
    pub omega_c: Option<f64>,
    /// Ω in rad/s, needed for --units si
    #[arg(long)]
    pub omega_scale: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleCheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Check only this approach [default: I and II]
    #[arg(long)]
    pub approach: Option<Approach>,
    /// Comma-separated τ·ω_c values [default: 0.3,1,3]
    #[arg(long)]
    pub tau_omega_c: Option<String>,
    /// Number of bath modes [default: 4000]
    #[arg(long)]
    pub modes: Option<usize>,
    /// Bath cutoff in Ω [default: 20 ω_c]
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// RK4 step in 1/Ω [default: 0.1/(ω_max + center)]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Measurements per run [default: 1]
    #[arg(long)]
    pub measurements: Option<u32>,
    /// Largest accepted relative rate difference [default: 0.05]
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Also write the excited population and norm along each run to this CSV file
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parsed `key = value` file. Keys are consumed as they are looked up so
/// that leftovers can be reported as unknown.
#[derive(Debug, Default)]
pub struct ConfigFile {
    base: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut file = Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        file.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(file)
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            let key = key.trim().replace('_', "-");
            if entries.insert(key.clone(), (n + 1, value.trim().to_string())).is_some() {
                return Err(format!("line {}: duplicate key '{key}'", n + 1));
            }
        }
        Ok(Self {
            base: PathBuf::new(),
            entries,
        })
    }

    fn take_raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    /// The command-line value if present, otherwise the parsed file value.
    pub fn pick<T>(&mut self, cli: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.pick_with(cli, key, |s| s.parse::<T>().map_err(|e| e.to_string()))
    }

    pub fn pick_enum<T: ValueEnum>(&mut self, cli: Option<T>, key: &str) -> Result<Option<T>> {
        self.pick_with(cli, key, |s| T::from_str(s, true))
    }

    fn pick_with<T>(
        &mut self,
        cli: Option<T>,
        key: &str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        let file = self.take_raw(key);
        if cli.is_some() {
            return Ok(cli);
        }
        match file {
            None => Ok(None),
            Some((line, v)) => parse(&v)
                .map(Some)
                .map_err(|e| CliError::Config(format!("config line {line}: bad {key} '{v}': {e}"))),
        }
    }

    fn pick_path(&mut self, cli: Option<PathBuf>, key: &str) -> Result<Option<PathBuf>> {
        let base = self.base.clone();
        let from_file = cli.is_none();
        Ok(self
            .pick(cli, key)?
            .map(|p: PathBuf| if from_file && p.is_relative() { base.join(p) } else { p }))
    }

    /// Fails on keys no command looked up.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(CliError::Config(format!("config line {line}: unknown key '{key}'"))),
        }
    }
}

/// Key-value pairs echoed into every output file.
pub type Echo = Vec<(String, String)>;

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub label: String,
    pub spectrum: Spectrum,
    pub omega_scale: Option<f64>,
}

impl ModelConfig {
    pub fn resolve(args: ModelArgs, file: &mut ConfigFile) -> Result<Self> {
        let file_preset = file.pick_enum::<Preset>(None, "preset")?;
        let file_ohmic = file.pick::<String>(None, "ohmic")?;
        let file_spectrum = file.pick_path(None, "spectrum")?;
        let scale = file.pick(args.omega_scale, "omega-scale")?;

        let cli_given = args.preset.is_some() || args.ohmic.is_some() || args.spectrum.is_some();
        let (preset, ohmic, spectrum) = if cli_given {
            (args.preset, args.ohmic, args.spectrum)
        } else {
            (file_preset, file_ohmic, file_spectrum)
        };
        let given = preset.is_some() as usize + ohmic.is_some() as usize + spectrum.is_some() as usize;
        if given > 1 {
            return Err(CliError::Config("preset, ohmic and spectrum are mutually exclusive".into()));
        }
        if let Some(s) = scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(CliError::Config(format!("omega-scale must be positive, got {s}")));
            }
        }

        let (label, spectrum, recorded) = if let Some(p) = preset {
            let spec = p.spectrum();
            let recorded = spec.omega_scale();
            (p.name(), spec, recorded)
        } else if let Some(text) = ohmic {
            let params = parse_ohmic(&text).map_err(CliError::Config)?;
            (
                format!("ohmic(A={},s={},wc={})", params.amplitude, params.exponent, params.omega_c),
                Spectrum::ohmic(params),
                None,
            )
        } else if let Some(path) = spectrum {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read spectrum {}: {e}", path.display())))?;
            let (table, recorded) = TabulatedSpectrum::parse(&text, scale)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            (
                format!("table({})", path.display()),
                Spectrum::new(SpectrumKind::Tabulated(table)),
                recorded,
            )
        } else {
            return Err(CliError::Config("no model given: use --preset, --ohmic or --spectrum".into()));
        };
        Ok(Self {
            label,
            spectrum,
            omega_scale: scale.or(recorded),
        })
    }

    pub fn echo(&self, echo: &mut Echo) {
        echo.push(("model".into(), self.label.clone()));
        if let Some(s) = self.omega_scale {
            echo.push(("omega-scale".into(), format!("{s:e}")));
        }
    }
}

/// Parses "A=..,s=..,wc=..". Only s is required.
pub fn parse_ohmic(text: &str) -> std::result::Result<OhmicParams, String> {
    let mut amplitude = presets::OHMIC_AMPLITUDE;
    let mut exponent = None;
    let mut omega_c = presets::OHMIC_CUTOFF;
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value in ohmic spec, got '{part}'"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| format!("bad number '{}' in ohmic spec: {e}", value.trim()))?;
        match key.trim() {
            "A" | "a" | "amplitude" => amplitude = value,
            "s" | "exponent" => exponent = Some(value),
            "wc" | "omega_c" | "omega-c" => omega_c = value,
            other => return Err(format!("unknown ohmic parameter '{other}' (use A, s, wc)")),
        }
    }
    let exponent = exponent.ok_or("ohmic spec needs s")?;
    OhmicParams::new(amplitude, exponent, omega_c).map_err(|e| e.to_string())
}

pub fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    let values: std::result::Result<Vec<f64>, _> = text
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect();
    let values = values?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub format: Format,
    pub units: Units,
    pub output: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

impl OutputConfig {
    pub fn resolve(args: OutputArgs, file: &mut ConfigFile, default_format: Format) -> Result<Self> {
        let format = file.pick_enum(args.format, "format")?.unwrap_or(default_format);
        let units = file.pick_enum(args.units, "units")?.unwrap_or(Units::Reduced);
        let output = file.pick_path(args.output, "output")?;
        let output_dir = file
            .pick_path(None, "output-dir")?
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from));
        Ok(Self {
            format,
            units,
            output,
            output_dir,
        })
    }

    /// Where a data product goes: `--output`, else `<output dir>/<name>`,
    /// else stdout (None).
    pub fn data_destination(&self, default_name: &str) -> Option<PathBuf> {
        match &self.output {
            Some(p) if p.as_os_str() == "-" => None,
            Some(p) => Some(p.clone()),
            None => self.output_dir.as_ref().map(|d| d.join(default_name)),
        }
    }

    /// Reports go to stdout unless `--output` names a file.
    pub fn report_destination(&self) -> Option<PathBuf> {
        self.output.clone().filter(|p| p.as_os_str() != "-")
    }

    /// The factor turning reduced frequencies into the requested units.
    pub fn frequency_scale(&self, omega_scale: Option<f64>) -> Result<f64> {
        match self.units {
            Units::Reduced => Ok(1.0),
            Units::Si => omega_scale.ok_or_else(|| {
                CliError::Config("--units si needs Ω in rad/s: pass --omega-scale or use a model that records it".into())
            }),
        }
    }

    pub fn echo(&self, echo: &mut Echo) {
        echo.push(("units".into(), self.units.to_possible_value().unwrap().get_name().into()));
    }
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl GridConfig {
    pub fn resolve(args: GridArgs, file: &mut ConfigFile, omega_c: f64) -> Result<Self> {
        let points = file.pick(args.tau_points, "tau-points")?.unwrap_or(DEFAULT_GRID_POINTS);
        let min = file.pick(args.tau_min, "tau-min")?.unwrap_or(1e-2 / omega_c);
        let max = file.pick(args.tau_max, "tau-max")?.unwrap_or(1e3 / omega_c).max(min);
        let spacing = file.pick_enum(args.tau_spacing, "tau-spacing")?.unwrap_or(Spacing::Log);
        let grid = Self {
            min,
            max,
            points,
            spacing,
        };
        grid.taus()?;
        Ok(grid)
    }

    pub fn taus(&self) -> Result<Vec<f64>> {
        match self.spacing {
            Spacing::Log => log_grid(self.min, self.max, self.points),
            Spacing::Linear => linear_grid(self.min, self.max, self.points),
        }
        .map_err(CliError::config)
    }

    pub fn echo(&self, echo: &mut Echo) {
        let spacing = self.spacing.to_possible_value().unwrap().get_name().to_string();
        echo.push(("tau-grid".into(), format!("{spacing} {:e}..{:e} x {}", self.min, self.max, self.points)));
    }
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub approaches: Vec<Approach>,
    pub tau_omega_c: Vec<f64>,
    pub modes: usize,
    pub omega_max: f64,
    pub dt: Option<f64>,
    pub measurements: u32,
    pub tolerance: f64,
    pub trajectory: Option<PathBuf>,
}

impl OracleConfig {
    pub fn resolve(args: &OracleCheckArgs, file: &mut ConfigFile, omega_c: f64) -> Result<Self> {
        let approach = file.pick(args.approach, "approach")?;
        let taus = file.pick(args.tau_omega_c.clone(), "tau-omega-c")?;
        let tau_omega_c = match taus {
            Some(t) => parse_list(&t).map_err(|e| CliError::Config(format!("tau-omega-c: {e}")))?,
            None => vec![0.3, 1.0, 3.0],
        };
        if tau_omega_c.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(CliError::Config("tau-omega-c values must be positive".into()));
        }
        let tolerance = file.pick(args.tolerance, "tolerance")?.unwrap_or(0.05);
        if !(tolerance > 0.0) {
            return Err(CliError::Config(format!("tolerance must be positive, got {tolerance}")));
        }
        let measurements = file.pick(args.measurements, "measurements")?.unwrap_or(1);
        if measurements == 0 {
            return Err(CliError::Config("measurements must be at least 1".into()));
        }
        Ok(Self {
            approaches: match approach {
                Some(a) => vec![a],
                None => vec![Approach::ApproachI, Approach::ApproachII],
            },
            tau_omega_c,
            modes: file.pick(args.modes, "modes")?.unwrap_or(DEFAULT_MODES),
            omega_max: file.pick(args.omega_max, "omega-max")?.unwrap_or(DEFAULT_CUTOFF_MULTIPLE * omega_c),
            dt: file.pick(args.dt, "dt")?,
            measurements,
            tolerance,
            trajectory: file.pick_path(args.trajectory.clone(), "trajectory")?,
        })
    }

    pub fn echo(&self, echo: &mut Echo) {
        let approaches: Vec<&str> = self.approaches.iter().map(|a| a.label()).collect();
        echo.push(("approaches".into(), approaches.join(",")));
        echo.push(("modes".into(), self.modes.to_string()));
        echo.push(("omega-max".into(), format!("{:e}", self.omega_max)));
        if let Some(dt) = self.dt {
            echo.push(("dt".into(), format!("{dt:e}")));
        }
        echo.push(("measurements".into(), self.measurements.to_string()));
        echo.push(("tolerance".into(), format!("{}", self.tolerance)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ohmic_spec_defaults_and_errors() {
        let p = parse_ohmic("s=2").unwrap();
        assert_eq!((p.amplitude, p.exponent, p.omega_c), (1e-8, 2.0, 500.0));
        let p = parse_ohmic("A=1e-7, s=0.5, wc=100").unwrap();
        assert_eq!((p.amplitude, p.exponent, p.omega_c), (1e-7, 0.5, 100.0));
        assert!(parse_ohmic("A=1e-8").is_err());
        assert!(parse_ohmic("s=1,q=2").is_err());
        assert!(parse_ohmic("s=x").is_err());
    }

    #[test]
    fn config_file_keys_and_precedence() {
        let mut f = ConfigFile::parse("# comment\npreset = 2p1s\ntau_points = 5 # trailing\n").unwrap();
        assert_eq!(f.pick::<usize>(Some(7), "tau-points").unwrap(), Some(7));
        assert_eq!(f.pick_enum::<Preset>(None, "preset").unwrap(), Some(Preset::Hydrogen2p1s));
        f.finish().unwrap();

        let mut f = ConfigFile::parse("bogus = 1").unwrap();
        assert_eq!(f.pick::<usize>(None, "tau-points").unwrap(), None);
        assert!(f.finish().is_err());

        assert!(ConfigFile::parse("no equals sign").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2").is_err());
    }

    #[test]
    fn model_sources_are_exclusive() {
        let mut f = ConfigFile::parse("preset = none\nohmic = s=1").unwrap();
        assert!(ModelConfig::resolve(ModelArgs::default(), &mut f).is_err());

        // the command line replaces the file's model entirely
        let mut f = ConfigFile::parse("preset = none").unwrap();
        let args = ModelArgs {
            ohmic: Some("s=1".into()),
            ..Default::default()
        };
        let m = ModelConfig::resolve(args, &mut f).unwrap();
        assert!(m.label.starts_with("ohmic"));

        let mut f = ConfigFile::default();
        assert!(matches!(
            ModelConfig::resolve(ModelArgs::default(), &mut f),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("0.3, 1,3").unwrap(), vec![0.3, 1.0, 3.0]);
        assert!(parse_list("").is_err());
        assert!(parse_list("1,a").is_err());
    }
}
