//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [process]
//! initial_concentrations = [2.0, 2.0]
//! x_min = 0.05
//! horizon = 0.01
//!
//! [kinetics]
//! rate1 = { kind = "linear", coefficient = 1.0 }
//! rate2 = { kind = "linear", coefficient = 5.0 }
//!
//! [initial_datum]
//! kind = "elliptic_bump"
//! center = [0.1, 0.75]
//! half_widths = [0.05, 0.25]
//!
//! [grids]
//! time_points = 1001
//! quadrature = [100, 100]
//!
//! [run]
//! threads = 1
//! ```
//!
//! Unknown keys are rejected; errors name the offending key path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fvm::{FvmOptions, Limiter, TimeScheme};
use crate::model::{
    DisperseState, FeedMass, GrowthLaw, InitialDensity, Problem, ProcessConfig, QuadratureRule,
    RateLaw, SupportBox,
};
use crate::solver::{NegativeConcentration, SolverOptions, Summation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: ProcessSection,
    pub kinetics: KineticsSection,
    pub initial_datum: InitialDatum,
    #[serde(default)]
    pub grids: GridsSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSection {
    #[serde(default = "one")]
    pub reactor_volume: f64,
    #[serde(default = "ones")]
    pub densities: [f64; 2],
    pub initial_concentrations: [f64; 2],
    #[serde(default)]
    pub feed: [FeedSpec; 2],
    pub x_min: f64,
    pub horizon: f64,
    #[serde(default)]
    pub units: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeedSpec {
    #[default]
    Calibrated,
    Constant {
        mass: f64,
    },
    Ramp {
        initial: f64,
        rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticsSection {
    pub rate1: RateSpec,
    pub rate2: RateSpec,
    /// Size exponent `n` of the growth field.
    #[serde(default)]
    pub exponent: f64,
    #[serde(default)]
    pub allow_negative_rates: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateSpec {
    Linear { coefficient: f64 },
    Power { coefficient: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatum {
    EllipticBump {
        center: [f64; 2],
        half_widths: [f64; 2],
    },
    Uniform {
        lower: [f64; 2],
        upper: [f64; 2],
        value: f64,
    },
    Dirac {
        location: [f64; 2],
        count: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleSpec {
    #[default]
    Midpoint,
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridsSection {
    /// Number of time points `N_t` of a single solve.
    pub time_points: usize,
    /// Quadrature nodes per axis.
    pub quadrature: [usize; 2],
    pub rule: RuleSpec,
    /// Finite-volume cells per axis.
    pub fvm_cells: [usize; 2],
    /// `N_t` ladder of the temporal convergence study.
    pub time_ladder: Vec<usize>,
    /// `N_t` of the reference solution.
    pub reference_time_points: usize,
    /// Quadrature nodes per axis of the reference solution.
    pub reference_quadrature: [usize; 2],
    /// eMoM levels `M` of the method comparison: `M x M` nodes and
    /// `N_t = M^2` time points.
    pub emom_ladder: Vec<usize>,
    /// Finite-volume levels `M` of the method comparison: `M x M` cells.
    pub fvm_ladder: Vec<usize>,
    /// Time indices to reconstruct; empty means first and last.
    pub snapshot_indices: Vec<usize>,
    /// Backward evaluation grid per axis.
    pub snapshot_resolution: [usize; 2],
}

impl Default for GridsSection {
    fn default() -> Self {
        Self {
            time_points: 1001,
            quadrature: [100, 100],
            rule: RuleSpec::Midpoint,
            fvm_cells: [64, 64],
            time_ladder: vec![100, 316, 1000, 3162, 10000],
            reference_time_points: 100_000,
            reference_quadrature: [200, 200],
            emom_ladder: vec![18, 24, 32, 42, 56, 75, 100],
            fvm_ladder: vec![21, 31, 45, 66, 97, 142, 208],
            snapshot_indices: Vec::new(),
            snapshot_resolution: [200, 200],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeSpec {
    #[default]
    Clamp,
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummationSpec {
    #[default]
    Ordered,
    Compensated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    #[default]
    ForwardEuler,
    LaxWendroff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimiterSpec {
    #[default]
    VanLeer,
    Minmod,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub threads: usize,
    /// Fixed reduction order; results do not depend on `threads`.
    pub reproducible: bool,
    pub negative_concentration: NegativeSpec,
    pub summation: SummationSpec,
    pub check_balance: bool,
    /// Fraction of the finite-volume stability limit.
    pub cfl: f64,
    pub fvm_scheme: SchemeSpec,
    pub limiter: LimiterSpec,
    /// Upper radius of the finite-volume grid; automatic when absent.
    pub r_max: Option<f64>,
    /// Repetitions per timed solve; the median is reported.
    pub timing_repetitions: usize,
    /// Richardson-extrapolate the reference solution in time.
    pub extrapolate_reference: bool,
    /// Seeds of the radial composition profiles as `[radius, composition]`.
    /// Defaults to the Dirac location or the support center.
    pub radial_seeds: Vec<[f64; 2]>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            threads: 1,
            reproducible: true,
            negative_concentration: NegativeSpec::Clamp,
            summation: SummationSpec::Ordered,
            check_balance: true,
            cfl: 0.9,
            fvm_scheme: SchemeSpec::ForwardEuler,
            limiter: LimiterSpec::VanLeer,
            r_max: None,
            timing_repetitions: 3,
            extrapolate_reference: true,
            radial_seeds: Vec::new(),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn ones() -> [f64; 2] {
    [1.0, 1.0]
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| Error::config("<document>", e.to_string()))?;
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().message().to_string();
            Error::config(
                if path == "." {
                    "<document>".into()
                } else {
                    path
                },
                message,
            )
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Checks that need more than the schema.
    pub fn validate(&self) -> Result<()> {
        self.problem()?;
        let g = &self.grids;
        if g.time_points == 0 {
            return Err(Error::config("grids.time_points", "must be positive"));
        }
        if g.quadrature.contains(&0) {
            return Err(Error::config("grids.quadrature", "must be positive"));
        }
        if g.reference_time_points < 2 {
            return Err(Error::config(
                "grids.reference_time_points",
                "must be at least 2",
            ));
        }
        if let Some(k) = g.time_ladder.iter().find(|k| **k < 2) {
            return Err(Error::config(
                "grids.time_ladder",
                format!("level {k} is below 2"),
            ));
        }
        if let Some(m) = g.emom_ladder.iter().chain(&g.fvm_ladder).find(|m| **m < 2) {
            return Err(Error::config(
                "grids.emom_ladder",
                format!("level {m} is below 2"),
            ));
        }
        if !(self.run.cfl > 0.0 && self.run.cfl <= 1.0) {
            return Err(Error::config("run.cfl", "must lie in (0, 1]"));
        }
        if self.run.timing_repetitions == 0 {
            return Err(Error::config("run.timing_repetitions", "must be positive"));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        let p = &self.process;
        let feed = |f: FeedSpec| match f {
            FeedSpec::Calibrated => FeedMass::Calibrated,
            FeedSpec::Constant { mass } => FeedMass::Constant(mass),
            FeedSpec::Ramp { initial, rate } => FeedMass::Ramp { initial, rate },
        };
        let process = ProcessConfig {
            reactor_volume: p.reactor_volume,
            densities: p.densities,
            initial_concentrations: p.initial_concentrations,
            feed: [feed(p.feed[0]), feed(p.feed[1])],
            x_min: p.x_min,
            horizon: p.horizon,
            units: p.units.clone(),
        };
        let rate = |r: RateSpec| match r {
            RateSpec::Linear { coefficient } => RateLaw::linear(coefficient),
            RateSpec::Power {
                coefficient,
                exponent,
            } => RateLaw::power(coefficient, exponent),
        };
        let k = &self.kinetics;
        let law = if k.allow_negative_rates {
            GrowthLaw::allowing_negative_rates(rate(k.rate1), rate(k.rate2), k.exponent)?
        } else {
            GrowthLaw::new(rate(k.rate1), rate(k.rate2), k.exponent)?
        };
        let initial = match self.initial_datum.clone() {
            InitialDatum::EllipticBump {
                center,
                half_widths,
            } => InitialDensity::EllipticBump {
                center,
                half_widths,
            },
            InitialDatum::Uniform {
                lower,
                upper,
                value,
            } => InitialDensity::Uniform {
                support: SupportBox::new(lower, upper),
                value,
            },
            InitialDatum::Dirac { location, count } => InitialDensity::Dirac {
                location: DisperseState::from(location),
                count,
            },
        };
        Problem::new(process, law, initial)
    }

    pub fn rule(&self) -> QuadratureRule {
        match self.grids.rule {
            RuleSpec::Midpoint => QuadratureRule::Midpoint,
            RuleSpec::GaussLegendre => QuadratureRule::GaussLegendre,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            negative: match self.run.negative_concentration {
                NegativeSpec::Clamp => NegativeConcentration::Clamp,
                NegativeSpec::Abort => NegativeConcentration::Abort,
            },
            summation: match self.run.summation {
                SummationSpec::Ordered => Summation::Ordered,
                SummationSpec::Compensated => Summation::Compensated,
            },
            threads: self.run.threads,
            check_balance: self.run.check_balance,
            keep_field: false,
        }
    }

    pub fn fvm_options(&self) -> FvmOptions {
        FvmOptions {
            cfl: self.run.cfl,
            scheme: match self.run.fvm_scheme {
                SchemeSpec::ForwardEuler => TimeScheme::ForwardEuler,
                SchemeSpec::LaxWendroff => TimeScheme::LaxWendroff,
            },
            limiter: match self.run.limiter {
                LimiterSpec::VanLeer => Limiter::VanLeer,
                LimiterSpec::Minmod => Limiter::Minmod,
                LimiterSpec::None => Limiter::None,
            },
            negative: self.solver_options().negative,
            r_max: self.run.r_max,
            snapshot_every: None,
        }
    }

    /// Seeds for radial profiles.
    pub fn radial_seeds(&self) -> Vec<DisperseState> {
        if !self.run.radial_seeds.is_empty() {
            return self
                .run
                .radial_seeds
                .iter()
                .map(|s| DisperseState::from(*s))
                .collect();
        }
        match &self.initial_datum {
            InitialDatum::Dirac { location, .. } => vec![DisperseState::from(*location)],
            InitialDatum::EllipticBump { center, .. } => vec![DisperseState::from(*center)],
            InitialDatum::Uniform { lower, upper, .. } => vec![DisperseState::new(
                0.5 * (lower[0] + upper[0]),
                0.5 * (lower[1] + upper[1]),
            )],
        }
    }

    /// The benchmark setup with growth-rate ratio `ratio`.
    pub fn benchmark(ratio: f64) -> Self {
        Self {
            process: ProcessSection {
                reactor_volume: 1.0,
                densities: [1.0, 1.0],
                initial_concentrations: [2.0, 2.0],
                feed: [FeedSpec::Calibrated; 2],
                x_min: 0.05,
                horizon: 0.01,
                units: "dimensionless".into(),
            },
            kinetics: KineticsSection {
                rate1: RateSpec::Linear { coefficient: 1.0 },
                rate2: RateSpec::Linear { coefficient: ratio },
                exponent: 0.0,
                allow_negative_rates: false,
            },
            initial_datum: InitialDatum::EllipticBump {
                center: [0.1, 0.75],
                half_widths: [0.05, 0.25],
            },
            grids: GridsSection::default(),
            run: RunSection::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BENCHMARK: &str = r#"
[process]
initial_concentrations = [2.0, 2.0]
x_min = 0.05
horizon = 0.01
units = "dimensionless"

[kinetics]
rate1 = { kind = "linear", coefficient = 1.0 }
rate2 = { kind = "linear", coefficient = 5.0 }

[initial_datum]
kind = "elliptic_bump"
center = [0.1, 0.75]
half_widths = [0.05, 0.25]
"#;

    fn error_path(text: &str) -> String {
        match ExperimentConfig::from_toml_str(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn parses_benchmark() {
        let cfg = ExperimentConfig::from_toml_str(BENCHMARK).unwrap();
        assert_eq!(cfg, ExperimentConfig::benchmark(5.0));
        let problem = cfg.problem().unwrap();
        assert_eq!(problem.law.rates([2.0, 2.0]).g2, 10.0);
        assert_eq!(cfg.radial_seeds(), vec![DisperseState::new(0.1, 0.75)]);
    }

    #[test]
    fn feeds_and_datums() {
        let text = BENCHMARK.replace(
            "units = \"dimensionless\"",
            "feed = [{ kind = \"constant\", mass = 3.0 }, { kind = \"ramp\", initial = 2.0, rate = 1.0 }]",
        ) + "\n[run]\nradial_seeds = [[0.05, 0.5]]\n";
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.process.feed[0], FeedSpec::Constant { mass: 3.0 });
        assert_eq!(cfg.radial_seeds(), vec![DisperseState::new(0.05, 0.5)]);
        let dirac = BENCHMARK.replace(
            "kind = \"elliptic_bump\"\ncenter = [0.1, 0.75]\nhalf_widths = [0.05, 0.25]",
            "kind = \"dirac\"\nlocation = [0.05, 0.5]\ncount = 10.0",
        );
        let cfg = ExperimentConfig::from_toml_str(&dirac).unwrap();
        assert!(cfg.problem().unwrap().initial.is_dirac());
    }

    #[test]
    fn unknown_keys_are_reported_with_path() {
        let text = BENCHMARK.replace("x_min = 0.05", "x_min = 0.05\nxmin = 0.05");
        assert_eq!(error_path(&text), "process.xmin");
        let text = format!("{BENCHMARK}\n[grids]\ntime_point = 3\n");
        assert_eq!(error_path(&text), "grids.time_point");
        let text = BENCHMARK.replace("kind = \"linear\", coefficient = 5.0", "kind = \"cubic\"");
        assert_eq!(error_path(&text), "kinetics.rate2.kind");
    }

    #[test]
    fn invalid_values_are_reported_with_path() {
        let text = BENCHMARK.replace("coefficient = 5.0", "coefficient = -5.0");
        assert_eq!(error_path(&text), "kinetics.rate2.coefficient");
        let text = BENCHMARK.replace("horizon = 0.01", "horizon = \"soon\"");
        assert_eq!(error_path(&text), "process.horizon");
        let text = format!("{BENCHMARK}\n[run]\ncfl = 1.5\n");
        assert_eq!(error_path(&text), "run.cfl");
        let text = BENCHMARK.replace("x_min = 0.05", "x_min = 0.07");
        assert!(ExperimentConfig::from_toml_str(&text)
            .unwrap_err()
            .is_config());
        assert_eq!(error_path("not toml ["), "<document>");
    }
}
