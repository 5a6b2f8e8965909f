//! Scenario configuration: initial data families, solver settings, outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::Mode;
use crate::graph::SampledGraph;

/// One even polynomial bump amplitude * (1 - ((x-c)/w)^2)^m on |x-c| <= w.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpComponent {
    pub center: f64,
    pub halfwidth: f64,
    pub amplitude: f64,
    #[serde(default = "default_shape_exponent")]
    pub shape_exponent: u32,
}

fn default_shape_exponent() -> u32 {
    3
}

impl BumpComponent {
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.halfwidth;
        let s = 1.0 - u * u;
        if s > 0.0 { self.amplitude * s.powi(self.shape_exponent as i32) } else { 0.0 }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.halfwidth, self.center + self.halfwidth)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// Sum of disjoint positive bumps; the graph model's admissible family.
    BumpSum { components: Vec<BumpComponent> },
    /// Raw samples of the initial graph.
    FromSamples { x_lo: f64, x_hi: f64, values: Vec<f64> },
    /// Exact ellipse patch, handled by the oracle layer only.
    Ellipse { a: f64, b: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    /// Extra hull margin; the transport is contractive so 0 is the default.
    #[serde(default)]
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverSpec {
    pub dt: f64,
    pub t_end: f64,
    /// Defaults to `rescaled` for t_end > 3, `plain` otherwise.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    pub snapshot_cadence: f64,
    #[serde(default = "default_out_dir")]
    pub directory: String,
}

fn default_out_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub initial: InitialData,
    pub grid: GridSpec,
    pub solver: SolverSpec,
    pub outputs: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    /// Hölder exponent used by the norm diagnostics.
    #[serde(default = "default_holder_s")]
    pub holder_s: f64,
}

fn default_holder_s() -> f64 {
    0.5
}

impl Scenario {
    /// Reads and validates a scenario file, reporting every violation at once.
    pub fn parse(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let sc: Scenario = serde_json::from_str(&text)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn resolved_mode(&self) -> Mode {
        self.solver.mode.unwrap_or(if self.solver.t_end > 3.0 { Mode::Rescaled } else { Mode::Plain })
    }

    /// Grid hull: convex hull of the initial support plus the margin.
    pub fn hull(&self) -> Result<(f64, f64)> {
        match &self.initial {
            InitialData::BumpSum { components } => {
                let lo = components.iter().map(|c| c.support().0).fold(f64::INFINITY, f64::min);
                let hi = components.iter().map(|c| c.support().1).fold(f64::NEG_INFINITY, f64::max);
                Ok((lo - self.grid.margin, hi + self.grid.margin))
            }
            InitialData::FromSamples { x_lo, x_hi, .. } => Ok((*x_lo, *x_hi)),
            InitialData::Ellipse { .. } => {
                Err(Error::InvalidArg("ellipse scenarios are oracle-only and carry no graph grid".into()))
            }
        }
    }

    /// Samples the initial graph on the scenario grid.
    pub fn initial_graph(&self) -> Result<SampledGraph> {
        let (lo, hi) = self.hull()?;
        match &self.initial {
            InitialData::BumpSum { components } => {
                let comps = components.clone();
                let mut g = SampledGraph::from_fn(lo, hi, self.grid.n, 0.0, move |x| {
                    comps.iter().map(|c| c.eval(x)).sum()
                })?;
                // rounding can leave sub-denormal dust where the support
                // touches the hull; the boundary nodes carry exact zeros
                let last = g.n - 1;
                if g.values[0].abs() < 1e-12 * g.linf() {
                    g.values[0] = 0.0;
                }
                if g.values[last].abs() < 1e-12 * g.linf() {
                    g.values[last] = 0.0;
                }
                Ok(g)
            }
            InitialData::FromSamples { values, .. } => {
                if values.len() != self.grid.n {
                    return Err(Error::InvalidArg(format!(
                        "from_samples carries {} values but the grid wants {}",
                        values.len(),
                        self.grid.n
                    )));
                }
                SampledGraph::new(lo, hi, values.clone(), 0.0)
            }
            InitialData::Ellipse { .. } => Err(Error::InvalidArg("ellipse scenarios are oracle-only".into())),
        }
    }

    /// Initial support components on the real line.
    pub fn initial_components(&self) -> Result<Vec<(f64, f64)>> {
        match &self.initial {
            InitialData::BumpSum { components } => Ok(components.iter().map(|c| c.support()).collect()),
            InitialData::FromSamples { .. } => {
                let g = self.initial_graph()?;
                Ok(crate::norms::support_components(&g, 1e-10 * g.linf().max(f64::MIN_POSITIVE)))
            }
            InitialData::Ellipse { .. } => Err(Error::InvalidArg("ellipse scenarios are oracle-only".into())),
        }
    }

    /// Initial speed estimate from a velocity sweep of the sampled graph
    /// (capped resolution; the per-step CFL check uses the live field).
    pub fn speed_estimate(&self) -> Result<f64> {
        if let InitialData::Ellipse { a, b } = &self.initial {
            // the boundary speed peaks at the vertex
            return Ok(a * b / (a + b));
        }
        let mut probe = self.clone();
        probe.grid.n = probe.grid.n.min(513);
        let g = probe.initial_graph()?;
        let cf = crate::velocity::core_fields(&g)?;
        Ok(cf.u1.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Validates the whole configuration, collecting every violation.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.name.is_empty() {
            errs.push("name must be nonempty".to_string());
        }
        match &self.initial {
            InitialData::BumpSum { components } => {
                if components.is_empty() {
                    errs.push("initial data needs at least one component".into());
                }
                for (k, c) in components.iter().enumerate() {
                    if !(c.amplitude > 0.0) {
                        errs.push(format!(
                            "component {k}: amplitude must be > 0 (positive compactly supported data hypothesis)"
                        ));
                    }
                    if !(c.halfwidth > 0.0) {
                        errs.push(format!("component {k}: halfwidth must be > 0"));
                    }
                    if c.shape_exponent < 2 {
                        errs.push(format!("component {k}: shape exponent must be >= 2 for a C1 graph"));
                    }
                }
                for w in components.windows(2) {
                    if w[0].support().1 >= w[1].support().0 {
                        errs.push(format!(
                            "components at {} and {} overlap: supports must be pairwise disjoint (disjoint segments hypothesis)",
                            w[0].center, w[1].center
                        ));
                    }
                }
            }
            InitialData::FromSamples { x_lo, x_hi, values } => {
                if !(x_hi > x_lo) {
                    errs.push("from_samples needs x_hi > x_lo".into());
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    errs.push("from_samples values must be finite and nonnegative (positivity hypothesis)".into());
                }
                if values.first().copied().unwrap_or(1.0) != 0.0 || values.last().copied().unwrap_or(1.0) != 0.0 {
                    errs.push("from_samples must vanish at both boundary nodes (compact support inside the hull)".into());
                }
            }
            InitialData::Ellipse { a, b } => {
                if !(a >= b && *b > 0.0) {
                    errs.push(format!("ellipse needs a >= b > 0, got a={a}, b={b}"));
                }
            }
        }
        if !matches!(self.initial, InitialData::Ellipse { .. }) {
            if self.grid.n < 33 {
                errs.push("grid.n must be at least 33".into());
            }
            if self.grid.margin < 0.0 {
                errs.push("grid.margin must be >= 0".into());
            }
        }
        if !(self.solver.dt > 0.0) {
            errs.push("solver.dt must be > 0".into());
        }
        if !(self.solver.t_end > 0.0) {
            errs.push("solver.t_end must be > 0".into());
        }
        if let Some(e) = self.solver.eps {
            if !(e > 0.0) {
                errs.push("solver.eps must be > 0 when present".into());
            }
        }
        if !(self.outputs.snapshot_cadence > 0.0) {
            errs.push("outputs.snapshot_cadence must be > 0".into());
        }
        if !(self.holder_s > 0.0 && self.holder_s < 1.0) {
            errs.push("holder_s must lie in (0,1)".into());
        }
        // CFL precheck against the mass-based speed estimate
        if errs.is_empty() && !matches!(self.initial, InitialData::Ellipse { .. }) {
            if let (Ok((lo, hi)), Ok(v)) = (self.hull(), self.speed_estimate()) {
                let h = (hi - lo) / (self.grid.n - 1) as f64;
                let dt_max = 0.5 * h / v.max(1e-12);
                if self.solver.dt > dt_max {
                    errs.push(format!(
                        "solver.dt = {:.3e} violates the CFL precondition: dt_max = {:.3e} from the initial velocity estimate",
                        self.solver.dt, dt_max
                    ));
                }
            }
        }
        if errs.is_empty() { Ok(()) } else { Err(Error::Scenario(errs)) }
    }
}

/// The shipped scenario library.
pub fn builtin(name: &str) -> Option<Scenario> {
    let base_outputs = OutputSpec { snapshot_cadence: 0.25, directory: "out".into() };
    match name {
        "small_bump" => Some(Scenario {
            name: "small_bump".into(),
            initial: InitialData::BumpSum {
                components: vec![BumpComponent { center: 0.0, halfwidth: 1.0, amplitude: 0.1, shape_exponent: 3 }],
            },
            grid: GridSpec { n: 385, margin: 0.0 },
            solver: SolverSpec { dt: 2e-3, t_end: 8.0, mode: None, eps: None },
            outputs: base_outputs,
            seed: 7,
            holder_s: 0.5,
        }),
        "two_bump" => Some(Scenario {
            name: "two_bump".into(),
            initial: InitialData::BumpSum {
                components: vec![
                    BumpComponent { center: -0.6, halfwidth: 0.35, amplitude: 0.08, shape_exponent: 3 },
                    BumpComponent { center: 0.55, halfwidth: 0.4, amplitude: 0.1, shape_exponent: 3 },
                ],
            },
            grid: GridSpec { n: 385, margin: 0.0 },
            solver: SolverSpec { dt: 2e-3, t_end: 8.0, mode: None, eps: None },
            outputs: base_outputs,
            seed: 11,
            holder_s: 0.5,
        }),
        "eps_sweep" => Some(Scenario {
            name: "eps_sweep".into(),
            initial: InitialData::BumpSum {
                components: vec![BumpComponent { center: 0.0, halfwidth: 1.0, amplitude: 0.1, shape_exponent: 3 }],
            },
            grid: GridSpec { n: 385, margin: 0.0 },
            solver: SolverSpec { dt: 1e-3, t_end: 1.0, mode: Some(Mode::Plain), eps: None },
            outputs: base_outputs,
            seed: 3,
            holder_s: 0.5,
        }),
        "ellipse_2_1" => Some(Scenario {
            name: "ellipse_2_1".into(),
            initial: InitialData::Ellipse { a: 2.0, b: 1.0 },
            grid: GridSpec { n: 0, margin: 0.0 },
            solver: SolverSpec { dt: 1e-3, t_end: 10.0, mode: None, eps: None },
            outputs: base_outputs,
            seed: 1,
            holder_s: 0.5,
        }),
        "disc" => Some(Scenario {
            name: "disc".into(),
            initial: InitialData::Ellipse { a: 1.0, b: 1.0 },
            grid: GridSpec { n: 0, margin: 0.0 },
            solver: SolverSpec { dt: 1e-3, t_end: 6.0, mode: None, eps: None },
            outputs: base_outputs,
            seed: 1,
            holder_s: 0.5,
        }),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["small_bump", "two_bump", "eps_sweep", "ellipse_2_1", "disc"]
}
